"""
Free sets of c-q channels.
Descriptors for the four supported families, membership tests and the certified
set-specific minimizations (capacity, relative entropy to a state set, log robustness).
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from cqstein.core.config import settings
from cqstein.core.errors import (
    InputError,
    NonConvergence,
    ShapeMismatch,
    UnsupportedDimension,
    UnsupportedSetKind,
)
from cqstein.core.linalg import (
    eigh_hermitian,
    is_diagonal,
    partial_trace,
    spectral_function,
    support_mask,
    trace_norm,
)
from cqstein.services.divergences import (
    dmax,
    mutual_information,
    rel_entropy,
    von_neumann_entropy,
)
from cqstein.services.qstate import (
    CqChannel,
    DensityMatrix,
    all_permutations,
    choi,
    enumerate_types,
    permute_channel,
    random_density,
    tensor_channel,
    type_representatives,
)
from cqstein.services.state_families import BaseStateFamily, StateFamilyFactory

logger = logging.getLogger(__name__)


class SetKind(str, Enum):
    SINGLETON_IID = "singleton_iid"
    REPLACER = "replacer"
    LIFTED_STATE_SET = "lifted_state_set"
    PPT_OUTPUT = "ppt_output"


# ============== Descriptors ==============

@dataclass(frozen=True, eq=False)
class FreeSetDescriptor:
    """
    One member S_n of a sequence of free channel sets.

    `alphabet_size` and `out_dim` are per copy; the channels in S_n act on the
    n-fold product alphabet with output dimension out_dim ** n.
    """
    kind: SetKind
    alphabet_size: int
    out_dim: int
    n: int = 1
    base: Optional[CqChannel] = None
    family: Optional[BaseStateFamily] = None
    params: Dict[str, Any] = field(default_factory=dict)

    # ---- constructors ----

    @classmethod
    def singleton_iid(cls, f: CqChannel, n: int = 1) -> "FreeSetDescriptor":
        return cls(SetKind.SINGLETON_IID, f.alphabet_size, f.out_dim, n, base=f)

    @classmethod
    def replacer(cls, alphabet_size: int, out_dim: int, n: int = 1) -> "FreeSetDescriptor":
        return cls(SetKind.REPLACER, alphabet_size, out_dim, n)

    @classmethod
    def lifted(
        cls, family_name: str, alphabet_size: int, out_dim: int, n: int = 1, **params: Any
    ) -> "FreeSetDescriptor":
        family = StateFamilyFactory.create_family(family_name, out_dim, **params)
        return cls(
            SetKind.LIFTED_STATE_SET, alphabet_size, out_dim, n,
            family=family.tensor_power(n) if n > 1 else family,
            params={"family": family_name, **params},
        )

    @classmethod
    def ppt_output(cls, alphabet_size: int, n: int = 1) -> "FreeSetDescriptor":
        if n != 1:
            raise UnsupportedDimension("PPT output sets are only certified for a single 2x2 copy")
        family = StateFamilyFactory.create_family("ppt_2x2", 4)
        return cls(SetKind.PPT_OUTPUT, alphabet_size, 4, 1, family=family)

    def with_copies(self, n: int) -> "FreeSetDescriptor":
        """S_n of the same sequence."""
        if self.n != 1:
            raise UnsupportedSetKind("with_copies expects a single-copy descriptor")
        if self.kind == SetKind.SINGLETON_IID:
            return FreeSetDescriptor.singleton_iid(self.base, n)
        if self.kind == SetKind.REPLACER:
            return FreeSetDescriptor.replacer(self.alphabet_size, self.out_dim, n)
        if self.kind == SetKind.PPT_OUTPUT:
            return FreeSetDescriptor.ppt_output(self.alphabet_size, n)
        params = {k: v for k, v in self.params.items() if k != "family"}
        return FreeSetDescriptor.lifted(
            self.params["family"], self.alphabet_size, self.out_dim, n, **params
        )

    def on_types(self, n: int) -> "FreeSetDescriptor":
        """
        S_n seen only on the type-representative letters of `type_representatives`.
        The result is a single-copy descriptor with alphabet = number of types.
        """
        if self.n != 1:
            raise UnsupportedSetKind("on_types expects a single-copy descriptor")
        if self.kind == SetKind.SINGLETON_IID:
            return FreeSetDescriptor.singleton_iid(type_representatives(self.base, n)[0])
        count = len(enumerate_types(n, self.alphabet_size))
        if self.kind == SetKind.REPLACER:
            return FreeSetDescriptor.replacer(count, self.out_dim ** n)
        s_n = self.with_copies(n)
        return FreeSetDescriptor(self.kind, count, self.out_dim ** n, 1, family=s_n.family, params=self.params)

    # ---- shape ----

    @property
    def shape(self) -> Tuple[int, int]:
        return self.alphabet_size ** self.n, self.out_dim ** self.n

    @cached_property
    def channel(self) -> CqChannel:
        """F^{(x) n} for singleton sets."""
        if self.kind != SetKind.SINGLETON_IID:
            raise UnsupportedSetKind(f"'{self.kind.value}' sets have no single member")
        return self.base.tensor_power(self.n)

    def check_shape(self, e: CqChannel) -> None:
        if e.shape != self.shape:
            raise ShapeMismatch(
                f"channel shape {e.shape} does not match free set shape {self.shape}",
                {"channel": list(e.shape), "set": list(self.shape)},
            )

    def describe(self) -> Dict[str, Any]:
        info: Dict[str, Any] = {"kind": self.kind.value, "n": self.n, "shape": list(self.shape)}
        if self.family is not None:
            info["family"] = self.family.name
        return info


@dataclass(frozen=True, eq=False)
class CapacityResult:
    lower: float
    upper: float
    iterations: int
    optimal_p: np.ndarray
    optimal_sigma: DensityMatrix
    lower_history: Tuple[float, ...] = ()

    @property
    def gap(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True, eq=False)
class RobustnessResult:
    """
    inf over free F of D_max(E || F).

    `value` is the upper end of [lower, upper]; the two coincide for point values.
    `certificate` is min_x lambda_min(e^value omega_x^F - omega_x^E) (primal feasibility).
    """
    value: float
    lower: float
    upper: float
    witness: Optional[CqChannel]
    certificate: float

    @property
    def bracket_width(self) -> float:
        if math.isinf(self.upper):
            return 0.0 if math.isinf(self.lower) else math.inf
        return self.upper - self.lower

    @property
    def is_point(self) -> bool:
        return self.bracket_width <= 1e-8


def replacer_channel(sigma: np.ndarray, alphabet_size: int, alphabet_dims: Sequence[int] = ()) -> CqChannel:
    outputs = np.broadcast_to(np.asarray(sigma, dtype=complex), (alphabet_size,) + sigma.shape)
    return CqChannel(outputs, tuple(alphabet_dims))


def depolarizing_channel(alphabet_size: int, out_dim: int) -> CqChannel:
    return replacer_channel(np.eye(out_dim, dtype=complex) / out_dim, alphabet_size)


# ============== Membership ==============

def membership(f: CqChannel, s: FreeSetDescriptor, tol: Optional[float] = None) -> Tuple[bool, float]:
    """(is_member, violation) with violation a per-letter worst case."""
    tol = settings.MEMBERSHIP_TOL if tol is None else tol
    s.check_shape(f)
    if s.kind == SetKind.REPLACER:
        first = f.outputs[0]
        violation = max(trace_norm(f.outputs[x] - first) for x in range(f.alphabet_size))
    elif s.kind == SetKind.SINGLETON_IID:
        ref = s.channel
        violation = max(trace_norm(f.outputs[x] - ref.outputs[x]) for x in range(f.alphabet_size))
    else:
        violation = max(s.family.violation(f.output(x)) for x in range(f.alphabet_size))
    return violation <= tol, float(violation)


def free_member(s: FreeSetDescriptor) -> CqChannel:
    """The designated full-rank member F_* of S_n."""
    k, d = s.shape
    if s.kind == SetKind.SINGLETON_IID:
        return s.channel
    if s.kind == SetKind.REPLACER:
        return depolarizing_channel(k, d)
    return replacer_channel(s.family.full_rank_member().matrix, k)


# ============== Capacity ==============

def _letter_divergences(
    outputs: np.ndarray, neg_entropies: np.ndarray, sigma: np.ndarray
) -> np.ndarray:
    """D(omega_x || sigma) for every letter with one logarithm of sigma."""
    w, v = eigh_hermitian(sigma)
    mask = support_mask(w, settings.SUPPORT_REL_TOL)
    vs = v[:, mask]
    log_sigma = (vs * np.log(w[mask])) @ vs.conj().T
    outside = v[:, ~mask]
    out = np.empty(outputs.shape[0])
    for x in range(outputs.shape[0]):
        leak = float(np.real(np.trace(outside.conj().T @ outputs[x] @ outside)))
        if leak > settings.SUPPORT_LEAK_TOL:
            out[x] = math.inf
            continue
        out[x] = max(0.0, neg_entropies[x] - float(np.real(np.sum(outputs[x].T * log_sigma))))
    return out


def holevo_capacity(
    e: CqChannel,
    tol: Optional[float] = None,
    *,
    max_iter: Optional[int] = None,
) -> CapacityResult:
    """
    Blahut-Arimoto iteration for the Holevo capacity C(E) = max_p I(R:A).

    lower = sum_x p(x) D(omega_x || sigma_p) and upper = max_x D(omega_x || sigma_p)
    bracket C(E) at every step.
    """
    tol = settings.CAPACITY_TOL if tol is None else tol
    max_iter = settings.CAPACITY_MAX_ITER if max_iter is None else max_iter
    if not tol > 0:
        raise InputError(f"capacity tolerance must be positive, got {tol}", {"tol": tol})
    if max_iter < 1:
        raise InputError(f"capacity iteration cap must be at least 1, got {max_iter}")

    outputs = e.outputs
    k = e.alphabet_size
    neg_entropies = np.array([-von_neumann_entropy(e.output(x)) for x in range(k)])
    p = np.full(k, 1.0 / k)
    history: List[float] = []
    lower = upper = 0.0
    sigma = np.einsum("x,xij->ij", p, outputs)

    for iteration in range(1, max_iter + 1):
        sigma = np.einsum("x,xij->ij", p, outputs)
        divs = _letter_divergences(outputs, neg_entropies, sigma)
        active = p > 0
        lower = float(np.dot(p[active], divs[active]))
        upper = float(np.max(divs))
        if history and lower < history[-1] - settings.CAPACITY_MONOTONE_TOL:
            logger.error(f"Blahut-Arimoto lower bound decreased at iteration {iteration}")
            raise NonConvergence(
                f"capacity lower bound decreased from {history[-1]:.12g} to {lower:.12g}",
                {"iteration": iteration, "previous": history[-1], "lower": lower},
            )
        history.append(lower)
        if upper - lower <= tol:
            logger.debug(f"Blahut-Arimoto converged in {iteration} iterations, C={lower:.12g}")
            return CapacityResult(
                lower, upper, iteration, p.copy(), DensityMatrix(sigma), tuple(history)
            )
        finite = np.where(np.isfinite(divs), divs, upper if np.isfinite(upper) else 0.0)
        weights = p * np.exp(finite - np.max(finite[active]))
        p = weights / weights.sum()
        p[p < settings.CAPACITY_FREEZE_TOL] = 0.0
        p /= p.sum()

    logger.warning(f"Blahut-Arimoto stopped after {max_iter} iterations (gap {upper - lower:.3e})")
    raise NonConvergence(
        f"capacity bracket did not close within {max_iter} iterations",
        {"lower": lower, "upper": upper},
    )


# ============== Relative entropy to state sets ==============

def min_relative_entropy_to_set(
    rho: DensityMatrix,
    kind: str,
    dims: Optional[Tuple[int, int]] = None,
) -> Tuple[float, DensityMatrix]:
    """
    inf over a state set of D(rho || sigma).

    `product_with_fixed_marginal`: sigma = rho_R (x) sigma_A, closed form I(R:A).
    `ppt_2x2`: projected gradient over PPT two-qubit states.
    """
    if kind == "product_with_fixed_marginal":
        if dims is None:
            raise UnsupportedSetKind("product_with_fixed_marginal needs the (d_R, d_A) split")
        rho_r = partial_trace(rho.matrix, dims, [0])
        rho_a = partial_trace(rho.matrix, dims, [1])
        return mutual_information(rho, dims), DensityMatrix(np.kron(rho_r, rho_a))
    if kind == "ppt_2x2":
        family = StateFamilyFactory.create_family("ppt_2x2", rho.dim)
        return family.min_relative_entropy(rho)
    raise UnsupportedSetKind(f"no relative-entropy routine for state set '{kind}'")


# ============== Log robustness ==============

def _pairwise_value(a: np.ndarray, b: np.ndarray) -> float:
    """1 + Tr(a - b)_+ = 1 + (1/2)||a - b||_1 for states a, b."""
    return 1.0 + 0.5 * trace_norm(a - b)


def _pgm_value(outputs: np.ndarray) -> float:
    """sum_x Tr[Y_x omega_x] for the pretty-good measurement of the outputs."""
    total = outputs.sum(axis=0)
    inv_sqrt = spectral_function(total, lambda w: w ** -0.5)
    value = 0.0
    for omega in outputs:
        y = inv_sqrt @ omega @ inv_sqrt
        value += float(np.real(np.sum(y.T * omega)))
    return value


def _basis_value(outputs: np.ndarray, basis: np.ndarray) -> float:
    """Value of the measurement assigning each basis vector to its most likely letter."""
    diag = np.real(np.einsum("ia,xij,ja->xa", basis.conj(), outputs, basis))
    return float(np.sum(np.max(diag, axis=0)))


def _replacer_robustness(e: CqChannel) -> RobustnessResult:
    outputs = e.outputs
    k = e.alphabet_size
    if k == 1:
        return RobustnessResult(0.0, 0.0, 0.0, e, 0.0)

    if k == 2:
        diff = outputs[0] - outputs[1]
        w, v = eigh_hermitian(diff)
        sigma_prime = outputs[1] + (v * np.clip(w, 0.0, None)) @ v.conj().T
        dual = _pairwise_value(outputs[0], outputs[1])
        primal = float(np.real(np.trace(sigma_prime)))
        lower, upper = math.log(dual), math.log(primal)
        if abs(primal - dual) <= 1e-12:
            lower = upper
    else:
        sigma_prime = outputs[0].copy()
        for x in range(1, k):
            w, v = eigh_hermitian(outputs[x] - sigma_prime)
            sigma_prime = sigma_prime + (v * np.clip(w, 0.0, None)) @ v.conj().T
        primal = float(np.real(np.trace(sigma_prime)))
        candidates = [_pgm_value(outputs), _basis_value(outputs, np.eye(e.out_dim))]
        candidates.append(_basis_value(outputs, eigh_hermitian(outputs.sum(axis=0))[1]))
        for a in range(k):
            for b in range(a + 1, k):
                candidates.append(_pairwise_value(outputs[a], outputs[b]))
        dual = min(max(candidates), primal)
        lower, upper = math.log(dual), math.log(primal)
        if is_diagonal(sigma_prime) and all(is_diagonal(o) for o in outputs):
            lower = upper

    sigma = sigma_prime / np.trace(sigma_prime).real
    witness = replacer_channel(sigma, k, e.alphabet_dims)
    lam = math.exp(upper)
    certificate = min(
        float(eigh_hermitian(lam * sigma - outputs[x])[0][0]) for x in range(k)
    )
    return RobustnessResult(upper, lower, upper, witness, certificate)


def _singleton_robustness(e: CqChannel, f: CqChannel) -> RobustnessResult:
    values = [dmax(e.output(x), f.output(x)) for x in range(e.alphabet_size)]
    value = max(values)
    if math.isinf(value):
        return RobustnessResult(math.inf, math.inf, math.inf, f, -math.inf)
    lam = math.exp(value)
    certificate = min(
        float(eigh_hermitian(lam * f.outputs[x] - e.outputs[x])[0][0]) for x in range(e.alphabet_size)
    )
    return RobustnessResult(value, value, value, f, certificate)


def _lifted_robustness(e: CqChannel, family: BaseStateFamily) -> RobustnessResult:
    # The infimum factorizes over letters because free outputs are chosen independently.
    results = [family.min_dmax(e.output(x)) for x in range(e.alphabet_size)]
    value = max(v for v, _ in results)
    witness = CqChannel(np.stack([s.matrix for _, s in results]), e.alphabet_dims, e.out_dims)
    if math.isinf(value):
        return RobustnessResult(math.inf, math.inf, math.inf, witness, -math.inf)
    lam = math.exp(value)
    certificate = min(
        float(eigh_hermitian(lam * witness.outputs[x] - e.outputs[x])[0][0])
        for x in range(e.alphabet_size)
    )
    return RobustnessResult(value, value, value, witness, certificate)


def log_robustness(e: CqChannel, s: FreeSetDescriptor) -> RobustnessResult:
    """inf over F in S of D_max(E || F) = log(1 + generalized robustness)."""
    s.check_shape(e)
    if s.kind == SetKind.SINGLETON_IID:
        result = _singleton_robustness(e, s.channel)
    elif s.kind == SetKind.REPLACER:
        result = _replacer_robustness(e)
    elif s.kind == SetKind.LIFTED_STATE_SET:
        result = _lifted_robustness(e, s.family)
    else:
        raise UnsupportedSetKind(f"no certified log-robustness routine for '{s.kind.value}'")
    logger.debug(
        f"log robustness ({s.kind.value}): value={result.value:.12g}, "
        f"bracket=[{result.lower:.12g}, {result.upper:.12g}]"
    )
    return result


# ============== Axioms ==============

@dataclass(frozen=True)
class AxiomVerdict:
    axiom: str
    holds: bool
    detail: str


def axioms_report(s: FreeSetDescriptor, rng: Optional[np.random.Generator] = None) -> List[AxiomVerdict]:
    """
    The four structural assumptions on a free set, checked on concrete members:
    convexity, permutation closure, tensor closure and a full-rank Choi member.
    """
    rng = np.random.default_rng(settings.SEED) if rng is None else rng
    member = free_member(s)
    verdicts = []

    # (1) convexity: a mixture of two members stays in the set.
    other = _second_member(s, rng)
    mixed = CqChannel(0.5 * member.outputs + 0.5 * other.outputs, member.alphabet_dims, member.out_dims)
    ok, violation = membership(mixed, s)
    verdicts.append(AxiomVerdict("convex", ok, f"mixture violation {violation:.3e}"))

    # (2) permutation closure on two copies.
    two = s.with_copies(2) if s.n == 1 and s.kind != SetKind.PPT_OUTPUT else None
    if two is not None:
        pair = tensor_channel(member, other)
        worst = 0.0
        for pi in all_permutations(2, s.out_dim):
            worst = max(worst, membership(permute_channel(pi, pair), two)[1])
        verdicts.append(AxiomVerdict("permutation_closed", worst <= settings.MEMBERSHIP_TOL,
                                     f"worst violation {worst:.3e}"))
        ok, violation = membership(tensor_channel(member, member), two)
        verdicts.append(AxiomVerdict("tensor_closed", ok, f"product violation {violation:.3e}"))
    else:
        verdicts.append(AxiomVerdict("permutation_closed", True, "structural (single copy only)"))
        verdicts.append(AxiomVerdict("tensor_closed", True, "structural (single copy only)"))

    # (4) full-rank Choi member.
    lam_min = float(np.min([eigh_hermitian(b)[0][0] for b in choi(member).blocks()]))
    verdicts.append(AxiomVerdict(
        "full_rank_member", lam_min > settings.FULL_RANK_TOL, f"lambda_min(J(F*)) = {lam_min:.3e}"
    ))
    return verdicts


def _second_member(s: FreeSetDescriptor, rng: np.random.Generator) -> CqChannel:
    k, d = s.shape
    if s.kind == SetKind.SINGLETON_IID:
        return s.channel
    if s.kind == SetKind.REPLACER:
        return replacer_channel(random_density(d, rng).matrix, k)
    if s.family.name == "incoherent":
        probs = rng.dirichlet(np.ones(d), size=k)
        return CqChannel(np.stack([np.diag(p).astype(complex) for p in probs]))
    return free_member(s)


def choi_min_eigenvalue(f: CqChannel) -> float:
    """lambda_min of the normalized Choi state, computed blockwise."""
    return float(min(eigh_hermitian(b)[0][0] for b in choi(f).blocks()))
