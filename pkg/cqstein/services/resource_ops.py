"""
Resource-theoretic constructions on c-q channels.
Robustness decompositions, D_max smoothing of channel powers, test-and-prepare
superchannels with their resource deficit, and gentle-measurement checks.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from cqstein.core.config import settings
from cqstein.core.errors import (
    BracketTooWide,
    DimensionMismatch,
    InfiniteRobustness,
    PreconditionViolated,
    ShapeMismatch,
)
from cqstein.core.linalg import eigh_hermitian, from_eig, hermitize, psd_sqrt, trace_norm
from cqstein.services.channel_divergences import (
    DivergenceKind,
    channel_divergence,
    diamond_distance,
    divergence_to_set,
)
from cqstein.services.divergences import TestResult, dmax_operator, hypothesis_test
from cqstein.services.free_sets import (
    FreeSetDescriptor,
    SetKind,
    log_robustness,
    membership,
)
from cqstein.services.qstate import (
    CqChannel,
    DensityMatrix,
    block_pinching_of,
    check_dimension,
    compose_classical,
    spectrum_size,
)

logger = logging.getLogger(__name__)


# ============== Robustness decomposition ==============

@dataclass(frozen=True, eq=False)
class RobustnessDecomposition:
    """(E + r E') / (1 + r) = F with F free."""
    free_channel: CqChannel
    complement: CqChannel
    r: float

    @property
    def s(self) -> float:
        """log(1 + r), the log robustness the decomposition realizes."""
        return math.log1p(self.r)

    def reconstruction_residual(self, e: CqChannel) -> float:
        mixed = (e.outputs + self.r * self.complement.outputs) / (1.0 + self.r)
        return float(np.max(np.abs(mixed - self.free_channel.outputs), initial=0.0))


def _repair_state(m: np.ndarray) -> np.ndarray:
    w, v = eigh_hermitian(m)
    w = np.clip(w, 0.0, None)
    out = from_eig(w, v)
    return out / np.real(np.trace(out))


def robustness_decompose(
    e: CqChannel,
    s: FreeSetDescriptor,
    *,
    bracket_tol: float = 1e-8,
    zero_tol: float = 1e-12,
) -> RobustnessDecomposition:
    """Split E against the D_max witness F: E' = (lambda F - E) / (lambda - 1)."""
    rob = log_robustness(e, s)
    if math.isinf(rob.value):
        raise InfiniteRobustness("E is not dominated by any free channel")
    if rob.bracket_width > bracket_tol:
        raise BracketTooWide(
            f"log robustness is only bracketed to [{rob.lower:.12g}, {rob.upper:.12g}]",
            {"lower": rob.lower, "upper": rob.upper},
        )
    lam = math.exp(rob.value)
    r = lam - 1.0
    f = rob.witness
    if r <= zero_tol:
        return RobustnessDecomposition(f, f, 0.0)
    complement = np.stack([
        _repair_state(hermitize((lam * f.outputs[x] - e.outputs[x]) / r))
        for x in range(e.alphabet_size)
    ])
    return RobustnessDecomposition(f, CqChannel(complement, e.alphabet_dims, e.out_dims), r)


# ============== Smoothing ==============

@dataclass(frozen=True, eq=False)
class SmoothedChannel:
    """
    E~_km of the smoothing construction together with the projectors it cut out.
    `dmax_value` is D_max(E~_km || F_m^{(x) k}); `dmax_bound` is kmR + log |spec J(F_m^{(x) k})|.
    """
    channel: CqChannel
    projectors: Tuple[np.ndarray, ...]
    dmax_bound: float
    dmax_value: float
    spectrum: int
    R: float
    k: int
    m: int

    @property
    def copies(self) -> int:
        return self.k * self.m


def _infer_copies(e: CqChannel, f_m: CqChannel) -> int:
    if e.alphabet_size == 1:
        return max(1, f_m.n_factors)
    m = round(math.log(f_m.alphabet_size) / math.log(e.alphabet_size))
    if e.alphabet_size ** m != f_m.alphabet_size or e.out_dim ** m != f_m.out_dim:
        raise DimensionMismatch("the free channel is not on an integer number of copies of E")
    return m


def _strict_positive_projector(a: np.ndarray) -> np.ndarray:
    w, v = eigh_hermitian(a)
    scale = float(np.max(np.abs(w), initial=0.0))
    cols = v[:, w > settings.ZERO_EIG_REL_TOL * scale]
    return cols @ cols.conj().T


def smooth_channel(
    e: CqChannel,
    f_m: CqChannel,
    R: float,
    k: int,
    *,
    m: Optional[int] = None,
    compensator: Optional[CqChannel] = None,
) -> SmoothedChannel:
    """
    Cut the part of E^{(x) km} that is not dominated by e^{kmR} F_m^{(x) k}.

    P_k projects onto the strictly positive part of E_k(J(E^{km})) - e^{kmR} J(F_m^k)
    with E_k the pinching of J(F_m^k); the cut weight is refilled with the compensator
    channel (F_m^{(x) k} unless given) so the result stays trace preserving.
    """
    if R <= 0:
        raise PreconditionViolated(f"R must be positive, got {R}")
    m = _infer_copies(e, f_m) if m is None else m
    km = k * m
    check_dimension((e.alphabet_size * e.out_dim) ** km, what="Choi")

    e_power = e.tensor_power(km)
    f_power = f_m.tensor_power(k)
    if e_power.shape != f_power.shape:
        raise ShapeMismatch(f"E^{km} has shape {e_power.shape}, F_m^{k} has {f_power.shape}")
    comp = f_power if compensator is None else compensator.tensor_power(km)
    if comp.shape != e_power.shape:
        raise ShapeMismatch("compensator shape does not match E^{km}")

    # Normalization 1/|X|^{km} of both Choi states cancels in the projector.
    pinch = block_pinching_of(f_power.outputs)
    pinched = pinch.apply_blocks(e_power.outputs)
    threshold = math.exp(km * R)
    projectors = []
    smoothed = np.empty_like(e_power.outputs)
    for x in range(e_power.alphabet_size):
        p = _strict_positive_projector(pinched[x] - threshold * f_power.outputs[x])
        keep = np.eye(e_power.out_dim) - p
        kept = keep @ e_power.outputs[x] @ keep
        lost = 1.0 - float(np.real(np.trace(kept)))
        smoothed[x] = hermitize(kept + lost * comp.outputs[x])
        projectors.append(p)

    channel = CqChannel(smoothed, e_power.alphabet_dims, e_power.out_dims)
    spec = spectrum_size(f_power.outputs)
    bound = km * R + math.log(spec)
    value = channel_divergence(DivergenceKind.DMAX, channel, f_power).value
    if value > bound + 1e-8:
        logger.warning(f"smoothed D_max {value:.12g} exceeds kmR + log|spec| = {bound:.12g}")
    logger.info(f"smoothed k={k}, m={m}: D_max={value:.6g}, bound={bound:.6g}, |spec|={spec}")
    return SmoothedChannel(channel, tuple(projectors), bound, value, spec, R, k, m)


def cut_weight_bound(smoothed: SmoothedChannel, f_m: CqChannel) -> List[float]:
    """Tr[P_k^(x) F_m^{(x) k}(x)] per letter; each is at most e^{-kmR}."""
    f_power = f_m.tensor_power(smoothed.k)
    return [
        float(np.real(np.trace(p @ f_power.outputs[x])))
        for x, p in enumerate(smoothed.projectors)
    ]


# ============== Superchannels ==============

@dataclass(frozen=True, eq=False)
class SuperchannelRecipe:
    """
    Theta(N) = Tr[Lambda N(probe)] pass + (1 - Tr[Lambda N(probe)]) fail.
    `decomposition_s` is set when pass/fail come from a robustness decomposition.
    """
    test_operator: np.ndarray
    probe_input: int
    channel_if_pass: CqChannel
    channel_if_fail: CqChannel
    decomposition_s: Optional[float] = None

    def acceptance(self, n: CqChannel) -> float:
        if n.out_dim != self.test_operator.shape[0] or not 0 <= self.probe_input < n.alphabet_size:
            raise ShapeMismatch(
                f"channel of shape {n.shape} does not fit test of dimension "
                f"{self.test_operator.shape[0]} and probe {self.probe_input}"
            )
        return float(np.real(np.sum(self.test_operator.T * n.outputs[self.probe_input])))

    def apply(self, n: CqChannel) -> CqChannel:
        t = self.acceptance(n)
        out = t * self.channel_if_pass.outputs + (1.0 - t) * self.channel_if_fail.outputs
        return CqChannel(out, self.channel_if_pass.alphabet_dims, self.channel_if_pass.out_dims)


@dataclass(frozen=True, eq=False)
class PreprocessingSuperchannel:
    """Theta(N) = N o N_pre for a deterministic classical relabelling."""
    relabel: Tuple[int, ...]

    def apply(self, n: CqChannel) -> CqChannel:
        return compose_classical(n, self.relabel)


Superchannel = Union[SuperchannelRecipe, PreprocessingSuperchannel]


def build_superchannel(
    test_operator: Union[np.ndarray, TestResult],
    probe: int,
    pass_channel: CqChannel,
    fail_channel: CqChannel,
    decomposition_s: Optional[float] = None,
) -> SuperchannelRecipe:
    lam = test_operator.optimal_test if isinstance(test_operator, TestResult) else test_operator
    lam = np.asarray(lam, dtype=complex)
    if lam.ndim != 2 or lam.shape[0] != lam.shape[1]:
        raise ShapeMismatch(f"test operator must be square, got {lam.shape}")
    if float(np.max(np.abs(lam - lam.conj().T), initial=0.0)) > settings.HERMITIAN_TOL:
        raise ShapeMismatch("test operator is not Hermitian")
    w = eigh_hermitian(lam)[0]
    if w[0] < -settings.PSD_TOL or w[-1] > 1.0 + settings.PSD_TOL:
        raise ShapeMismatch(f"test operator eigenvalues leave [0, 1]: [{w[0]:.3e}, {w[-1]:.3e}]")
    if pass_channel.shape != fail_channel.shape:
        raise ShapeMismatch(f"pass/fail channel shapes differ: {pass_channel.shape} vs {fail_channel.shape}")
    if probe < 0:
        raise ShapeMismatch(f"probe letter must be nonnegative, got {probe}")
    return SuperchannelRecipe(hermitize(lam), int(probe), pass_channel, fail_channel, decomposition_s)


def apply_superchannel(theta: Superchannel, n: CqChannel) -> CqChannel:
    return theta.apply(n)


def all_ones_preprocessing(n: int) -> PreprocessingSuperchannel:
    """N_pre(|x><x|) = |1...1><1...1| on n binary letters."""
    return PreprocessingSuperchannel(tuple([2 ** n - 1] * (2 ** n)))


@dataclass(frozen=True)
class DeficitReport:
    deficit: float
    bound: Optional[float]
    t: Optional[float]
    s: Optional[float]


def arng_deficit(theta: Superchannel, f: CqChannel, s: FreeSetDescriptor) -> DeficitReport:
    """
    D_max(Theta(F) || S) for a free F, with log((1 - t)/(1 - e^{-s})) as its bound
    when Theta comes from a robustness decomposition. At s = 0 the bound is +inf.
    """
    deficit = log_robustness(apply_superchannel(theta, f), s).value
    if not isinstance(theta, SuperchannelRecipe) or theta.decomposition_s is None:
        return DeficitReport(deficit, None, None, None)
    t = theta.acceptance(f)
    s_n = theta.decomposition_s
    if math.exp(-s_n) < t:
        raise PreconditionViolated(
            f"e^-s = {math.exp(-s_n):.6g} is below t = {t:.6g}", {"t": t, "s": s_n}
        )
    if s_n == 0.0:
        # 1 - e^-s = 0
        return DeficitReport(deficit, math.inf, t, s_n)
    bound = math.log((1.0 - t) / (-math.expm1(-s_n)))
    return DeficitReport(deficit, bound, t, s_n)


# ============== Gentle measurement ==============

def gentle_measurement_check(rho: DensityMatrix, lambda_op: np.ndarray) -> Tuple[float, float]:
    """(1/2)||rho - sqrt(L) rho sqrt(L)||_1 and sqrt(eps) + eps/2 with eps = 1 - Tr(L rho)."""
    lam = np.asarray(lambda_op, dtype=complex)
    eps = max(0.0, 1.0 - float(np.real(np.trace(lam @ rho.matrix))))
    root = psd_sqrt(lam)
    lhs = 0.5 * trace_norm(rho.matrix - root @ rho.matrix @ root)
    return lhs, math.sqrt(eps) + eps / 2.0


# ============== D_max over sums ==============

def dmax_sum_check(rho1: np.ndarray, rho2: np.ndarray, sigma: DensityMatrix) -> Tuple[float, float]:
    """(D_max(rho1 + rho2 || sigma), log(e^{D_max(rho1||sigma)} + e^{D_max(rho2||sigma)}))."""
    lhs = dmax_operator(np.asarray(rho1) + np.asarray(rho2), sigma)
    a, b = dmax_operator(rho1, sigma), dmax_operator(rho2, sigma)
    rhs = max(a, b) + math.log1p(math.exp(-abs(a - b))) if math.isfinite(a) and math.isfinite(b) else max(a, b)
    return lhs, rhs


# ============== Conversion pipeline ==============

@dataclass(frozen=True)
class ConversionRow:
    n: int
    target_copies: int
    probe: Tuple[int, ...]
    type1_error: float
    t: float
    s: float
    deficit: float
    deficit_bound: Optional[float]
    diamond_error: float
    diamond_bound: float
    details: dict = field(default_factory=dict)
    recipe: Optional[SuperchannelRecipe] = field(default=None, repr=False, compare=False)


def _best_probe(e_n: CqChannel, s_n: FreeSetDescriptor, eps: float) -> Tuple[int, TestResult, CqChannel]:
    """Classical probe maximizing D_H against the free set, its test and the free channel tested."""
    if s_n.kind == SetKind.SINGLETON_IID:
        f_n = s_n.channel
    else:
        f_n = divergence_to_set(DivergenceKind.UMEGAKI, e_n, s_n).witness
    best = None
    for x in range(e_n.alphabet_size):
        result = hypothesis_test(e_n.output(x), f_n.output(x), eps)
        if best is None or result.value > best[1].value:
            best = (x, result)
    return best[0], best[1], f_n


def conversion_trace(
    e1: CqChannel,
    e2: CqChannel,
    s1: FreeSetDescriptor,
    s2: FreeSetDescriptor,
    rate: float,
    eps: float,
    n_max: int,
) -> List[ConversionRow]:
    """
    Finite-n trace of the test-and-prepare conversion E1^{(x) n} -> E2^{(x) ceil(rate n)}:
    optimal classical probe and test, robustness decomposition of the target, the
    superchannel, its resource deficit on a free input and the diamond error.
    """
    rows = []
    for n in range(1, n_max + 1):
        m = max(1, math.ceil(rate * n))
        e1_n = e1.tensor_power(n)
        s1_n = s1.with_copies(n)
        target = e2.tensor_power(m)
        s2_m = s2.with_copies(m)

        probe, test, f_n = _best_probe(e1_n, s1_n, eps)
        decomposition = robustness_decompose(target, s2_m)
        theta = build_superchannel(test, probe, target, decomposition.complement, decomposition.s)
        type1 = 1.0 - theta.acceptance(e1_n)
        t = theta.acceptance(f_n)

        if math.exp(-decomposition.s) >= t:
            report = arng_deficit(theta, f_n, s2_m)
            deficit, bound = report.deficit, report.bound
        else:
            logger.warning(f"n={n}: e^-s < t, deficit bound not asserted")
            deficit = log_robustness(theta.apply(f_n), s2_m).value
            bound = None

        diamond = diamond_distance(theta.apply(e1_n), target)
        rows.append(ConversionRow(
            n, m, e1_n.string(probe), type1, t, decomposition.s, deficit, bound,
            diamond, 2.0 * type1,
            {"membership": membership(decomposition.free_channel, s2_m)[1]},
            theta,
        ))
        logger.info(f"conversion n={n}: t={t:.6g}, s={decomposition.s:.6g}, deficit={deficit:.6g}")
    return rows

