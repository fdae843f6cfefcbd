"""
State-level divergences.
Umegaki relative entropy, sandwiched Renyi, max-relative entropy, trace distance and
a certified solver for the hypothesis-testing relative entropy.

All logarithms are natural. +inf (math.inf) is returned whenever rho is not
supported on sigma; it is never replaced by a large finite number.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from cqstein.core.config import settings
from cqstein.core.errors import (
    AlphaOutOfRange,
    ConvergenceFailure,
    DimensionMismatch,
    EpsOutOfRange,
    SupportViolation,
)
from cqstein.core.linalg import (
    commutator_norm,
    eigh_hermitian,
    is_diagonal,
    partial_trace,
    spectral_function,
    support_mask,
    trace_norm,
)
from cqstein.services.qstate import DensityMatrix, PinchingMap, check_dimension, pinching_of, product_state

logger = logging.getLogger(__name__)

INF = math.inf


@dataclass(frozen=True, eq=False)
class TestResult:
    """Optimal hypothesis test for D_H^eps(rho || sigma)."""
    __test__ = False

    value: float
    optimal_test: np.ndarray
    dual_multiplier: float
    duality_gap: float
    type2_error: float
    eps: float

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)


# ============== Helpers ==============

def _check_pair(rho: DensityMatrix, sigma: DensityMatrix) -> None:
    if rho.dim != sigma.dim:
        raise DimensionMismatch(f"dimensions differ: {rho.dim} vs {sigma.dim}")


def _support(sigma: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    w, v = eigh_hermitian(sigma)
    mask = support_mask(w, settings.SUPPORT_REL_TOL)
    return w, v, mask


def support_leak(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Tr[(1 - Pi_sigma) rho]."""
    _, v, mask = _support(sigma.matrix)
    outside = v[:, ~mask]
    return float(np.real(np.trace(outside.conj().T @ rho.matrix @ outside)))


def is_supported(rho: DensityMatrix, sigma: DensityMatrix, tol: Optional[float] = None) -> bool:
    tol = settings.SUPPORT_LEAK_TOL if tol is None else tol
    return support_leak(rho, sigma) <= tol


def _xlogx(w: np.ndarray) -> float:
    w = w[w > 0]
    return float(np.sum(w * np.log(w)))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S(rho) = -Tr rho log rho, with 0 log 0 = 0."""
    return max(0.0, -_xlogx(rho.eigvalsh()))


def shannon_entropy(p: np.ndarray) -> float:
    return max(0.0, -_xlogx(np.asarray(p, dtype=float)))


def binary_entropy(x: float) -> float:
    """h(x) = -x log x - (1 - x) log(1 - x)."""
    return shannon_entropy(np.array([x, 1.0 - x]))


def mutual_information(rho_ra: DensityMatrix, dims: Tuple[int, int]) -> float:
    """I(R:A) = S(R) + S(A) - S(RA)."""
    rho_r = DensityMatrix(partial_trace(rho_ra.matrix, dims, [0]))
    rho_a = DensityMatrix(partial_trace(rho_ra.matrix, dims, [1]))
    return max(0.0, von_neumann_entropy(rho_r) + von_neumann_entropy(rho_a) - von_neumann_entropy(rho_ra))


def joint_diagonal(rho: DensityMatrix, sigma: DensityMatrix) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalue lists of two commuting states in a common eigenbasis."""
    if is_diagonal(rho.matrix) and is_diagonal(sigma.matrix):
        return np.real(np.diag(rho.matrix)).copy(), np.real(np.diag(sigma.matrix)).copy()
    _, v = eigh_hermitian(rho.matrix + math.sqrt(2.0) * sigma.matrix)
    p = np.real(np.einsum("ij,jk,ki->i", v.conj().T, rho.matrix, v))
    q = np.real(np.einsum("ij,jk,ki->i", v.conj().T, sigma.matrix, v))
    return np.clip(p, 0.0, None), np.clip(q, 0.0, None)


def commute(rho: DensityMatrix, sigma: DensityMatrix, tol: float = 1e-12) -> bool:
    return commutator_norm(rho.matrix, sigma.matrix) <= tol


# ============== Divergences ==============

def _classical_pair(rho: DensityMatrix, sigma: DensityMatrix) -> Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """(p, q, support mask of q) when both states are diagonal; None otherwise."""
    if not (is_diagonal(rho.matrix) and is_diagonal(sigma.matrix)):
        return None
    p = np.clip(np.real(np.diag(rho.matrix)), 0.0, None)
    q = np.clip(np.real(np.diag(sigma.matrix)), 0.0, None)
    return p, q, support_mask(q, settings.SUPPORT_REL_TOL)


def _classical_leak(p: np.ndarray, mask: np.ndarray) -> bool:
    return float(np.sum(p[~mask])) > settings.SUPPORT_LEAK_TOL


def rel_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Umegaki relative entropy D(rho || sigma) = Tr rho (log rho - log sigma)."""
    _check_pair(rho, sigma)
    classical = _classical_pair(rho, sigma)
    if classical is not None:
        p, q, mask = classical
        if _classical_leak(p, mask):
            return INF
        keep = mask & (p > 0)
        return max(0.0, float(np.sum(p[keep] * (np.log(p[keep]) - np.log(q[keep])))))
    if not is_supported(rho, sigma):
        return INF
    log_sigma = spectral_function(sigma.matrix, np.log)
    cross = float(np.real(np.trace(rho.matrix @ log_sigma)))
    return max(0.0, _xlogx(rho.eigvalsh()) - cross)


def sandwiched_renyi(rho: DensityMatrix, sigma: DensityMatrix, alpha: float) -> float:
    """Sandwiched Renyi divergence of order alpha > 1."""
    _check_pair(rho, sigma)
    if not alpha > 1.0:
        raise AlphaOutOfRange(f"alpha must exceed 1, got {alpha}")
    classical = _classical_pair(rho, sigma)
    if classical is not None:
        p, q, mask = classical
        if _classical_leak(p, mask):
            return INF
        keep = mask & (p > 0)
        q_sum = float(np.sum(p[keep] ** alpha * q[keep] ** (1.0 - alpha)))
        return max(0.0, math.log(q_sum) / (alpha - 1.0))
    if not is_supported(rho, sigma):
        return INF
    gamma = (1.0 - alpha) / (2.0 * alpha)
    s = spectral_function(sigma.matrix, lambda w: w ** gamma)
    w = np.clip(eigh_hermitian(s @ rho.matrix @ s)[0], 0.0, None)
    q = float(np.sum(w ** alpha))
    return max(0.0, math.log(q) / (alpha - 1.0))


def dmax(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Max-relative entropy log inf{lambda : rho <= lambda sigma}."""
    return max(0.0, dmax_operator(rho.matrix, sigma))


def dmax_operator(a: np.ndarray, sigma: DensityMatrix) -> float:
    """log inf{lambda : A <= lambda sigma} for any PSD operator A (may be negative)."""
    rho = DensityMatrix(np.asarray(a, dtype=complex))
    _check_pair(rho, sigma)
    classical = _classical_pair(rho, sigma)
    if classical is not None:
        p, q, mask = classical
        if _classical_leak(p, mask):
            return INF
        top = float(np.max(p[mask] / q[mask], initial=0.0))
        return math.log(top) if top > 0 else -INF
    if not is_supported(rho, sigma):
        return INF
    s = spectral_function(sigma.matrix, lambda w: w ** -0.5)
    top = float(eigh_hermitian(s @ rho.matrix @ s)[0][-1])
    return math.log(top) if top > 0 else -INF


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """(1/2) ||rho - sigma||_1."""
    _check_pair(rho, sigma)
    return min(1.0, 0.5 * trace_norm(rho.matrix - sigma.matrix))


def strong_converse_bound(rho: DensityMatrix, sigma: DensityMatrix, eps: float, alpha: float) -> float:
    """D~_alpha(rho || sigma) + alpha / (alpha - 1) * log(1 / (1 - eps))."""
    _check_eps(eps)
    return sandwiched_renyi(rho, sigma, alpha) + alpha / (alpha - 1.0) * math.log(1.0 / (1.0 - eps))


# ============== Hypothesis testing ==============

def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise EpsOutOfRange(f"eps must lie in (0, 1), got {eps}")


def _value_from_beta(beta: float) -> float:
    return INF if beta <= 0.0 else max(0.0, -math.log(beta))


def neyman_pearson(p: np.ndarray, q: np.ndarray, eps: float) -> TestResult:
    """
    Classical Neyman-Pearson test by likelihood-ratio sorting with randomization
    on the boundary outcome.
    """
    _check_eps(eps)
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    q = np.clip(np.asarray(q, dtype=float), 0.0, None)
    if p.shape != q.shape:
        raise DimensionMismatch("distributions have different lengths")
    target = 1.0 - eps

    off_support = q <= 0.0
    if float(np.sum(p[off_support])) >= target:
        m = off_support.astype(float)
        return TestResult(INF, np.diag(m).astype(complex), INF, 0.0, 0.0, eps)

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(q > 0, p / np.where(q > 0, q, 1.0), np.where(p > 0, INF, 0.0))
    order = np.argsort(-ratio, kind="stable")
    m = np.zeros_like(p)
    filled = 0.0
    boundary = order[-1]
    for i in order:
        if p[i] <= 0.0:
            continue
        if filled + p[i] >= target:
            m[i] = (target - filled) / p[i]
            boundary = i
            break
        m[i] = 1.0
        filled += p[i]
    beta = float(np.dot(m, q))
    mu = float(q[boundary] / p[boundary]) if p[boundary] > 0 else 0.0
    dual = mu * target - float(np.sum(np.clip(mu * p - q, 0.0, None)))
    gap = max(0.0, beta - dual)
    return TestResult(_value_from_beta(beta), np.diag(m).astype(complex), mu, gap, beta, eps)


class _DualSplitter:
    """Eigen-splitting of mu * rho - sigma used by the dual bisection."""

    def __init__(self, rho: np.ndarray, sigma: np.ndarray, zero_tol: float):
        self.rho = rho
        self.sigma = sigma
        self.zero_tol = zero_tol

    def positive_projector(self, mu: float) -> np.ndarray:
        w, v = eigh_hermitian(mu * self.rho - self.sigma)
        scale = float(np.max(np.abs(w), initial=0.0))
        cols = v[:, w > self.zero_tol * scale]
        return cols @ cols.conj().T

    def acceptance(self, projector: np.ndarray) -> float:
        return float(np.real(np.trace(projector @ self.rho)))

    def dual_value(self, mu: float, projector: np.ndarray, target: float) -> float:
        """g(mu) = mu (1 - eps) - Tr[(mu rho - sigma)_+]."""
        return mu * target - float(np.real(np.trace(projector @ (mu * self.rho - self.sigma))))


def hypothesis_test(
    rho: DensityMatrix,
    sigma: DensityMatrix,
    eps: float,
    *,
    max_iter: Optional[int] = None,
    gap_tol: Optional[float] = None,
) -> TestResult:
    """
    D_H^eps(rho || sigma) = -log min{Tr M sigma : 0 <= M <= 1, Tr M rho >= 1 - eps}.

    Maximizes the concave dual g(mu) = mu (1 - eps) - Tr[(mu rho - sigma)_+] by
    bisection on its supergradient (1 - eps) - Tr[P_+(mu) rho]. The returned test
    mixes the positive projectors at both ends of the final bracket so that the
    type-I constraint is met with equality.
    """
    _check_pair(rho, sigma)
    _check_eps(eps)
    max_iter = settings.BISECTION_MAX_ITER if max_iter is None else max_iter
    gap_tol = settings.DUALITY_GAP_TOL if gap_tol is None else gap_tol
    target = 1.0 - eps

    if is_diagonal(rho.matrix) and is_diagonal(sigma.matrix):
        return neyman_pearson(np.real(np.diag(rho.matrix)), np.real(np.diag(sigma.matrix)), eps)

    _, v, mask = _support(sigma.matrix)
    outside = v[:, ~mask]
    leak = float(np.real(np.trace(outside.conj().T @ rho.matrix @ outside)))
    if leak >= target:
        m = outside @ outside.conj().T
        return TestResult(INF, m, INF, 0.0, 0.0, eps)

    splitter = _DualSplitter(rho.matrix, sigma.matrix, settings.ZERO_EIG_REL_TOL)

    d_max = dmax(rho, sigma)
    hi = math.exp(d_max) + 1.0 if math.isfinite(d_max) and d_max < 700 else 1.0
    p_hi = splitter.positive_projector(hi)
    a_hi = splitter.acceptance(p_hi)
    expansions = 0
    while a_hi < target:
        expansions += 1
        if expansions > max_iter:
            raise ConvergenceFailure("could not bracket the optimal dual multiplier")
        hi *= 2.0
        p_hi = splitter.positive_projector(hi)
        a_hi = splitter.acceptance(p_hi)

    lo = 0.0
    p_lo = np.zeros_like(rho.matrix)
    a_lo = 0.0
    iterations = 0
    for iterations in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        p_mid = splitter.positive_projector(mid)
        a_mid = splitter.acceptance(p_mid)
        if a_mid >= target:
            hi, p_hi, a_hi = mid, p_mid, a_mid
        else:
            lo, p_lo, a_lo = mid, p_mid, a_mid
    else:
        logger.warning(f"Dual bisection hit the {max_iter}-iteration cap (bracket [{lo}, {hi}])")

    theta = 1.0 if a_hi - a_lo <= 0.0 else (target - a_lo) / (a_hi - a_lo)
    theta = min(1.0, max(0.0, theta))
    m = (1.0 - theta) * p_lo + theta * p_hi
    beta = float(np.real(np.trace(m @ sigma.matrix)))
    g_lo = splitter.dual_value(lo, p_lo, target)
    g_hi = splitter.dual_value(hi, p_hi, target)
    mu, dual = (hi, g_hi) if g_hi >= g_lo else (lo, g_lo)
    gap = max(0.0, beta - dual)
    logger.debug(
        f"D_H bisection: {iterations} iterations, mu={mu:.6g}, beta={beta:.6g}, gap={gap:.3e}"
    )
    if gap > gap_tol:
        raise ConvergenceFailure(
            f"duality gap {gap:.3e} exceeds {gap_tol:.1e}",
            {"gap": gap, "mu": mu, "beta": beta},
        )
    return TestResult(_value_from_beta(beta), m, mu, gap, beta, eps)


def certificate_checks(result: TestResult, rho: DensityMatrix, sigma: DensityMatrix) -> Tuple[float, float, float]:
    """(Tr M rho, min eigenvalue of M, max eigenvalue of M) for certificate checks."""
    w = eigh_hermitian(result.optimal_test)[0]
    acceptance = float(np.real(np.trace(result.optimal_test @ rho.matrix)))
    return acceptance, float(w[0]), float(w[-1])


# ============== Pinching bound ==============

def pinch(rho: DensityMatrix, sigma: DensityMatrix, pinching: Optional[PinchingMap] = None) -> DensityMatrix:
    """E_sigma(rho) = sum_i P_i rho P_i over the eigenprojectors of sigma; k E_sigma(rho) >= rho."""
    _check_pair(rho, sigma)
    pinching = pinching_of(sigma) if pinching is None else pinching
    return DensityMatrix(pinching.apply(rho.matrix))


def pinching_entropy_gap(rho: DensityMatrix, sigma: DensityMatrix) -> Tuple[float, float]:
    """
    (D(rho||sigma) - D(E(rho)||sigma), log k) with E the pinching of sigma;
    0 <= gap <= log k.
    """
    _check_pair(rho, sigma)
    if not is_supported(rho, sigma):
        raise SupportViolation("rho is not supported on sigma")
    pinching = pinching_of(sigma)
    pinched = pinch(rho, sigma, pinching)
    gap = rel_entropy(rho, sigma) - rel_entropy(pinched, sigma)
    return gap, math.log(pinching.k)


# ============== Stein sweep ==============

@dataclass(frozen=True)
class SteinRow:
    n: int
    dh_over_n: float
    d: float
    upper_bound: float


def _power_vector(p: np.ndarray, n: int) -> np.ndarray:
    out = np.ones(1)
    for _ in range(n):
        out = np.kron(out, p)
    return out


def stein_sweep(
    rho: DensityMatrix,
    sigma: DensityMatrix,
    eps: float,
    n_max: int,
    alpha: float,
) -> List[SteinRow]:
    """(1/n) D_H^eps(rho^n || sigma^n) against D(rho||sigma) and the strong-converse bound."""
    d = rel_entropy(rho, sigma)
    renyi = sandwiched_renyi(rho, sigma, alpha)
    rows = []
    classical = commute(rho, sigma)
    if classical:
        p, q = joint_diagonal(rho, sigma)
    for n in range(1, n_max + 1):
        if classical:
            result = neyman_pearson(_power_vector(p, n), _power_vector(q, n), eps)
        else:
            check_dimension(rho.dim ** n)
            result = hypothesis_test(product_state([rho] * n), product_state([sigma] * n), eps)
        bound = (n * renyi + alpha / (alpha - 1.0) * math.log(1.0 / (1.0 - eps))) / n
        rows.append(SteinRow(n, result.value / n, d, bound))
        logger.info(f"stein n={n}: D_H/n={result.value / n:.6g}, bound={bound:.6g}")
    return rows

