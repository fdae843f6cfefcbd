"""
Two-qubit PPT states (equal to the separable states at 2x2).

The relative entropy of entanglement is minimized by projected gradient descent
with Armijo backtracking. The feasible set {sigma >= 0, Tr sigma = 1, sigma^T_B >= 0}
is projected onto by Dykstra's alternating method.
"""
import logging
from typing import Optional, Tuple

import numpy as np

from cqstein.core.config import settings
from cqstein.core.errors import NonConvergence, UnsupportedDimension
from cqstein.core.linalg import (
    eigh_hermitian,
    hermitize,
    log_derivative_kernel,
    partial_transpose,
    positive_part,
    project_spectraplex,
)
from cqstein.services.divergences import rel_entropy
from cqstein.services.qstate import DensityMatrix
from cqstein.services.state_families.base import BaseStateFamily

logger = logging.getLogger(__name__)

DIMS = (2, 2)


def _pt(a: np.ndarray) -> np.ndarray:
    return partial_transpose(a, DIMS, 1)


def project_ppt_cone(a: np.ndarray) -> np.ndarray:
    """Frobenius projection onto {X : X^T_B >= 0}; T_B is an isometric involution."""
    return _pt(positive_part(_pt(a)))


def project_feasible(
    a: np.ndarray,
    *,
    max_iter: Optional[int] = None,
    tol: Optional[float] = None,
) -> np.ndarray:
    """Dykstra projection onto unit-trace PSD matrices with PSD partial transpose."""
    max_iter = settings.DYKSTRA_MAX_ITER if max_iter is None else max_iter
    tol = settings.DYKSTRA_TOL if tol is None else tol
    x = hermitize(a)
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    y = x
    for _ in range(max_iter):
        y = project_spectraplex(x + p)
        p = x + p - y
        x_next = project_ppt_cone(y + q)
        q = y + q - x_next
        moved = np.linalg.norm(x_next - x)
        x = x_next
        if moved <= tol and np.linalg.norm(y - x) <= tol:
            break
    return hermitize(y)


def ppt_violation(rho: np.ndarray) -> float:
    w = eigh_hermitian(_pt(rho))[0]
    return abs(min(0.0, float(w[0])))


class PptTwoQubitFamily(BaseStateFamily):
    """Separable states of two qubits, tested through the partial transpose."""

    name = "ppt_2x2"

    def __init__(self, dim: int = 4):
        if dim != 4:
            raise UnsupportedDimension(
                f"PPT coincides with separability only for 2x2 outputs, got dimension {dim}"
            )
        super().__init__(dim)

    def violation(self, rho: DensityMatrix) -> float:
        return ppt_violation(rho.matrix)

    def full_rank_member(self) -> DensityMatrix:
        return DensityMatrix(np.eye(4, dtype=complex) / 4)

    def tensor_power(self, n: int) -> "PptTwoQubitFamily":
        if n != 1:
            raise UnsupportedDimension("PPT stands in for SEP only on a single 2x2 copy")
        return self

    def min_relative_entropy(self, rho: DensityMatrix) -> Tuple[float, DensityMatrix]:
        value, sigma, _ = minimize_relative_entropy(rho)
        return value, sigma


def _objective(rho: DensityMatrix, sigma: np.ndarray) -> float:
    return rel_entropy(rho, DensityMatrix(sigma))


def _gradient(rho: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Gradient of -Tr rho log sigma: -(D log)(sigma)[rho]."""
    w, v = eigh_hermitian(sigma)
    floor = max(float(w[-1]) * 1e-14, 1e-300)
    kernel = log_derivative_kernel(w, floor)
    outside = w <= settings.SUPPORT_REL_TOL * float(w[-1])
    kernel[outside, :] = 0.0
    kernel[:, outside] = 0.0
    rotated = v.conj().T @ rho @ v
    return -hermitize(v @ (kernel * rotated) @ v.conj().T)


def stationarity(rho: DensityMatrix, sigma: np.ndarray) -> float:
    """||sigma - P(sigma - grad f(sigma))||_F, zero exactly at a minimizer."""
    grad = _gradient(rho.matrix, sigma)
    return float(np.linalg.norm(sigma - project_feasible(sigma - grad)))


def minimize_relative_entropy(
    rho: DensityMatrix,
    *,
    max_iter: Optional[int] = None,
    tol: Optional[float] = None,
) -> Tuple[float, DensityMatrix, float]:
    """
    min over PPT sigma of D(rho || sigma).

    Returns: (value, minimizer, stationarity certificate)
    """
    max_iter = settings.PPT_MAX_ITER if max_iter is None else max_iter
    tol = settings.STATIONARITY_TOL if tol is None else tol

    if rho.dim != 4:
        raise UnsupportedDimension(f"expected a two-qubit state, got dimension {rho.dim}")
    if ppt_violation(rho.matrix) <= settings.MEMBERSHIP_TOL:
        return 0.0, rho, 0.0

    # The dephased state is separable and keeps rho in its support.
    sigma = np.diag(np.real(np.diag(rho.matrix))).astype(complex)
    value = _objective(rho, sigma)
    certificate = stationarity(rho, sigma)
    iterations = 0
    while certificate > tol and iterations < max_iter:
        iterations += 1
        grad = _gradient(rho.matrix, sigma)
        step = 1.0
        while True:
            candidate = project_feasible(sigma - step * grad)
            decrease = float(np.real(np.vdot(grad, candidate - sigma)))
            candidate_value = _objective(rho, candidate)
            if candidate_value <= value + 1e-4 * decrease or step < 1e-12:
                break
            step *= 0.5
        if candidate_value > value:
            break
        sigma, value = candidate, candidate_value
        certificate = stationarity(rho, sigma)

    logger.debug(
        f"PPT relative entropy: {iterations} iterations, value={value:.10g}, "
        f"stationarity={certificate:.3e}"
    )
    if certificate > tol:
        logger.warning(f"PPT descent stopped with stationarity {certificate:.3e} > {tol:.1e}")
        raise NonConvergence(
            f"projected gradient did not certify stationarity ({certificate:.3e})",
            {"value": value, "stationarity": certificate, "iterations": iterations},
        )
    return value, DensityMatrix(sigma), certificate
