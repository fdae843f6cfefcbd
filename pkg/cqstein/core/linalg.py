"""
Dense Hermitian linear-algebra helpers shared by every service.
All routines take and return numpy complex128 arrays.
"""
from functools import reduce
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh

from cqstein.core.config import settings


def hermitize(a: np.ndarray) -> np.ndarray:
    """Return (A + A^dagger) / 2."""
    a = np.asarray(a, dtype=complex)
    return (a + a.conj().T) / 2


def eigh_hermitian(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors of the Hermitian part of A."""
    w, v = eigh(hermitize(a))
    return np.asarray(w, dtype=float), v


def support_mask(w: np.ndarray, rel_tol: Optional[float] = None) -> np.ndarray:
    """Boolean mask of eigenvalues inside the support (w > tol * max|w|)."""
    rel_tol = settings.SUPPORT_REL_TOL if rel_tol is None else rel_tol
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if scale == 0.0:
        return np.zeros(w.shape, dtype=bool)
    return w > rel_tol * scale


def from_eig(w: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rebuild V diag(w) V^dagger."""
    return (v * w) @ v.conj().T


def spectral_function(
    a: np.ndarray,
    func: Callable[[np.ndarray], np.ndarray],
    rel_tol: Optional[float] = None,
) -> np.ndarray:
    """Apply func to the eigenvalues of A restricted to its support; zero elsewhere."""
    w, v = eigh_hermitian(a)
    mask = support_mask(w, rel_tol)
    if not mask.any():
        return np.zeros_like(v)
    return from_eig(func(w[mask]), v[:, mask])


def support_projector(a: np.ndarray, rel_tol: Optional[float] = None) -> np.ndarray:
    w, v = eigh_hermitian(a)
    mask = support_mask(w, rel_tol)
    vs = v[:, mask]
    return vs @ vs.conj().T


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    """Square root of a PSD operator (negative rounding noise clipped)."""
    w, v = eigh_hermitian(a)
    return from_eig(np.sqrt(np.clip(w, 0.0, None)), v)


def positive_part(a: np.ndarray) -> np.ndarray:
    """(A)_+ for Hermitian A."""
    w, v = eigh_hermitian(a)
    return from_eig(np.clip(w, 0.0, None), v)


def trace_norm(a: np.ndarray) -> float:
    """||A||_1 of a Hermitian operator."""
    a = np.asarray(a)
    if not np.any(a):
        return 0.0
    if is_diagonal(a):
        return float(np.sum(np.abs(np.real(np.diag(a)))))
    w, _ = eigh_hermitian(a)
    return float(np.sum(np.abs(w)))


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a @ b - b @ a, 2))


def is_diagonal(a: np.ndarray, tol: float = 1e-14) -> bool:
    a = np.asarray(a)
    off = a - np.diag(np.diag(a))
    return bool(np.max(np.abs(off), initial=0.0) <= tol)


def ketbra(i: int, j: int, d: int) -> np.ndarray:
    """|i><j| in dimension d."""
    m = np.zeros((d, d), dtype=complex)
    m[i, j] = 1.0
    return m


def kron_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, mats, np.ones((1, 1), dtype=complex))


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in keep (order of kept systems preserved)."""
    dims = list(dims)
    n = len(dims)
    t = np.asarray(rho, dtype=complex).reshape(dims + dims)
    traced = sorted((i for i in range(n) if i not in keep), reverse=True)
    for count, i in enumerate(traced):
        t = np.trace(t, axis1=i, axis2=i + n - count)
    d = int(np.prod([dims[k] for k in sorted(keep)])) if keep else 1
    return t.reshape(d, d)


def partial_transpose(rho: np.ndarray, dims: Sequence[int], sys: int) -> np.ndarray:
    """Transpose subsystem `sys` of a multipartite operator."""
    dims = list(dims)
    n = len(dims)
    t = np.asarray(rho, dtype=complex).reshape(dims + dims)
    t = np.swapaxes(t, sys, sys + n)
    d = int(np.prod(dims))
    return t.reshape(d, d)


def project_simplex(v: np.ndarray, total: float = 1.0) -> np.ndarray:
    """Euclidean projection of a real vector onto {x >= 0, sum x = total}."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    idx = np.arange(1, v.size + 1)
    rho = int(np.nonzero(u - css / idx > 0)[0][-1])
    theta = css[rho] / (rho + 1)
    return np.clip(v - theta, 0.0, None)


def project_spectraplex(a: np.ndarray) -> np.ndarray:
    """Closest (Frobenius) PSD unit-trace matrix to the Hermitian part of A."""
    w, v = eigh_hermitian(a)
    return from_eig(project_simplex(w), v)


def project_psd(a: np.ndarray) -> np.ndarray:
    """Closest (Frobenius) PSD matrix to the Hermitian part of A."""
    return positive_part(a)


def log_derivative_kernel(w: np.ndarray, floor: float) -> np.ndarray:
    """Divided differences of log at the eigenvalues w (Daleckii-Krein matrix)."""
    wc = np.clip(w, floor, None)
    lw = np.log(wc)
    dw = wc[:, None] - wc[None, :]
    dl = lw[:, None] - lw[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        kernel = np.where(np.abs(dw) > 1e-14 * np.maximum(wc[:, None], wc[None, :]), dl / dw, 0.0)
    diag = 1.0 / np.sqrt(wc[:, None] * wc[None, :])
    return np.where(kernel == 0.0, diag, kernel)


def basis_states(d: int) -> List[np.ndarray]:
    return [ketbra(i, i, d) for i in range(d)]
