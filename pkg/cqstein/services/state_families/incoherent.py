"""
Incoherent states: density matrices diagonal in the computational basis.
"""
from typing import Tuple

import numpy as np

from cqstein.core.linalg import trace_norm
from cqstein.services.divergences import von_neumann_entropy
from cqstein.services.qstate import DensityMatrix
from cqstein.services.state_families.base import BaseStateFamily


def dephase(rho: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(np.diag(np.diag(rho.matrix)))


class IncoherentFamily(BaseStateFamily):
    """Resource theory of coherence; closed under tensor products and permutations."""

    name = "incoherent"

    def violation(self, rho: DensityMatrix) -> float:
        return trace_norm(rho.matrix - dephase(rho).matrix)

    def min_relative_entropy(self, rho: DensityMatrix) -> Tuple[float, DensityMatrix]:
        # Relative entropy of coherence: S(Delta(rho)) - S(rho), attained at Delta(rho).
        dephased = dephase(rho)
        value = max(0.0, von_neumann_entropy(dephased) - von_neumann_entropy(rho))
        return value, dephased

    def full_rank_member(self) -> DensityMatrix:
        return DensityMatrix(np.eye(self.dim, dtype=complex) / self.dim)

    def tensor_power(self, n: int) -> "IncoherentFamily":
        return IncoherentFamily(self.dim ** n)
