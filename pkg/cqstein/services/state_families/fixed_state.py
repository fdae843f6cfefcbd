"""
Single free state: S = {sigma}.
"""
from typing import Optional, Tuple

import numpy as np

from cqstein.core.config import settings
from cqstein.core.errors import PreconditionViolated
from cqstein.core.linalg import trace_norm
from cqstein.services.divergences import dmax, hypothesis_test, rel_entropy
from cqstein.services.qstate import DensityMatrix, product_state, validate_density
from cqstein.services.state_families.base import BaseStateFamily


class FixedStateFamily(BaseStateFamily):
    name = "fixed_state"

    def __init__(self, dim: int, state: Optional[np.ndarray] = None):
        super().__init__(dim)
        raw = np.eye(dim, dtype=complex) / dim if state is None else np.asarray(state, dtype=complex)
        self.state = validate_density(raw)
        if self.state.dim != dim:
            raise PreconditionViolated(f"fixed state has dimension {self.state.dim}, expected {dim}")
        if self.state.eigvalsh()[0] <= settings.FULL_RANK_TOL:
            raise PreconditionViolated("the fixed free state must be full rank")

    def violation(self, rho: DensityMatrix) -> float:
        return trace_norm(rho.matrix - self.state.matrix)

    def min_relative_entropy(self, rho: DensityMatrix) -> Tuple[float, DensityMatrix]:
        return rel_entropy(rho, self.state), self.state

    def min_dmax(self, rho: DensityMatrix) -> Tuple[float, DensityMatrix]:
        return dmax(rho, self.state), self.state

    def min_hypothesis_test(self, rho: DensityMatrix, eps: float) -> float:
        return hypothesis_test(rho, self.state, eps).value

    def full_rank_member(self) -> DensityMatrix:
        return self.state

    def tensor_power(self, n: int) -> "FixedStateFamily":
        power = product_state([self.state] * n)
        return FixedStateFamily(self.dim ** n, power.matrix)

    def describe(self) -> dict:
        return {**super().describe(), "state": self.state.matrix}
