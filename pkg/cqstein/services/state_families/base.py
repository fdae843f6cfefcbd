import math
from abc import ABC, abstractmethod
from typing import Optional, Tuple

from cqstein.core.config import settings
from cqstein.core.errors import UnsupportedSetKind
from cqstein.services.qstate import DensityMatrix


class BaseStateFamily(ABC):
    """
    Abstract base class for free-state families.
    A family S_n of free states on a fixed dimension lifts to the c-q channel set
    {F : F(|x><x|) in S_n for every x}.
    """

    name: str = ""

    def __init__(self, dim: int):
        self.dim = dim

    @abstractmethod
    def violation(self, rho: DensityMatrix) -> float:
        """
        Distance-like measure of how far rho is from the family; 0 for members.
        """
        pass

    @abstractmethod
    def min_relative_entropy(self, rho: DensityMatrix) -> Tuple[float, DensityMatrix]:
        """
        inf over free sigma of D(rho || sigma).
        Returns: (value, minimizer)
        """
        pass

    @abstractmethod
    def full_rank_member(self) -> DensityMatrix:
        """A full-rank free state."""
        pass

    @abstractmethod
    def tensor_power(self, n: int) -> "BaseStateFamily":
        """The family S_n on n copies."""
        pass

    def contains(self, rho: DensityMatrix, tol: Optional[float] = None) -> bool:
        tol = settings.MEMBERSHIP_TOL if tol is None else tol
        return self.violation(rho) <= tol

    def min_dmax(self, rho: DensityMatrix) -> Tuple[float, DensityMatrix]:
        """inf over free sigma of D_max(rho || sigma)."""
        raise UnsupportedSetKind(f"family '{self.name}' has no certified D_max minimization")

    def min_hypothesis_test(self, rho: DensityMatrix, eps: float) -> float:
        """inf over free sigma of D_H^eps(rho || sigma)."""
        if self.contains(rho):
            return -math.log(1.0 - eps)
        raise UnsupportedSetKind(f"family '{self.name}' has no certified D_H minimization")

    def describe(self) -> dict:
        return {"family": self.name, "dim": self.dim}
