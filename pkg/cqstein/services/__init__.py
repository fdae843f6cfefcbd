"""Services package."""
from cqstein.services.channel_divergences import DivergenceKind, InputMode
from cqstein.services.divergences import hypothesis_test, rel_entropy
from cqstein.services.free_sets import FreeSetDescriptor, SetKind
from cqstein.services.qstate import CqChannel, DensityMatrix

__all__ = [
    "CqChannel",
    "DensityMatrix",
    "hypothesis_test",
    "rel_entropy",
    "FreeSetDescriptor",
    "SetKind",
    "DivergenceKind",
    "InputMode",
]
