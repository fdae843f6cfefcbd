"""
Named channels used by the examples report, the CLI and the tests.
"""
import logging
from typing import Callable, Dict, List, Tuple

import numpy as np

from cqstein.core.errors import InputError
from cqstein.core.linalg import ketbra
from cqstein.services.free_sets import FreeSetDescriptor, depolarizing_channel
from cqstein.services.qstate import CqChannel, check_dimension, random_channel
from cqstein.services.resource_ops import PreprocessingSuperchannel, all_ones_preprocessing

logger = logging.getLogger(__name__)


def _diag(*p: float) -> np.ndarray:
    return np.diag(np.asarray(p, dtype=complex))


# ============== Single-qubit examples ==============

def orthogonal_flip_channel() -> CqChannel:
    """E^(1): 0 -> |0><0|, 1 -> 1/2."""
    return CqChannel(np.stack([ketbra(0, 0, 2), np.eye(2, dtype=complex) / 2]))


def constant_zero_channel() -> CqChannel:
    """E^(2): every letter -> |0><0|."""
    return CqChannel(np.stack([ketbra(0, 0, 2), ketbra(0, 0, 2)]))


def qubit_depolarizing() -> CqChannel:
    return depolarizing_channel(2, 2)


def classical_copy_channel() -> CqChannel:
    """x -> |x><x| on a qubit; capacity log 2."""
    return CqChannel(np.stack([ketbra(0, 0, 2), ketbra(1, 1, 2)]))


def biased_channel(p: float = 0.9) -> CqChannel:
    """Both letters -> diag(p, 1 - p)."""
    return CqChannel(np.stack([_diag(p, 1 - p), _diag(p, 1 - p)]))


def smoothing_instance() -> Tuple[CqChannel, CqChannel, float]:
    """(E, F, R) with commuting qubit outputs and D(E||F) < R < D_max(E||F)."""
    return biased_channel(0.9), biased_channel(0.99), 2.0


# ============== Choi-blind pair ==============

def _string_channel(n: int, flip_last: bool) -> CqChannel:
    k = d = 2 ** n
    check_dimension(d)
    zero = np.zeros((d, d), dtype=complex)
    zero[0, 0] = 1.0
    if not flip_last:
        # Read-only broadcast view: the 2^n identical outputs share one matrix.
        outputs = np.broadcast_to(zero, (k, d, d))
    else:
        outputs = np.zeros((k, d, d), dtype=complex)
        outputs[:, 0, 0] = 1.0
        outputs[k - 1, 0, 0] = 0.0
        outputs[k - 1, d - 1, d - 1] = 1.0
    return CqChannel(outputs, (2,) * n, (2,) * n)


def choi_blind_pair(n: int) -> Tuple[CqChannel, CqChannel]:
    """
    E_n^(1): every string -> |0...0><0...0|.
    E_n^(2): the same except 1...1 -> |1...1><1...1|.
    Their Choi states are 2^(1-n) apart while their diamond distance stays 2.
    """
    if n < 1:
        raise InputError(f"n must be at least 1, got {n}")
    return _string_channel(n, False), _string_channel(n, True)


def choi_blind_superchannel(n: int) -> PreprocessingSuperchannel:
    """N -> N o N_pre with N_pre sending every string to 1...1."""
    return all_ones_preprocessing(n)


def depolarizing_singleton(n: int = 1) -> FreeSetDescriptor:
    return FreeSetDescriptor.singleton_iid(qubit_depolarizing(), n)


# ============== Resource-theory instances ==============

def bell_channel() -> CqChannel:
    """0 -> Bell state, 1 -> |00><00| on two qubits."""
    psi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    return CqChannel(np.stack([np.outer(psi, psi.conj()), ketbra(0, 0, 4)]))


def plus_channel() -> CqChannel:
    """0 -> |+><+|, 1 -> |0><0|; maximal coherence on letter 0."""
    plus = np.full((2, 2), 0.5, dtype=complex)
    return CqChannel(np.stack([plus, ketbra(0, 0, 2)]))


def random_channels(count: int, rng: np.random.Generator, max_alphabet: int = 4,
                    max_dim: int = 3) -> List[CqChannel]:
    """Seeded channels with 2 <= |X| <= max_alphabet and 2 <= d <= max_dim."""
    channels = []
    for _ in range(count):
        k = int(rng.integers(2, max_alphabet + 1))
        d = int(rng.integers(2, max_dim + 1))
        channels.append(random_channel(k, d, rng))
    return channels


# ============== Registry ==============

CHANNEL_MAP: Dict[str, Callable[[], CqChannel]] = {
    "flip": orthogonal_flip_channel,
    "constant_zero": constant_zero_channel,
    "depolarizing": qubit_depolarizing,
    "classical_copy": classical_copy_channel,
    "biased": biased_channel,
    "bell": bell_channel,
    "plus": plus_channel,
}


def get_channel(name: str) -> CqChannel:
    key = name.lower()
    if key not in CHANNEL_MAP:
        raise InputError(f"Unknown catalogue channel: {name}", {"available": sorted(CHANNEL_MAP)})
    return CHANNEL_MAP[key]()


def available() -> List[str]:
    return sorted(CHANNEL_MAP)
