"""
Channel-level divergences for c-q channels.

Suprema over entangled inputs reduce to maxima over classical letters for D, the
sandwiched Renyi divergences, D_max and the diamond norm, so every routine here
works letter by letter on the output states omega_x.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from cqstein.core.config import settings
from cqstein.core.errors import (
    EnumerationTooLarge,
    ShapeMismatch,
    UnsupportedSetKind,
)
from cqstein.core.linalg import trace_norm
from cqstein.services.divergences import (
    dmax,
    hypothesis_test,
    rel_entropy,
    sandwiched_renyi,
)
from cqstein.services.executor import argmax_sorted, parallel_map
from cqstein.services.free_sets import (
    FreeSetDescriptor,
    SetKind,
    holevo_capacity,
    log_robustness,
    replacer_channel,
)
from cqstein.services.qstate import (
    CqChannel,
    DensityMatrix,
    check_dimension,
    cq_apply,
    enumerate_types,
    maximally_entangled_input,
    random_pure,
)

logger = logging.getLogger(__name__)


class DivergenceKind(str, Enum):
    UMEGAKI = "umegaki"
    RENYI = "renyi"
    DMAX = "dmax"


ArgInput = Union[int, Tuple[int, ...], np.ndarray, None]


@dataclass(frozen=True, eq=False)
class ChannelDivergenceResult:
    """
    Value of a channel divergence with the input achieving it.

    `arg_input` is a letter index or, for capacity-type optima, a distribution over
    letters. `lower_bound` marks values that only bound the entangled-input quantity
    from below.
    """
    value: float
    arg_input: ArgInput = None
    witness: Optional[CqChannel] = None
    lower_bound: bool = False
    bracket: Optional[Tuple[float, float]] = None
    details: Dict[str, Any] = field(default_factory=dict)


def _kind(kind: Union[str, DivergenceKind]) -> DivergenceKind:
    try:
        return DivergenceKind(kind)
    except ValueError:
        raise UnsupportedSetKind(f"unknown divergence kind '{kind}'")


def state_divergence(
    kind: Union[str, DivergenceKind],
    rho: DensityMatrix,
    sigma: DensityMatrix,
    alpha: Optional[float] = None,
) -> float:
    kind = _kind(kind)
    if kind == DivergenceKind.UMEGAKI:
        return rel_entropy(rho, sigma)
    if kind == DivergenceKind.RENYI:
        return sandwiched_renyi(rho, sigma, settings.DEFAULT_ALPHA if alpha is None else alpha)
    return dmax(rho, sigma)


def _check_shapes(e: CqChannel, f: CqChannel) -> None:
    if e.shape != f.shape:
        raise ShapeMismatch(
            f"channel shapes differ: {e.shape} vs {f.shape}",
            {"e": list(e.shape), "f": list(f.shape)},
        )


# ============== Channel divergences ==============

def channel_divergence(
    kind: Union[str, DivergenceKind],
    e: CqChannel,
    f: CqChannel,
    alpha: Optional[float] = None,
) -> ChannelDivergenceResult:
    """max over letters x of the state divergence of (omega_x^E, omega_x^F)."""
    _check_shapes(e, f)
    values = parallel_map(
        lambda x: state_divergence(kind, e.output(x), f.output(x), alpha), range(e.alphabet_size)
    )
    best = argmax_sorted(values)
    return ChannelDivergenceResult(values[best], best, f)


def choi_divergence(
    kind: Union[str, DivergenceKind],
    e: CqChannel,
    f: CqChannel,
    alpha: Optional[float] = None,
) -> float:
    """
    Divergence between normalized Choi states, evaluated block by block.
    D is the average of the per-letter values, D~_alpha combines the per-letter
    trace functionals and D_max is the per-letter maximum.
    """
    _check_shapes(e, f)
    kind = _kind(kind)
    k = e.alphabet_size
    if kind == DivergenceKind.UMEGAKI:
        return sum(rel_entropy(e.output(x), f.output(x)) for x in range(k)) / k
    if kind == DivergenceKind.DMAX:
        return max(dmax(e.output(x), f.output(x)) for x in range(k))
    alpha = settings.DEFAULT_ALPHA if alpha is None else alpha
    values = [sandwiched_renyi(e.output(x), f.output(x), alpha) for x in range(k)]
    if any(math.isinf(v) for v in values):
        return math.inf
    q = sum(math.exp((alpha - 1.0) * v) for v in values) / k
    return max(0.0, math.log(q) / (alpha - 1.0))


def diamond_distance(e: CqChannel, f: CqChannel) -> float:
    """max_x ||omega_x^E - omega_x^F||_1 (full trace norm, range [0, 2])."""
    _check_shapes(e, f)
    values = parallel_map(lambda x: trace_norm(e.outputs[x] - f.outputs[x]), range(e.alphabet_size))
    return min(2.0, max(values))


def choi_trace_distance(e: CqChannel, f: CqChannel) -> float:
    """||J(E) - J(F)||_1 of the normalized Choi states."""
    _check_shapes(e, f)
    total = sum(trace_norm(e.outputs[x] - f.outputs[x]) for x in range(e.alphabet_size))
    return min(2.0, total / e.alphabet_size)


def dmax_at_maximally_entangled(e: CqChannel, f: CqChannel, basis: Optional[np.ndarray] = None) -> float:
    """D_max(E(Phi) || F(Phi)) for a maximally entangled input on R (x) X."""
    _check_shapes(e, f)
    phi = maximally_entangled_input(e.alphabet_size, basis)
    k = e.alphabet_size
    return dmax(cq_apply(e, phi, ref_dim=k), cq_apply(f, phi, ref_dim=k))


# ============== Divergence to a free set ==============

def divergence_to_set(
    kind: Union[str, DivergenceKind],
    e: CqChannel,
    s: FreeSetDescriptor,
    alpha: Optional[float] = None,
) -> ChannelDivergenceResult:
    """inf over F in S of the channel divergence D(E || F)."""
    kind = _kind(kind)
    s.check_shape(e)

    if s.kind == SetKind.SINGLETON_IID:
        return channel_divergence(kind, e, s.channel, alpha)

    if kind == DivergenceKind.DMAX:
        rob = log_robustness(e, s)
        return ChannelDivergenceResult(
            rob.value, None, rob.witness, bracket=(rob.lower, rob.upper),
            details={"certificate": rob.certificate},
        )

    if s.kind == SetKind.REPLACER and kind == DivergenceKind.UMEGAKI:
        cap = holevo_capacity(e)
        witness = replacer_channel(cap.optimal_sigma.matrix, e.alphabet_size, e.alphabet_dims)
        return ChannelDivergenceResult(
            cap.upper, cap.optimal_p, witness, bracket=(cap.lower, cap.upper),
            details={"iterations": cap.iterations},
        )

    if s.kind in (SetKind.LIFTED_STATE_SET, SetKind.PPT_OUTPUT) and kind == DivergenceKind.UMEGAKI:
        results = parallel_map(lambda x: s.family.min_relative_entropy(e.output(x)), range(e.alphabet_size))
        values = [v for v, _ in results]
        best = argmax_sorted(values)
        witness = CqChannel(np.stack([st.matrix for _, st in results]), e.alphabet_dims, e.out_dims)
        return ChannelDivergenceResult(values[best], best, witness)

    raise UnsupportedSetKind(
        f"no certified routine for {kind.value} against '{s.kind.value}' sets"
    )


# ============== Hypothesis testing against a free set ==============

class InputMode(str, Enum):
    CLASSICAL_EXHAUSTIVE = "classical_exhaustive"
    CLASSICAL_TYPES = "classical_types"


def _letter_hypothesis_test(e: CqChannel, s: FreeSetDescriptor, x: int, eps: float) -> float:
    omega = e.output(x)
    if s.kind == SetKind.SINGLETON_IID:
        return hypothesis_test(omega, s.channel.output(x), eps).value
    if s.kind == SetKind.REPLACER:
        # sigma = omega_x is optimal: every sigma admits the test (1 - eps) * 1.
        return -math.log(1.0 - eps)
    return s.family.min_hypothesis_test(omega, eps)


def classical_inputs(e: CqChannel, mode: Union[str, InputMode]) -> List[int]:
    """Letters to evaluate: every letter, or one representative per type class."""
    mode = InputMode(mode)
    if mode == InputMode.CLASSICAL_EXHAUSTIVE:
        if e.alphabet_size > settings.TYPES_MAX:
            raise EnumerationTooLarge(f"{e.alphabet_size} letters exceed the guard of {settings.TYPES_MAX}")
        return list(range(e.alphabet_size))
    if len(set(e.alphabet_dims)) != 1:
        raise EnumerationTooLarge("type enumeration needs identical per-copy alphabets")
    types = enumerate_types(e.n_factors, e.alphabet_dims[0])
    return [e.letter(t.representative()) for t in types]


def hypothesis_test_channel(
    e: CqChannel,
    s: FreeSetDescriptor,
    eps: float,
    input_mode: Union[str, InputMode] = InputMode.CLASSICAL_TYPES,
) -> ChannelDivergenceResult:
    """
    max over classical inputs x of inf over F in S of D_H^eps(E(x) || F(x)).
    Reported as a lower bound on the entangled-input quantity.
    """
    s.check_shape(e)
    check_dimension(e.out_dim)
    letters = classical_inputs(e, input_mode)
    values = parallel_map(lambda x: _letter_hypothesis_test(e, s, x, eps), letters)
    best = argmax_sorted(values)
    letter = letters[best]
    return ChannelDivergenceResult(
        values[best], e.string(letter), None, lower_bound=True,
        details={"letter": letter, "evaluated": len(letters), "mode": InputMode(input_mode).value},
    )


# ============== Minimax and reductions ==============

def minimax_gap(e: CqChannel, s: FreeSetDescriptor) -> float:
    """|inf_F sup_nu D - sup_nu inf_F D| with the sup over classical-classical inputs."""
    s.check_shape(e)
    if s.kind == SetKind.SINGLETON_IID:
        return 0.0
    if s.kind == SetKind.REPLACER:
        cap = holevo_capacity(e)
        return abs(cap.upper - cap.lower)
    raise UnsupportedSetKind("minimax exchange is only implemented for singleton and replacer sets")


@dataclass(frozen=True)
class SubadditivityCheck:
    joint: float
    first: float
    second: float

    @property
    def slack(self) -> float:
        return self.first + self.second - self.joint


def subadditivity_check(e: CqChannel, s: FreeSetDescriptor, n: int, m: int) -> SubadditivityCheck:
    """D(E^{n+m} || S_{n+m}) against D(E^n || S_n) + D(E^m || S_m)."""
    def value(copies: int) -> float:
        return divergence_to_set(DivergenceKind.UMEGAKI, e.tensor_power(copies), s.with_copies(copies)).value

    return SubadditivityCheck(value(n + m), value(n), value(m))


@dataclass(frozen=True)
class SampledReduction:
    sampled_max: float
    classical_max: float

    @property
    def excess(self) -> float:
        return self.sampled_max - self.classical_max


def sampled_input_reduction(
    kind: str,
    e: CqChannel,
    f: CqChannel,
    samples: int,
    rng: np.random.Generator,
    alpha: Optional[float] = None,
) -> SampledReduction:
    """
    Evaluate a divergence (or `trace` for the trace norm) on random entangled
    inputs with reference dimension |X| and compare with the letterwise maximum.
    """
    _check_shapes(e, f)
    k = e.alphabet_size
    sampled = []
    for _ in range(samples):
        nu = random_pure(k * k, rng)
        out_e = cq_apply(e, nu, ref_dim=k)
        out_f = cq_apply(f, nu, ref_dim=k)
        if kind == "trace":
            sampled.append(trace_norm(out_e.matrix - out_f.matrix))
        else:
            sampled.append(state_divergence(kind, out_e, out_f, alpha))
    if kind == "trace":
        classical = diamond_distance(e, f)
    else:
        classical = channel_divergence(kind, e, f, alpha).value
    return SampledReduction(max(sampled), classical)

