"""
Pydantic schemas for channel files and CLI results.
"""
import math
from typing import Annotated, Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, PlainSerializer, field_validator, model_validator

from cqstein.core.config import settings


def format_real(value: float, digits: Optional[int] = None) -> Union[float, str, None]:
    """PRINT_DIGITS significant digits; infinities become "inf" / "-inf"."""
    if value is None:
        return None
    digits = settings.PRINT_DIGITS if digits is None else digits
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return float(f"{value:.{digits}g}")


Real = Annotated[float, PlainSerializer(format_real, when_used="json")]

# Row-major rows of [re, im] pairs.
MatrixPairs = List[List[Tuple[float, float]]]


# ============== Base Schemas ==============

class BaseSchema(BaseModel):
    """Base schema with common configuration."""
    model_config = ConfigDict(from_attributes=True)


# ============== File Schemas ==============

class ChannelSpec(BaseSchema):
    """A c-q channel x -> omega_x on disk."""
    alphabet_size: int = Field(..., ge=1, description="Number of classical input letters")
    out_dim: int = Field(..., ge=1, description="Output Hilbert-space dimension")
    outputs: List[MatrixPairs] = Field(..., description="One output density matrix per letter")
    alphabet_dims: Optional[List[int]] = Field(None, description="Per-copy alphabet sizes of a product channel")
    out_dims: Optional[List[int]] = Field(None, description="Per-copy output dimensions of a product channel")
    name: Optional[str] = Field(None, description="Free-form label")

    @model_validator(mode="after")
    def check_shapes(self):
        if len(self.outputs) != self.alphabet_size:
            raise ValueError(f"expected {self.alphabet_size} outputs, got {len(self.outputs)}")
        for x, rows in enumerate(self.outputs):
            if len(rows) != self.out_dim or any(len(row) != self.out_dim for row in rows):
                raise ValueError(f"output {x} is not {self.out_dim}x{self.out_dim}")
        return self


class FreeSetSpec(BaseSchema):
    """Free-set descriptor: `params.channel` holds the member of a singleton set."""
    kind: str = Field(..., description="singleton_iid | replacer | lifted_state_set | ppt_output")
    n: int = Field(default=1, ge=1, description="Number of copies")
    alphabet_size: Optional[int] = Field(None, ge=1)
    out_dim: Optional[int] = Field(None, ge=1)
    params: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("kind")
    @classmethod
    def normalize_kind(cls, v: str) -> str:
        return v.strip().lower()


class SmoothedChannelSpec(BaseSchema):
    channel: ChannelSpec
    projectors: List[MatrixPairs]
    R: float
    k: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    dmax_value: float
    dmax_bound: float
    spectrum: int


class SuperchannelSpec(BaseSchema):
    test_operator: MatrixPairs
    probe_input: int = Field(..., ge=0)
    channel_if_pass: ChannelSpec
    channel_if_fail: ChannelSpec
    decomposition_s: Optional[float] = None


# ============== Result Schemas ==============

class TestResultOut(BaseSchema):
    __test__ = False

    value: Real
    type2_error: Real
    eps: float
    duality_gap: Real
    arg_input: Optional[List[int]] = None
    lower_bound: bool = Field(default=False, description="Classical-input lower bound marker")


class ChannelDivergenceOut(BaseSchema):
    kind: str
    value: Real
    arg_input: Optional[Union[int, List[int], List[float]]] = None
    lower_bound: bool = False
    bracket: Optional[Tuple[Real, Real]] = None


class CapacityOut(BaseSchema):
    lower: Real
    upper: Real
    gap: Real
    iterations: int
    optimal_p: List[Real]


class RobustnessOut(BaseSchema):
    value: Real
    lower: Real
    upper: Real
    certificate: Real
    is_point: bool


class DecompositionOut(BaseSchema):
    r: Real
    s: Real
    reconstruction_residual: Real
    membership_violation: Real
    complement: ChannelSpec
    free_channel: ChannelSpec


class SteinRowOut(BaseSchema):
    n: int
    dh_over_n: Real
    d: Real
    upper_bound: Real


class SweepRowOut(BaseSchema):
    n: int
    dh_over_n: Real
    d_over_n: Real
    upper_bound: Real
    wall_ms: Real
    lb: bool = True
    note: Optional[str] = None


class SmoothRowOut(BaseSchema):
    k: int
    m: int
    dmax: Real
    bound: Real
    diamond: Real
    max_cut_weight: Real
    cut_weight_bound: Real


class ConversionRowOut(BaseSchema):
    n: int
    target_copies: int
    probe: List[int]
    type1_error: Real
    t: Real
    s: Real
    deficit: Real
    deficit_bound: Optional[Real] = None
    diamond_error: Real
    diamond_bound: Real


class CheckLine(BaseSchema):
    """One expected-vs-computed identity of the examples report."""
    name: str
    expected: Real
    computed: Real
    tol: float
    passed: bool


class ValidationOut(BaseSchema):
    kind: str
    shape: Tuple[int, int]
    min_eigenvalues: List[Real] = Field(default_factory=list)
    traces: List[Real] = Field(default_factory=list)
    choi_min_eigenvalue: Optional[Real] = None
    choi_full_rank: Optional[bool] = None
    details: Dict[str, Any] = Field(default_factory=dict)


# ============== Response Wrappers ==============

class ErrorResponse(BaseModel):
    """Generic error response."""
    error: str
    message: str
    details: Optional[Dict[str, Any]] = None
