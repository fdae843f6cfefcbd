"""
Channel-spec and free-set spec files.
Matrices travel as row-major [re, im] pairs; JSON floats keep repr precision.
"""
import json
import logging
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
from pydantic import ValidationError

from cqstein.core.errors import CqSteinError, InputError
from cqstein.schemas import (
    ChannelSpec,
    FreeSetSpec,
    MatrixPairs,
    SmoothedChannelSpec,
    SuperchannelSpec,
)
from cqstein.services.free_sets import FreeSetDescriptor, SetKind
from cqstein.services.qstate import CqChannel, make_channel
from cqstein.services.resource_ops import SmoothedChannel, SuperchannelRecipe, build_superchannel

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


# ============== Matrix encoding ==============

def matrix_to_pairs(a: np.ndarray) -> MatrixPairs:
    a = np.asarray(a, dtype=complex)
    return [[(float(z.real), float(z.imag)) for z in row] for row in a]


def pairs_to_matrix(rows: MatrixPairs) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


# ============== Channels ==============

def channel_to_spec(channel: CqChannel, name: Optional[str] = None) -> ChannelSpec:
    product = channel.n_factors > 1
    return ChannelSpec(
        alphabet_size=channel.alphabet_size,
        out_dim=channel.out_dim,
        outputs=[matrix_to_pairs(o) for o in channel.outputs],
        alphabet_dims=list(channel.alphabet_dims) if product else None,
        out_dims=list(channel.out_dims) if product else None,
        name=name,
    )


def spec_to_channel(spec: ChannelSpec) -> CqChannel:
    """Validate every output and build the channel."""
    outputs = [pairs_to_matrix(rows) for rows in spec.outputs]
    return make_channel(outputs, tuple(spec.alphabet_dims or ()), tuple(spec.out_dims or ()))


def _read_json(path: PathLike) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise InputError(f"file not found: {path}", {"path": str(path)})
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}", {"path": str(path)})


def _write_json(payload: Any, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info(f"Wrote {path}")
    return path


def parse_channel(payload: Any, source: str = "<data>") -> CqChannel:
    try:
        spec = ChannelSpec.model_validate(payload)
    except ValidationError as e:
        raise InputError(f"invalid channel spec in {source}: {e.error_count()} error(s)",
                         {"errors": json.loads(e.json())})
    return spec_to_channel(spec)


def load_channel(path: PathLike) -> CqChannel:
    channel = parse_channel(_read_json(path), str(path))
    logger.debug(f"Loaded channel {channel.shape} from {path}")
    return channel


def save_channel(channel: CqChannel, path: PathLike, name: Optional[str] = None) -> Path:
    return _write_json(channel_to_spec(channel, name).model_dump(mode="json", exclude_none=True), path)


# ============== Free sets ==============

def parse_free_set(payload: Any, source: str = "<data>") -> FreeSetDescriptor:
    """
    Build a single-copy descriptor, then lift it to `n` copies.

    singleton_iid needs `params.channel`; replacer needs alphabet_size/out_dim;
    lifted_state_set needs `params.family` (and `params.state` for fixed_state);
    ppt_output needs alphabet_size.
    """
    try:
        spec = FreeSetSpec.model_validate(payload)
    except ValidationError as e:
        raise InputError(f"invalid free-set spec in {source}: {e.error_count()} error(s)",
                         {"errors": json.loads(e.json())})
    try:
        kind = SetKind(spec.kind)
    except ValueError:
        raise InputError(f"unknown free-set kind '{spec.kind}'",
                         {"allowed": [k.value for k in SetKind]})

    params = dict(spec.params)
    try:
        if kind == SetKind.SINGLETON_IID:
            if "channel" not in params:
                raise InputError("singleton_iid sets need params.channel")
            base = FreeSetDescriptor.singleton_iid(parse_channel(params["channel"], source))
        elif kind == SetKind.REPLACER:
            base = FreeSetDescriptor.replacer(_required(spec.alphabet_size, "alphabet_size"),
                                              _required(spec.out_dim, "out_dim"))
        elif kind == SetKind.PPT_OUTPUT:
            base = FreeSetDescriptor.ppt_output(_required(spec.alphabet_size, "alphabet_size"))
        else:
            family = params.pop("family", None)
            if family is None:
                raise InputError("lifted_state_set needs params.family")
            if "state" in params:
                params["state"] = pairs_to_matrix(params["state"])
            base = FreeSetDescriptor.lifted(family, _required(spec.alphabet_size, "alphabet_size"),
                                            _required(spec.out_dim, "out_dim"), **params)
    except CqSteinError:
        raise
    except (TypeError, ValueError) as e:
        raise InputError(f"invalid free-set parameters in {source}: {e}")
    return base if spec.n == 1 else base.with_copies(spec.n)


def _required(value, name: str):
    if value is None:
        raise InputError(f"free-set spec is missing '{name}'")
    return value


def load_free_set(path: PathLike) -> FreeSetDescriptor:
    return parse_free_set(_read_json(path), str(path))


def free_set_to_spec(s: FreeSetDescriptor) -> FreeSetSpec:
    params: dict = {}
    if s.kind == SetKind.SINGLETON_IID:
        params["channel"] = channel_to_spec(s.base).model_dump(mode="json", exclude_none=True)
    elif s.kind == SetKind.LIFTED_STATE_SET:
        params = {k: (matrix_to_pairs(v) if isinstance(v, np.ndarray) else v) for k, v in s.params.items()}
    return FreeSetSpec(kind=s.kind.value, n=s.n, alphabet_size=s.alphabet_size,
                       out_dim=s.out_dim, params=params)


def save_free_set(s: FreeSetDescriptor, path: PathLike) -> Path:
    return _write_json(free_set_to_spec(s).model_dump(mode="json", exclude_none=True), path)


# ============== Constructions ==============

def save_smoothed(smoothed: SmoothedChannel, path: PathLike) -> Path:
    spec = SmoothedChannelSpec(
        channel=channel_to_spec(smoothed.channel),
        projectors=[matrix_to_pairs(p) for p in smoothed.projectors],
        R=smoothed.R,
        k=smoothed.k,
        m=smoothed.m,
        dmax_value=smoothed.dmax_value,
        dmax_bound=smoothed.dmax_bound,
        spectrum=smoothed.spectrum,
    )
    return _write_json(spec.model_dump(mode="json", exclude_none=True), path)


def save_recipe(recipe: SuperchannelRecipe, path: PathLike) -> Path:
    spec = SuperchannelSpec(
        test_operator=matrix_to_pairs(recipe.test_operator),
        probe_input=recipe.probe_input,
        channel_if_pass=channel_to_spec(recipe.channel_if_pass),
        channel_if_fail=channel_to_spec(recipe.channel_if_fail),
        decomposition_s=recipe.decomposition_s,
    )
    return _write_json(spec.model_dump(mode="json", exclude_none=True), path)


def load_recipe(path: PathLike) -> SuperchannelRecipe:
    try:
        spec = SuperchannelSpec.model_validate(_read_json(path))
    except ValidationError as e:
        raise InputError(f"invalid superchannel spec in {path}: {e.error_count()} error(s)")
    return build_superchannel(
        pairs_to_matrix(spec.test_operator),
        spec.probe_input,
        spec_to_channel(spec.channel_if_pass),
        spec_to_channel(spec.channel_if_fail),
        spec.decomposition_s,
    )


def detect_kind(payload: Any) -> str:
    """'channel' or 'free_set' for a parsed JSON document."""
    if isinstance(payload, dict) and "outputs" in payload:
        return "channel"
    if isinstance(payload, dict) and "kind" in payload:
        return "free_set"
    raise InputError("file is neither a channel spec nor a free-set spec")


def read_document(path: PathLike) -> Any:
    return _read_json(path)

