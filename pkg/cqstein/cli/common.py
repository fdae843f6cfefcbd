"""
Shared CLI plumbing: common flags, input resolution and row emission.
"""
import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence

from pydantic import BaseModel

from cqstein.core.config import settings
from cqstein.schemas import format_real
from cqstein.services import catalogue
from cqstein.services.channel_io import load_channel, load_free_set, parse_free_set
from cqstein.services.free_sets import FreeSetDescriptor
from cqstein.services.qstate import CqChannel

logger = logging.getLogger(__name__)

CATALOGUE_PREFIX = "catalogue:"


def common_options() -> argparse.ArgumentParser:
    """Flags accepted by every subcommand."""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--eps", type=float, default=settings.DEFAULT_EPS,
                        help=f"Type-I error bound (default: {settings.DEFAULT_EPS})")
    parser.add_argument("--alpha", type=float, default=settings.DEFAULT_ALPHA,
                        help=f"Sandwiched Renyi order for bound columns (default: {settings.DEFAULT_ALPHA})")
    parser.add_argument("--tol", type=float, default=settings.CAPACITY_TOL,
                        help=f"Iteration tolerance (default: {settings.CAPACITY_TOL})")
    parser.add_argument("--nmax", type=int, default=settings.NMAX,
                        help=f"Largest number of copies in sweeps (default: {settings.NMAX})")
    parser.add_argument("--seed", type=int, default=settings.SEED,
                        help=f"Seed for random instances (default: {settings.SEED})")
    parser.add_argument("--out", default=None, help="Write results to this file instead of stdout")
    parser.add_argument("--format", choices=["csv", "json"], default="csv", help="Output format")
    parser.add_argument("--log-level", default=None, help="Override LOG_LEVEL for this run")
    return parser


# ============== Inputs ==============

def resolve_channel(value: str) -> CqChannel:
    """A channel-spec path, or `catalogue:<name>` for a built-in channel."""
    if value.startswith(CATALOGUE_PREFIX):
        return catalogue.get_channel(value[len(CATALOGUE_PREFIX):])
    return load_channel(value)


def resolve_free_set(value: Optional[str], e: CqChannel) -> FreeSetDescriptor:
    """
    A free-set spec path, or a bare kind (`replacer`, `ppt_output`,
    `incoherent`, `fixed_state`) sized to the single-copy channel E.
    """
    if value is None or value == "replacer":
        return parse_free_set({"kind": "replacer", "alphabet_size": e.alphabet_size, "out_dim": e.out_dim})
    if value == "ppt_output":
        return parse_free_set({"kind": "ppt_output", "alphabet_size": e.alphabet_size})
    if value in ("incoherent", "fixed_state"):
        return parse_free_set({
            "kind": "lifted_state_set", "alphabet_size": e.alphabet_size,
            "out_dim": e.out_dim, "params": {"family": value},
        })
    if value.startswith(CATALOGUE_PREFIX):
        return FreeSetDescriptor.singleton_iid(resolve_channel(value))
    return load_free_set(value)


# ============== Output ==============

def _cell(value: Any) -> Any:
    if isinstance(value, float):
        formatted = format_real(value)
        return formatted if isinstance(formatted, str) else f"{value:.{settings.PRINT_DIGITS}g}"
    if isinstance(value, (list, tuple)):
        return json.dumps([format_real(v) if isinstance(v, float) else v for v in value])
    if isinstance(value, dict):
        return json.dumps(value, sort_keys=True, default=str)
    if value is None:
        return ""
    return value


def render(rows: Sequence[BaseModel], fmt: str) -> str:
    if fmt == "json":
        payload = [row.model_dump(mode="json") for row in rows]
        return json.dumps(payload if len(payload) != 1 else payload[0], indent=2) + "\n"
    buffer = io.StringIO()
    if not rows:
        return ""
    fields = list(type(rows[0]).model_fields)
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_cell(getattr(row, name)) for name in fields])
    return buffer.getvalue()


def output_path(out: Optional[str]) -> Optional[Path]:
    if out is None:
        return None
    path = Path(out)
    if not path.is_absolute() and settings.OUTPUT_DIR:
        path = Path(settings.OUTPUT_DIR) / path
    return path


def emit(rows: Iterable[BaseModel], args: argparse.Namespace) -> None:
    """Write rows as CSV or JSON to --out (or stdout), in the order given."""
    text = render(list(rows), args.format)
    path = output_path(args.out)
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {path}")


def as_list(value: Any) -> Optional[List[Any]]:
    if value is None:
        return None
    if hasattr(value, "tolist"):
        return value.tolist()
    return list(value) if isinstance(value, (list, tuple)) else value
