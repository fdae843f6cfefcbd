"""
Subcommands: examples, validate.
"""
import argparse

import numpy as np

from cqstein.cli.common import emit
from cqstein.core.config import settings
from cqstein.core.errors import CheckFailed, InputError
from cqstein.schemas import ValidationOut
from cqstein.services.channel_io import detect_kind, parse_channel, parse_free_set, read_document
from cqstein.services.experiments import examples_report
from cqstein.services.free_sets import axioms_report, choi_min_eigenvalue


def cmd_examples(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    lines = examples_report(n_max=args.n_choi, capacity_count=args.count, rng=rng)
    emit(lines, args)
    failed = [line.name for line in lines if not line.passed]
    if failed:
        raise CheckFailed(f"failed checks: {', '.join(failed)}", {"failed": failed})
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    payload = read_document(args.file)
    kind = detect_kind(payload)

    if kind == "channel":
        channel = parse_channel(payload, args.file)
        lam = choi_min_eigenvalue(channel)
        out = ValidationOut(
            kind=kind,
            shape=channel.shape,
            min_eigenvalues=[float(channel.output(x).eigvalsh()[0]) for x in range(channel.alphabet_size)],
            traces=[float(np.trace(channel.outputs[x]).real) for x in range(channel.alphabet_size)],
            choi_min_eigenvalue=lam,
            choi_full_rank=lam > settings.FULL_RANK_TOL,
            details={"alphabet_dims": list(channel.alphabet_dims), "out_dims": list(channel.out_dims)},
        )
        emit([out], args)
        return 0

    s = parse_free_set(payload, args.file)
    verdicts = axioms_report(s, np.random.default_rng(args.seed))
    out = ValidationOut(
        kind=kind,
        shape=s.shape,
        details={
            "set": s.describe(),
            "axioms": {v.axiom: {"holds": v.holds, "detail": v.detail} for v in verdicts},
        },
    )
    emit([out], args)
    failing = [v.axiom for v in verdicts if not v.holds]
    if failing:
        raise InputError(f"{args.file}: free set fails its structural axioms", {"axioms": failing})
    return 0


def register(subparsers, common: argparse.ArgumentParser) -> None:
    p = subparsers.add_parser("examples", parents=[common], help="Reproduce the worked examples")
    p.add_argument("--n-choi", type=int, default=8, help="Largest n for the Choi-blind pair")
    p.add_argument("--count", type=int, default=20, help="Random channels for the capacity identity")
    p.set_defaults(handler=cmd_examples)

    p = subparsers.add_parser("validate", parents=[common], help="Validate a channel or free-set file")
    p.add_argument("file")
    p.set_defaults(handler=cmd_validate)
