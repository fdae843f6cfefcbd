"""
Subcommands: div, capacity, robustness, decompose.
"""
import argparse
import logging

from cqstein.cli.common import as_list, emit, resolve_channel, resolve_free_set
from cqstein.core.errors import InputError
from cqstein.schemas import (
    CapacityOut,
    ChannelDivergenceOut,
    DecompositionOut,
    RobustnessOut,
)
from cqstein.services.channel_divergences import (
    InputMode,
    channel_divergence,
    choi_divergence,
    choi_trace_distance,
    diamond_distance,
    divergence_to_set,
    hypothesis_test_channel,
)
from cqstein.services.channel_io import channel_to_spec, save_channel
from cqstein.services.free_sets import FreeSetDescriptor, holevo_capacity, log_robustness, membership
from cqstein.services.resource_ops import robustness_decompose

logger = logging.getLogger(__name__)

# CLI kind -> library divergence kind
KIND_MAP = {"d": "umegaki", "renyi": "renyi", "dmax": "dmax"}
DIV_KINDS = ["d", "renyi", "dmax", "dh", "diamond", "choi-dist"]


def cmd_divergence(args: argparse.Namespace) -> int:
    e = resolve_channel(args.channel)
    if args.other is None and args.set is None:
        raise InputError("div needs a second channel or --set")

    if args.set is not None:
        s = resolve_free_set(args.set, e)
        if args.kind == "dh":
            result = hypothesis_test_channel(e, s, args.eps, args.input_mode)
        elif args.kind in KIND_MAP:
            result = divergence_to_set(KIND_MAP[args.kind], e, s, args.alpha)
        else:
            raise InputError(f"--kind {args.kind} needs a second channel, not a free set")
        out = ChannelDivergenceOut(
            kind=args.kind, value=result.value, arg_input=as_list(result.arg_input),
            lower_bound=result.lower_bound, bracket=result.bracket,
        )
        emit([out], args)
        return 0

    f = resolve_channel(args.other)
    if args.kind == "diamond":
        out = ChannelDivergenceOut(kind=args.kind, value=diamond_distance(e, f))
    elif args.kind == "choi-dist":
        out = ChannelDivergenceOut(kind=args.kind, value=choi_trace_distance(e, f))
    elif args.kind == "dh":
        result = hypothesis_test_channel(e, FreeSetDescriptor.singleton_iid(f), args.eps, args.input_mode)
        out = ChannelDivergenceOut(kind=args.kind, value=result.value,
                                   arg_input=as_list(result.arg_input), lower_bound=True)
    elif args.choi:
        out = ChannelDivergenceOut(kind=f"choi-{args.kind}",
                                   value=choi_divergence(KIND_MAP[args.kind], e, f, args.alpha))
    else:
        result = channel_divergence(KIND_MAP[args.kind], e, f, args.alpha)
        out = ChannelDivergenceOut(kind=args.kind, value=result.value, arg_input=result.arg_input)
    emit([out], args)
    return 0


def cmd_capacity(args: argparse.Namespace) -> int:
    e = resolve_channel(args.channel)
    cap = holevo_capacity(e, args.tol)
    emit([CapacityOut(lower=cap.lower, upper=cap.upper, gap=cap.gap,
                      iterations=cap.iterations, optimal_p=cap.optimal_p.tolist())], args)
    return 0


def cmd_robustness(args: argparse.Namespace) -> int:
    e = resolve_channel(args.channel)
    rob = log_robustness(e, resolve_free_set(args.set, e))
    emit([RobustnessOut(value=rob.value, lower=rob.lower, upper=rob.upper,
                        certificate=rob.certificate, is_point=rob.is_point)], args)
    return 0


def cmd_decompose(args: argparse.Namespace) -> int:
    e = resolve_channel(args.channel)
    s = resolve_free_set(args.set, e)
    decomposition = robustness_decompose(e, s)
    if args.save_complement:
        save_channel(decomposition.complement, args.save_complement, name="complement")
    emit([DecompositionOut(
        r=decomposition.r,
        s=decomposition.s,
        reconstruction_residual=decomposition.reconstruction_residual(e),
        membership_violation=membership(decomposition.free_channel, s)[1],
        complement=channel_to_spec(decomposition.complement),
        free_channel=channel_to_spec(decomposition.free_channel),
    )], args)
    return 0


def register(subparsers, common: argparse.ArgumentParser) -> None:
    p = subparsers.add_parser("div", parents=[common], help="Channel divergence or distance")
    p.add_argument("channel", help="Channel-spec file or catalogue:<name>")
    p.add_argument("other", nargs="?", default=None, help="Second channel (omit with --set)")
    p.add_argument("--kind", choices=DIV_KINDS, default="d", help="Quantity to evaluate")
    p.add_argument("--set", default=None, help="Free-set spec file or kind; evaluates inf over the set")
    p.add_argument("--choi", action="store_true", help="Evaluate d/renyi/dmax on normalized Choi states")
    p.add_argument("--input-mode", choices=[m.value for m in InputMode],
                   default=InputMode.CLASSICAL_EXHAUSTIVE.value, help="Classical inputs for --kind dh")
    p.set_defaults(handler=cmd_divergence)

    p = subparsers.add_parser("capacity", parents=[common], help="Holevo capacity bracket")
    p.add_argument("channel")
    p.set_defaults(handler=cmd_capacity)

    p = subparsers.add_parser("robustness", parents=[common], help="Log robustness against a free set")
    p.add_argument("channel")
    p.add_argument("--set", default=None, help="Free-set spec file or kind (default: replacer)")
    p.set_defaults(handler=cmd_robustness)

    p = subparsers.add_parser("decompose", parents=[common], help="Robustness decomposition")
    p.add_argument("channel")
    p.add_argument("--set", default=None, help="Free-set spec file or kind (default: replacer)")
    p.add_argument("--save-complement", default=None, help="Write the complement channel E' here")
    p.set_defaults(handler=cmd_decompose)
