"""
Subcommands: smooth, superchannel.
"""
import argparse
import logging

from cqstein.cli.common import emit, resolve_channel, resolve_free_set
from cqstein.core.errors import InputError
from cqstein.schemas import ConversionRowOut, SmoothRowOut
from cqstein.services.channel_io import save_recipe, save_smoothed
from cqstein.services.experiments import choi_blind_lines, smooth_rows
from cqstein.services.resource_ops import conversion_trace, smooth_channel

logger = logging.getLogger(__name__)


def cmd_smooth(args: argparse.Namespace) -> int:
    e = resolve_channel(args.channel)
    f = resolve_channel(args.free)
    compensator = resolve_channel(args.compensator) if args.compensator else None
    rows = smooth_rows(e, f, args.R, args.k, m=args.m, compensator=compensator)
    if args.save:
        smoothed = smooth_channel(e, f.tensor_power(args.m), args.R, max(args.k), m=args.m,
                                  compensator=compensator)
        save_smoothed(smoothed, args.save)
    emit([SmoothRowOut(k=r.k, m=r.m, dmax=r.dmax, bound=r.bound, diamond=r.diamond,
                       max_cut_weight=r.max_cut_weight, cut_weight_bound=r.cut_weight_bound)
          for r in rows], args)
    return 0


def cmd_superchannel(args: argparse.Namespace) -> int:
    if args.mode == "choi-blind":
        lines = choi_blind_lines(min(args.nmax, 8) if args.n is None else args.n)
        emit(lines, args)
        return 0 if all(line.passed for line in lines) else 1

    if args.target is None:
        raise InputError("superchannel convert needs a source and a target channel")
    e1 = resolve_channel(args.source)
    e2 = resolve_channel(args.target)
    s1 = resolve_free_set(args.set1, e1)
    s2 = resolve_free_set(args.set2, e2)
    rows = conversion_trace(e1, e2, s1, s2, args.rate, args.eps, args.nmax)
    if args.save_recipe:
        save_recipe(rows[-1].recipe, args.save_recipe)
    emit([ConversionRowOut(
        n=r.n, target_copies=r.target_copies, probe=list(r.probe), type1_error=r.type1_error,
        t=r.t, s=r.s, deficit=r.deficit, deficit_bound=r.deficit_bound,
        diamond_error=r.diamond_error, diamond_bound=r.diamond_bound,
    ) for r in rows], args)
    return 0


def register(subparsers, common: argparse.ArgumentParser) -> None:
    p = subparsers.add_parser("smooth", parents=[common], help="D_max smoothing of E^(km)")
    p.add_argument("channel", help="Single-copy channel E")
    p.add_argument("free", help="Single-copy free channel F (F_m = F^m)")
    p.add_argument("--R", type=float, required=True, help="Rate parameter R > 0")
    p.add_argument("--k", type=int, nargs="+", default=[1, 2, 3], help="Values of k")
    p.add_argument("--m", type=int, default=1, help="Copies inside F_m")
    p.add_argument("--compensator", default=None, help="Channel refilling the cut weight (default: F)")
    p.add_argument("--save", default=None, help="Write the smoothed channel for the largest k here")
    p.set_defaults(handler=cmd_smooth)

    p = subparsers.add_parser("superchannel", parents=[common], help="Superchannel constructions")
    p.add_argument("mode", choices=["choi-blind", "convert"])
    p.add_argument("source", nargs="?", default=None, help="E1 for convert")
    p.add_argument("target", nargs="?", default=None, help="E2 for convert")
    p.add_argument("--n", type=int, default=None, help="Largest n for choi-blind (default: min(nmax, 8))")
    p.add_argument("--set1", default=None, help="Free set of E1 (default: replacer)")
    p.add_argument("--set2", default=None, help="Free set of E2 (default: replacer)")
    p.add_argument("--rate", type=float, default=0.5, help="Target copies per source copy")
    p.add_argument("--save-recipe", default=None, help="Write the recipe of the last row here")
    p.set_defaults(handler=cmd_superchannel)
