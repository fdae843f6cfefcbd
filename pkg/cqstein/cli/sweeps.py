"""
Subcommands: sweep-stein, sweep-gqsl.
"""
import argparse
import logging

from cqstein.cli.common import emit, resolve_channel, resolve_free_set
from cqstein.core.errors import InputError
from cqstein.schemas import SteinRowOut, SweepRowOut
from cqstein.services.divergences import stein_sweep
from cqstein.services.experiments import sweep_gqsl

logger = logging.getLogger(__name__)


def _letter_state(value: str, letter: int):
    channel = resolve_channel(value)
    if not 0 <= letter < channel.alphabet_size:
        raise InputError(f"letter {letter} outside alphabet of size {channel.alphabet_size}",
                         {"source": value})
    return channel.output(letter)


def cmd_sweep_stein(args: argparse.Namespace) -> int:
    rho = _letter_state(args.rho, args.letter)
    sigma = _letter_state(args.sigma, args.letter)
    rows = stein_sweep(rho, sigma, args.eps, args.nmax, args.alpha)
    emit([SteinRowOut(n=r.n, dh_over_n=r.dh_over_n, d=r.d, upper_bound=r.upper_bound) for r in rows], args)
    return 0


def cmd_sweep_gqsl(args: argparse.Namespace) -> int:
    e = resolve_channel(args.channel)
    s = resolve_free_set(args.set, e)
    rows = sweep_gqsl(e, s, args.eps, args.nmax, args.alpha)
    emit([SweepRowOut(n=r.n, dh_over_n=r.dh_over_n, d_over_n=r.d_over_n, upper_bound=r.upper_bound,
                      wall_ms=r.wall_ms, note=r.note) for r in rows], args)
    return 0


def register(subparsers, common: argparse.ArgumentParser) -> None:
    p = subparsers.add_parser("sweep-stein", parents=[common], help="State-level Stein sweep")
    p.add_argument("rho", help="Channel file or catalogue:<name>; its --letter output is rho")
    p.add_argument("sigma", help="Channel file or catalogue:<name>; its --letter output is sigma")
    p.add_argument("--letter", type=int, default=0, help="Letter whose output is used (default: 0)")
    p.set_defaults(handler=cmd_sweep_stein)

    p = subparsers.add_parser("sweep-gqsl", parents=[common], help="Channel-level Stein sweep against a free set")
    p.add_argument("channel")
    p.add_argument("--set", default=None, help="Free-set spec file or kind (default: replacer)")
    p.set_defaults(handler=cmd_sweep_gqsl)
