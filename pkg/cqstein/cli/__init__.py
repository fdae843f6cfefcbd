"""
CLI subcommands - combines all subcommand groups.
"""
from cqstein.cli import divergence, reports, resources, sweeps
from cqstein.cli.common import common_options


def register_all(subparsers) -> None:
    common = common_options()

    # Include all subcommand groups
    divergence.register(subparsers, common)
    resources.register(subparsers, common)
    sweeps.register(subparsers, common)
    reports.register(subparsers, common)


__all__ = ["register_all"]
