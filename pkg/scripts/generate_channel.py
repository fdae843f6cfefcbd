#!/usr/bin/env python3
"""
Script to write channel-spec files.
Writes catalogue channels by name, or seeded random channels, as JSON files
that every cq-stein subcommand accepts.

Usage:
    python scripts/generate_channel.py flip --out config/channels/flip.json
    python scripts/generate_channel.py --random 3 2 --seed 7 --out random.json
    python scripts/generate_channel.py --all --out-dir config/channels
"""
import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from cqstein.core.config import settings  # noqa: E402
from cqstein.core.errors import CqSteinError  # noqa: E402
from cqstein.services import catalogue  # noqa: E402
from cqstein.services.channel_io import save_channel  # noqa: E402
from cqstein.services.qstate import random_channel  # noqa: E402

logger = logging.getLogger("generate_channel")


def main():
    parser = argparse.ArgumentParser(
        description="Write channel-spec files for catalogue or random channels",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    # One catalogue channel
    python scripts/generate_channel.py depolarizing --out depolarizing.json

    # A random channel with |X| = 4 letters and a qutrit output
    python scripts/generate_channel.py --random 4 3 --seed 11 --out random_4x3.json

    # Every catalogue channel into a directory
    python scripts/generate_channel.py --all --out-dir config/channels
        """,
    )
    parser.add_argument("name", nargs="?", choices=catalogue.available(), help="Catalogue channel")
    parser.add_argument("--random", nargs=2, type=int, metavar=("K", "D"),
                        help="Random channel with K letters and output dimension D")
    parser.add_argument("--seed", type=int, default=settings.SEED,
                        help=f"Seed for --random (default: {settings.SEED})")
    parser.add_argument("--all", action="store_true", help="Write every catalogue channel")
    parser.add_argument("--out", help="Output file for a single channel")
    parser.add_argument("--out-dir", default=".", help="Output directory for --all (default: .)")

    args = parser.parse_args()
    logging.basicConfig(level=settings.effective_log_level,
                        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    try:
        if args.all:
            out_dir = Path(args.out_dir)
            for name in catalogue.available():
                path = save_channel(catalogue.get_channel(name), out_dir / f"{name}.json", name=name)
                print(f"   {path}")
            return 0

        if args.random:
            k, d = args.random
            channel = random_channel(k, d, np.random.default_rng(args.seed))
            label = f"random_{k}x{d}_seed{args.seed}"
        elif args.name:
            channel = catalogue.get_channel(args.name)
            label = args.name
        else:
            parser.error("give a catalogue name, --random K D or --all")

        path = save_channel(channel, args.out or f"{label}.json", name=label)
        print(f"Wrote {label} {channel.shape} -> {path}")
        return 0
    except CqSteinError as e:
        logger.error(f"{e.error}: {e.message}")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
