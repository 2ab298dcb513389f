import sys
from argparse import ArgumentParser

from core.commands import COMMANDS, run_command

if __name__ == "__main__":
    parser = ArgumentParser(
        description="Symmetries, spectra, dynamics and invariants of non-Hermitian Hamiltonians"
    )
    parser.add_argument("command", type=str, choices=COMMANDS.keys())
    parser.add_argument("--config", type=str, required=True)
    parser.add_argument("--out", type=str, default=None)
    parser.add_argument("--halve-step", action="store_true")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args()

    sys.exit(
        int(
            run_command(
                args.command,
                args.config,
                out=args.out,
                halve_step=args.halve_step,
                quiet=args.quiet,
            )
        )
    )
