"""Command-line entry point.

Subcommands:
  run <manifest>         execute any experiment manifest
  figure2 <out_dir>      extraction series for N = 2, 4, 6 at J = 2
  verify-rc <manifest>   exact vs effective solver comparison
  teleclone <manifest>   telecloning branches and Haar fidelity sweep
  ghzw <out_dir>         GHZ/W branch analysis of the five-center singlet

Exit codes: 0 success, 2 manifest/schema violation, 3 numerical or domain
failure. The SPINSCATTER_OUTPUT_DIR environment variable overrides output
directories.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .applications import UniquenessViolationError
from .extraction import ExtinctBranchError
from .manifest import ManifestError
from .scattering import NumericalInstabilityError, ResonanceInconsistencyError
from . import runner

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_NUMERICAL = 3

_NUMERICAL_ERRORS = (
    ExtinctBranchError,
    NumericalInstabilityError,
    UniquenessViolationError,
    ResonanceInconsistencyError,
    np.linalg.LinAlgError,
    ValueError,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinscatter",
        description="Scattering-mediated extraction of entangled spin states",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, needs_manifest in (
        ("run", True),
        ("verify-rc", True),
        ("teleclone", True),
        ("figure2", False),
        ("ghzw", False),
    ):
        p = sub.add_parser(name)
        if needs_manifest:
            p.add_argument("manifest", help="path to a JSON experiment manifest")
            p.add_argument("--output-dir", default=None, help="override the output directory")
        else:
            p.add_argument("out_dir", help="directory for the generated artifacts")
    return parser


def _expect_experiment(path: str, expected: str) -> None:
    from .manifest import load_manifest

    manifest = load_manifest(path)
    if manifest.experiment != expected:
        raise ManifestError("experiment", f"this command requires '{expected}'")


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            artifacts = runner.run_manifest(args.manifest, args.output_dir)
        elif args.command == "verify-rc":
            _expect_experiment(args.manifest, "scatter-verify")
            artifacts = runner.run_manifest(args.manifest, args.output_dir)
        elif args.command == "teleclone":
            _expect_experiment(args.manifest, "teleclone")
            artifacts = runner.run_manifest(args.manifest, args.output_dir)
        elif args.command == "figure2":
            out = runner.resolve_output_dir(args.out_dir)
            artifacts = runner.figure2(out)
        elif args.command == "ghzw":
            out = runner.resolve_output_dir(args.out_dir)
            from .manifest import parse_manifest

            manifest = parse_manifest({"experiment": "ghzw", "config": {}})
            artifacts = runner._run_ghzw(manifest, out)
        else:  # pragma: no cover - argparse enforces the choices
            raise AssertionError(args.command)
    except ManifestError as exc:
        print(f"manifest error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except _NUMERICAL_ERRORS as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in artifacts:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
