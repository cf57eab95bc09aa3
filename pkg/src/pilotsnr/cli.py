"""Command-line front end.

Subcommands:

* ``run``       run the configured Monte Carlo comparison and write a CSV
* ``design``    print the closed-form stationary water-filling design
* ``validate``  run the built-in self-check suites

Exit codes: 0 on success, 1 when a validation suite fails, 2 on usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from . import design, validate
from .experiment import ConfigError, emit_csv, load_config, run_detailed, run_metadata


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pilotsnr",
        description=(
            "Pilot design and tracking simulator for correlated multi-antenna "
            "downlink training"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser(
        "run", help="run the Monte Carlo comparison and write per-block curves"
    )
    p_run.add_argument("--config", required=True, help="path to a key = value config file")
    p_run.add_argument("--out", required=True, help="output CSV path")
    p_run.add_argument(
        "--seed", type=int, default=None, help="override the config seed"
    )
    p_run.add_argument(
        "--genie-snr",
        action="store_true",
        help="also record the realized data SNR with the true channel",
    )
    p_run.add_argument(
        "--check-dominance",
        action="store_true",
        help="assert per block that the relaxed design beats the baselines "
        "at design time",
    )

    p_design = sub.add_parser(
        "design", help="print the stationary closed-form power allocation"
    )
    p_design.add_argument("--config", required=True, help="path to a config file")
    p_design.add_argument(
        "--block-iid",
        action="store_true",
        required=True,
        help="use the memoryless closed-form design (required; the tracked "
        "designs are belief-dependent and have no single table)",
    )

    p_val = sub.add_parser("validate", help="run the built-in self checks")
    p_val.add_argument(
        "--quick", action="store_true", help="smaller instance counts"
    )
    return parser


def _load(path: str):
    try:
        return load_config(path)
    except FileNotFoundError:
        print(f"error: config file not found: {path}", file=sys.stderr)
        return None
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _load(args.config)
    if cfg is None:
        return 2
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    points, n_warnings = run_detailed(
        cfg, include_genie=args.genie_snr, check_dominance=args.check_dominance
    )
    emit_csv(points, args.out, run_metadata(cfg, n_warnings))
    print(
        f"wrote {len(points)} rows ({len(cfg.methods)} methods x "
        f"{cfg.n_blocks} blocks, {cfg.n_trials} trials) to {args.out}"
    )
    if n_warnings:
        print(f"note: {n_warnings} design solves were not certified optimal")
    return 0


def _cmd_design(args: argparse.Namespace) -> int:
    cfg = _load(args.config)
    if cfg is None:
        return 2
    sub = cfg.subspace()
    rho = cfg.rho / cfg.noise_var
    solution = design.design_block_iid(
        sub.eigenvalues, cfg.gamma, rho, cfg.train_len
    )
    levels = dict(zip(solution.indices, solution.levels))
    print(
        f"stationary design: rank {sub.rank}, training length {cfg.train_len}, "
        f"budget {rho * cfg.train_len:.6g} (noise-relative)"
    )
    print(f"{'direction':>9}  {'eigenvalue':>12}  {'power':>12}")
    for idx in range(sub.rank):
        power = levels.get(idx, 0.0)
        marker = "" if power > 0.0 else "  (off)"
        print(
            f"{idx:>9}  {sub.eigenvalues[idx]:>12.6g}  {power:>12.6g}{marker}"
        )
    print(f"water level parameter: {solution.nu:.9g}")
    print(f"allocated power: {float(sum(solution.levels)):.9g}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    results = validate.run_all(quick=args.quick)
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{res.name}: {status} ({res.detail})")
    return 0 if all(res.passed for res in results) else 1


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "design":
        return _cmd_design(args)
    return _cmd_validate(args)


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
