"""Command line entry point ``dmetric``.

Exit codes: 0 success, 2 configuration or argument error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .experiment import (
    ConfigError,
    format_kappa,
    format_tables,
    load_config,
    run_kappa,
    run_probe,
    run_sweep,
    run_tables,
    sweep_csv,
)

log = logging.getLogger("dmetric")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dmetric", description="Disagreement distance between classifier networks.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="experiment JSON")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")

    p = sub.add_parser("tables", help="Euclidean and d_mu tables with oracle cross-checks")
    common(p)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("sweep", help="d_mu over a two-parameter grid, as CSV")
    common(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--measure", default=None, help="measure name (default: sweep.measure or the first)")

    p = sub.add_parser("kappa", help="density bound kappa for each configured measure")
    common(p)

    p = sub.add_parser("probe", help="continuity probe around a named network")
    common(p)
    p.add_argument("--center", required=True)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--neighbors", type=int, default=100)
    p.add_argument("--measure", default=None)
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    return parser


def _dispatch(args) -> None:
    cfg = load_config(args.config, args.seed)
    if args.command == "tables":
        report = run_tables(cfg, args.out, args.threads)
        print(format_tables(report))
    elif args.command == "sweep":
        text = sweep_csv(run_sweep(cfg, args.threads, args.measure))
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        log.info("wrote %s", out)
    elif args.command == "kappa":
        print(format_kappa(run_kappa(cfg)))
    elif args.command == "probe":
        result = run_probe(cfg, args.center, args.radius, args.neighbors, args.measure, args.threads)
        text = json.dumps(result, indent=2) + "\n"
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        _dispatch(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
