"""Command-line entry point: ``antnet {simulate,meanfield,theory,dump-network}``.

Exit codes: 0 success, 1 configuration error, 2 some sweep cells failed.
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import analysis, harness
from .config import load_config, parse_range
from .errors import ConfigurationError

log = logging.getLogger("antnet")


def _simulate(args) -> int:
    cfg = load_config(args.config)
    code = 0
    if cfg.mode in ("colony", "both"):
        outcome = harness.run_sweep(cfg, out_dir=args.out, threads=args.threads, resume=args.resume)
        log.info("colony sweep finished in %.1f s -> %s", outcome.seconds, outcome.out_dir)
        for (i, j), msg in sorted(outcome.failures.items()):
            log.error("cell omega=%s alpha=%s failed: %s", cfg.omegas[i], cfg.alphas[j], msg)
        code = outcome.exit_code
    if cfg.mode in ("meanfield", "both"):
        harness.run_meanfield(cfg, out_dir=args.out, threads=args.threads)
    return code


def _meanfield(args) -> int:
    cfg = load_config(args.config)
    out = harness.run_meanfield(cfg, out_dir=args.out, threads=args.threads)
    log.info("mean-field results written to %s", out)
    return 0


def _theory(args) -> int:
    try:
        alphas = parse_range(args.alpha_grid)
    except ValueError as exc:
        raise ConfigurationError(f"--alpha-grid: {exc}")
    rows = harness.theory_rows(args.J, args.h, alphas)
    w = sys.stdout
    w.write(",".join(harness.THEORY_HEADER) + "\n")
    for row in rows:
        w.write(",".join(v if isinstance(v, str) else analysis.fmt(v) for v in row) + "\n")
    return 0


def _dump(args) -> int:
    cfg = load_config(args.config)
    lines = harness.dump_network(cfg, args.omega, args.ants)
    if args.output:
        with open(args.output, "w") as fh:
            for line in lines:
                fh.write(line + "\n")
    else:
        for line in lines:
            sys.stdout.write(line + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="antnet", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run the colony sweep (and mean-field if mode says so)")
    s.add_argument("--config", required=True)
    s.add_argument("--threads", type=int, default=None)
    s.add_argument("--resume", action="store_true", help="skip cells already on disk")
    s.add_argument("--out", default=None, help=f"output directory (overrides ${harness.OUT_ENV})")
    s.set_defaults(func=_simulate)

    m = sub.add_parser("meanfield", help="closed-form theory and SDE integration per cell")
    m.add_argument("--config", required=True)
    m.add_argument("--threads", type=int, default=None)
    m.add_argument("--out", default=None)
    m.set_defaults(func=_meanfield)

    t = sub.add_parser("theory", help="print m_star, alpha_s, alpha_c over an alpha grid")
    t.add_argument("--J", type=float, required=True)
    t.add_argument("--h", type=float, required=True)
    t.add_argument("--alpha-grid", required=True, help="lo:hi:step, inclusive")
    t.set_defaults(func=_theory)

    d = sub.add_parser("dump-network", help="write the frozen-mode network for one omega")
    d.add_argument("--config", required=True)
    d.add_argument("--omega", type=float, required=True)
    d.add_argument("--ants", type=int, default=None, help="network size (default: T)")
    d.add_argument("-o", "--output", default=None)
    d.set_defaults(func=_dump)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
