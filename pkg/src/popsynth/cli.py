"""Command line entry point: ``popsynth generate|verify|plot``.

Exit codes: 0 success, 1 validation error, 2 infeasible input, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .errors import OutputError, PopSynthError, ValidationError

log = logging.getLogger("popsynth")

POPULATION_FILE = "population.csv"
MANIFEST_FILE = "manifest.json"
METRICS_FILE = "metrics.json"


def _u64(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


class _Staged:
    """Collect output files in temporaries; move them into place only on commit."""

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)
        self.pending = []

    def path(self, name):
        fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=self.out_dir)
        os.close(fd)
        self.pending.append((Path(tmp), self.out_dir / name))
        return Path(tmp)

    def commit(self):
        for tmp, final in self.pending:
            os.replace(tmp, final)
        self.pending = []

    def discard(self):
        for tmp, _ in self.pending:
            tmp.unlink(missing_ok=True)
        self.pending = []


def cmd_generate(args):
    from .config import load_config
    from .emit import write_manifest, write_population
    from .pipeline import run_generation

    cfg = load_config(args.config, seed=args.seed)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {out}: {exc.strerror}") from exc
    result = run_generation(cfg)
    staged = _Staged(out)
    try:
        n = write_population(result.population, staged.path(POPULATION_FILE), district=cfg.region)
        staged.path(METRICS_FILE).write_text(result.metrics.to_json(), encoding="utf-8")
        counts = dict(result.counts, rows=n)
        write_manifest(staged.path(MANIFEST_FILE), cfg.seed, cfg.region, cfg.inputs,
                       result.convergence, result.metrics, counts)
        staged.commit()
    except BaseException:
        staged.discard()
        raise
    log.info("wrote %d persons to %s", n, out / POPULATION_FILE)
    return 0


def cmd_verify(args):
    from .config import load_config
    from .emit import read_population
    from .ingest import load_seed_sample
    from .pipeline import verify

    cfg = load_config(args.config)
    source = load_seed_sample(args.source)
    synthetic = read_population(args.synthetic)
    if not synthetic.persons:
        raise ValidationError(f"{args.synthetic}: population is empty")
    report = verify(source, synthetic, cfg)
    out = Path(args.out)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(report.to_json(), encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {out}: {exc.strerror}") from exc
    log.info("wrote %d comparisons to %s", len(report.entries), out)
    return 0


def cmd_plot(args):
    from .emit import read_population
    from .ingest import load_boundary, load_seed_sample
    from .metrics import emit_plots

    pop = read_population(args.population)
    if not pop.persons:
        raise ValidationError(f"{args.population}: population is empty")
    boundary = load_boundary(args.boundary)
    source = load_seed_sample(args.source) if args.source else None
    files = emit_plots(source, pop, args.out, boundary=boundary)
    log.info("wrote %d plot files to %s", len(files), args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="popsynth", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--workers", type=_positive, default=1,
                        help="cap on worker processes (all stages currently run in one)")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log errors")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="synthesise a population from a config file")
    g.add_argument("--config", required=True)
    g.add_argument("--seed", type=_u64, help="override the configured seed")
    g.add_argument("--out", default=".", help="output directory (default: current)")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("verify", help="compare a synthetic population with its seed sample")
    v.add_argument("--source", required=True, help="seed sample CSV")
    v.add_argument("--synthetic", required=True, help="population CSV")
    v.add_argument("--config", required=True)
    v.add_argument("--out", default=METRICS_FILE, help="report path (default: metrics.json)")
    v.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot", help="write comparison and geographic plots")
    p.add_argument("--population", required=True)
    p.add_argument("--boundary", required=True)
    p.add_argument("--out", required=True, help="output directory (created if missing)")
    p.add_argument("--source", help="seed sample CSV for side-by-side panels")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except PopSynthError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except OSError as exc:
        log.error("%s", exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
