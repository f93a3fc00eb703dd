"""Command-line front end: ``supranet {gen,spectrum,sweep,theory,compare}``.

Exit status is 0 on success, 1 on a usage error and 2 on a runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from . import harness
from .coupling import CoupledSystem, InterlinkSet, Strategy, couple_meanfield, interlink_sequence
from .errors import SupranetError
from .generators import MODELS, GenSpec, generate
from .graph import format_edge_list, laplacian, load_edge_list
from .spectral import fiedler_pair, full_spectrum
from .theory import perturbation_estimate, prediction_from_fiedler

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_text(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _cmd_gen(args) -> None:
    spec = GenSpec(model=args.model, n=args.n or 0, k=args.k, m=args.m, p=args.p,
                   side=args.side or 0, seed=args.seed)
    _write_text(format_edge_list(generate(spec)), args.output)


def _system(args) -> CoupledSystem | None:
    if args.strategy is None:
        return None
    layer = load_edge_list(args.layer)
    strategy = Strategy.parse(args.strategy)
    if strategy.is_meanfield:
        return couple_meanfield(layer, strategy, args.alpha)
    if args.count is None:
        raise UsageError(f"--count is required for {strategy.value} interlinks")
    pairs = interlink_sequence(layer.n, strategy, args.count, args.seed)
    return CoupledSystem(layer, InterlinkSet(strategy, pairs), args.alpha)


def _cmd_spectrum(args) -> None:
    system = _system(args)
    q = laplacian(load_edge_list(args.layer)) if system is None else system.supra_laplacian()
    w, _ = full_spectrum(q)
    lines = ["index,eigenvalue"] + [f"{i},{_fmt(v)}" for i, v in enumerate(w)]
    _write_text("\n".join(lines) + "\n", args.output)


def _cmd_sweep(args) -> None:
    cfg = harness.SweepConfig.from_json(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.realizations is not None:
        overrides["realizations"] = args.realizations
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    records = harness.run_sweep(cfg, workers=args.workers, timing=args.timing)
    harness.write_csv(records, args.output or cfg.output, harness.SweepRecord)
    if args.aggregate:
        harness.write_csv(harness.aggregate(records), args.aggregate, harness.AggregateRecord)
    failed = sum(1 for r in records if not r.ok)
    if failed:
        print(f"warning: {failed} of {len(records)} rows failed", file=sys.stderr)


def _cmd_theory(args) -> None:
    layer = load_edge_list(args.layer)
    n1 = layer.n
    omega = fiedler_pair(laplacian(layer)).mu
    strategies = ["diagonal", "general"] if args.strategy == "both" else [args.strategy]
    out = [f"n1: {n1}", f"omega_fiedler: {_fmt(omega)}"]
    for name in strategies:
        pred = prediction_from_fiedler(omega, n1, name)
        out += ["", f"strategy: {name}",
                f"alpha_threshold: {_fmt(pred.alpha_threshold)}",
                f"link_threshold: {_fmt(pred.link_threshold)}",
                f"first_link_count: {pred.first_link_count}"]
        if args.points > 0:
            out.append("alpha,mu_meanfield")
            for a in np.linspace(0.0, 2.0 * pred.alpha_threshold, args.points):
                out.append(f"{_fmt(a)},{_fmt(pred.mu(a))}")
        if args.interlinks:
            pairs = interlink_sequence(n1, name, args.interlinks, args.seed)
            est = perturbation_estimate(CoupledSystem(layer, InterlinkSet(name, pairs)))
            out += [f"interlinks: {args.interlinks}", f"seed: {args.seed}",
                    f"mu1: {_fmt(est.mu1)}", f"mu2: {_fmt(est.mu2)}",
                    "alpha,estimate2,bound0,bound1"]
            for a in args.alpha:
                out.append(f"{_fmt(a)},{_fmt(est.estimate(a))},{_fmt(est.bound0(a))},"
                           f"{_fmt(est.bound1(a))}")
    _write_text("\n".join(out) + "\n", args.output)


def _cmd_compare(args) -> None:
    records = harness.read_csv(args.records, harness.SweepRecord)
    rows = harness.compare(records)
    harness.write_csv(rows, args.output, harness.CompareRecord)
    sweeps = {(r.model, r.n1, r.strategy) for r in rows}
    if len(sweeps) == 1 and len(rows) >= 3:
        t = harness.detect_transition(rows)
        flag = " (low confidence)" if t.low_confidence else ""
        print(f"transition at count {t.count}, angle jump {t.jump:.4g}{flag}; "
              f"mean-field threshold {t.theory_threshold:.6g}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="supranet", description="Spectral analysis of two coupled network layers.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="emit a model graph as an edge list")
    g.add_argument("--model", required=True, type=str.upper, choices=MODELS)
    g.add_argument("--n", type=int, help="number of nodes (LA: must be a cube)")
    g.add_argument("--k", type=int, default=6, help="degree (RR) or ring neighbours (WS)")
    g.add_argument("--m", type=int, default=3, help="links per new node (BA)")
    g.add_argument("--p", type=float, default=0.1, help="rewiring probability (WS)")
    g.add_argument("--side", type=int, help="torus side (LA)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output")
    g.set_defaults(func=_cmd_gen)

    s = sub.add_parser("spectrum", help="full Laplacian spectrum of a layer or coupled system")
    s.add_argument("--layer", required=True, help="edge-list file")
    s.add_argument("--strategy", choices=[x.value for x in Strategy],
                   help="couple two copies of the layer")
    s.add_argument("--count", type=int, help="number of explicit interlinks")
    s.add_argument("--alpha", type=float, default=1.0, help="coupling weight")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output")
    s.set_defaults(func=_cmd_spectrum)

    w = sub.add_parser("sweep", help="run an interlink-count sweep from a JSON config")
    w.add_argument("--config", required=True)
    w.add_argument("--seed", type=int, help="override the config's master seed")
    w.add_argument("--realizations", type=int)
    w.add_argument("--workers", type=int, default=1)
    w.add_argument("--timing", action="store_true", help="record wall time per row")
    w.add_argument("--aggregate", help="also write per-count aggregates here")
    w.add_argument("-o", "--output", help="record CSV (default: config output or stdout)")
    w.set_defaults(func=_cmd_sweep)

    t = sub.add_parser("theory", help="mean-field thresholds and perturbation estimates")
    t.add_argument("--layer", required=True)
    t.add_argument("--strategy", choices=["diagonal", "general", "both"], default="both")
    t.add_argument("--points", type=int, default=11, help="samples of the mean-field curve")
    t.add_argument("--interlinks", type=int, default=0,
                   help="draw this many interlinks for perturbation estimates")
    t.add_argument("--alpha", type=float, nargs="+", default=[0.01, 0.05, 0.1])
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("-o", "--output")
    t.set_defaults(func=_cmd_theory)

    c = sub.add_parser("compare", help="aggregate a sweep CSV next to the mean-field prediction")
    c.add_argument("--records", required=True, help="CSV written by 'sweep'")
    c.add_argument("-o", "--output")
    c.set_defaults(func=_cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (SupranetError, OSError) as exc:
        print(f"supranet: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
