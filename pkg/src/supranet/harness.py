"""Interlink-count sweeps, aggregation, transition detection and CSV output.

A sweep draws one layer and one nested interlink sequence per realization,
then walks the count grid. Realization ``r`` is seeded from
``SeedSequence([seed, r])``, so results do not depend on scheduling or on the
number of workers.
"""

from __future__ import annotations

import csv
import json
import math
import os
import sys
import time
import typing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .coupling import CoupledSystem, InterlinkSet, Strategy, interlink_sequence
from .errors import InsufficientData, ParameterError, SupranetError
from .generators import GenSpec, generate
from .graph import Graph, laplacian, load_edge_list
from .metrics import partition_report
from .spectral import fiedler_pair
from .theory import prediction_from_fiedler

__all__ = [
    "DEFAULT_POINTS",
    "DEFAULT_REALIZATIONS",
    "SweepConfig",
    "SweepRecord",
    "AggregateRecord",
    "CompareRecord",
    "TransitionEstimate",
    "default_counts",
    "run_sweep",
    "aggregate",
    "detect_transition",
    "detect_transition_curve",
    "compare",
    "write_csv",
    "read_csv",
]

DEFAULT_POINTS = 50
DEFAULT_REALIZATIONS = 30
SOLVERS = ("auto", "dense", "iterative")
MODEL_DEFAULTS = {"RR": {"k": 6}, "WS": {"k": 6, "p": 0.1}, "BA": {"m": 3}, "LA": {}}
CONFIG_KEYS = {"model", "n", "k", "m", "p", "side", "seed", "strategy", "counts",
               "count_grid", "realizations", "solver", "output", "layer"}

# a jump counts as a clear transition only if it is this large and this
# many times the typical remaining step
MIN_JUMP = 0.1
JUMP_RATIO = 3.0


def _grid(lo: int, hi: int, points: int) -> tuple[int, ...]:
    if points < 1 or hi < lo:
        raise ParameterError(f"invalid count grid min={lo} max={hi} points={points}")
    return tuple(int(c) for c in np.unique(np.rint(np.linspace(lo, hi, points)).astype(np.int64)))


def default_counts(n1: int, strategy: Strategy | str, points: int = DEFAULT_POINTS) -> tuple[int, ...]:
    """Evenly spaced counts in ``[1, n1]`` (diagonal) or ``[1, 4 n1]`` (general)."""
    strategy = Strategy.parse(strategy)
    hi = n1 if strategy is Strategy.DIAGONAL else min(4 * n1, n1 * n1)
    return _grid(1, hi, points)


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: a layer source, a strategy and a count grid.

    The layer is either drawn from ``gen`` for each realization or fixed by
    ``layer`` (already loaded, e.g. from an edge list at ``layer_path``).
    An empty ``counts`` selects the default grid.
    """

    gen: GenSpec | None = None
    strategy: Strategy = Strategy.DIAGONAL
    counts: tuple[int, ...] = ()
    realizations: int = DEFAULT_REALIZATIONS
    seed: int = 0
    solver: str = "auto"
    output: str | None = None
    layer: Graph | None = field(default=None, repr=False)
    layer_path: str | None = None

    def __post_init__(self):
        strategy = Strategy.parse(self.strategy)
        if strategy.is_meanfield:
            raise ParameterError("sweeps use explicit interlinks: diagonal or general")
        object.__setattr__(self, "strategy", strategy)
        if (self.gen is None) == (self.layer is None):
            raise ParameterError("give exactly one of a generator spec or a fixed layer")
        if self.realizations < 1:
            raise ParameterError(f"realizations must be positive, got {self.realizations}")
        if self.solver not in SOLVERS:
            raise ParameterError(f"unknown solver {self.solver!r}; expected one of {SOLVERS}")
        n1 = self.n1
        counts = tuple(int(c) for c in self.counts) or default_counts(n1, strategy)
        limit = n1 if strategy is Strategy.DIAGONAL else n1 * n1
        bad = [c for c in counts if not 0 <= c <= limit]
        if bad:
            raise ParameterError(f"{strategy.value} counts must lie in 0..{limit}, got {bad}")
        object.__setattr__(self, "counts", tuple(sorted(set(counts))))

    @property
    def n1(self) -> int:
        return self.layer.n if self.layer is not None else self.gen.n

    @property
    def model(self) -> str:
        return self.gen.model if self.gen is not None else "file"

    @classmethod
    def from_dict(cls, data: dict, base_dir: str | os.PathLike | None = None) -> SweepConfig:
        unknown = set(data) - CONFIG_KEYS
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        if "counts" in data and "count_grid" in data:
            raise ParameterError("give either counts or count_grid, not both")
        layer = layer_path = gen = None
        if data.get("layer"):
            layer_path = str(data["layer"])
            if base_dir is not None and not os.path.isabs(layer_path):
                layer_path = os.path.join(base_dir, layer_path)
            layer = load_edge_list(layer_path)
        else:
            model = str(data.get("model", "RR")).upper()
            params = dict(MODEL_DEFAULTS.get(model, {}))
            params.update({k: data[k] for k in ("k", "m", "p", "side") if k in data})
            gen = GenSpec(model=model, n=int(data.get("n", 0)), **params)
        strategy = Strategy.parse(data.get("strategy", "diagonal"))
        counts: tuple[int, ...] = tuple(int(c) for c in data.get("counts", ()))
        if "count_grid" in data:
            g = data["count_grid"]
            n1 = layer.n if layer is not None else gen.n
            default = default_counts(n1, strategy)
            counts = _grid(int(g.get("min", default[0])), int(g.get("max", default[-1])),
                           int(g.get("points", DEFAULT_POINTS)))
        return cls(
            gen=gen, strategy=strategy, counts=counts,
            realizations=int(data.get("realizations", DEFAULT_REALIZATIONS)),
            seed=int(data.get("seed", 0)), solver=str(data.get("solver", "auto")).lower(),
            output=data.get("output"), layer=layer, layer_path=layer_path,
        )

    @classmethod
    def from_json(cls, path: str | os.PathLike) -> SweepConfig:
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParameterError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ParameterError(f"{path}: config must be a JSON object")
        return cls.from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))


@dataclass(frozen=True)
class SweepRecord:
    model: str
    n1: int
    strategy: str
    count: int
    realization: int
    mu: float
    mu_gap: float
    cut_size: float
    interlink_cut_fraction: float
    angle: float
    entropy: float
    degenerate: bool
    wall_time_ms: float
    layer_mu: float
    r_size: int
    s_size: int
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


AGG_METRICS = ("mu", "mu_gap", "cut_size", "interlink_cut_fraction", "angle", "entropy", "layer_mu")


@dataclass(frozen=True)
class AggregateRecord:
    """Mean and population variance of each metric at one count.

    Only rows without error and without a degenerate Fiedler pair enter the
    statistics; ``rows == 0`` marks an empty aggregate (all NaN).
    """

    model: str
    n1: int
    strategy: str
    count: int
    rows: int
    degenerate_excluded: int
    failed: int
    mu_mean: float
    mu_var: float
    mu_gap_mean: float
    mu_gap_var: float
    cut_size_mean: float
    cut_size_var: float
    interlink_cut_fraction_mean: float
    interlink_cut_fraction_var: float
    angle_mean: float
    angle_var: float
    entropy_mean: float
    entropy_var: float
    layer_mu_mean: float
    layer_mu_var: float


@dataclass(frozen=True)
class CompareRecord(AggregateRecord):
    mu_theory: float
    l_threshold: float


@dataclass(frozen=True)
class TransitionEstimate:
    count: int
    jump: float
    low_confidence: bool
    theory_threshold: float


def _failed_row(cfg: SweepConfig, count: int, r: int, layer_mu: float, exc: Exception) -> SweepRecord:
    nan = math.nan
    msg = "".join(ch if ch.isprintable() else " " for ch in f"{type(exc).__name__}: {exc}")
    return SweepRecord(cfg.model, cfg.n1, cfg.strategy.value, count, r, nan, nan, nan, nan, nan,
                       nan, False, 0.0, layer_mu, 0, 0, msg)


def _realization(cfg: SweepConfig, r: int, timing: bool = False) -> list[SweepRecord]:
    layer_seed, link_seed = np.random.SeedSequence([cfg.seed, r]).spawn(2)
    layer_mu = math.nan
    try:
        layer = cfg.layer if cfg.layer is not None else generate(cfg.gen, seed=layer_seed)
        layer_mu = fiedler_pair(laplacian(layer), solver=cfg.solver).mu
        sequence = interlink_sequence(layer.n, cfg.strategy, max(cfg.counts), link_seed)
    except SupranetError as exc:
        return [_failed_row(cfg, c, r, layer_mu, exc) for c in cfg.counts]
    out = []
    for c in cfg.counts:
        t0 = time.perf_counter()
        try:
            system = CoupledSystem(layer, InterlinkSet(cfg.strategy, sequence[:c]), 1.0)
            res = fiedler_pair(system.supra_laplacian(), solver=cfg.solver)
            rep = partition_report(system, res)
        except SupranetError as exc:
            out.append(_failed_row(cfg, c, r, layer_mu, exc))
            continue
        elapsed = (time.perf_counter() - t0) * 1e3 if timing else 0.0
        out.append(SweepRecord(
            model=cfg.model, n1=layer.n, strategy=cfg.strategy.value, count=c, realization=r,
            mu=max(res.mu, 0.0), mu_gap=res.gap, cut_size=rep.cut_size,
            interlink_cut_fraction=rep.cut.interlink_cut_fraction, angle=rep.angle,
            entropy=rep.entropy, degenerate=res.degenerate, wall_time_ms=elapsed,
            layer_mu=layer_mu, r_size=len(rep.set_r), s_size=len(rep.set_s),
        ))
    return out


def run_sweep(cfg: SweepConfig, workers: int = 1, timing: bool = False) -> list[SweepRecord]:
    """All records of ``cfg`` sorted by ``(count, realization)``.

    ``timing`` fills ``wall_time_ms``; it is off by default so that output
    files are byte-reproducible.
    """
    reps = range(cfg.realizations)
    if workers > 1 and cfg.realizations > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_realization, [cfg] * len(reps), reps, [timing] * len(reps)))
    else:
        chunks = [_realization(cfg, r, timing) for r in reps]
    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda rec: (rec.count, rec.realization))
    return records


def _groups(records: typing.Iterable[SweepRecord]) -> dict[tuple, list[SweepRecord]]:
    groups: dict[tuple, list[SweepRecord]] = {}
    for rec in records:
        groups.setdefault((rec.model, rec.n1, rec.strategy, rec.count), []).append(rec)
    return dict(sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2], kv[0][3])))


def _aggregate_group(key: tuple, rows: list[SweepRecord]) -> dict:
    used = [r for r in rows if r.ok and not r.degenerate]
    stats = {}
    for name in AGG_METRICS:
        vals = np.array([getattr(r, name) for r in used], dtype=float)
        vals = vals[np.isfinite(vals)]
        stats[f"{name}_mean"] = float(vals.mean()) if len(vals) else math.nan
        stats[f"{name}_var"] = float(vals.var()) if len(vals) else math.nan
    model, n1, strategy, count = key
    return dict(model=model, n1=n1, strategy=strategy, count=count, rows=len(used),
                degenerate_excluded=sum(1 for r in rows if r.ok and r.degenerate),
                failed=sum(1 for r in rows if not r.ok), **stats)


def aggregate(records: typing.Iterable[SweepRecord]) -> list[AggregateRecord]:
    return [AggregateRecord(**_aggregate_group(k, rows)) for k, rows in _groups(records).items()]


def _theory(strategy: str, n1: int, layer_mu: float, count: int) -> tuple[float, float]:
    if not math.isfinite(layer_mu):
        return math.nan, math.nan
    pred = prediction_from_fiedler(layer_mu, n1, strategy)
    return pred.mu_for_links(count), pred.link_threshold


def compare(records: typing.Iterable[SweepRecord]) -> list[CompareRecord]:
    """Aggregates plus the mean-field ``mu`` at each count and the threshold count.

    Both theory columns average the per-realization predictions, each taken
    from that realization's own layer.
    """
    out = []
    for key, rows in _groups(records).items():
        used = [r for r in rows if r.ok and not r.degenerate]
        preds = np.array([_theory(r.strategy, r.n1, r.layer_mu, r.count) for r in used],
                         dtype=float).reshape(-1, 2)
        preds = preds[np.all(np.isfinite(preds), axis=1)]
        mu_t, l_t = preds.mean(axis=0) if len(preds) else (math.nan, math.nan)
        out.append(CompareRecord(**_aggregate_group(key, rows),
                                 mu_theory=float(mu_t), l_threshold=float(l_t)))
    return out


def detect_transition_curve(counts, angles, theory_threshold: float = math.nan) -> TransitionEstimate:
    """Count just after the largest increase of the angle curve.

    The estimate is flagged ``low_confidence`` unless that increase is at
    least ``MIN_JUMP`` radians and ``JUMP_RATIO`` times the median of the
    other steps.
    """
    c = np.asarray(counts, dtype=float)
    a = np.asarray(angles, dtype=float)
    keep = np.isfinite(a)
    c, a = c[keep], a[keep]
    if len(c) < 3:
        raise InsufficientData(f"need at least 3 counts with a finite angle, got {len(c)}")
    order = np.argsort(c, kind="stable")
    c, a = c[order], a[order]
    diffs = np.diff(a)
    i = int(np.argmax(diffs))
    jump = float(diffs[i])
    rest = np.abs(np.delete(diffs, i))
    typical = float(np.median(rest)) if len(rest) else 0.0
    low = jump < MIN_JUMP or jump < JUMP_RATIO * typical
    return TransitionEstimate(int(c[i + 1]), jump, bool(low), float(theory_threshold))


def detect_transition(aggregates: typing.Sequence[AggregateRecord]) -> TransitionEstimate:
    """Transition count of one aggregated sweep, with the mean-field threshold alongside."""
    keys = {(a.model, a.n1, a.strategy) for a in aggregates}
    if len(keys) > 1:
        raise ParameterError(f"aggregates mix several sweeps: {sorted(keys)}")
    if len(aggregates) < 3:
        raise InsufficientData(f"need at least 3 counts, got {len(aggregates)}")
    layer_mu = np.array([a.layer_mu_mean for a in aggregates], dtype=float)
    layer_mu = layer_mu[np.isfinite(layer_mu)]
    first = aggregates[0]
    theory = (prediction_from_fiedler(float(layer_mu.mean()), first.n1, first.strategy).link_threshold
              if len(layer_mu) else math.nan)
    return detect_transition_curve([a.count for a in aggregates],
                                   [a.angle_mean for a in aggregates], theory)


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _record_type(rows: typing.Sequence) -> type | None:
    return type(rows[0]) if rows else None


def write_csv(rows: typing.Sequence, path: str | os.PathLike | None, cls: type | None = None) -> None:
    """Write dataclass rows with a header; ``path`` of ``None`` or ``"-"`` means stdout.

    ``cls`` fixes the header for an empty ``rows``; it defaults to
    :class:`SweepRecord`.
    """
    cls = cls or _record_type(rows) or SweepRecord
    names = [f.name for f in fields(cls)]

    def emit(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in rows:
            d = asdict(row)
            writer.writerow([_format(d[name]) for name in names])

    if path is None or str(path) == "-":
        emit(sys.stdout)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            emit(fh)


def _parse(text: str, kind) -> typing.Any:
    if kind is bool:
        if text not in ("true", "false"):
            raise ParameterError(f"expected true/false, got {text!r}")
        return text == "true"
    if kind is int:
        return int(text)
    if kind is float:
        return float(text)
    return text


def read_csv(path: str | os.PathLike, cls: type = SweepRecord) -> list:
    """Parse a file written by :func:`write_csv` back into ``cls`` instances."""
    hints = typing.get_type_hints(cls)
    names = [f.name for f in fields(cls)]
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParameterError(f"{path}: empty file") from None
        if header != names:
            raise ParameterError(f"{path}: header does not match {cls.__name__}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(names):
                raise ParameterError(f"{path}: line {lineno}: expected {len(names)} fields")
            try:
                out.append(cls(**{n: _parse(v, hints[n]) for n, v in zip(names, row)}))
            except ValueError as exc:
                raise ParameterError(f"{path}: line {lineno}: {exc}") from None
    return out
