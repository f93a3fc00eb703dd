"""Fiedler sign partition and its quality metrics.

The partition puts node ``i`` in ``R`` when ``x_i > 0`` and in ``S`` when
``x_i < 0``; components with ``|x_i| <= 1e-12`` go to ``R``. Together with
the two layers this yields the subsets ``R1, S1, R2, S2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coupling import CoupledSystem
from .errors import ParameterError
from .spectral import SpectralResult
from .theory import natural_vector

__all__ = [
    "ZERO_EPS",
    "PartitionReport",
    "CutMetrics",
    "fiedler_partition",
    "cut_metrics",
    "interdependence_angle",
    "fiedler_entropy",
    "partition_report",
]

ZERO_EPS = 1e-12


def fiedler_partition(x: np.ndarray, theta: float = ZERO_EPS) -> tuple[np.ndarray, np.ndarray]:
    """Index arrays ``(R, S)`` of the sign partition of ``x``."""
    x = np.asarray(x, dtype=float)
    in_s = x < -theta
    return np.flatnonzero(~in_s), np.flatnonzero(in_s)


@dataclass(frozen=True)
class CutMetrics:
    cut_edges: int
    interlink_cut: int
    intralink_cut: int
    cut_size: float
    interlink_cut_fraction: float
    intralink_cut_fraction: float


def _side_mask(n: int, partition) -> np.ndarray:
    """Boolean membership in ``S`` from either a mask or an ``(R, S)`` pair."""
    if isinstance(partition, tuple):
        r, s = (np.asarray(p, dtype=np.int64) for p in partition)
        if len(r) + len(s) != n or len(np.union1d(r, s)) != n:
            raise ParameterError(f"partition must cover all {n} nodes exactly once")
        mask = np.zeros(n, dtype=bool)
        mask[s] = True
        return mask
    mask = np.asarray(partition, dtype=bool)
    if mask.shape != (n,):
        raise ParameterError(f"partition mask must have length {n}")
    return mask


def cut_metrics(sys: CoupledSystem, partition) -> CutMetrics:
    """Edges crossing the partition, normalized by the intralink count ``L1 + L2``.

    ``partition`` is ``(R, S)`` as returned by :func:`fiedler_partition` or a
    boolean mask that is True on ``S``. Only explicit interlinks are counted.
    """
    in_s = _side_mask(sys.n, partition)
    intra = sys.intralinks()
    inter = sys.interlink_edges()
    intra_cut = int(np.count_nonzero(in_s[intra[:, 0]] != in_s[intra[:, 1]]))
    inter_cut = int(np.count_nonzero(in_s[inter[:, 0]] != in_s[inter[:, 1]]))
    total = intra_cut + inter_cut
    denom = len(intra)
    return CutMetrics(
        cut_edges=total,
        interlink_cut=inter_cut,
        intralink_cut=intra_cut,
        cut_size=total / denom if denom else 0.0,
        interlink_cut_fraction=inter_cut / total if total else 0.0,
        intralink_cut_fraction=intra_cut / total if total else 0.0,
    )


def interdependence_angle(x: np.ndarray, n1: int) -> float:
    """Angle in ``[0, pi/2]`` between ``x`` and the natural-partition vector.

    Uses ``|cos|`` so the result does not depend on the sign of ``x``.
    """
    x = np.asarray(x, dtype=float)
    if len(x) != 2 * n1:
        raise ParameterError(f"vector length {len(x)} != 2 * {n1}")
    c = abs(float(x @ natural_vector(n1))) / float(np.linalg.norm(x))
    return math.acos(min(1.0, c))


def fiedler_entropy(x: np.ndarray) -> float:
    """``-sum x_i^2 ln x_i^2`` (natural log, ``0 ln 0 = 0``)."""
    p = np.asarray(x, dtype=float) ** 2
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


@dataclass(frozen=True, eq=False)
class PartitionReport:
    set_r: np.ndarray
    set_s: np.ndarray
    r1: np.ndarray
    s1: np.ndarray
    r2: np.ndarray
    s2: np.ndarray
    cut: CutMetrics
    angle: float
    entropy: float
    degenerate: bool

    @property
    def cut_size(self) -> float:
        return self.cut.cut_size

    @property
    def size_ratio(self) -> float:
        """``|R| / |S|``; infinite when ``S`` is empty."""
        return len(self.set_r) / len(self.set_s) if len(self.set_s) else math.inf


def partition_report(sys: CoupledSystem, result: SpectralResult | np.ndarray) -> PartitionReport:
    if isinstance(result, SpectralResult):
        x, degenerate = result.vector, result.degenerate
    else:
        x, degenerate = np.asarray(result, dtype=float), False
    n1 = sys.n1
    r, s = fiedler_partition(x)
    return PartitionReport(
        set_r=r, set_s=s,
        r1=r[r < n1], s1=s[s < n1], r2=r[r >= n1], s2=s[s >= n1],
        cut=cut_metrics(sys, (r, s)),
        angle=interdependence_angle(x, n1),
        entropy=fiedler_entropy(x),
        degenerate=degenerate,
    )
