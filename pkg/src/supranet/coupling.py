"""Two identical layers joined by interlinks, and their supra-Laplacian.

Layer-1 node ``i`` has global index ``i``; layer-2 node ``j`` has global index
``n1 + j``. The supra-Laplacian splits as ``Q = Q_A + alpha * Q_B`` where
``Q_A = blockdiag(Q1, Q1)`` holds the intralinks and ``Q_B`` is the Laplacian
of the interlinks alone.

Explicit strategies (``DIAGONAL``, ``GENERAL``) carry a concrete list of
unweighted pairs and default to ``alpha = 1``. The mean-field strategies
replace the pairs by the dense patterns ``B12 = I`` and ``B12 = J``, with the
link weight carried by ``alpha``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError
from .generators import SeedLike, make_rng
from .graph import Graph, laplacian

__all__ = [
    "Strategy",
    "InterlinkSet",
    "CoupledSystem",
    "interlink_sequence",
    "couple_diagonal",
    "couple_general",
    "couple_meanfield",
    "intralayer_laplacian",
    "interlink_laplacian",
    "supra_laplacian",
]

# Above this many candidate pairs, general interlinks are drawn by rejection
# instead of a full permutation of the n1*n1 grid.
_PERMUTE_LIMIT = 1 << 20


class Strategy(str, enum.Enum):
    DIAGONAL = "diagonal"
    GENERAL = "general"
    MEANFIELD_DIAGONAL = "meanfield-diagonal"
    MEANFIELD_GENERAL = "meanfield-general"

    @property
    def is_meanfield(self) -> bool:
        return self in (Strategy.MEANFIELD_DIAGONAL, Strategy.MEANFIELD_GENERAL)

    @property
    def base(self) -> Strategy:
        """The explicit strategy a mean-field pattern approximates."""
        if self is Strategy.MEANFIELD_DIAGONAL:
            return Strategy.DIAGONAL
        if self is Strategy.MEANFIELD_GENERAL:
            return Strategy.GENERAL
        return self

    @classmethod
    def parse(cls, value: str | Strategy) -> Strategy:
        if isinstance(value, Strategy):
            return value
        try:
            return cls(value.lower().replace("_", "-"))
        except ValueError:
            names = ", ".join(s.value for s in cls)
            raise ParameterError(f"unknown strategy {value!r}; expected one of {names}") from None


@dataclass(frozen=True, eq=False)
class InterlinkSet:
    strategy: Strategy
    pairs: np.ndarray = field(default_factory=lambda: np.empty((0, 2), dtype=np.int64))

    def __post_init__(self):
        strategy = Strategy.parse(self.strategy)
        pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        if strategy.is_meanfield and len(pairs):
            raise ParameterError("mean-field interlinks carry no explicit pairs")
        if strategy is Strategy.DIAGONAL and np.any(pairs[:, 0] != pairs[:, 1]):
            raise ParameterError("diagonal interlinks must join corresponding nodes (i, i)")
        if len(np.unique(pairs, axis=0)) != len(pairs):
            raise ParameterError("duplicate interlink pair")
        pairs.flags.writeable = False
        object.__setattr__(self, "strategy", strategy)
        object.__setattr__(self, "pairs", pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, InterlinkSet):
            return NotImplemented
        return self.strategy is other.strategy and np.array_equal(self.pairs, other.pairs)


@dataclass(frozen=True, eq=False)
class CoupledSystem:
    """Two copies of ``layer`` joined by ``interlinks`` with weight ``alpha``."""

    layer: Graph
    interlinks: InterlinkSet
    alpha: float = 1.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ParameterError(f"coupling weight must be non-negative, got {self.alpha}")
        pairs = self.interlinks.pairs
        if len(pairs) and (pairs.min() < 0 or pairs.max() >= self.layer.n):
            raise ParameterError(f"interlink endpoint outside 0..{self.layer.n - 1}")

    @property
    def n1(self) -> int:
        return self.layer.n

    @property
    def n(self) -> int:
        return 2 * self.layer.n

    @property
    def strategy(self) -> Strategy:
        return self.interlinks.strategy

    @property
    def num_interlinks(self) -> int:
        return len(self.interlinks)

    def with_alpha(self, alpha: float) -> CoupledSystem:
        return replace(self, alpha=float(alpha))

    def intralinks(self) -> np.ndarray:
        """Global ``(2*L1, 2)`` edge array: layer 1 then layer 2."""
        e = self.layer.edges
        return np.vstack([e, e + self.n1])

    def interlink_edges(self) -> np.ndarray:
        """Global ``(k, 2)`` edge array of the explicit interlinks."""
        p = self.interlinks.pairs
        return np.column_stack([p[:, 0], p[:, 1] + self.n1])

    def intralayer_laplacian(self) -> sp.csr_array:
        return intralayer_laplacian(self)

    def interlink_laplacian(self) -> sp.csr_array:
        return interlink_laplacian(self)

    def supra_laplacian(self) -> sp.csr_array:
        return supra_laplacian(self)


def interlink_sequence(n1: int, strategy: Strategy | str, count: int,
                       seed: SeedLike = None) -> np.ndarray:
    """First ``count`` pairs of a random nested interlink ordering.

    For a fixed seed and ``n1`` the returned sequence for ``count`` is a
    prefix of the one for any larger count, so a sweep is a progressive
    addition of links.
    """
    strategy = Strategy.parse(strategy)
    rng = make_rng(seed)
    if strategy is Strategy.DIAGONAL:
        if not 0 <= count <= n1:
            raise ParameterError(f"diagonal interlink count must lie in 0..{n1}, got {count}")
        nodes = rng.permutation(n1)[:count]
        return np.column_stack([nodes, nodes]).astype(np.int64)
    if strategy is Strategy.GENERAL:
        total = n1 * n1
        if not 0 <= count <= total:
            raise ParameterError(f"general interlink count must lie in 0..{total}, got {count}")
        if total <= _PERMUTE_LIMIT:
            flat = rng.permutation(total)[:count]
        else:
            flat = _rejection_prefix(total, count, rng)
        return np.column_stack([flat // n1, flat % n1]).astype(np.int64)
    raise ParameterError(f"{strategy.value} interlinks have no explicit sequence")


def _rejection_prefix(total: int, count: int, rng: np.random.Generator) -> np.ndarray:
    seen: set[int] = set()
    out: list[int] = []
    while len(out) < count:
        for v in rng.integers(total, size=1024).tolist():
            if v not in seen:
                seen.add(v)
                out.append(v)
                if len(out) == count:
                    break
    return np.asarray(out, dtype=np.int64)


def couple_diagonal(layer: Graph, count: int, seed: SeedLike = None) -> CoupledSystem:
    """Join ``count`` corresponding node pairs ``(i, i)`` chosen uniformly."""
    pairs = interlink_sequence(layer.n, Strategy.DIAGONAL, count, seed)
    return CoupledSystem(layer, InterlinkSet(Strategy.DIAGONAL, pairs), 1.0)


def couple_general(layer: Graph, count: int, seed: SeedLike = None) -> CoupledSystem:
    """Join ``count`` distinct cross pairs drawn uniformly from the ``n1 x n1`` grid."""
    pairs = interlink_sequence(layer.n, Strategy.GENERAL, count, seed)
    return CoupledSystem(layer, InterlinkSet(Strategy.GENERAL, pairs), 1.0)


def couple_meanfield(layer: Graph, strategy: Strategy | str, alpha: float) -> CoupledSystem:
    strategy = Strategy.parse(strategy)
    if not strategy.is_meanfield:
        strategy = {Strategy.DIAGONAL: Strategy.MEANFIELD_DIAGONAL,
                    Strategy.GENERAL: Strategy.MEANFIELD_GENERAL}[strategy]
    return CoupledSystem(layer, InterlinkSet(strategy), float(alpha))


def intralayer_laplacian(sys: CoupledSystem) -> sp.csr_array:
    q1 = laplacian(sys.layer)
    return sp.block_diag([q1, q1], format="csr")


def interlink_laplacian(sys: CoupledSystem) -> sp.csr_array:
    """Unweighted ``Q_B = [[D1, -B12], [-B12^T, D2]]``."""
    n1 = sys.n1
    strategy = sys.strategy
    if strategy is Strategy.MEANFIELD_DIAGONAL:
        eye = sp.eye_array(n1, format="csr")
        return sp.block_array([[eye, -eye], [-eye, eye]], format="csr")
    if strategy is Strategy.MEANFIELD_GENERAL:
        eye = sp.eye_array(n1, format="csr") * float(n1)
        ones = sp.csr_array(np.ones((n1, n1)))
        return sp.block_array([[eye, -ones], [-ones, eye]], format="csr")
    p = sys.interlinks.pairs
    i, j = p[:, 0], p[:, 1] + n1
    d = np.bincount(np.concatenate([i, j]), minlength=2 * n1).astype(float)
    rows = np.concatenate([np.arange(2 * n1), i, j])
    cols = np.concatenate([np.arange(2 * n1), j, i])
    vals = np.concatenate([d, -np.ones(len(i)), -np.ones(len(i))])
    qb = sp.coo_array((vals, (rows, cols)), shape=(2 * n1, 2 * n1)).tocsr()
    qb.eliminate_zeros()
    qb.sort_indices()
    return qb


def supra_laplacian(sys: CoupledSystem) -> sp.csr_array:
    """``Q = Q_A + alpha * Q_B``."""
    q = intralayer_laplacian(sys) + sys.alpha * interlink_laplacian(sys)
    q = sp.csr_array(q)
    q.eliminate_zeros()
    q.sort_indices()
    return q
