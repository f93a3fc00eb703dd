"""Seeded constructors for the four single-layer models: RR, BA, WS and LA.

Every random generator takes a ``seed`` accepted by :func:`make_rng`: an int,
a :class:`numpy.random.SeedSequence`, or an existing
:class:`numpy.random.Generator`. The bit generator is always PCG64, so
a given integer seed reproduces the same graph on every platform numpy
supports.

Random models are returned only when connected; disconnected draws are
discarded and regenerated from the same stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GenerationFailed, ParameterError
from .graph import Graph, build_graph, is_connected

__all__ = [
    "GenSpec",
    "MODELS",
    "make_rng",
    "generate",
    "gen_random_regular",
    "gen_barabasi_albert",
    "gen_watts_strogatz",
    "gen_lattice_3d_torus",
]

MODELS = ("RR", "BA", "WS", "LA")
MAX_RETRIES = 1000

SeedLike = int | np.random.SeedSequence | np.random.Generator | None


def make_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class GenSpec:
    """Parameters of one single-layer model.

    Only the fields relevant to ``model`` are read: ``k`` for RR and WS,
    ``m`` for BA, ``p`` for WS and ``side`` for LA (``n`` is then ``side**3``).
    """

    model: str
    n: int = 0
    k: int = 6
    m: int = 3
    p: float = 0.1
    side: int = 0
    seed: int = 0

    def __post_init__(self):
        model = self.model.upper()
        if model not in MODELS:
            raise ParameterError(f"unknown model {self.model!r}; expected one of {MODELS}")
        object.__setattr__(self, "model", model)
        if model == "LA":
            side = self.side or _cube_side(self.n)
            if self.n and self.n != side**3:
                raise ParameterError(f"LA needs n = side**3, got n={self.n}, side={side}")
            object.__setattr__(self, "side", side)
            object.__setattr__(self, "n", side**3)
        elif model == "RR":
            _check_rr(self.n, self.k)
        elif model == "WS":
            _check_ws(self.n, self.k, self.p)
        elif model == "BA":
            _check_ba(self.n, self.m)


def _cube_side(n: int) -> int:
    side = round(n ** (1 / 3))
    while side**3 < n:
        side += 1
    return side


def generate(spec: GenSpec, seed: SeedLike = None) -> Graph:
    """Build the graph described by ``spec``; ``seed`` overrides ``spec.seed``."""
    seed = spec.seed if seed is None else seed
    if spec.model == "RR":
        return gen_random_regular(spec.n, spec.k, seed)
    if spec.model == "BA":
        return gen_barabasi_albert(spec.n, spec.m, seed)
    if spec.model == "WS":
        return gen_watts_strogatz(spec.n, spec.k, spec.p, seed)
    return gen_lattice_3d_torus(spec.side)


def _check_rr(n: int, k: int) -> None:
    if n < 1 or k < 1:
        raise ParameterError(f"RR needs n >= 1 and k >= 1, got n={n}, k={k}")
    if (n * k) % 2:
        raise ParameterError(f"RR needs n*k even, got n={n}, k={k}")
    if k >= n:
        raise ParameterError(f"RR needs k < n, got n={n}, k={k}")


def _check_ws(n: int, k: int, p: float) -> None:
    if k < 2 or k % 2:
        raise ParameterError(f"WS needs an even k >= 2, got {k}")
    if k >= n:
        raise ParameterError(f"WS needs k < n, got n={n}, k={k}")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"WS rewiring probability must lie in [0, 1], got {p}")


def _check_ba(n: int, m: int) -> None:
    if not 1 <= m < n:
        raise ParameterError(f"BA needs 1 <= m < n, got n={n}, m={m}")


def _regular_attempt(n: int, k: int, rng: np.random.Generator) -> list[tuple[int, int]] | None:
    # Pair shuffled stubs; unsuitable pairs go back into the pool and are
    # re-matched. Returns None if the pool reaches a dead end.
    edges: set[tuple[int, int]] = set()
    stubs = np.repeat(np.arange(n), k)
    while len(stubs):
        rng.shuffle(stubs)
        leftover: list[int] = []
        for a, b in zip(stubs[0::2].tolist(), stubs[1::2].tolist()):
            e = (a, b) if a < b else (b, a)
            if a == b or e in edges:
                leftover.extend((a, b))
            else:
                edges.add(e)
        if len(leftover) == len(stubs):
            if not _has_suitable_pair(leftover, edges):
                return None
        stubs = np.asarray(leftover, dtype=np.int64)
    return sorted(edges)


def _has_suitable_pair(stubs: list[int], edges: set[tuple[int, int]]) -> bool:
    nodes = sorted(set(stubs))
    for x in range(len(nodes)):
        for y in range(x + 1, len(nodes)):
            if (nodes[x], nodes[y]) not in edges:
                return True
    return False


def gen_random_regular(n: int, k: int, seed: SeedLike = None,
                       max_retries: int = MAX_RETRIES) -> Graph:
    """Connected random k-regular graph from the configuration model."""
    _check_rr(n, k)
    rng = make_rng(seed)
    for _ in range(max_retries):
        edges = _regular_attempt(n, k, rng)
        if edges is None:
            continue
        g = build_graph(n, edges)
        if is_connected(g):
            return g
    raise GenerationFailed(f"no connected {k}-regular graph on {n} nodes after {max_retries} tries")


def gen_barabasi_albert(n: int, m: int, seed: SeedLike = None) -> Graph:
    """Preferential attachment grown from a clique on ``m + 1`` nodes.

    Each new node picks ``m`` distinct targets, each drawn with probability
    proportional to current degree; repeated picks are redrawn.
    """
    _check_ba(n, m)
    rng = make_rng(seed)
    core = m + 1
    edges = [(i, j) for i in range(core) for j in range(i + 1, core)]
    # node i appears degree(i) times
    pool = [v for e in edges for v in e]
    for new in range(core, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(pool[int(rng.integers(len(pool)))])
        for t in sorted(targets):
            edges.append((t, new))
            pool.extend((t, new))
    return build_graph(n, edges)


def _ring_lattice(n: int, k: int) -> list[tuple[int, int]]:
    return [(u, (u + j) % n) for j in range(1, k // 2 + 1) for u in range(n)]


def gen_watts_strogatz(n: int, k: int, p: float, seed: SeedLike = None,
                       max_retries: int = MAX_RETRIES) -> Graph:
    """Ring of ``n`` nodes each tied to ``k/2`` neighbours per side, then rewired.

    Each lattice edge ``(u, u+j)`` is, with probability ``p``, replaced by
    ``(u, w)`` for ``w`` drawn uniformly among nodes not yet adjacent to
    ``u``. The edge count is always ``n*k/2``.
    """
    _check_ws(n, k, p)
    rng = make_rng(seed)
    for _ in range(max_retries):
        adj: list[set[int]] = [set() for _ in range(n)]
        lattice = _ring_lattice(n, k)
        for u, v in lattice:
            adj[u].add(v)
            adj[v].add(u)
        if p > 0:
            for u, v in lattice:
                if rng.random() >= p or len(adj[u]) >= n - 1:
                    continue
                while True:
                    w = int(rng.integers(n))
                    if w != u and w not in adj[u]:
                        break
                adj[u].discard(v)
                adj[v].discard(u)
                adj[u].add(w)
                adj[w].add(u)
        edges = [(u, w) for u in range(n) for w in adj[u] if u < w]
        g = build_graph(n, edges)
        if is_connected(g):
            return g
    raise GenerationFailed(f"no connected WS graph (n={n}, k={k}, p={p}) after {max_retries} tries")


def gen_lattice_3d_torus(side: int) -> Graph:
    """Periodic ``side x side x side`` grid; node ``(x, y, z)`` is ``x + side*y + side**2*z``."""
    if side < 2:
        raise ParameterError(f"torus side must be >= 2, got {side}")
    edges: set[tuple[int, int]] = set()
    idx = np.arange(side**3).reshape(side, side, side)  # indexed [z, y, x]
    for axis in range(3):
        nbr = np.roll(idx, -1, axis=axis)
        for a, b in zip(idx.ravel().tolist(), nbr.ravel().tolist()):
            edges.add((min(a, b), max(a, b)))
    return build_graph(side**3, sorted(edges))

