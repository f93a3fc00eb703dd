"""Eigen-solvers for Laplacian-like matrices and Laplacian diffusion.

Two routes compute the Fiedler pair. ``dense`` is a LAPACK decomposition and
doubles as the reference. ``iterative`` is a block shift-and-invert subspace
method: the search space grows by solves with ``Q + sigma*I`` (sparse LU),
is kept orthogonal to the known kernel of ``Q``, and Ritz pairs are read off
``Q`` itself, so the accuracy of the solves never limits the accuracy of the
eigenvalue.

The kernel is taken from the sparsity pattern: a matrix whose graph has ``c``
connected components has exactly the ``c`` component indicators in its kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import splu

from .errors import (
    ConvergenceFailure,
    DimensionLimit,
    NonOrthogonalInitial,
    NotSymmetric,
    ParameterError,
    StabilityViolation,
)
from .generators import SeedLike, make_rng

__all__ = [
    "DENSE_LIMIT",
    "SpectralResult",
    "DiffusionResult",
    "full_spectrum",
    "fiedler_pair",
    "simulate_diffusion",
    "orient",
    "is_degenerate",
]

DENSE_LIMIT = 4000
DEFAULT_TOL = 1e-10
SIGN_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class SpectralResult:
    """Fiedler pair of a Laplacian-like matrix.

    ``gap`` is ``mu_{N-2} - mu_{N-1}`` (NaN for 2x2 input) and ``degenerate``
    is set when the gap falls below ``1e-8 * max(1, mu)``.
    """

    mu: float
    vector: np.ndarray
    residual: float
    gap: float
    degenerate: bool
    solver: str
    iterations: int = 0


def _as_operator(q) -> sp.csr_array | np.ndarray:
    if sp.issparse(q):
        return sp.csr_array(q, dtype=float)
    return np.asarray(q, dtype=float)


def _check_square_symmetric(q) -> None:
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {q.shape}")
    if sp.issparse(q):
        diff = q - q.T
        if diff.nnz and np.any(diff.data != 0):
            raise NotSymmetric("matrix is not symmetric")
    elif not np.array_equal(q, q.T):
        raise NotSymmetric("matrix is not symmetric")


def _dense(q) -> np.ndarray:
    return q.toarray() if sp.issparse(q) else np.array(q, dtype=float)


def orient(x: np.ndarray) -> np.ndarray:
    """Flip ``x`` so its first component with ``|x_i| > 1e-12`` is positive."""
    nz = np.flatnonzero(np.abs(x) > SIGN_EPS)
    if len(nz) and x[nz[0]] < 0:
        return -x
    return x


def is_degenerate(mu: float, gap: float) -> bool:
    return bool(np.isfinite(gap) and gap < 1e-8 * max(1.0, mu))


def full_spectrum(q, dense_limit: int = DENSE_LIMIT) -> tuple[np.ndarray, np.ndarray]:
    """All eigenvalues (ascending) and an orthonormal eigenvector basis."""
    q = _as_operator(q)
    _check_square_symmetric(q)
    if q.shape[0] > dense_limit:
        raise DimensionLimit(f"order {q.shape[0]} exceeds the dense limit {dense_limit}")
    w, v = np.linalg.eigh(_dense(q))
    return w, v


def _components(q) -> tuple[int, np.ndarray]:
    pattern = sp.csr_array(q) if sp.issparse(q) else sp.csr_array(np.asarray(q) != 0)
    pattern = pattern.copy()
    pattern.eliminate_zeros()
    return connected_components(pattern, directed=False)


def _kernel_basis(labels: np.ndarray, ncomp: int) -> np.ndarray:
    k = np.zeros((len(labels), ncomp))
    k[np.arange(len(labels)), labels] = 1.0
    return k / np.sqrt(k.sum(axis=0))


def _split_vector(labels: np.ndarray) -> np.ndarray:
    # unit kernel vector orthogonal to u built from components 0 and 1
    a = labels == 0
    b = labels == 1
    x = np.zeros(len(labels))
    x[a] = b.sum()
    x[b] = -a.sum()
    return x / np.linalg.norm(x)


def fiedler_pair(q, tol: float = DEFAULT_TOL, solver: str = "auto",
                 dense_limit: int = DENSE_LIMIT, seed: SeedLike = 0,
                 block: int = 4, max_iter: int = 500) -> SpectralResult:
    """Minimiser of ``x^T Q x`` over unit vectors orthogonal to the all-ones vector.

    Parameters
    ----------
    q : sparse or dense symmetric matrix with zero row sums.
    tol : relative residual target of the iterative route; converged pairs
        satisfy ``||Qx - mu x|| <= tol * (1 + ||Q||_inf)``.
    solver : ``"dense"``, ``"iterative"`` or ``"auto"`` (dense up to
        ``dense_limit``).
    seed : start block of the iterative route.

    For a matrix with two connected components the result is ``mu = 0`` with
    the signed component indicator as vector. With three or more components it
    is still ``mu = 0`` but flagged degenerate.
    """
    q = _as_operator(q)
    _check_square_symmetric(q)
    n = q.shape[0]
    if n < 2:
        raise ParameterError("a Fiedler pair needs at least two nodes")
    solver = solver.lower()
    if solver == "auto":
        solver = "dense" if n <= dense_limit else "iterative"
    if solver not in ("dense", "iterative"):
        raise ParameterError(f"unknown solver {solver!r}")
    if solver == "dense" and n > dense_limit:
        raise DimensionLimit(f"order {n} exceeds the dense limit {dense_limit}")

    ncomp, labels = _components(q)
    iterations = 0
    if ncomp >= 2:
        x = orient(_split_vector(labels))
        mu = 0.0
        if ncomp >= 3:
            gap = 0.0
        elif solver == "dense":
            w = la.eigh(_dense(q), eigvals_only=True, subset_by_index=[0, min(2, n - 1)])
            gap = float(w[2]) if n > 2 else math.nan
        elif n > 2:
            theta, _, _, iterations = _lowest_pairs(q, _kernel_basis(labels, ncomp), 1,
                                                    tol, block, max_iter, seed)
            gap = float(theta[0])
        else:
            gap = math.nan
    elif solver == "dense":
        top = min(2, n - 1)
        w, v = la.eigh(_dense(q), subset_by_index=[0, top])
        mu = float(w[1])
        gap = float(w[2] - w[1]) if top == 2 else math.nan
        x = v[:, 1] - v[:, 1].mean()
        x = orient(x / np.linalg.norm(x))
    else:
        u = np.full((n, 1), 1.0 / math.sqrt(n))
        theta, vecs, _, iterations = _lowest_pairs(q, u, 2, tol, block, max_iter, seed)
        mu = float(theta[0])
        gap = float(theta[1] - theta[0]) if len(theta) > 1 else math.nan
        x = orient(vecs[:, 0] / np.linalg.norm(vecs[:, 0]))
    residual = float(np.linalg.norm(q @ x - mu * x))
    return SpectralResult(mu=mu, vector=x, residual=residual, gap=gap,
                          degenerate=ncomp >= 3 or is_degenerate(mu, gap),
                          solver=solver, iterations=iterations)


def _orthonormalize(w: np.ndarray, bases: list[np.ndarray]) -> np.ndarray:
    """Gram-Schmidt (twice) of the columns of ``w`` against ``bases`` and each other."""
    kept: list[np.ndarray] = []
    for col in w.T:
        start = np.linalg.norm(col)
        if start == 0:
            continue
        c = col.copy()
        for _ in range(2):
            for b in bases:
                c -= b @ (b.T @ c)
            for k in kept:
                c -= k * (k @ c)
        nrm = np.linalg.norm(c)
        if nrm > 1e-10 * start:
            kept.append(c / nrm)
    if not kept:
        return np.empty((w.shape[0], 0))
    return np.column_stack(kept)


def _lowest_pairs(q, kernel: np.ndarray, nev: int, tol: float, block: int,
                  max_iter: int, seed: SeedLike, max_dim: int = 32):
    """Lowest ``nev`` eigenpairs of ``q`` on the orthogonal complement of ``kernel``."""
    q = sp.csr_array(q) if not sp.issparse(q) else q
    n = q.shape[0]
    avail = n - kernel.shape[1]
    nev = min(nev, avail)
    block = min(max(block, nev), avail)
    qnorm = float(abs(q).sum(axis=1).max())
    threshold = tol * (1.0 + qnorm)
    sigma = 1e-6 * max(1.0, qnorm)
    shifted = (q + sigma * sp.eye_array(n, format="csr")).tocsc()
    lu = splu(shifted, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
              options={"SymmetricMode": True})
    rng = make_rng(seed)
    v = _orthonormalize(rng.standard_normal((n, block)), [kernel])
    qv = q @ v
    max_dim = max(max_dim, 3 * block)
    for it in range(1, max_iter + 1):
        h = v.T @ qv
        theta, y = np.linalg.eigh((h + h.T) / 2)
        nb = min(block, len(theta))
        x = v @ y[:, :nb]
        qx = qv @ y[:, :nb]
        r = qx - x * theta[:nb]
        res = np.linalg.norm(r, axis=0)
        if np.all(res[:nev] <= threshold) or v.shape[1] >= avail:
            return theta[:nev], x[:, :nev], res[:nev], it
        grow = lu.solve(np.ascontiguousarray(x[:, res > threshold]))
        if v.shape[1] + grow.shape[1] > max_dim:
            keep = min(v.shape[1], 2 * block)
            v, qv = v @ y[:, :keep], qv @ y[:, :keep]
        grow = _orthonormalize(grow, [kernel, v])
        if grow.shape[1] == 0:
            # Krylov space exhausted; fall back to residual directions
            grow = _orthonormalize(r, [kernel, v])
            if grow.shape[1] == 0:
                return theta[:nev], x[:, :nev], res[:nev], it
        v = np.hstack([v, grow])
        qv = np.hstack([qv, q @ grow])
    raise ConvergenceFailure("iterative Fiedler solver did not converge", max_iter)


@dataclass(frozen=True, eq=False)
class DiffusionResult:
    """Deviation-norm trajectory and its fitted exponential decay rate."""

    times: np.ndarray
    norms: np.ndarray
    rate: float
    final: np.ndarray
    slope: float = math.nan


def _largest_eigenvalue(q) -> float:
    if q.shape[0] <= DENSE_LIMIT:
        return float(la.eigh(_dense(q), eigvals_only=True,
                             subset_by_index=[q.shape[0] - 1, q.shape[0] - 1])[0])
    from scipy.sparse.linalg import eigsh

    return float(eigsh(sp.csr_array(q), k=1, which="LA", return_eigenvectors=False)[0])


def fit_decay_rate(times: np.ndarray, norms: np.ndarray, tail: float = 0.8) -> float:
    """Least-squares slope of ``-log(norm)`` over the last ``tail`` fraction of samples."""
    start = int(math.floor((1.0 - tail) * (len(times) - 1)))
    t = times[start:]
    y = norms[start:]
    ok = y > 1e-300
    if ok.sum() < 2:
        return math.nan
    slope = np.polyfit(t[ok], np.log(y[ok]), 1)[0]
    return float(-slope)


def simulate_diffusion(q, s0, dt: float, steps: int, method: str = "euler",
                       tail: float = 0.8, spectrum: tuple[np.ndarray, np.ndarray] | None = None
                       ) -> DiffusionResult:
    """Integrate ``ds/dt = -Q s`` from ``s0`` and fit the decay rate of ``||s||``.

    ``slope`` is the fitted log-norm slope. ``rate`` is the eigenvalue of Q it
    implies, which for Euler undoes the per-step factor ``1 - dt * lambda``.

    The norm is taken of the deviation from the mean state. ``method="euler"``
    is explicit Euler and requires ``dt * mu_1 < 2``; ``method="exact"``
    propagates through the eigenbasis (pass ``spectrum`` to reuse one).
    """
    q = _as_operator(q)
    _check_square_symmetric(q)
    s = np.asarray(s0, dtype=float).copy()
    n = q.shape[0]
    if s.shape != (n,):
        raise ParameterError(f"initial state must have length {n}")
    if steps < 1 or dt <= 0:
        raise ParameterError("need dt > 0 and steps >= 1")
    if abs(s.sum()) > 1e-9 * math.sqrt(n) * max(np.linalg.norm(s), 1.0):
        raise NonOrthogonalInitial("initial deviations must sum to zero")
    times = dt * np.arange(steps + 1)
    norms = np.empty(steps + 1)
    if method == "euler":
        diag = q.diagonal()
        if dt * 2.0 * float(np.max(np.abs(diag))) >= 2.0:
            top = _largest_eigenvalue(q)
            if dt * top >= 2.0 - 1e-12:
                raise StabilityViolation(f"dt * mu_1 = {dt * top:.6g} >= 2")
        # Q kills the mean, so re-centring each step leaves the deviation
        # dynamics unchanged and keeps round-off relative to the deviation
        mean = s.mean()
        s -= mean
        norms[0] = np.linalg.norm(s)
        for step in range(1, steps + 1):
            s -= dt * (q @ s)
            s -= s.mean()
            norms[step] = np.linalg.norm(s)
        s += mean
    elif method == "exact":
        w, v = spectrum if spectrum is not None else full_spectrum(q)
        coeff = v.T @ s
        decay = np.exp(-np.outer(times, w))
        modes = decay * coeff
        # mode coordinates of u; subtracting it leaves the deviation from the mean
        a = v.T @ np.full(n, 1.0 / math.sqrt(n))
        dev = modes - np.outer(modes @ a, a)
        norms = np.linalg.norm(dev, axis=1)
        s = v @ modes[-1]
    else:
        raise ParameterError(f"unknown integration method {method!r}")
    slope = fit_decay_rate(times, norms, tail)
    rate = slope
    if method == "euler":
        # each Euler step scales mode i by (1 - dt * lambda_i); invert that
        rate = -math.expm1(-slope * dt) / dt
    return DiffusionResult(times=times, norms=norms, rate=rate, final=s, slope=slope)
