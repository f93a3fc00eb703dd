"""Closed-form predictions for the algebraic connectivity of coupled layers.

Mean-field models replace random interlinks by dense weighted patterns that
commute with ``Q_A``, so the coupled spectrum follows from the single-layer
spectrum ``omega`` (ascending, ``omega[0] == 0``):

* diagonal, ``B12 = I``: ``{omega_i} U {omega_i + 2 alpha}``, hence
  ``mu(alpha) = min(2 alpha, omega_1)`` with threshold ``alpha_I = omega_1 / 2``
  and ``l_I = alpha_I * n1``;
* general, ``B12 = J``: ``{0, 2 alpha n1} U {omega_i + alpha n1}`` (each
  nontrivial value twice), hence ``mu(alpha) = min(2 alpha n1, omega_1 + alpha n1)``
  with ``alpha_J = omega_1 / n1`` and ``l_J = alpha_J * n1**2``.

Here ``omega_1`` is the layer's algebraic connectivity.

Perturbation estimates expand the Fiedler pair of ``Q_A + alpha Q_B`` around
the natural-partition vector ``x0 = (1, ..., 1, -1, ..., -1) / sqrt(2 n1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
from scipy.sparse.linalg import LinearOperator, cg

from .coupling import CoupledSystem, Strategy
from .errors import EmptyInterlinks, ParameterError, SingularSystem
from .graph import Graph, is_connected, laplacian
from .spectral import DENSE_LIMIT, full_spectrum

__all__ = [
    "MeanFieldPrediction",
    "MeanFieldPoint",
    "layer_spectrum",
    "meanfield_prediction",
    "prediction_from_fiedler",
    "meanfield_diagonal",
    "meanfield_general",
    "natural_vector",
    "PerturbationEstimate",
    "perturbation_estimate",
    "perturb_mu1",
    "perturb_x1",
    "perturb_mu2",
    "perturb_upper_bounds",
]


def _check_omega(omega) -> np.ndarray:
    w = np.asarray(omega, dtype=float).ravel()
    if len(w) < 2:
        raise ParameterError("need the spectrum of a layer with at least two nodes")
    if np.any(np.diff(w) < 0):
        raise ParameterError("layer spectrum must be sorted ascending")
    if abs(w[0]) > 1e-9 * max(1.0, abs(w[-1])):
        raise ParameterError(f"smallest Laplacian eigenvalue must be 0, got {w[0]}")
    return w


def layer_spectrum(layer: Graph) -> np.ndarray:
    """Ascending Laplacian spectrum of a single layer, with ``omega[0]`` set to 0."""
    w, _ = full_spectrum(laplacian(layer))
    w = w.copy()
    w[0] = 0.0
    return w


@dataclass(frozen=True)
class MeanFieldPrediction:
    """Piecewise-linear mean-field curve ``alpha -> mu`` for one strategy.

    ``link_threshold`` is the real-valued critical interlink count;
    ``first_link_count`` is the first integer count at or after it.
    """

    strategy: Strategy
    n1: int
    fiedler_value: float
    alpha_threshold: float
    link_threshold: float

    @property
    def first_link_count(self) -> int:
        return int(math.ceil(self.link_threshold))

    def mu(self, alpha):
        a = np.asarray(alpha, dtype=float)
        if self.strategy is Strategy.DIAGONAL:
            out = np.minimum(2.0 * a, self.fiedler_value)
        else:
            out = np.minimum(2.0 * a * self.n1, self.fiedler_value + a * self.n1)
        return float(out) if out.ndim == 0 else out

    def alpha_for_links(self, count):
        """Mean-field weight equivalent to ``count`` explicit interlinks."""
        c = np.asarray(count, dtype=float)
        scale = self.n1 if self.strategy is Strategy.DIAGONAL else self.n1**2
        out = c / scale
        return float(out) if out.ndim == 0 else out

    def mu_for_links(self, count):
        return self.mu(self.alpha_for_links(count))


@dataclass(frozen=True, eq=False)
class MeanFieldPoint:
    alpha: float
    mu: float
    spectrum: np.ndarray
    prediction: MeanFieldPrediction


def meanfield_prediction(omega, strategy: Strategy | str, n1: int | None = None
                         ) -> MeanFieldPrediction:
    w = _check_omega(omega)
    n1 = len(w) if n1 is None else int(n1)
    return prediction_from_fiedler(float(w[1]), n1, strategy)


def prediction_from_fiedler(fiedler: float, n1: int, strategy: Strategy | str
                            ) -> MeanFieldPrediction:
    """Mean-field curve from the layer's algebraic connectivity alone."""
    if not fiedler > -1e-9 or n1 < 2:
        raise ParameterError(f"need fiedler >= 0 and n1 >= 2, got {fiedler}, {n1}")
    strategy = Strategy.parse(strategy).base
    fiedler = max(0.0, float(fiedler))
    if strategy is Strategy.DIAGONAL:
        alpha_t = fiedler / 2.0
        links = fiedler * n1 / 2.0
    else:
        alpha_t = fiedler / n1
        links = fiedler * n1
    return MeanFieldPrediction(strategy, n1, fiedler, alpha_t, links)


def meanfield_diagonal(omega, alpha: float) -> MeanFieldPoint:
    """Exact coupled spectrum and Fiedler value under ``B12 = I`` with weight ``alpha``."""
    if alpha < 0:
        raise ParameterError(f"alpha must be non-negative, got {alpha}")
    w = _check_omega(omega)
    pred = meanfield_prediction(w, Strategy.DIAGONAL)
    spectrum = np.sort(np.concatenate([w, w + 2.0 * alpha]))
    return MeanFieldPoint(float(alpha), pred.mu(alpha), spectrum, pred)


def meanfield_general(omega, alpha: float, n1: int | None = None) -> MeanFieldPoint:
    """Exact coupled spectrum and Fiedler value under ``B12 = J`` with weight ``alpha``."""
    if alpha < 0:
        raise ParameterError(f"alpha must be non-negative, got {alpha}")
    w = _check_omega(omega)
    n1 = len(w) if n1 is None else int(n1)
    if n1 != len(w):
        raise ParameterError(f"layer size {n1} does not match spectrum length {len(w)}")
    pred = meanfield_prediction(w, Strategy.GENERAL, n1)
    shifted = w[1:] + alpha * n1
    spectrum = np.sort(np.concatenate([[0.0, 2.0 * alpha * n1], shifted, shifted]))
    return MeanFieldPoint(float(alpha), pred.mu(alpha), spectrum, pred)


def natural_vector(n1: int) -> np.ndarray:
    """Unit vector ``(1, ..., 1, -1, ..., -1) / sqrt(2 n1)``."""
    return np.concatenate([np.ones(n1), -np.ones(n1)]) / math.sqrt(2 * n1)


@dataclass(frozen=True, eq=False)
class PerturbationEstimate:
    """Coefficients of ``mu = mu0 + alpha mu1 + alpha^2 mu2 + ...``.

    ``mu2`` is ``x0^T Q_B x1``; ``mu2_check`` is the equivalent
    ``-x1^T Q_A x1``. ``x1_qb_x1`` and ``x1_norm2`` feed the first-order bound.
    """

    mu0: float
    mu1: float
    mu2: float
    mu2_check: float
    x0: np.ndarray
    x1: np.ndarray
    x1_qb_x1: float
    x1_norm2: float

    def estimate(self, alpha: float, order: int = 2) -> float:
        terms = [self.mu0, self.mu1, self.mu2][: order + 1]
        return float(sum(c * alpha**k for k, c in enumerate(terms)))

    def bound0(self, alpha: float) -> float:
        return float(alpha * self.mu1)

    def bound1(self, alpha: float) -> float:
        num = alpha * self.mu1 + alpha**2 * self.mu2 + alpha**3 * self.x1_qb_x1
        return float(num / (1.0 + alpha**2 * self.x1_norm2))


def _check_interlinks(sys: CoupledSystem) -> None:
    if not sys.strategy.is_meanfield and sys.num_interlinks == 0:
        raise EmptyInterlinks("perturbation estimates need at least one interlink")


def perturb_mu1(sys: CoupledSystem) -> float:
    """``x0^T Q_B x0``; equals ``2k / n1`` for ``k`` unweighted interlinks."""
    _check_interlinks(sys)
    x0 = natural_vector(sys.n1)
    return float(x0 @ (sys.interlink_laplacian() @ x0))


def _layer_solver(layer: Graph):
    # Q1 + (1/n1) J is nonsingular for a connected layer and maps the
    # complement of the ones vector onto itself.
    n1 = layer.n
    q1 = laplacian(layer)
    if n1 <= DENSE_LIMIT:
        mat = q1.toarray() + 1.0 / n1
        factor = la.cho_factor(mat)
        return lambda b: la.cho_solve(factor, b)

    def matvec(v):
        return q1 @ v + v.sum() / n1

    op = LinearOperator((n1, n1), matvec=matvec, dtype=float)

    def solve(b):
        x, info = cg(op, b, rtol=1e-13, maxiter=10 * n1)
        if info:
            raise SingularSystem(f"conjugate gradients did not converge (info={info})")
        return x

    return solve


def perturb_x1(sys: CoupledSystem, mu1: float | None = None) -> np.ndarray:
    """First-order eigenvector correction.

    Solves ``Q_A x1 = -(Q_B - mu1) x0`` with ``x1`` orthogonal to both
    ``x0`` and the ones vector.
    """
    _check_interlinks(sys)
    if not is_connected(sys.layer):
        raise SingularSystem("layer is disconnected; Q_A has a kernel larger than two")
    n1 = sys.n1
    x0 = natural_vector(n1)
    qb = sys.interlink_laplacian()
    if mu1 is None:
        mu1 = float(x0 @ (qb @ x0))
    rhs = -(qb @ x0 - mu1 * x0)
    solve = _layer_solver(sys.layer)
    top = solve(rhs[:n1])
    bottom = solve(rhs[n1:])
    x1 = np.concatenate([top, bottom])
    # remove round-off along the kernel
    x1 -= x1[:n1].mean() * np.concatenate([np.ones(n1), np.zeros(n1)])
    x1 -= x1[n1:].mean() * np.concatenate([np.zeros(n1), np.ones(n1)])
    return x1


def perturbation_estimate(sys: CoupledSystem) -> PerturbationEstimate:
    _check_interlinks(sys)
    n1 = sys.n1
    x0 = natural_vector(n1)
    qb = sys.interlink_laplacian()
    mu1 = float(x0 @ (qb @ x0))
    x1 = perturb_x1(sys, mu1)
    qa = sys.intralayer_laplacian()
    mu2 = float(x0 @ (qb @ x1))
    mu2_check = -float(x1 @ (qa @ x1))
    return PerturbationEstimate(
        mu0=0.0, mu1=mu1, mu2=mu2, mu2_check=mu2_check, x0=x0, x1=x1,
        x1_qb_x1=float(x1 @ (qb @ x1)), x1_norm2=float(x1 @ x1),
    )


def perturb_mu2(sys: CoupledSystem) -> float:
    """Second-order coefficient, never positive."""
    est = perturbation_estimate(sys)
    scale = max(1.0, abs(est.mu2))
    if abs(est.mu2 - est.mu2_check) > 1e-9 * scale:
        raise SingularSystem(
            f"second-order coefficient is inconsistent: {est.mu2} vs {est.mu2_check}")
    return est.mu2


def perturb_upper_bounds(sys: CoupledSystem, alpha: float) -> tuple[float, float]:
    """Rayleigh-quotient bounds on ``mu(Q_A + alpha Q_B)`` from ``x0`` and ``x0 + alpha x1``."""
    est = perturbation_estimate(sys)
    return est.bound0(alpha), est.bound1(alpha)

