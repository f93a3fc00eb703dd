import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from supranet.coupling import CoupledSystem, InterlinkSet, Strategy, couple_diagonal, couple_meanfield
from supranet.errors import EmptyInterlinks, ParameterError, SingularSystem
from supranet.generators import gen_random_regular
from supranet.graph import build_graph, laplacian
from supranet.metrics import interdependence_angle
from supranet.spectral import fiedler_pair
from supranet.theory import (
    layer_spectrum,
    meanfield_diagonal,
    meanfield_general,
    meanfield_prediction,
    natural_vector,
    perturb_mu1,
    perturb_mu2,
    perturb_upper_bounds,
    perturb_x1,
    perturbation_estimate,
    prediction_from_fiedler,
)

from conftest import dense_fiedler, graphs

K3 = [0.0, 3.0, 3.0]


def test_meanfield_diagonal_k3():
    pt = meanfield_diagonal(K3, 0.5)
    assert pt.mu == 1.0
    assert pt.prediction.alpha_threshold == 1.5
    assert pt.prediction.link_threshold == 4.5
    assert pt.prediction.first_link_count == 5
    np.testing.assert_allclose(pt.spectrum, [0, 1, 3, 3, 4, 4])
    assert meanfield_diagonal(K3, 0.0).mu == 0.0
    assert meanfield_diagonal(K3, 10.0).mu == 3.0


def test_meanfield_general_k3(k3):
    pt = meanfield_general(K3, 0.5, 3)
    assert pt.mu == 3.0
    assert pt.prediction.alpha_threshold == 1.0
    assert pt.prediction.link_threshold == 9.0
    q = couple_meanfield(k3, "general", 0.5).supra_laplacian()
    assert abs(dense_fiedler(q) - 3.0) < 1e-12
    np.testing.assert_allclose(np.linalg.eigvalsh(q.toarray()), pt.spectrum, atol=1e-12)
    assert meanfield_general(K3, 0.0, 3).mu == 0.0
    assert meanfield_general(K3, 2.0, 3).mu == 9.0
    q = couple_meanfield(k3, "general", 2.0).supra_laplacian()
    assert abs(dense_fiedler(q) - 9.0) < 1e-12


def test_general_second_regime_slope_halves():
    pred = meanfield_prediction(K3, "general")
    a = np.array([1.5, 2.0])
    b = np.array([0.25, 0.5])
    post = np.diff(pred.mu(a))[0] / 0.5
    pre = np.diff(pred.mu(b))[0] / 0.25
    assert post == pytest.approx(0.5 * pre)


def test_threshold_factor_two():
    for w in (0.1, 1.0, 3.3):
        d = prediction_from_fiedler(w, 50, "diagonal")
        g = prediction_from_fiedler(w, 50, "general")
        assert g.link_threshold == 2 * d.link_threshold
        assert d.link_threshold == d.alpha_threshold * 50
        assert g.link_threshold == g.alpha_threshold * 50**2


def test_alpha_for_links():
    d = prediction_from_fiedler(1.0, 10, "diagonal")
    g = prediction_from_fiedler(1.0, 10, "general")
    assert d.alpha_for_links(5) == 0.5 and g.alpha_for_links(5) == 0.05
    assert d.mu_for_links(10) == 1.0


def test_omega_validation():
    with pytest.raises(ParameterError):
        meanfield_diagonal([0.0, 3.0, 1.0], 1.0)
    with pytest.raises(ParameterError):
        meanfield_diagonal([0.5, 3.0], 1.0)
    with pytest.raises(ParameterError):
        meanfield_diagonal(K3, -1.0)
    with pytest.raises(ParameterError):
        meanfield_general(K3, 1.0, 4)


@given(st.lists(st.floats(0.01, 20), min_size=1, max_size=10), st.sampled_from(["diagonal", "general"]))
def test_curve_shape(rest, strategy):
    omega = np.concatenate([[0.0], np.sort(rest)])
    pred = meanfield_prediction(omega, strategy)
    alphas = np.linspace(0, 3 * pred.alpha_threshold, 61)
    mu = pred.mu(alphas)
    assert mu[0] == 0
    assert np.all(np.diff(mu) >= 0)
    # piecewise linear with a single kink at the threshold
    assert pred.mu(pred.alpha_threshold) == pytest.approx(
        2 * pred.alpha_threshold * (1 if strategy == "diagonal" else len(omega)))


@given(graphs(min_n=2, max_n=12, connected=True), st.floats(0, 3))
def test_meanfield_matches_oracle(g, scale):
    omega = layer_spectrum(g)
    for strategy, fn in (("diagonal", meanfield_diagonal), ("general", meanfield_general)):
        alpha = scale * (omega[1] / 2 if strategy == "diagonal" else omega[1] / g.n)
        pt = fn(omega, alpha)
        q = couple_meanfield(g, strategy, alpha).supra_laplacian()
        assert abs(pt.mu - dense_fiedler(q)) <= 1e-9
        np.testing.assert_allclose(np.linalg.eigvalsh(q.toarray()), pt.spectrum, atol=1e-9)


def test_threshold_crossing_vectors():
    layer = gen_random_regular(40, 4, 7)
    omega = layer_spectrum(layer)
    alpha_i = omega[1] / 2
    xi = fiedler_pair(laplacian(layer)).vector
    below = fiedler_pair(couple_meanfield(layer, "diagonal", 0.9 * alpha_i).supra_laplacian())
    above = fiedler_pair(couple_meanfield(layer, "diagonal", 1.1 * alpha_i).supra_laplacian())
    assert interdependence_angle(below.vector, 40) < 0.01
    ref = np.concatenate([xi, xi]) / math.sqrt(2)
    assert math.acos(min(1.0, abs(above.vector @ ref))) < 0.01


def test_mu1_values():
    layer = gen_random_regular(1000, 4, 0)
    sys = couple_diagonal(layer, 1, seed=0)
    assert perturb_mu1(sys) == pytest.approx(0.002, abs=1e-15)
    k3 = build_graph(3, [(0, 1), (1, 2), (0, 2)])
    assert perturb_mu1(couple_diagonal(k3, 3)) == pytest.approx(2.0, abs=1e-15)
    sys = couple_diagonal(k3, 1)
    assert perturb_mu1(sys) >= dense_fiedler(sys.supra_laplacian())


def test_mu1_linearity():
    layer = gen_random_regular(30, 4, 0)
    single = perturb_mu1(CoupledSystem(layer, InterlinkSet("general", [(0, 5)])))
    for k in range(1, 8):
        pairs = [(i, (3 * i + 1) % 30) for i in range(k)]
        sys = CoupledSystem(layer, InterlinkSet("general", pairs))
        assert perturb_mu1(sys) == pytest.approx(k * single, abs=1e-14)
        assert perturb_mu1(sys) == pytest.approx(2 * k / 30, abs=1e-14)


def test_empty_interlinks(k3):
    with pytest.raises(EmptyInterlinks):
        perturb_mu1(couple_diagonal(k3, 0))


def test_x1_full_diagonal_vanishes():
    layer = gen_random_regular(20, 4, 0)
    sys = couple_diagonal(layer, 20, seed=1)
    np.testing.assert_allclose(perturb_x1(sys), 0, atol=1e-12)
    assert abs(perturb_mu2(sys)) < 1e-12


def test_x1_two_triangles(k3):
    sys = CoupledSystem(k3, InterlinkSet("diagonal", [(0, 0)]))
    x0 = natural_vector(3)
    qa = sys.intralayer_laplacian().toarray()
    qb = sys.interlink_laplacian().toarray()
    mu1 = perturb_mu1(sys)
    x1 = perturb_x1(sys)
    np.testing.assert_allclose(qa @ x1 + (qb - mu1 * np.eye(6)) @ x0, 0, atol=1e-12)
    # oracle: least-squares solve restricted to the complement of the kernel
    kernel = np.stack([np.r_[np.ones(3), np.zeros(3)], np.r_[np.zeros(3), np.ones(3)]], axis=1)
    lhs = np.vstack([qa, kernel.T])
    rhs = np.r_[-(qb - mu1 * np.eye(6)) @ x0, 0, 0]
    np.testing.assert_allclose(x1, np.linalg.lstsq(lhs, rhs, rcond=None)[0], atol=1e-12)
    est = perturbation_estimate(sys)
    assert est.mu2 < 0
    assert abs(est.mu2 - est.mu2_check) < 1e-12
    assert perturb_mu2(sys) == est.mu2


def test_x1_disconnected_layer():
    g = build_graph(4, [(0, 1), (2, 3)])
    with pytest.raises(SingularSystem):
        perturb_x1(CoupledSystem(g, InterlinkSet("diagonal", [(0, 0)])))


def test_bounds_two_triangles(k3):
    sys = CoupledSystem(k3, InterlinkSet("diagonal", [(0, 0)]))
    b0, b1 = perturb_upper_bounds(sys, 1.0)
    assert b0 == pytest.approx(2 / 3)
    assert dense_fiedler(sys.supra_laplacian()) <= b0
    for alpha in np.linspace(0.01, 0.2, 20):
        b0, b1 = perturb_upper_bounds(sys, alpha)
        mu = dense_fiedler(sys.with_alpha(alpha).supra_laplacian())
        assert mu <= b1 + 1e-12 <= b0 + 2e-12
    b0, b1 = perturb_upper_bounds(sys, 1e-8)
    assert b0 < 1e-7 and b1 < 1e-7


def test_bound1_is_rayleigh_quotient(k3):
    sys = CoupledSystem(k3, InterlinkSet("general", [(0, 1), (2, 2)]))
    est = perturbation_estimate(sys)
    alpha = 0.3
    v = est.x0 + alpha * est.x1
    q = sys.with_alpha(alpha).supra_laplacian().toarray()
    assert est.bound1(alpha) == pytest.approx(v @ q @ v / (v @ v), rel=1e-12)
    assert est.estimate(alpha, 2) <= est.estimate(alpha, 1)


def test_layer_solver_cg_route(monkeypatch):
    import supranet.theory as theory
    layer = gen_random_regular(60, 4, 3)
    sys = couple_diagonal(layer, 5, seed=2)
    direct = perturb_x1(sys)
    monkeypatch.setattr(theory, "DENSE_LIMIT", 10)
    np.testing.assert_allclose(perturb_x1(sys), direct, atol=1e-10)


def _draw_system(seed, k):
    layer = gen_random_regular(100, 4, seed)
    rng = np.random.default_rng(seed)
    strategy = "diagonal" if seed % 2 else "general"
    if strategy == "diagonal":
        nodes = rng.choice(100, size=k, replace=False)
        pairs = np.column_stack([nodes, nodes])
    else:
        flat = rng.choice(100 * 100, size=k, replace=False)
        pairs = np.column_stack([flat // 100, flat % 100])
    return CoupledSystem(layer, InterlinkSet(strategy, pairs))


@pytest.mark.parametrize("seed", range(10))
def test_bound_chain_rr(seed):
    for k in (1, 2, 4):
        sys = _draw_system(seed, k)
        est = perturbation_estimate(sys)
        assert est.mu2 <= 0
        x1 = est.x1
        assert abs(x1.sum()) < 1e-10 and abs(x1 @ est.x0) < 1e-10
        alpha_i = dense_fiedler(laplacian(sys.layer)) / 2
        for alpha in np.linspace(0.01, 0.2, 5) * alpha_i:
            mu = dense_fiedler(sys.with_alpha(alpha).supra_laplacian())
            assert mu <= est.bound1(alpha) + 1e-12
            assert est.bound1(alpha) <= est.bound0(alpha) + 1e-12
