import numpy as np
import pytest
from hypothesis import given, strategies as st

from kdlr.initial import counterstreaming, low_rank_initial, prepare
from kdlr.mesh import build_grid
from kdlr.moments import (
    FieldOutOfRangeError,
    dense_moments,
    evaluate_at_field,
    macroscopic_moments,
    maxwellian,
    moment_convolution,
)
from kdlr.state import LowRankState, init_from_samples
from oracles import gaussian_convolution_direct

G1 = build_grid(1, (0, 1), 16, (-10, 10), 65)
SQ = np.sqrt(2 * np.pi)


def test_maxwellian_at_origin():
    g = build_grid(1, (0, 1), 4, (-10, 10), 5)
    assert maxwellian(np.zeros(1), g)[2] == pytest.approx(1 / SQ)


@pytest.mark.parametrize("e", [-3.0, -1.2, 0.0, 0.7, 2.5, 3.0])
def test_maxwellian_normalization_and_mean(e):
    M = maxwellian(np.array([e]), G1)
    assert np.sum(G1.wv * M) == pytest.approx(1.0, abs=1e-10)
    assert np.sum(G1.wv * G1.v[:, 0] * M) == pytest.approx(e, abs=1e-10)


def test_maxwellian_normalization_at_four():
    # trapezoid error at |E| = 4 with dv = 5/16 is dominated by the cut tail
    M = maxwellian(np.array([4.0]), G1)
    assert abs(np.sum(G1.wv * M) - 1.0) < 1e-5


def test_convolution_constant_basis():
    t = moment_convolution(np.ones(G1.nv), None, G1)
    z = t.zeta_axis()
    inner = np.abs(z) <= 4
    np.testing.assert_allclose(t.values[0, inner], SQ, rtol=1e-8)
    t = moment_convolution(np.ones(G1.nv), 0, G1)
    np.testing.assert_allclose(t.values[0, inner], z[inner] * SQ, rtol=1e-8, atol=1e-12)


def test_convolution_second_moment():
    t = moment_convolution(G1.v[:, 0], 0, G1)
    z = t.zeta_axis()
    inner = np.abs(z) <= 4
    np.testing.assert_allclose(t.values[0, inner], (z[inner] ** 2 + 1) * SQ, rtol=1e-8)
    direct = gaussian_convolution_direct(G1.v[:, 0] ** 2, G1.v[:, 0], G1.dv[0], z[inner])
    np.testing.assert_allclose(t.values[0, inner], direct, rtol=1e-12, atol=1e-12)


def test_convolution_matches_direct_quadrature_random():
    V = np.random.default_rng(0).normal(size=(G1.nv, 3)) * np.exp(-G1.v[:, :1] ** 2 / 20)
    t = moment_convolution(V, 0, G1, refine=2)
    z = t.zeta_axis()
    for j in range(3):
        direct = gaussian_convolution_direct(G1.v[:, 0] * V[:, j], G1.v[:, 0], G1.dv[0], z)
        np.testing.assert_allclose(t.values[j], direct, atol=1e-11 * np.abs(direct).max())


def test_parity():
    V = np.exp(-G1.v[:, 0] ** 2 / 3)
    t = moment_convolution(V, 0, G1)
    mid = t.n // 2
    assert t.zeta_axis()[mid] == pytest.approx(0.0)
    assert abs(t.values[0, mid]) < 1e-14


def test_2d_convolution_matches_direct():
    g = build_grid(2, (0, 1), 4, (-6, 6), 17)
    V = np.exp(-0.1 * np.sum(g.v**2, 1))
    t = moment_convolution(V, 1, g)
    zeta = g.v[[40, 100, 144]]
    for zz in zeta:
        direct = np.sum(g.wv * g.v[:, 1] * V * np.exp(-0.5 * np.sum((zz - g.v) ** 2, 1)))
        i, j = [int(round((zz[m] + 6) / g.dv[m])) for m in range(2)]
        assert t.values[0, i, j] == pytest.approx(direct, rel=1e-12, abs=1e-14)


def test_linear_interpolation_exact_on_linear_table():
    t = moment_convolution(np.ones(G1.nv), 0, G1)
    E = np.array([[0.123], [-1.77], [2.9]])
    np.testing.assert_allclose(evaluate_at_field(t, E, order=1)[:, 0], E[:, 0], atol=1e-9)


def test_linear_interpolation_error_bound():
    t = moment_convolution(G1.v[:, 0], 0, G1)
    h = G1.dv[0]
    E = (t.zeta_axis()[120:124] + 0.37 * h)[:, None]
    got = evaluate_at_field(t, E, order=1)[:, 0] * SQ
    exact = (E[:, 0] ** 2 + 1) * SQ
    bound = h * h / 8 * 2 * SQ
    assert np.all(np.abs(got - exact) <= bound + 1e-9)
    # the default high-order interpolant is far tighter
    got7 = evaluate_at_field(t, E)[:, 0] * SQ
    np.testing.assert_allclose(got7, exact, rtol=1e-8)


def test_out_of_range_names_location():
    t = moment_convolution(np.ones(G1.nv), None, G1)
    E = np.zeros((5, 1))
    E[3] = 12.0
    with pytest.raises(FieldOutOfRangeError, match=r"x\[3\]"):
        evaluate_at_field(t, E)


def test_moments_of_constant_state():
    st_ = init_from_samples(np.ones((G1.nx, G1.nv)), 3, G1)
    E = (0.8 * np.sin(2 * np.pi * G1.x[:, 0]))[:, None]
    rho, J = macroscopic_moments(st_, E, G1)
    np.testing.assert_allclose(rho, 1.0, atol=1e-10)
    np.testing.assert_allclose(J, E, atol=1e-10)
    zero = LowRankState(st_.X, np.zeros((3, 3)), st_.V)
    rho, J = macroscopic_moments(zero, E, G1)
    assert np.all(rho == 0) and np.all(J == 0)


def test_counterstreaming_moments_match_dense():
    g = build_grid(1, (0, 1), 32, (-10, 10), 65)
    data = prepare(counterstreaming(g), g)
    st_ = low_rank_initial(data, 10, g)
    rho, J = macroscopic_moments(st_, data.E, g)
    rho_d, J_d = dense_moments(maxwellian(data.E, g) * st_.g(), g)
    np.testing.assert_allclose(rho, rho_d, rtol=1e-8)
    np.testing.assert_allclose(J, J_d, atol=1e-8 * np.abs(rho_d).max())


@given(st.integers(0, 2**31 - 1), st.floats(0.2, 3.5))
def test_moments_agree_with_dense_quadrature(seed, amp):
    rng = np.random.default_rng(seed)
    X = np.linalg.qr(rng.normal(size=(G1.nx, 3)))[0] / np.sqrt(G1.dx[0])
    V = np.exp(-G1.v[:, :1] ** 2 / 8) * rng.normal(size=(1, 3)) + 0.1 * rng.normal(size=(G1.nv, 3)) * np.exp(-G1.v[:, :1] ** 2 / 30)
    st_ = LowRankState(X, rng.normal(size=(3, 3)), V)
    E = amp * np.sin(2 * np.pi * G1.x[:, :1] + rng.uniform(0, 6))
    rho, J = macroscopic_moments(st_, E, G1)
    rho_d, J_d = dense_moments(maxwellian(E, G1) * st_.g(), G1)
    scale = np.abs(rho_d).max() + np.abs(J_d).max()
    np.testing.assert_allclose(rho, rho_d, atol=1e-8 * scale)
    np.testing.assert_allclose(J, J_d, atol=1e-8 * scale)


def test_2d_moments_agree_with_dense():
    g = build_grid(2, (0, 1), 8, (-10, 10), 64)
    rng = np.random.default_rng(5)
    X = np.linalg.qr(rng.normal(size=(g.nx, 2)))[0] / np.sqrt(g.dx_vol)
    V = np.stack([np.exp(-np.sum((g.v - c) ** 2, 1) / 4) for c in ([0.5, 0], [-1, 1])], 1)
    st_ = LowRankState(X, rng.normal(size=(2, 2)), V)
    E = 1.5 * np.stack([np.sin(2 * np.pi * g.x[:, 0]), np.cos(2 * np.pi * g.x[:, 1])], 1)
    rho, J = macroscopic_moments(st_, E, g)
    rho_d, J_d = dense_moments(maxwellian(E, g) * st_.g(), g)
    scale = np.abs(rho_d).max()
    np.testing.assert_allclose(rho, rho_d, atol=1e-8 * scale)
    np.testing.assert_allclose(J, J_d, atol=1e-8 * scale)
