import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from kdlr.diagnostics import RunHistory, l1_diff, maxwellian_distance, observed_order, read_history_csv
from kdlr.initial import cold_beam, local_equilibrium, low_rank_initial, prepare
from kdlr.mesh import ConfigurationError, build_grid
from kdlr.moments import maxwellian


def test_l1_diff_trivial_cases():
    g = build_grid(1, (0, 1), 8, (-10, 10), 9)
    f = np.random.default_rng(0).normal(size=(g.nx, g.nv))
    assert l1_diff(f, g, f, g) == 0.0
    assert l1_diff(np.zeros((g.nx, g.nv)), g, np.full((g.nx, g.nv), 2.5), g) == pytest.approx(2.5 * 20.0)


def test_l1_diff_interpolation_slope():
    errs, hs = [], []
    for n in (8, 16, 32, 64):
        ga = build_grid(1, (0, 1), n, (-10, 10), n + 1)
        gb = build_grid(1, (0, 1), 2 * n, (-10, 10), 2 * n + 1)
        fa = np.sin(2 * np.pi * ga.x[:, :1]) * np.exp(-ga.v[:, 0] ** 2 / 8)[None, :]
        fb = np.sin(2 * np.pi * gb.x[:, :1]) * np.exp(-gb.v[:, 0] ** 2 / 8)[None, :]
        errs.append(l1_diff(fa, ga, fb, gb))
        hs.append(ga.dx[0])
    assert 1.9 <= observed_order(errs, hs) <= 2.1


def test_l1_diff_incompatible_grids():
    a = build_grid(1, (0, 1), 8, (-10, 10), 9)
    b = build_grid(1, (0, 1), 12, (-10, 10), 9)
    with pytest.raises(ConfigurationError):
        l1_diff(np.zeros((a.nx, a.nv)), a, np.zeros((b.nx, b.nv)), b)
    c = build_grid(1, (0, 1), 16, (-10, 10), 16)
    with pytest.raises(ConfigurationError):
        l1_diff(np.zeros((a.nx, a.nv)), a, np.zeros((c.nx, c.nv)), c)


G = build_grid(1, (0, 1), 6, (-10, 10), 7)
field_arrays = arrays(float, (G.nx, G.nv), elements=st.floats(-5, 5))


@given(field_arrays, field_arrays, field_arrays)
def test_l1_diff_metric_properties(a, b, c):
    assert l1_diff(a, G, b, G) == pytest.approx(l1_diff(b, G, a, G))
    assert l1_diff(a, G, c, G) <= l1_diff(a, G, b, G) + l1_diff(b, G, c, G) + 1e-12


def test_observed_order_exact():
    assert observed_order([4, 1, 0.25], [1, 0.5, 0.25]) == pytest.approx(2.0)
    assert observed_order([2, 1, 0.5], [1, 0.5, 0.25]) == pytest.approx(1.0)


@given(st.floats(1e-6, 1e6), st.floats(0.5, 3))
def test_observed_order_scale_invariant(scale, p):
    h = np.array([1, 0.5, 0.25, 0.125])
    e = 3 * h**p
    assert observed_order(scale * e, h) == pytest.approx(observed_order(e, h), abs=1e-9)


def test_observed_order_drops_nonpositive_with_warning():
    with pytest.warns(RuntimeWarning, match="non-positive"):
        s = observed_order([4, 0.0, 0.25, 1 / 16], [1, 0.5, 0.25, 0.125])
    assert s == pytest.approx(2.0)
    with pytest.raises(ValueError):
        observed_order([1, 2], [1, 0.5])


def test_maxwellian_distance_zero_at_equilibrium():
    g = build_grid(1, (0, 1), 16, (-10, 10), 64)
    data = prepare(local_equilibrium(g), g)
    assert maxwellian_distance(data.f, data.E, g) <= 1e-12
    st_ = low_rank_initial(data, 3, g)
    assert maxwellian_distance(st_, data.E, g) <= 1e-10


def test_maxwellian_distance_cold_beam_matches_quadrature():
    g = build_grid(2, (0, 1), 4, (-10, 10), 24)
    data = prepare(cold_beam(g), g)
    E = np.zeros((g.nx, 2))
    got = maxwellian_distance(data.f, E, g)
    w = np.outer(np.r_[0.5, np.ones(22), 0.5], np.r_[0.5, np.ones(22), 0.5]).ravel() * g.dv[0] * g.dv[1]
    total = 0.0
    for p in range(g.nx):
        rho = sum(w[q] * data.f[p, q] for q in range(g.nv))
        M = np.exp(-0.5 * (g.v[:, 0] ** 2 + g.v[:, 1] ** 2)) / (2 * np.pi)
        total += sum(w[q] * abs(data.f[p, q] - rho * M[q]) for q in range(g.nv)) * g.dx_vol
    assert got > 0
    assert got == pytest.approx(total, rel=1e-12)


def test_history_csv_roundtrip(tmp_path):
    h = RunHistory()
    h.append(0.0, [3.0, 1e-5], 1.0, 0.0, 0.5, 0.0)
    h.append(0.1, [2.9, 2e-5], 1.0 + 1e-15, 1e-6, 0.4, 12.5)
    with pytest.raises(ValueError):
        h.append(0.1, [1, 1], 1, 1, 1, 1)
    path = tmp_path / "h.csv"
    h.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,sigma1,sigma2,mass,gauss_res,maxw_dist,wall_ms"
    assert "1.0000000000000011" in lines[2]
    back = read_history_csv(path)
    np.testing.assert_array_equal(back["mass"], h.mass)
    np.testing.assert_array_equal(back["sigma2"], [1e-5, 2e-5])


def test_history_without_rank():
    h = RunHistory()
    h.append(0.0, None, 1.0, 0.0, 0.0, 0.0)
    assert h.header() == ["t", "mass", "gauss_res", "maxw_dist", "wall_ms"]
