import numpy as np
import pytest

from stefanst.spacetime import (eval_basis, quadrature, ref_tables,
                                shape_functions, spatial_rule,
                                stabilization_params, time_rule)


@pytest.mark.parametrize("kind", ["tri", "quad"])
def test_partition_of_unity(kind, rng):
    for _ in range(50):
        if kind == "tri":
            a, b = rng.random(2)
            xi = (min(a, b) * 0.999, (1 - max(a, b)) * 0.999)
        else:
            xi = tuple(rng.uniform(-1, 1, 2))
        N, dN = shape_functions(kind, xi)
        assert abs(N.sum() - 1.0) < 1e-13
        assert np.all(np.abs(dN.sum(axis=0)) < 1e-13)


@pytest.mark.parametrize("kind", ["tri", "quad"])
def test_spacetime_partition_of_unity(kind, rng):
    for _ in range(20):
        xi = (0.2, 0.3) if kind == "tri" else (-0.4, 0.7)
        theta = rng.random()
        vals, grads, dth = eval_basis(kind, xi, theta)
        assert abs(vals.sum() - 1.0) < 1e-13
        assert np.all(np.abs(grads.sum(axis=0)) < 1e-13)
        assert abs(dth.sum()) < 1e-13


def test_spacetime_basis_level_ordering():
    # bottom-level functions first: at theta=0 the top half vanishes
    vals, _, _ = eval_basis("tri", (0.2, 0.2), 0.0)
    assert np.all(vals[3:] == 0.0)
    vals, _, _ = eval_basis("tri", (0.2, 0.2), 1.0)
    assert np.all(vals[:3] == 0.0)


def test_tri_rule_integrates_quadratics_exactly():
    pts, w = spatial_rule("tri")
    for (p, q), exact in [((0, 0), 0.5), ((1, 0), 1 / 6), ((0, 1), 1 / 6),
                          ((2, 0), 1 / 12), ((1, 1), 1 / 24),
                          ((0, 2), 1 / 12)]:
        val = np.sum(w * pts[:, 0] ** p * pts[:, 1] ** q)
        assert val == pytest.approx(exact, abs=1e-15)


def test_quad_rule_integrates_cubics_exactly():
    pts, w = spatial_rule("quad")
    for p in range(4):
        for q in range(4):
            exact = (((1 - (-1) ** (p + 1)) / (p + 1))
                     * ((1 - (-1) ** (q + 1)) / (q + 1)))
            val = np.sum(w * pts[:, 0] ** p * pts[:, 1] ** q)
            assert val == pytest.approx(exact, abs=1e-14)


def test_time_rule_integrates_cubics_exactly():
    theta, wt = time_rule()
    for p in range(4):
        assert np.sum(wt * theta ** p) == pytest.approx(1 / (p + 1),
                                                        abs=1e-15)


@pytest.mark.parametrize("kind", ["tri", "quad"])
def test_spacetime_quadrature_weight_sum(kind):
    total = sum(w for _, _, w in quadrature(kind))
    assert total == pytest.approx(0.5 if kind == "tri" else 4.0)


@pytest.mark.parametrize("kind", ["tri", "quad"])
def test_ref_tables_consistent_with_rules(kind):
    tab = ref_tables(kind)
    pts, ws = spatial_rule(kind)
    assert np.allclose(tab.ws, ws)
    for q in range(len(ws)):
        N, dN = shape_functions(kind, pts[q])
        assert np.allclose(tab.Ns[q], N)
        assert np.allclose(tab.dNxi[q], dN)


def test_stabilization_matches_closed_form():
    h, u, nu, dt = 0.02, 1.5, 1e-3, 0.1
    p = stabilization_params(h, u, nu, dt)
    tau = ((2 / dt) ** 2 + (2 * u / h) ** 2 + (4 * nu / h ** 2) ** 2) ** -0.5
    assert p.tau_mom == pytest.approx(tau, rel=1e-14)
    assert p.tau_cont == pytest.approx(u * h / 2, rel=1e-14)
    alpha = 7e-4
    p2 = stabilization_params(h, u, nu, dt, alpha_local=alpha)
    tau_t = ((2 / dt) ** 2 + (2 * u / h) ** 2
             + (4 * alpha / h ** 2) ** 2) ** -0.5
    assert p2.tau_temp == pytest.approx(tau_t, rel=1e-14)


def test_stabilization_zero_velocity_fallback():
    h, nu, dt = 0.05, 1e-3, 0.2
    p = stabilization_params(h, 0.0, nu, dt)
    assert p.tau_cont == pytest.approx(h ** 2 / (4 * p.tau_mom), rel=1e-14)
    # just above the threshold the advective branch is used
    p2 = stabilization_params(h, 1e-11, nu, dt)
    assert p2.tau_cont == pytest.approx(1e-11 * h / 2, rel=1e-12)


def test_stabilization_finite_over_wide_ranges():
    for h in (1e-6, 1e-3, 1.0):
        for u in (0.0, 1.0, 1e4):
            p = stabilization_params(h, u, 1e-6, 0.5)
            assert np.isfinite(p.tau_mom)
            assert np.isfinite(p.tau_cont)
            assert np.isfinite(p.tau_temp)


def test_stabilization_rejects_bad_arguments():
    with pytest.raises(ValueError):
        stabilization_params(0.0, 1.0, 1e-3, 0.1)
    with pytest.raises(ValueError):
        stabilization_params(0.1, 1.0, 1e-3, 0.0)
