import math

import numpy as np
import pytest

from twophase.contours import build_gamma0, build_low_paths, integrate_exp
from twophase.kernels import (CutoffSpec, eta_hat_component, eta_integrand,
                              high_band_eta_weight, high_band_u_weights,
                              low_band_eta_weight, low_band_path_terms,
                              low_band_u_weights, mollifier, pressure_integrand,
                              pressure_weight, residue_mode, u_integrand)
from twophase.errors import ConfigError


def _low_sum(params, consts, A, t, integrand, tol=1e-10):
    return sum(low_band_path_terms(params, consts, A, t, integrand, tol=tol).values())


def test_mollifier_shape():
    r = np.linspace(0, 3, 301)
    v = mollifier(r)
    assert np.all((0.0 <= v) & (v <= 1.0))
    assert np.all(v[r <= 1.0] == 1.0)
    assert np.all(v[r >= 2.0] == 0.0)
    assert np.all(np.diff(v) <= 1e-12)


def test_cutoff_partition(calib):
    cs = CutoffSpec(calib.A0, calib.A_inf)
    A = np.concatenate([np.geomspace(1e-4, 50, 301), [calib.A0, 2 * calib.A0, calib.A_inf]])
    total = cs.low(A) + cs.mid(A) + cs.high(A)
    assert np.max(np.abs(total - 1.0)) == 0.0
    assert cs.low(calib.A0) == 1.0
    assert cs.low(2 * calib.A0) == 0.0
    assert cs.high(calib.A_inf) == 0.0
    assert cs.high(2 * calib.A_inf) == 1.0
    with pytest.raises(ConfigError):
        CutoffSpec(1.5, 2.0)


def test_eta_zero_data(params, consts):
    lp = build_low_paths(consts, 0.1)
    val = eta_hat_component(params, consts, 0.1, 1.0, 0.0, lp.gamma_res_plus)
    assert val == 0


def test_residue_vs_circle_quadrature(params, consts):
    for (A, t) in ((0.05, 1.0), (0.02, 100.0), (0.1, 10.0)):
        lp = build_low_paths(consts, A)
        quad = complex(integrate_exp(lp.gamma_res_plus, t,
                                     eta_integrand(params, consts, A), tol=1e-11))
        mode_p, mode_m = residue_mode(params, consts, A, t)
        assert abs(quad - mode_p) / abs(mode_p) <= 1e-8
        quad_m = complex(integrate_exp(lp.gamma_res_minus, t,
                                       eta_integrand(params, consts, A), tol=1e-11))
        assert abs(quad_m - mode_m) / abs(mode_m) <= 1e-8


def test_residue_mode_properties(params, consts):
    A = 0.05
    m1p, m1m = residue_mode(params, consts, A, 10.0)
    m2p, m2m = residue_mode(params, consts, A, 20.0)
    assert m1m == pytest.approx(m1p.conjugate(), rel=1e-12)
    from twophase.roots import find_roots
    pair = find_roots(params, consts, A)
    # pure exponential envelope in t
    ratio = abs(m2p) / abs(m1p)
    assert ratio == pytest.approx(math.exp(pair.lambda_plus.real * 10.0), rel=1e-6)
    # t = 0 is a plain finite evaluation
    z0p, z0m = residue_mode(params, consts, A, 0.0)
    assert np.isfinite(abs(z0p)) and np.isfinite(abs(z0m))
    assert (z0p + z0m).imag == pytest.approx(0.0, abs=1e-15)


def test_path_independence(params, consts):
    g0 = build_gamma0(consts)
    for (A, t) in ((0.05, 0.3), (0.15, 0.15), (0.01, 0.5)):
        f = eta_integrand(params, consts, A)
        v0 = complex(integrate_exp(g0, t, f, tol=1e-11))
        vsum = _low_sum(params, consts, A, t, f, tol=1e-11)
        assert abs(v0 - vsum) / abs(v0) <= 1e-6


def test_u_jump_and_divergence(params, consts):
    A, t = 0.08, 5.0
    xi = (A,)
    u0p = _low_sum(params, consts, A, t, u_integrand(params, consts, xi, 0.0, 2, "+"))
    u0m = _low_sum(params, consts, A, t, u_integrand(params, consts, xi, 0.0, 2, "-"))
    scale = max(abs(u0p), 1e-300)
    assert abs(u0p - u0m) <= 1e-8 * scale
    x = 0.5
    du2 = _low_sum(params, consts, A, t,
                   u_integrand(params, consts, xi, x, 2, "+", derivative=True))
    u1 = _low_sum(params, consts, A, t, u_integrand(params, consts, xi, x, 1, "+"))
    u2 = _low_sum(params, consts, A, t, u_integrand(params, consts, xi, x, 2, "+"))
    assert abs(1j * A * u1 + du2) <= 1e-8 * max(abs(u1), abs(u2))


def test_stress_jump_pointwise(params, consts):
    A, t = 0.08, 5.0
    xi = (A,)
    eta = _low_sum(params, consts, A, t, eta_integrand(params, consts, A))
    u0p = _low_sum(params, consts, A, t, u_integrand(params, consts, xi, 0.0, 2, "+"))
    u0m = _low_sum(params, consts, A, t, u_integrand(params, consts, xi, 0.0, 2, "-"))
    u1p = _low_sum(params, consts, A, t, u_integrand(params, consts, xi, 0.0, 1, "+"))
    u1m = _low_sum(params, consts, A, t, u_integrand(params, consts, xi, 0.0, 1, "-"))
    d1p = _low_sum(params, consts, A, t,
                   u_integrand(params, consts, xi, 0.0, 1, "+", derivative=True))
    d1m = _low_sum(params, consts, A, t,
                   u_integrand(params, consts, xi, 0.0, 1, "-", derivative=True))
    d2p = _low_sum(params, consts, A, t,
                   u_integrand(params, consts, xi, 0.0, 2, "+", derivative=True))
    d2m = _low_sum(params, consts, A, t,
                   u_integrand(params, consts, xi, 0.0, 2, "-", derivative=True))
    pp = _low_sum(params, consts, A, t, pressure_integrand(params, consts, xi, 0.0, "+"))
    pm = _low_sum(params, consts, A, t, pressure_integrand(params, consts, xi, 0.0, "-"))
    w = consts.omega + params.sigma * A**2
    tang = params.mu_plus * (d1p + 1j * A * u0p) - params.mu_minus * (d1m + 1j * A * u0m)
    norm = (2 * params.mu_plus * d2p - pp) - (2 * params.mu_minus * d2m - pm)
    assert abs(tang) <= 1e-8 * abs(w * eta)
    assert abs(norm - w * eta) <= 1e-8 * abs(w * eta)


def test_pressure_profile_form(params, consts):
    # x dependence is exactly e^{-A |x|}
    A, t = 0.12, 2.0
    xi = (A,)
    lp = build_low_paths(consts, A)
    p1 = complex(integrate_exp(lp.gamma1_plus, t,
                               pressure_integrand(params, consts, xi, 0.4, "+"), tol=1e-11))
    p2 = complex(integrate_exp(lp.gamma1_plus, t,
                               pressure_integrand(params, consts, xi, 0.8, "+"), tol=1e-11))
    assert p2 / p1 == pytest.approx(math.exp(-A * 0.4), rel=1e-10)


def test_kinematic_fd_order(params, consts):
    A = 0.08
    t = 5.0
    f = eta_integrand(params, consts, A)
    uN = _low_sum(params, consts, A, t, u_integrand(params, consts, (A,), 0.0, 2, "-"),
                  tol=1e-11)
    resids = []
    for h in (2e-3, 1e-3, 5e-4):
        ep = _low_sum(params, consts, A, t + h, f, tol=1e-11)
        em = _low_sum(params, consts, A, t - h, f, tol=1e-11)
        resids.append(abs((ep - em) / (2 * h) - uN))
    # second-order decrease under halving
    assert resids[1] / resids[0] == pytest.approx(0.25, rel=0.2)
    assert resids[2] / resids[1] == pytest.approx(0.25, rel=0.2)


def test_long_time_residue_dominance(params, consts, calib):
    A = min(0.1, calib.A0 / 2)
    t = 100.0
    full = _low_sum(params, consts, A, t, eta_integrand(params, consts, A), tol=1e-11)
    mp_, mm_ = residue_mode(params, consts, A, t)
    assert abs(full - (mp_ + mm_)) / abs(full) < 0.05


def test_vectorized_eta_weight_matches_pointwise(params, consts, calib):
    A_grid = np.geomspace(1e-3, 2 * calib.A0 * 0.95, 24)
    for t in (1.0, 50.0):
        w = low_band_eta_weight(params, consts, A_grid, t, rel_tol=1e-7)
        for idx in (2, 11, 23):
            A = float(A_grid[idx])
            ref_modes = sum(residue_mode(params, consts, A, t))
            lp = build_low_paths(consts, A)
            f = eta_integrand(params, consts, A)
            ref = ref_modes
            for path, sign in ((lp.gamma1_plus, 1), (lp.gamma1_minus, -1),
                               (lp.gamma4_plus, 1), (lp.gamma4_minus, -1),
                               (lp.gamma5_plus, 1), (lp.gamma5_minus, -1)):
                ref += sign * complex(integrate_exp(path, t, f, tol=1e-11))
            assert abs(w[idx] - ref.real) <= 1e-6 * max(abs(ref), 1e-300)
            assert abs(ref.imag) <= 1e-10 * max(abs(ref), 1e-300)


def test_vectorized_u_weights_match_pointwise(params, consts, calib):
    A_grid = np.geomspace(1e-3, calib.A0, 12)
    x = np.array([0.0, 0.4, 1.7])
    t = 20.0
    uw = low_band_u_weights(params, consts, A_grid, x, t, want_derivative=True)
    idx, xj = 7, 1
    A = float(A_grid[idx])
    xv = float(x[xj])

    def ref(m, side, xval, deriv=False):
        from twophase.roots import find_roots
        pair = find_roots(params, consts, A, check_region=False)
        f = u_integrand(params, consts, (A,), xval, m, side, derivative=deriv)
        total = 0j
        for lam0 in (pair.lambda_plus, pair.lambda_minus):
            eps = 1e-6 * abs(lam0)
            th = np.linspace(0, 2 * np.pi, 257)[:-1]
            lam = lam0 + eps * np.exp(1j * th)
            dlam = 1j * eps * np.exp(1j * th)
            total += np.sum(f(lam) * np.exp(lam * t) * dlam) * (2 * np.pi / 256) / (2j * np.pi)
        lp = build_low_paths(consts, A)
        for path, sign in ((lp.gamma1_plus, 1), (lp.gamma1_minus, -1),
                           (lp.gamma4_plus, 1), (lp.gamma4_minus, -1),
                           (lp.gamma5_plus, 1), (lp.gamma5_minus, -1)):
            total += sign * complex(integrate_exp(path, t, f, tol=1e-11))
        return total

    got = uw.value("n", "-")[idx, xj]
    expected = ref(2, "-", -xv).real
    assert abs(got - expected) <= 1e-8 * abs(expected)
    gott = uw.value("t", "+")[idx, xj]
    expected_t = (ref(1, "+", xv) / (1j * A)).real
    assert abs(gott - expected_t) <= 1e-8 * abs(expected_t)
    gotd = uw.deriv("n", "-")[idx, xj]
    expected_d = -ref(2, "-", -xv, deriv=True).real
    assert abs(gotd - expected_d) <= 1e-8 * abs(expected_d)


def test_high_band_weights_match_pointwise(params, consts, calib):
    from twophase.contours import build_high_paths
    Ah = np.array([2.5, 4.0, 8.0])
    hp = build_high_paths(consts, 1.0, calib.y_high)
    for t in (1.0, 5.0):
        wh = high_band_eta_weight(params, consts, Ah, t, 1.0, calib.y_high)
        for i, A in enumerate(Ah):
            ref = complex(integrate_exp(hp.combined, t,
                                        eta_integrand(params, consts, float(A)),
                                        tol=1e-11)).real
            assert abs(wh[i] - ref) <= 1e-6 * max(abs(ref), np.max(np.abs(wh)) * 1e-6)
    x = np.array([0.0, 0.5])
    uwh = high_band_u_weights(params, consts, Ah, x, 3.0, 1.0, calib.y_high)
    ref = complex(integrate_exp(hp.combined, 3.0,
                                u_integrand(params, consts, (2.5,), -0.5, 2, "-"),
                                tol=1e-11)).real
    assert abs(uwh.value("n", "-")[0, 1] - ref) <= 1e-8 * abs(ref)


def test_pressure_weight_matches_pointwise(params, consts, calib):
    A_grid = np.array([0.05, 0.15])
    t = 4.0
    w = pressure_weight(params, consts, A_grid, t, "-", "low")
    A = float(A_grid[1])
    ref = _low_sum(params, consts, A, t,
                   pressure_integrand(params, consts, (A,), 0.0, "-"), tol=1e-11)
    assert abs(w[1] - ref.real) <= 1e-7 * abs(ref)
