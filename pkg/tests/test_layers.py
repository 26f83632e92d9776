import math

import numpy as np
import pytest
from scipy.integrate import quad

from twophase.errors import ConfigError, DegenerateSymbol
from twophase.layers import (AxialProfile, ForcingProfiles, axial_kernel_integrals,
                             forced_interface_curve, parabolic_field,
                             parabolic_trace_uNP, reconstruct_w,
                             reduce_rhs, solve_interface, trace_wN_minus,
                             transmission_residuals, whole_space_field,
                             whole_space_traces)
from twophase.params import FluidParams
from twophase.symbols import SymbolPoint, eval_core


def _random_point(rng, lam_lo=-1.0, lam_hi=1.5):
    A = 10 ** rng.uniform(-2, 0.7)
    lam = complex(rng.normal(), rng.normal()) * 10 ** rng.uniform(lam_lo, lam_hi)
    return SymbolPoint(A=A, lam=lam, xi=(A,))


def test_reduced_rhs_example(asym_params, asym_consts):
    # h = 0, g = (0, g_N): G = 0 and H = -A g_N
    pt = SymbolPoint(A=0.7, lam=1.2 + 0.4j, xi=(0.7,))
    core = eval_core(asym_params, asym_consts, pt)
    gN = 2.0 + 1.0j
    rhs = reduce_rhs(asym_params, core, (0.7,), (0.0, gN), (0.0, 0.0))
    assert rhs.G == 0
    assert rhs.H == pytest.approx(-0.7 * gN, rel=1e-15)


def test_dense_solve_and_residuals(asym_params, asym_consts, rng):
    worst_dense, worst_res = 0.0, 0.0
    for _ in range(200):
        pt = _random_point(rng)
        core = eval_core(asym_params, asym_consts, pt)
        g = tuple(complex(rng.normal(), rng.normal()) for _ in range(2))
        h = tuple(complex(rng.normal(), rng.normal()) for _ in range(2))
        rhs = reduce_rhs(asym_params, core, pt.xi, g, h)
        mat = np.array([[core.L22, -core.L12], [-core.L21, core.L11]])
        dense = np.linalg.solve(mat, np.array([rhs.G, rhs.H]))
        coeffs = solve_interface(asym_params, pt, rhs, consts=asym_consts, core=core)
        got = np.array([coeffs.beta_prime_dot_minus, coeffs.beta_N_minus])
        worst_dense = max(worst_dense, float(np.max(np.abs(got - dense))
                                             / max(1.0, float(np.max(np.abs(dense))))))
        res = transmission_residuals(asym_params, pt, rhs, coeffs)
        worst_res = max(worst_res, max(res.values()))
        tr = trace_wN_minus(asym_params, pt, rhs, consts=asym_consts, core=core)
        assert tr == pytest.approx(coeffs.beta_N_minus, rel=1e-14)
    assert worst_dense <= 1e-12
    assert worst_res <= 1e-10


def test_divergence_rows(asym_params, asym_consts, rng):
    for _ in range(40):
        pt = _random_point(rng)
        core = eval_core(asym_params, asym_consts, pt)
        g = tuple(complex(rng.normal(), rng.normal()) for _ in range(2))
        h = tuple(complex(rng.normal(), rng.normal()) for _ in range(2))
        rhs = reduce_rhs(asym_params, core, pt.xi, g, h)
        coeffs = solve_interface(asym_params, pt, rhs, consts=asym_consts, core=core)
        res = transmission_residuals(asym_params, pt, rhs, coeffs)
        assert res["divergence_A_plus"] <= 1e-12
        assert res["divergence_A_minus"] <= 1e-12
        assert res["divergence_B_plus"] <= 1e-12
        assert res["divergence_B_minus"] <= 1e-12


def test_no_velocity_jump_without_h(asym_params, asym_consts):
    pt = SymbolPoint(A=0.5, lam=0.8 - 0.6j, xi=(0.5,))
    core = eval_core(asym_params, asym_consts, pt)
    rhs = reduce_rhs(asym_params, core, pt.xi, (0.4 - 0.2j, 1.0j), (0.0, 0.0))
    coeffs = solve_interface(asym_params, pt, rhs, consts=asym_consts, core=core)
    assert coeffs.beta_N_plus == coeffs.beta_N_minus
    assert coeffs.beta_j_plus[0] == coeffs.beta_j_minus[0]


def test_trace_zero_and_conjugation(asym_params, asym_consts):
    pt = SymbolPoint(A=0.3, lam=0.7 + 0.2j, xi=(0.3,))
    core = eval_core(asym_params, asym_consts, pt)
    rhs0 = reduce_rhs(asym_params, core, pt.xi, (0.0, 0.0), (0.0, 0.0))
    assert trace_wN_minus(asym_params, pt, rhs0, consts=asym_consts, core=core) == 0
    g = (0.3 + 0.1j, -0.7j)
    h = (0.2 - 0.4j, 0.9)
    rhs = reduce_rhs(asym_params, core, pt.xi, g, h)
    tr = trace_wN_minus(asym_params, pt, rhs, consts=asym_consts, core=core)
    # Schwarz reflection: conjugate data and spectral parameter, flip the
    # tangential direction (the i xi contractions change sign under conj)
    ptc = SymbolPoint(A=0.3, lam=(0.7 + 0.2j).conjugate(), xi=(-0.3,))
    corec = eval_core(asym_params, asym_consts, ptc)
    rhsc = reduce_rhs(asym_params, corec, ptc.xi,
                      tuple(v.conjugate() for v in g), tuple(v.conjugate() for v in h))
    trc = trace_wN_minus(asym_params, ptc, rhsc, consts=asym_consts, core=corec)
    assert trc == pytest.approx(tr.conjugate(), rel=1e-12)


def test_degenerate_guard(asym_params, asym_consts):
    pt = SymbolPoint(A=0.5, lam=1e-16, xi=(0.5,))
    core = eval_core(asym_params, asym_consts, pt)
    rhs = reduce_rhs(asym_params, core, pt.xi, (1.0, 1.0), (0.0, 0.0))
    with pytest.raises(DegenerateSymbol):
        solve_interface(asym_params, pt, rhs, consts=asym_consts, core=core)


def test_reconstruct_matches_boundary(asym_params, asym_consts, rng):
    pt = _random_point(rng)
    core = eval_core(asym_params, asym_consts, pt)
    g = tuple(complex(rng.normal(), rng.normal()) for _ in range(2))
    h = tuple(complex(rng.normal(), rng.normal()) for _ in range(2))
    rhs = reduce_rhs(asym_params, core, pt.xi, g, h)
    coeffs = solve_interface(asym_params, pt, rhs, consts=asym_consts, core=core)
    w_up = reconstruct_w(asym_params, pt, coeffs, 0.0)
    w_dn = reconstruct_w(asym_params, pt, coeffs, -0.0 - 1e-300)
    jump = [a - b for a, b in zip(w_up, w_dn)]
    for J, hj in enumerate(rhs.h_hat):
        assert jump[J] == pytest.approx(hj, rel=1e-12, abs=1e-12)


# ---------------------------------------------------------------------------
# axial kernels vs independent Fourier quadrature
# ---------------------------------------------------------------------------

def _oracle_kernels(mu, rho, A, lam, a):
    """QAWF (oscillatory-weight) quadrature of the five normal-frequency integrals."""
    B2 = rho / mu * lam + A * A

    def even(which):
        def fr(x):
            den = mu * (x * x + B2)
            val = 1.0 / den if which == 1 else 1.0 / ((x * x + A * A) * den)
            return val.real

        def fi(x):
            den = mu * (x * x + B2)
            val = 1.0 / den if which == 1 else 1.0 / ((x * x + A * A) * den)
            return val.imag

        re = quad(fr, 0, np.inf, weight="cos", wvar=a, limit=400)[0]
        im = quad(fi, 0, np.inf, weight="cos", wvar=a, limit=400)[0]
        return (re + 1j * im) / np.pi

    def odd(which, extra=1.0):
        def fr(x):
            den = mu * (x * x + B2)
            val = x / den if which == 1 else x / ((x * x + A * A) * den)
            return val.real

        def fi(x):
            den = mu * (x * x + B2)
            val = x / den if which == 1 else x / ((x * x + A * A) * den)
            return val.imag

        re = quad(fr, 0, np.inf, weight="sin", wvar=a, limit=400)[0]
        im = quad(fi, 0, np.inf, weight="sin", wvar=a, limit=400)[0]
        return -(re + 1j * im) / np.pi

    def even2():
        def fr(x):
            val = x * x / ((x * x + A * A) * mu * (x * x + B2))
            return val.real

        def fi(x):
            val = x * x / ((x * x + A * A) * mu * (x * x + B2))
            return val.imag

        re = quad(fr, 0, np.inf, weight="cos", wvar=a, limit=400)[0]
        im = quad(fi, 0, np.inf, weight="cos", wvar=a, limit=400)[0]
        return -(re + 1j * im) / np.pi

    return {"k1": even(1), "k2": odd(1), "k3": even(3), "k4": odd(3), "k5": even2()}


def test_axial_kernels_vs_quadrature(asym_params, rng):
    worst = 0.0
    for _ in range(12):
        A = 10 ** rng.uniform(-0.5, 0.5)
        lam = complex(rng.normal(), rng.normal()) * 2.0
        a = rng.uniform(0.15, 2.0) * rng.choice([-1.0, 1.0])
        pt = SymbolPoint(A=A, lam=lam, xi=(A,))
        for side, mu, rho in (("+", asym_params.mu_plus, asym_params.rho_plus),
                              ("-", asym_params.mu_minus, asym_params.rho_minus)):
            ker = axial_kernel_integrals(asym_params, pt, a, side=side)
            orc = _oracle_kernels(mu, rho, A, lam, a)
            for key in orc:
                got = getattr(ker, key)
                worst = max(worst, abs(got - orc[key]) / max(abs(orc[key]), 1e-300))
    assert worst <= 1e-6


def test_axial_kernel_parity_and_alt(asym_params):
    pt = SymbolPoint(A=0.8, lam=0.9 + 0.4j, xi=(0.8,))
    ka = axial_kernel_integrals(asym_params, pt, 0.8, side="-")
    kb = axial_kernel_integrals(asym_params, pt, -0.8, side="-")
    assert ka.k2 == pytest.approx(-kb.k2, rel=1e-14)
    assert ka.k4 == pytest.approx(-kb.k4, rel=1e-14)
    assert ka.k1 == pytest.approx(kb.k1, rel=1e-14)
    assert ka.k3 == pytest.approx(ka.k3_alt, rel=1e-12)
    assert ka.k4 == pytest.approx(ka.k4_alt, rel=1e-12)
    assert ka.k5 == pytest.approx(ka.k5_alt, rel=1e-12)


def test_axial_kernels_lambda_zero_finite(asym_params):
    # at lambda = 0 the raw third form is 0/0; the difference-kernel variant
    # stays finite and is what gets reported
    pt = SymbolPoint(A=0.8, lam=0.0, xi=(0.8,))
    ker = axial_kernel_integrals(asym_params, pt, 0.5, side="+")
    assert np.isfinite(ker.k3.real) and np.isfinite(ker.k3.imag)
    assert ker.k3 == ker.k3_alt


# ---------------------------------------------------------------------------
# whole-space traces and the diffusive assembly
# ---------------------------------------------------------------------------

def _gauss_profile():
    return AxialProfile(kind="gaussian", amplitude=1.0, center=0.0, width=1.0)


def test_traces_zero_forcing(asym_params):
    pt = SymbolPoint(A=0.6, lam=0.9 + 0.7j, xi=(0.6,))
    tr = whole_space_traces(asym_params, pt, ForcingProfiles(2, {}))
    assert np.abs(tr["psi0"]).max() == 0
    assert np.abs(tr["dpsi0"]).max() == 0
    assert parabolic_trace_uNP(asym_params, pt, ForcingProfiles(2, {})) == 0


def test_traces_equal_fluid_symmetry():
    p = FluidParams(rho_plus=1.0, rho_minus=1.0, mu_plus=0.8, mu_minus=0.8,
                    sigma=1.0, gravity=3.0)
    pt = SymbolPoint(A=0.6, lam=0.9 + 0.7j, xi=(0.6,))
    prof = _gauss_profile()
    f = ForcingProfiles(2, {(1, +1): prof, (1, -1): prof})
    tr = whole_space_traces(p, pt, f)
    assert np.abs(tr["psi0"][:, 0] - tr["psi0"][:, 1]).max() <= 1e-14
    # jumps vanish, so the interface trace is the glued solution trace
    got = parabolic_trace_uNP(p, pt, f)
    assert got == pytest.approx(complex(tr["psi0"][1, 1]), rel=1e-10)


def test_trace_refinement_oracle(asym_params):
    pt = SymbolPoint(A=0.4, lam=1.1 - 0.3j, xi=(0.4,))
    f = ForcingProfiles(2, {(1, -1): _gauss_profile(),
                            (0, +1): AxialProfile(kind="gaussian", amplitude=0.5,
                                                  center=0.3, width=0.7)})
    coarse = whole_space_traces(asym_params, pt, f, tol=1e-8)["psi0"]
    fine = whole_space_traces(asym_params, pt, f, tol=1e-12)["psi0"]
    assert np.abs(coarse - fine).max() <= 1e-8 * max(np.abs(fine).max(), 1e-300)


def test_field_matches_traces_at_interface(asym_params):
    pt = SymbolPoint(A=0.6, lam=0.9 + 0.7j, xi=(0.6,))
    f = ForcingProfiles(2, {(1, -1): _gauss_profile(),
                            (0, +1): AxialProfile(kind="gaussian", amplitude=0.5,
                                                  center=0.3, width=0.7)})
    tr = whole_space_traces(asym_params, pt, f)["psi0"]
    for x, side in ((1e-7, 0), (-1e-7, 1)):
        fld = whole_space_field(asym_params, pt, f, x)
        err = max(abs(fld[J] - tr[J, side]) for J in range(2))
        assert err <= 1e-6 * max(np.abs(tr).max(), 1e-300)


def test_field_far_side_decay(asym_params):
    # forcing only in the upper fluid: the lower-side field decays in depth
    pt = SymbolPoint(A=0.6, lam=0.9 + 0.7j, xi=(0.6,))
    f = ForcingProfiles(2, {(1, +1): _gauss_profile()})
    mags = []
    for x in (-0.5, -1.5, -3.0, -6.0, -9.0):
        fld = whole_space_field(asym_params, pt, f, x)
        mags.append(abs(fld[1]))
    assert all(a > b for a, b in zip(mags, mags[1:]))
    # tail follows the e^{-A |x|} kernel envelope (A = 0.6 here)
    assert mags[-1] < 1e-2 * mags[0]
    assert mags[-1] / mags[-2] == pytest.approx(math.exp(-0.6 * 3.0), rel=0.1)


def test_field_zero_forcing(asym_params):
    pt = SymbolPoint(A=0.6, lam=0.9 + 0.7j, xi=(0.6,))
    fld = whole_space_field(asym_params, pt, ForcingProfiles(2, {}), 0.7)
    assert fld == (0, 0)


def test_parabolic_trace_dup_assembly(asym_params, asym_consts):
    """Independent coding of the two-block trace assembly from raw traces."""
    pt = SymbolPoint(A=0.45, lam=0.8 + 0.9j, xi=(0.45,))
    f = ForcingProfiles(2, {(1, -1): _gauss_profile(),
                            (0, +1): AxialProfile(kind="gaussian", amplitude=0.5,
                                                  center=0.3, width=0.7)})
    tr = whole_space_traces(asym_params, pt, f, tol=1e-11)
    psi0, dpsi0 = tr["psi0"], tr["dpsi0"]
    cs = eval_core(asym_params, asym_consts, pt)
    A = pt.A
    xi = pt.xi[0]
    mp_, mm_ = asym_params.mu_plus, asym_params.mu_minus
    block21 = (mp_ * (1j * xi * dpsi0[0, 0] - A**2 * psi0[1, 0])
               - mm_ * (1j * xi * dpsi0[0, 1] - A**2 * psi0[1, 1])
               + mp_ * (A + cs.B_plus) * 1j * xi * (psi0[0, 0] - psi0[0, 1])
               - mp_ * A * (cs.B_plus - A) * (psi0[1, 0] - psi0[1, 1]))
    block22 = (A * (2 * mp_ * dpsi0[1, 0] - 2 * mm_ * dpsi0[1, 1])
               - mp_ * (-A + cs.B_plus) * 1j * xi * (psi0[0, 0] - psi0[0, 1])
               + mp_ * cs.B_plus * (A + cs.B_plus) * (psi0[1, 0] - psi0[1, 1]))
    vN = (cs.L21 * block21 + cs.L22 * block22) / cs.F
    expected = psi0[1, 1] + vN
    got = parabolic_trace_uNP(asym_params, pt, f, tol=1e-11)
    assert got == pytest.approx(complex(expected), rel=1e-10)


def test_parabolic_field_continuity(asym_params):
    pt = SymbolPoint(A=0.45, lam=0.8 + 0.9j, xi=(0.45,))
    f = ForcingProfiles(2, {(1, -1): _gauss_profile()})
    up = parabolic_field(asym_params, pt, f, +1e-7)
    dn = parabolic_field(asym_params, pt, f, -1e-7)
    scale = max(abs(v) for v in up)
    assert max(abs(a - b) for a, b in zip(up, dn)) <= 1e-6 * scale


def test_forced_curve_matches_scalar(asym_params, asym_consts):
    prof = _gauss_profile()
    comps = [(1, -1, prof, 1.0 + 0.0j)]
    for lam in (0.9 + 0.7j, -0.02 + 0.3j, 2.0 - 1.0j):
        got = forced_interface_curve(asym_params, asym_consts, (0.4,),
                                     np.array([lam]), comps)
        pt = SymbolPoint(A=0.4, lam=lam, xi=(0.4,))
        profs = ForcingProfiles(2, {(1, -1): prof})
        ref_tr = parabolic_trace_uNP(asym_params, pt, profs, tol=1e-11)
        ref_fld = parabolic_field(asym_params, pt, profs, 0.0, tol=1e-11)
        assert got["trace"][0] == pytest.approx(ref_tr, rel=1e-8)
        assert got["uP0"][1][0] == pytest.approx(ref_fld[1], rel=1e-8)
        assert got["uP0"][0][0] == pytest.approx(ref_fld[0], rel=1e-7, abs=1e-12)


def test_profile_presets():
    g = AxialProfile.from_config({"preset": "gaussian", "amplitude": 2.0, "width": 0.5})
    assert g(np.array([0.0]))[0] == pytest.approx(2.0)
    b = AxialProfile.from_config({"preset": "bump", "support": 2.0})
    assert b(np.array([2.5]))[0] == 0.0
    assert b(np.array([0.0]))[0] == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        AxialProfile.from_config({"preset": "nope"})
