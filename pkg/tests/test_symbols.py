import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twophase.errors import BranchCutViolation, ConfigError
from twophase.params import FluidParams, derive_constants
from twophase.symbols import (SymbolPoint, branch_sqrt, core_arrays, eval_core,
                              eval_kernel_symbols, eval_M, zeta)


def test_branch_sqrt_examples():
    assert branch_sqrt(4.0) == pytest.approx(2.0)
    assert branch_sqrt(2j) == pytest.approx(1 + 1j)
    with pytest.raises(BranchCutViolation):
        branch_sqrt(-1.0)
    with pytest.raises(BranchCutViolation):
        branch_sqrt(0.0)


@settings(max_examples=80, deadline=None)
@given(re=st.floats(-50, 50, allow_nan=False), im=st.floats(-50, 50, allow_nan=False))
def test_branch_sqrt_postconditions(re, im):
    z = complex(re, im)
    if z.imag == 0 and z.real <= 0:
        return
    w = branch_sqrt(z)
    assert w * w == pytest.approx(z, rel=1e-12, abs=1e-300)
    assert w.real > 0


def test_derive_constants_values(params, consts):
    assert consts.omega == pytest.approx(3.0)
    assert consts.alpha == pytest.approx(1.0)
    assert consts.tilde_sigma == pytest.approx(1.0 / 3.0)
    expected_beta = math.sqrt(2.0) / (3.0 * (1.0 + math.sqrt(2.0)))
    assert consts.beta == pytest.approx(expected_beta, rel=1e-14)
    assert consts.theta1 == pytest.approx(math.atan(1.0 / 16.0), rel=1e-15)
    assert consts.theta1 == pytest.approx(0.06242, abs=1e-5)
    assert consts.theta2 == pytest.approx(math.atan(2.0 / 16.0), rel=1e-15)
    assert consts.lambda1 == 1.0
    assert consts.z0 == pytest.approx(min(1.0, 0.5))


def test_lambda1_override(params):
    c = derive_constants(params, lambda1_override=2.5)
    assert c.lambda1 == 2.5
    with pytest.raises(ConfigError):
        derive_constants(params, lambda1_override=-1.0)


def test_stable_regime_flag(params):
    assert params.stable_regime()
    inverted = FluidParams(rho_plus=2.0, rho_minus=1.0, mu_plus=1.0, mu_minus=1.0,
                           sigma=1.0, gravity=3.0)
    assert not inverted.stable_regime()


def test_point_validation():
    with pytest.raises(ConfigError):
        SymbolPoint(A=0.0, lam=0.0)
    with pytest.raises(ConfigError):
        SymbolPoint(A=1.0, lam=1.0, xi=(0.5,))  # |xi| != A
    SymbolPoint(A=0.0, lam=1.0)  # A = 0 alone is fine


def test_core_at_lambda_zero(params, consts):
    pt = SymbolPoint(A=1.0, lam=0.0)
    cs = eval_core(params, consts, pt)
    assert cs.B_plus == pytest.approx(1.0)
    assert cs.B_minus == pytest.approx(1.0)
    assert cs.F == pytest.approx(16.0)          # 4 (mu+ + mu-)^2 A^3
    assert cs.L21 == pytest.approx(0.0, abs=1e-15)


def test_core_on_cut_raises(params, consts):
    with pytest.raises(BranchCutViolation):
        eval_core(params, consts, SymbolPoint(A=1.0, lam=-0.75))


def test_F_closed_form_at_lambda_zero(rng):
    for _ in range(100):
        vals = np.exp(rng.normal(size=6))
        p = FluidParams(*vals)
        c = derive_constants(p)
        A = 10 ** rng.uniform(-2, 1)
        cs = eval_core(p, c, SymbolPoint(A=A, lam=0.0))
        expected = 4.0 * (p.mu_plus + p.mu_minus) ** 2 * A**3
        assert abs(cs.F - expected) <= 1e-13 * abs(expected)


def test_factorization_identity_random(rng):
    worst = 0.0
    for _ in range(300):
        p = FluidParams(*np.exp(rng.normal(size=6) * 0.7))
        c = derive_constants(p)
        A = 10 ** rng.uniform(-3, 1)
        lam = complex(rng.normal(), rng.normal()) * 10 ** rng.uniform(-2, 2)
        cs = eval_core(p, c, SymbolPoint(A=A, lam=lam))
        rho_sum = p.rho_plus + p.rho_minus
        rel = abs(cs.L - rho_sum * (cs.D_plus + cs.D_minus) * cs.script_L) / abs(cs.L)
        worst = max(worst, rel)
        # complement construction: exact up to one rounding of the subtraction
        assert cs.script_F + cs.script_G == pytest.approx(cs.script_L, rel=4e-16)
    assert worst <= 1e-12


def test_determinant_identity(asym_params, asym_consts, rng):
    # the 2x2 system determinant equals F
    for _ in range(50):
        A = 10 ** rng.uniform(-2, 0.7)
        lam = complex(rng.normal(), rng.normal())
        cs = eval_core(asym_params, asym_consts, SymbolPoint(A=A, lam=lam))
        det = cs.L11 * cs.L22 - cs.L12 * cs.L21
        assert abs(det - cs.F) <= 1e-12 * abs(cs.F)


@settings(max_examples=60, deadline=None)
@given(
    logA=st.floats(-3, 0.8),
    re=st.floats(-3, 3), im=st.floats(0.05, 3),
)
def test_conjugation_symmetry(logA, re, im):
    p = FluidParams(rho_plus=0.9, rho_minus=1.7, mu_plus=1.2, mu_minus=0.8,
                    sigma=0.9, gravity=2.2)
    c = derive_constants(p)
    A = 10**logA
    lam = complex(re, im)
    s1 = eval_core(p, c, SymbolPoint(A=A, lam=lam))
    s2 = eval_core(p, c, SymbolPoint(A=A, lam=lam.conjugate()))
    for name in ("B_plus", "B_minus", "D_plus", "D_minus", "E", "F", "L", "script_L"):
        v1, v2 = getattr(s1, name), getattr(s2, name)
        assert v2 == pytest.approx(v1.conjugate(), rel=1e-12)


def test_script_G_explicit_form(asym_params, asym_consts, rng):
    """The complement piece matches its expanded closed form.

    Expanding (lam - zeta+)(lam - zeta-) and subtracting from the normalized
    symbol leaves the damping fraction plus three explicit root-approximation
    terms; agreement here pins the zeta algebra independently of the
    complement construction.
    """
    p, c = asym_params, asym_consts
    rho_sum = p.rho_plus + p.rho_minus
    for _ in range(40):
        A = 10 ** rng.uniform(-3, -0.3)
        lam = complex(rng.normal(), rng.normal()) * 10 ** rng.uniform(-2, 0)
        cs = eval_core(p, c, SymbolPoint(A=A, lam=lam))
        expected = (4.0 * A * cs.D_plus * cs.D_minus / (rho_sum * (cs.D_plus + cs.D_minus)) * lam
                    + c.tilde_sigma * A**3
                    - 2.0 * math.sqrt(2.0) * c.alpha**0.25 * c.beta * A**1.25 * lam
                    + 2.0 * math.sqrt(2.0) * c.alpha**0.75 * c.beta * A**1.75
                    - 4.0 * math.sqrt(c.alpha) * c.beta**2 * A**2.5)
        scale = max(abs(cs.script_L), abs(cs.script_F), abs(expected))
        assert abs(cs.script_G - expected) <= 1e-12 * scale


def test_M_kernel(params, consts):
    pt = SymbolPoint(A=0.7, lam=1.1 + 0.3j)
    mp_, mm_ = eval_M(params, pt, 0.0)
    assert mp_ == 0 and mm_ == 0
    # removable singularity at lambda = 0: M = -a e^{-A a}
    pt0 = SymbolPoint(A=0.7, lam=0.0)
    a = 1.3
    mp_, mm_ = eval_M(params, pt0, a)
    assert mp_ == pytest.approx(-a * math.exp(-0.7 * a), rel=1e-10)
    assert mm_ == pytest.approx(-a * math.exp(-0.7 * a), rel=1e-10)
    # direct arithmetic example: B+ = 2 at A = 1, lambda = 3
    pt3 = SymbolPoint(A=1.0, lam=3.0)
    mp_, _ = eval_M(params, pt3, math.log(2.0))
    assert mp_ == pytest.approx(-0.25, rel=1e-12)


def test_zeta_examples(consts):
    from twophase.params import DerivedConstants
    c = DerivedConstants(z0=1, omega=1, alpha=1, beta=1 / math.sqrt(2),
                         tilde_sigma=1, theta1=consts.theta1, theta2=consts.theta2,
                         lambda1=1)
    zp, zm = zeta(c, 1.0)
    assert zp == pytest.approx(-1.0, abs=1e-14)
    assert zm == pytest.approx(zp.conjugate())
    # leading order dominates as A -> 0
    c2 = DerivedConstants(z0=1, omega=1, alpha=1, beta=1.0, tilde_sigma=1,
                          theta1=consts.theta1, theta2=consts.theta2, lambda1=1)
    for A in (1e-6, 1e-8):
        zp, _ = zeta(c2, A)
        assert zp / (1j * math.sqrt(A)) == pytest.approx(1.0, rel=1e-2 * A**0.5 + 1e-3)


def test_kernel_symbols(params, consts, rng):
    # J_N composition and the vanishing-factor structure of I_{N,pm}
    for _ in range(30):
        A = 10 ** rng.uniform(-2, 0.5)
        lam = complex(rng.normal(), rng.normal())
        pt = SymbolPoint(A=A, lam=lam, xi=(A,))
        ks = eval_kernel_symbols(params, consts, pt)
        cs = eval_core(params, consts, pt)
        w = consts.omega + params.sigma * A**2
        ref = -cs.E * cs.L22 * A * w
        assert abs(ks.J[-1] - ref) <= 1e-14 * abs(ref)
        # I_{N+} carries the factor (L12 - B+ L22): it vanishes iff that does
        fac = cs.L12 - cs.B_plus * cs.L22
        assert ks.I_plus[-1] == pytest.approx(-A * w * fac, rel=1e-13)
        fac_m = cs.L12 + cs.B_minus * cs.L22
        assert ks.I_minus[-1] == pytest.approx(A * w * fac_m, rel=1e-13)


def test_kernel_symbols_tangential_zero(params, consts):
    # xi_j = 0 kills the tangential numerators (planar reduction of N = 3)
    pt = SymbolPoint(A=0.5, lam=1.0 + 0.5j, xi=(0.5, 0.0))
    ks = eval_kernel_symbols(params, consts, pt)
    assert ks.I_plus[1] == 0 and ks.I_minus[1] == 0 and ks.J[1] == 0


def test_sector_bounds_sampled(asym_params, asym_consts):
    # ratio |B|/(sqrt|lam| + A) pinned to a fixed positive window on a sector grid
    angles = np.linspace(-3 * math.pi / 4, 3 * math.pi / 4, 17)
    radii = np.geomspace(1e-4, 1e4, 17)
    As = np.geomspace(1e-3, 1e2, 9)
    los, his = [], []
    for A in As:
        lam = radii[:, None] * np.exp(1j * angles[None, :])
        c = core_arrays(asym_params, asym_consts, np.full(lam.shape, A), lam)
        for B in (c.Bp, c.Bm):
            r = np.abs(B) / (np.sqrt(np.abs(lam)) + A)
            rr = B.real / (np.sqrt(np.abs(lam)) + A)
            los.append(float(np.min(rr)))
            his.append(float(np.max(r)))
    assert min(los) >= 0.05
    assert max(his) <= 20.0


def test_F_nonvanishing_on_sector(asym_params, asym_consts):
    angles = np.linspace(-3 * math.pi / 4, 3 * math.pi / 4, 17)
    radii = np.geomspace(1e-4, 1e4, 17)
    As = np.geomspace(1e-3, 1e2, 9)
    ratios = []
    for A in As:
        lam = radii[:, None] * np.exp(1j * angles[None, :])
        c = core_arrays(asym_params, asym_consts, np.full(lam.shape, A), lam)
        ratios.append(float(np.min(np.abs(c.F) / (np.sqrt(np.abs(lam)) + A) ** 3)))
    assert min(ratios) > 1e-3
