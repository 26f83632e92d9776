import cmath
import math

import numpy as np
import pytest

from twophase.contours import (Arc, ContourPath, Line, Ray, Region,
                               argument_principle_count, build_gamma0,
                               build_high_paths, build_low_paths, gamma0_anchor,
                               high_rect_top, integrate_exp)
from twophase.errors import BoundaryZero, GeometryError


def test_gamma0_geometry(consts):
    path = build_gamma0(consts)
    anchor = gamma0_anchor(consts)
    assert anchor == pytest.approx(2.0 * consts.lambda1 / math.sin(consts.theta1))
    # lambda1 = 1, tan(theta1) = 1/16 gives 2 sqrt(257)
    assert anchor == pytest.approx(2.0 * math.sqrt(257.0), rel=1e-14)
    lower, upper = path.segments
    assert lower.angle == pytest.approx(-(math.pi - consts.theta1))
    assert upper.angle == pytest.approx(math.pi - consts.theta1)
    assert lower.inward and not upper.inward
    assert lower.start == upper.start == anchor


def test_low_path_anchors(consts):
    A = 0.1
    lp = build_low_paths(consts, A)
    z0 = consts.z0
    assert lp.z1_plus == pytest.approx(complex(-(z0 / 2) * A**2, (z0 / 4) * A**2))
    assert lp.z2_plus == pytest.approx(
        consts.lambda1 * cmath.exp(1j * (math.pi - consts.theta2)))
    assert lp.z2_minus == pytest.approx(lp.z2_plus.conjugate())
    # z3 sits on the diagonal arg = 3 pi / 4
    assert lp.z3_plus.real + lp.z3_plus.imag == pytest.approx(0.0, abs=1e-12)
    assert lp.z3_minus == pytest.approx(lp.z3_plus.conjugate())
    # residue circles centered at the root approximations with radius A^{3/2}
    arc = lp.gamma_res_plus.segments[0]
    assert arc.radius == pytest.approx(A**1.5)
    from twophase.symbols import zeta_arrays
    zp, _ = zeta_arrays(consts, A)
    assert arc.center == pytest.approx(complex(zp))
    assert lp.K.boundary.is_closed
    assert lp.K_plus.boundary.is_closed


def test_high_paths(consts):
    y = high_rect_top(consts, 0.5)
    hp = build_high_paths(consts, 0.5, y)
    seg = hp.gamma6.segments[0]
    assert seg.start == pytest.approx(complex(-0.5, -y))
    assert seg.end == pytest.approx(complex(-0.5, y))
    assert hp.gamma7_upper.segments[0].angle == pytest.approx(math.pi - consts.theta1)
    assert hp.gamma7_lower.segments[0].angle == pytest.approx(-(math.pi - consts.theta1))
    # intersection height: where Re = -a meets the main contour ray
    anchor = gamma0_anchor(consts)
    assert y == pytest.approx((anchor + 0.5) * math.tan(consts.theta1), rel=1e-12)


def test_path_continuity_enforced():
    with pytest.raises(GeometryError):
        ContourPath([Line(0, 1), Line(2, 3)])
    ContourPath([Line(0, 1), Line(1, 2 + 1j)])


def test_json_round_trip(consts):
    lp = build_low_paths(consts, 0.2)
    blob = lp.K.boundary.to_json()
    back = ContourPath.from_json(blob)
    assert back.is_closed
    assert len(back.segments) == len(lp.K.boundary.segments)
    pts = back.sample(64)
    ref = lp.K.boundary.sample(64)
    assert np.max(np.abs(pts - ref)) == 0.0


def test_cauchy_formula():
    zstar = -0.3 + 0.7j
    circ = ContourPath([Arc(zstar, 0.5, 0.0, 2 * math.pi)], "c")
    for t in (0.0, 1.0, 3.0):
        val = integrate_exp(circ, t, lambda lam: 1.0 / (lam - zstar), tol=1e-12)
        assert complex(val) == pytest.approx(cmath.exp(zstar * t), rel=1e-10)
    off = ContourPath([Arc(zstar + 4.0, 0.5, 0.0, 2 * math.pi)], "c2")
    val = integrate_exp(off, 1.0, lambda lam: 1.0 / (lam - zstar), tol=1e-12)
    assert abs(complex(val)) <= 1e-12


def test_bromwich_inversion(consts):
    # e^{lambda t}/(lambda - z*) over the main contour = e^{z* t}
    g0 = build_gamma0(consts)
    for zstar, t in ((-1.0, 0.3), (-0.2 + 0.4j, 0.1)):
        val = integrate_exp(g0, t, lambda lam: 1.0 / (lam - zstar), tol=1e-10)
        assert complex(val) == pytest.approx(cmath.exp(zstar * t), rel=1e-8)


def test_ray_truncation_honesty(consts):
    # doubling a manually set s_max changes the reported value below tol
    z3 = build_low_paths(consts, 0.1).z3_plus
    t = 2.0
    f = lambda lam: 1.0 / (lam - 0.5)

    def with_smax(smax):
        path = ContourPath([Ray(z3, math.pi - consts.theta1, s_max=smax)])
        return complex(integrate_exp(path, t, f, tol=1e-10))

    base = (math.log(1e10) / t - z3.real) / math.cos(consts.theta1)
    v1, v2 = with_smax(base), with_smax(2 * base)
    assert abs(v1 - v2) <= 1e-10 * max(abs(v1), 1e-300)


def test_argument_principle_counts(consts):
    lp = build_low_paths(consts, 0.1)
    assert argument_principle_count(lp.K, lambda lam: lam - 0.3) == 1
    assert argument_principle_count(lp.K, lambda lam: lam - (5 + 5j)) == 0
    assert argument_principle_count(lp.K, lambda lam: (lam - 0.3) * (lam - 0.1j)) == 2
    boundary_pt = lp.gamma_res_plus.segments[0].at(0.0)  # exact sample node
    with pytest.raises(BoundaryZero):
        argument_principle_count(lp.K_plus, lambda lam: lam - boundary_pt)


def test_conjugate_pair_reality(params, consts):
    # conjugation-symmetric integrand: the deformed-pair combination is real
    from twophase.kernels import eta_integrand
    lp = build_low_paths(consts, 0.15)
    f = eta_integrand(params, consts, 0.15)
    t = 1.0
    for plus, minus in ((lp.gamma1_plus, lp.gamma1_minus),
                        (lp.gamma4_plus, lp.gamma4_minus),
                        (lp.gamma5_plus, lp.gamma5_minus)):
        vp = complex(integrate_exp(plus, t, f, tol=1e-11))
        vm = complex(integrate_exp(minus, t, f, tol=1e-11))
        combo = vp - vm  # lower path reversed in the deformation
        assert abs(combo.imag) <= 1e-12 * max(abs(combo), 1e-300)
        assert vm == pytest.approx(-vp.conjugate(), rel=1e-10)


def test_region_requires_closed():
    with pytest.raises(GeometryError):
        Region("open", ContourPath([Line(0, 1)]))
