"""Zeros of the normalized boundary symbol and the frequency calibration.

The normalized symbol is a quadratic in lambda plus a square-root correction:
for each frequency A it has two slow interfacial zeros lambda_pm(A) near the
explicit approximations zeta_pm(A).  This module locates and polishes them,
certifies the sandwich inequalities that make the residue decomposition valid
(|script_F| > |script_G| on the comparison paths, winding-number zero counts),
and calibrates the frequency thresholds that split the evolution into bands.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

from . import contours
from .contours import (ContourPath, Line, Region, argument_principle_count,
                       build_low_paths)
from .errors import (BoundaryZero, CalibrationFailure, NoConvergence,
                     RootEscapedRegion)
from .params import DerivedConstants, FluidParams
from .symbols import (core_arrays, L_deriv_arrays, script_L_and_deriv_arrays,
                      script_L_arrays, zeta_arrays)


@dataclass(frozen=True)
class RootPair:
    """The conjugate pair of slow zeros at one frequency, with certificates."""

    A: float
    lambda_plus: complex
    lambda_minus: complex
    residual: float
    deriv_plus: complex
    deriv_minus: complex


def _newton_polish(params, consts, A, seed, max_iter=50):
    """Damped Newton iteration on the normalized symbol from one seed."""
    lam = complex(seed)
    val, dval = script_L_and_deriv_arrays(params, consts, A, lam)
    fval = abs(complex(val))
    for _ in range(max_iter):
        if fval <= 1e-16 * max(1.0, abs(lam) ** 2):
            break
        step = complex(val / dval)
        factor = 1.0
        for _ in range(25):
            cand = lam - factor * step
            cval, cdval = script_L_and_deriv_arrays(params, consts, A, cand)
            if abs(complex(cval)) < fval:
                lam, val, dval, fval = cand, cval, cdval, abs(complex(cval))
                break
            factor *= 0.5
        else:
            return lam, fval, complex(dval), False
    ok = fval <= 1e-12 * max(1.0, abs(lam) ** 2)
    return lam, fval, complex(dval), ok


def _muller_polish(params, consts, A, seed, max_iter=60):
    """Muller's method fallback; works through flat derivatives."""
    h = max(1e-6, 1e-3 * abs(seed))
    xs = [seed + h, seed - h, complex(seed)]
    fs = [complex(script_L_arrays(params, consts, A, x)) for x in xs]
    for _ in range(max_iter):
        x0, x1, x2 = xs[-3], xs[-2], xs[-1]
        f0, f1, f2 = fs[-3], fs[-2], fs[-1]
        q = (x2 - x1) / (x1 - x0) if x1 != x0 else 0.5
        a = q * f2 - q * (1 + q) * f1 + q * q * f0
        b = (2 * q + 1) * f2 - (1 + q) ** 2 * f1 + q * q * f0
        c = (1 + q) * f2
        disc = np.sqrt(b * b - 4 * a * c)
        den = b + disc if abs(b + disc) > abs(b - disc) else b - disc
        if den == 0:
            break
        x3 = x2 - (x2 - x1) * 2 * c / den
        f3 = complex(script_L_arrays(params, consts, A, x3))
        xs.append(x3)
        fs.append(f3)
        if abs(f3) <= 1e-14 * max(1.0, abs(x3) ** 2):
            break
    lam = xs[-1]
    _, dval = script_L_and_deriv_arrays(params, consts, A, lam)
    return lam, abs(fs[-1]), complex(dval), abs(fs[-1]) <= 1e-12 * max(1.0, abs(lam) ** 2)


def find_roots(params: FluidParams, consts: DerivedConstants, A: float,
               check_region: bool = True) -> RootPair:
    """Locate and certify the slow zero pair at frequency A.

    Seeds Newton at the explicit approximations; falls back to Muller on a
    stall.  ``check_region`` enforces containment in the radius-A^{3/2} disks
    around the seeds (the certified localization for small A).
    """
    zp, zm = zeta_arrays(consts, A)
    zp, zm = complex(zp), complex(zm)
    results = []
    for seed in (zp, zm):
        lam, res, dval, ok = _newton_polish(params, consts, A, seed)
        if not ok:
            lam, res, dval, ok = _muller_polish(params, consts, A, seed)
        if not ok:
            raise NoConvergence(f"root search stalled at A={A}", last_iterate=lam)
        results.append((lam, res, dval))
    (lp, rp, dp), (lm, rm, dm) = results
    if lp.imag < lm.imag:
        (lp, rp, dp), (lm, rm, dm) = (lm, rm, dm), (lp, rp, dp)
    if check_region:
        r_disk = A ** 1.5
        if abs(lp - zp) > r_disk or abs(lm - zm) > r_disk:
            raise RootEscapedRegion(
                f"root left its certified disk at A={A}: "
                f"|lp-zp|={abs(lp - zp):.3e}, |lm-zm|={abs(lm - zm):.3e}, disk={r_disk:.3e}"
            )
    return RootPair(A=A, lambda_plus=lp, lambda_minus=lm,
                    residual=max(rp, rm), deriv_plus=dp, deriv_minus=dm)


def root_curve(params: FluidParams, consts: DerivedConstants, A_values: np.ndarray,
               check_region: bool = False):
    """Vectorized Newton for the plus-branch root along a sorted A grid.

    Seeds at zeta_plus and polishes all frequencies simultaneously; entries
    that stall are re-seeded from their converged left neighbor.  Returns
    (lambda_plus array, script_L' array at the roots).
    """
    A = np.asarray(A_values, dtype=float)
    lam, _ = zeta_arrays(consts, A)
    lam = np.asarray(lam, dtype=complex)
    val, dval = script_L_and_deriv_arrays(params, consts, A, lam)
    for _ in range(60):
        f = np.abs(val)
        tol = 1e-15 * np.maximum(1.0, np.abs(lam) ** 2)
        active = f > tol
        if not np.any(active):
            break
        step = np.where(active, val / dval, 0.0)
        nxt = lam - step
        nval, ndval = script_L_and_deriv_arrays(params, consts, A, nxt)
        improved = np.abs(nval) < f
        take = active & improved
        lam = np.where(take, nxt, lam)
        val = np.where(take, nval, val)
        dval = np.where(take, ndval, dval)
        # halve the stalled steps
        stalled = active & ~improved
        if np.any(stalled):
            half = lam - 0.5 * step
            hval, hdval = script_L_and_deriv_arrays(params, consts, A, half)
            accept = stalled & (np.abs(hval) < f)
            lam = np.where(accept, half, lam)
            val = np.where(accept, hval, val)
            dval = np.where(accept, hdval, dval)
    resid = np.abs(val) / np.maximum(1.0, np.abs(lam) ** 2)
    bad = resid > 1e-12
    if np.any(bad):
        idx = np.nonzero(bad)[0]
        for i in idx:
            pair = find_roots(params, consts, float(A[i]), check_region=False)
            lam[i] = pair.lambda_plus
            _, dval_i = script_L_and_deriv_arrays(params, consts, A[i], lam[i])
            dval[i] = dval_i
    if check_region:
        zp, _ = zeta_arrays(consts, A)
        if np.any(np.abs(lam - zp) > A ** 1.5):
            raise RootEscapedRegion("a root left its certified disk on the sweep")
    return lam, np.asarray(dval, dtype=complex)


@dataclass
class RoucheReport:
    """Margin data for one sandwich check |script_F| > |script_G| on a family."""

    A: float
    family: str
    margin: float
    min_F: float
    max_G: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.margin > 0.0


def verify_rouche(params: FluidParams, consts: DerivedConstants, A: float,
                  which: str = "K-boundary", samples: int = 512) -> RoucheReport:
    """Sample min(|script_F| - |script_G|) over the named path family.

    ``which`` is "K-boundary" (the enclosing comparison contour) or
    "Res-circles" (the two small circles around the root approximations).
    A negative margin is a report, not an exception; the sample count is
    doubled once and the worse margin kept.
    """
    lp = build_low_paths(consts, A)
    if which == "K-boundary":
        paths = [lp.gamma1_plus, lp.gamma1_minus, lp.gamma2_plus, lp.gamma2_minus, lp.gamma3]
    elif which == "Res-circles":
        paths = [lp.gamma_res_plus, lp.gamma_res_minus]
    else:
        raise ValueError(f"unknown Rouche family {which!r}")

    def margin_at(n):
        worst = math.inf
        minF, maxG = math.inf, 0.0
        for path in paths:
            pts = path.sample(n)
            core = core_arrays(params, consts, np.full(pts.shape, A), pts)
            f = np.abs(core.script_F)
            g = np.abs(core.script_G)
            worst = min(worst, float(np.min(f - g)))
            minF = min(minF, float(np.min(f)))
            maxG = max(maxG, float(np.max(g)))
        return worst, minF, maxG

    m1, f1, g1 = margin_at(samples)
    m2, f2, g2 = margin_at(2 * samples)
    return RoucheReport(A=A, family=which, margin=min(m1, m2),
                        min_F=min(f1, f2), max_G=max(g1, g2), samples=2 * samples)


def _script_L_fn(params, consts, A):
    def fn(lam):
        return script_L_arrays(params, consts, np.full(np.shape(lam), A), lam)
    return fn


def count_zeros_in_K(params: FluidParams, consts: DerivedConstants, A: float) -> int:
    lp = build_low_paths(consts, A)
    return argument_principle_count(lp.K, _script_L_fn(params, consts, A))


def count_zeros_in_res_disks(params: FluidParams, consts: DerivedConstants, A: float):
    lp = build_low_paths(consts, A)
    fn = _script_L_fn(params, consts, A)
    return (argument_principle_count(lp.K_plus, fn),
            argument_principle_count(lp.K_minus, fn))


# ---------------------------------------------------------------------------
# calibration
# ---------------------------------------------------------------------------

@dataclass
class FrequencyCalibration:
    """Certified band thresholds plus the evidence that produced them.

    A0       low-frequency threshold (sandwich checks hold for all A <= A0)
    A_inf    high-frequency threshold (quartic growth of |L| from there up)
    a0       mid-band abscissa: left contours at Re = -a0 are zero-free
    y_top    top of the mid-band rectangle (where Re = -a0 meets the main ray)
    y_high   top of the high-band rectangle at abscissa 1
    log      list of per-check records {check, A, value, passed}
    """

    A0: float
    A_inf: float
    a0: float
    y_top: float
    y_high: float
    log: list = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "FrequencyCalibration":
        return cls(A0=d["A0"], A_inf=d["A_inf"], a0=d["a0"],
                   y_top=d["y_top"], y_high=d["y_high"], log=d.get("log", []))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)

    @classmethod
    def load(cls, path, params: Optional[FluidParams] = None,
             consts: Optional[DerivedConstants] = None) -> "FrequencyCalibration":
        with open(path) as fh:
            calib = cls.from_json(json.load(fh))
        if params is not None and consts is not None:
            revalidate(params, consts, calib)
        return calib


def _sample_As(A_hi: float, n: int = 16, A_lo: float = 1e-4) -> np.ndarray:
    return np.geomspace(min(A_lo, A_hi / 2), A_hi, n)


def circle_clearance(consts: DerivedConstants, A: float) -> float:
    """How far the residue circles stay above the real axis, relative.

    Positive means the disk around zeta_plus (radius A^{3/2}) lies strictly
    in the open upper half plane, keeping it off the branch cut and disjoint
    from its mirror image.
    """
    zp, _ = zeta_arrays(consts, A)
    r = A ** 1.5
    im = float(np.imag(zp))
    return (im - r) / max(im, 1e-300)


def calibrate_A0(params: FluidParams, consts: DerivedConstants,
                 log: Optional[list] = None) -> float:
    """Largest dyadic A0 <= 1/2 certified on the whole cutoff support.

    The low-band cutoff is supported in [0, 2 A0], so every check runs for
    sampled frequencies up to twice the candidate: sandwich margins on both
    path families, residue-circle clearance above the real axis, containment
    of the circles in the comparison region, and the zero counts (two in the
    region, one per small disk).
    """
    candidate = 0.5
    for _ in range(16):
        ok = True
        for A in _sample_As(2.0 * candidate):
            clear = circle_clearance(consts, float(A))
            zp, _ = zeta_arrays(consts, float(A))
            inside = abs(complex(zp)) + float(A) ** 1.5 < 0.98 * consts.lambda1
            geom_ok = (clear > 0.05) and inside
            if log is not None:
                log.append({"check": "res_circle_geometry", "A": float(A),
                            "value": clear, "passed": geom_ok})
            if not geom_ok:
                ok = False
                break
            rk = verify_rouche(params, consts, float(A), "K-boundary")
            rr = verify_rouche(params, consts, float(A), "Res-circles")
            ok = rk.passed and rr.passed
            if log is not None:
                log.append({"check": "rouche_K", "A": float(A), "value": rk.margin,
                            "passed": rk.passed})
                log.append({"check": "rouche_res", "A": float(A), "value": rr.margin,
                            "passed": rr.passed})
            if not ok:
                break
        if ok:
            try:
                for A_chk in (candidate / 2, 2.0 * candidate):
                    nk = count_zeros_in_K(params, consts, A_chk)
                    np_, nm = count_zeros_in_res_disks(params, consts, A_chk)
                    ok = ok and (nk == 2 and np_ == 1 and nm == 1)
                    if log is not None:
                        log.append({"check": "zero_counts", "A": A_chk,
                                    "value": [nk, np_, nm], "passed": ok})
                    if not ok:
                        break
            except BoundaryZero:
                ok = False
        if ok:
            return candidate
        candidate /= 2.0
    raise CalibrationFailure("no dyadic level passed the low-frequency certificates")


def _rect_region(a: float, b: float) -> Region:
    """Positively oriented boundary of the rectangle [-a, 0] x [-b, b]."""
    c = ContourPath([
        Line(complex(-a, -b), complex(0.0, -b)),
        Line(complex(0.0, -b), complex(0.0, b)),
        Line(complex(0.0, b), complex(-a, b)),
        Line(complex(-a, b), complex(-a, -b)),
    ], name=f"rect({a},{b})")
    return Region(f"Lambda({a},{b})", c)


def _rect_min_rel_L(params, consts, A, a, b, nx=9, ny=33) -> float:
    """min over a rectangle grid of |script_L| / (sum of its term magnitudes)."""
    xs = np.linspace(-a, 0.0, nx)
    ys = np.linspace(-b, b, ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    lam = X + 1j * Y
    core = core_arrays(params, consts, np.full(lam.shape, A), lam)
    rho_sum = params.rho_plus + params.rho_minus
    c1 = 4.0 * A * core.Dp * core.Dm / (rho_sum * (core.Dp + core.Dm))
    scale = (np.abs(lam) ** 2 + np.abs(c1 * lam)
             + abs(consts.alpha) * A + consts.tilde_sigma * A**3)
    return float(np.min(np.abs(core.script_L) / scale))


def calibrate_high(params: FluidParams, consts: DerivedConstants, A0: float,
                   log: Optional[list] = None,
                   rel_floor: float = 1e-6) -> tuple[float, float, float, float]:
    """High-frequency threshold, mid-band abscissa and rectangle tops.

    Returns (A_inf, a0, y_top, y_high).  A_inf is the smallest dyadic >= 2
    such that on the abscissa-1 rectangle |L| >= 0.1 sigma A^4 and
    Re B_pm > 0 for sampled A >= A_inf.  a0 is the largest dyadic < 1 whose
    rectangle is certified zero-free (relative |script_L| floor plus winding
    number 0) over sampled A in [A0/2, 3 A_inf].
    """
    y_high = contours.high_rect_top(consts, 1.0)

    def high_ok(A_inf):
        for A in A_inf * np.array([1.0, 1.5, 2.0, 4.0, 8.0, 16.0, 64.0]):
            xs = np.linspace(-1.0, 0.0, 7)
            ys = np.linspace(-y_high, y_high, 17)
            lam = (xs[:, None] + 1j * ys[None, :])
            core = core_arrays(params, consts, np.full(lam.shape, A), lam)
            if not (np.all(core.Bp.real > 0) and np.all(core.Bm.real > 0)):
                return False
            bound = 0.1 * params.sigma * A**4
            if float(np.min(np.abs(core.L))) < bound:
                return False
            # the sampled floor can miss an interior zero (the slow mode
            # crosses the abscissa as A grows); the winding count cannot
            try:
                if argument_principle_count(
                        _rect_region(1.0, y_high),
                        _script_L_fn(params, consts, float(A))) != 0:
                    return False
            except BoundaryZero:
                return False
        return True

    A_inf = 2.0
    for _ in range(12):
        if high_ok(A_inf):
            break
        A_inf *= 2.0
    else:
        raise CalibrationFailure("no dyadic A_inf satisfied the quartic growth checks")
    if log is not None:
        log.append({"check": "A_inf_growth", "A": A_inf, "value": None, "passed": True})

    # mid band: largest dyadic a0 < 1 with zero-free rectangles
    A_samples = np.geomspace(A0 / 2.0, 3.0 * A_inf, 24)
    a0 = 0.5
    for _ in range(16):
        y_top = contours.high_rect_top(consts, a0)
        ok = True
        for A in A_samples:
            rel = _rect_min_rel_L(params, consts, float(A), a0, y_top)
            if rel < rel_floor:
                ok = False
                break
            try:
                cnt = argument_principle_count(
                    _rect_region(a0, y_top), _script_L_fn(params, consts, float(A)))
            except BoundaryZero:
                ok = False
                break
            if cnt != 0:
                ok = False
                break
        if ok:
            if log is not None:
                log.append({"check": "mid_band_rect", "A": None,
                            "value": a0, "passed": True})
            return A_inf, a0, y_top, y_high
        a0 /= 2.0
    raise CalibrationFailure("no dyadic a0 gave a zero-free mid-band rectangle")


def calibrate(params: FluidParams, consts: DerivedConstants) -> FrequencyCalibration:
    """Full calibration: A0 then the high/mid thresholds, with an audit log."""
    log: list = []
    A0 = calibrate_A0(params, consts, log=log)
    A_inf, a0, y_top, y_high = calibrate_high(params, consts, A0, log=log)
    calib = FrequencyCalibration(A0=A0, A_inf=A_inf, a0=a0, y_top=y_top,
                                 y_high=y_high, log=log)
    certify_left_contours(params, consts, calib, log=log)
    certify_gamma0(params, consts, calib, log=log)
    return calib


def _right_of_gamma0_region(consts: DerivedConstants, R: float) -> Region:
    """Sector right of the main contour, closed by the circle |lambda| = R."""
    anchor = contours.gamma0_anchor(consts)
    ang = math.pi - consts.theta1
    e = complex(math.cos(ang), math.sin(ang))
    # |anchor + s e|^2 = R^2
    b = 2.0 * anchor * e.real
    disc = b * b - 4.0 * (anchor * anchor - R * R)
    if disc <= 0 or R <= anchor:
        raise CalibrationFailure("certification radius does not reach the main contour")
    s_R = 0.5 * (-b + math.sqrt(disc))
    p_up = anchor + s_R * e
    phi = math.atan2(p_up.imag, p_up.real)
    boundary = ContourPath([
        contours.Arc(0.0, R, -phi, phi),
        Line(p_up, complex(anchor, 0.0)),
        Line(complex(anchor, 0.0), p_up.conjugate()),
    ], "right-of-gamma0")
    return Region("right_of_gamma0", boundary)


def certify_gamma0(params: FluidParams, consts: DerivedConstants,
                   calib: FrequencyCalibration, n_A: int = 16,
                   log: Optional[list] = None) -> None:
    """No zeros of the boundary symbol on or right of the main contour.

    Counts zeros inside the sector right of the contour (closed at a radius
    that dominates the slow-root magnitude scale) for sampled frequencies
    across all bands.  A hit means the configured contour scale is too small
    for these parameters: the anchor must move right (raise lambda1).
    """
    for A in np.geomspace(1e-4, 64.0 * calib.A_inf, n_A):
        scale = math.sqrt(abs(consts.alpha) * A + consts.tilde_sigma * A**3)
        R = 4.0 * scale + 4.0 * consts.lambda1 + 4.0 * contours.gamma0_anchor(consts)
        region = _right_of_gamma0_region(consts, R)
        try:
            cnt = argument_principle_count(region, _script_L_fn(params, consts, float(A)))
        except BoundaryZero:
            cnt = -1
        passed = cnt == 0
        if log is not None:
            log.append({"check": "gamma0_zero_free", "A": float(A),
                        "value": cnt, "passed": passed})
        if not passed:
            raise CalibrationFailure(
                f"boundary symbol has zeros right of the main contour at A={A}; "
                "raise lambda1 so the contour anchors right of the spectrum")


def certify_left_contours(params: FluidParams, consts: DerivedConstants,
                          calib: FrequencyCalibration, n_A: int = 12,
                          log: Optional[list] = None) -> None:
    """Sampling certificate: script_L does not vanish on the left contours.

    Checks both the mid-band contour (abscissa a0) and the high-band contour
    (abscissa 1) over representative frequencies of their bands.
    """
    for (a, y, lo, hi, name) in (
        (calib.a0, calib.y_top, calib.A0, 2.0 * calib.A_inf, "mid"),
        (1.0, calib.y_high, calib.A_inf, 64.0 * calib.A_inf, "high"),
    ):
        hp = contours.build_high_paths(consts, a, y)
        seg_pts = []
        for seg in hp.combined.segments:
            p0, p1 = seg.param_range
            if not math.isfinite(p1):
                p1 = 6.0 * y
            s = np.linspace(p0, p1, 200)
            seg_pts.append(seg.at(s))
        pts = np.concatenate(seg_pts)
        for A in np.geomspace(lo, hi, n_A):
            vals = script_L_arrays(params, consts, np.full(pts.shape, A), pts)
            scale = np.abs(pts) ** 2 + abs(consts.alpha) * A + consts.tilde_sigma * A**3
            rel = float(np.min(np.abs(vals) / scale))
            passed = rel > 1e-8
            if log is not None:
                log.append({"check": f"contour_nonzero_{name}", "A": float(A),
                            "value": rel, "passed": passed})
            if not passed:
                raise CalibrationFailure(
                    f"script_L nearly vanishes on the {name} contour at A={A}: rel={rel:.3e}")


def revalidate(params: FluidParams, consts: DerivedConstants,
               calib: FrequencyCalibration) -> None:
    """Cheap re-check of a loaded calibration (thresholds only, small samples)."""
    for A in np.geomspace(1e-4, calib.A0, 5):
        if not verify_rouche(params, consts, float(A), "K-boundary", samples=128).passed:
            raise CalibrationFailure(f"loaded calibration fails the sandwich check at A={A}")
        if not verify_rouche(params, consts, float(A), "Res-circles", samples=128).passed:
            raise CalibrationFailure(f"loaded calibration fails the disk check at A={A}")
    certify_left_contours(params, consts, calib, n_A=4)


# ---------------------------------------------------------------------------
# stability classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    witness_A: Optional[float] = None
    witness_root: Optional[complex] = None
    witness_residual: Optional[float] = None


def classify_stability(params: FluidParams, consts: DerivedConstants,
                       A_samples) -> StabilityVerdict:
    """Right-half-plane zero scan of the normalized symbol.

    For each sampled frequency, counts zeros of script_L inside a rectangle
    hugging the right half plane; any hit is polished by Newton and returned
    as an instability witness.
    """
    for A in np.asarray(A_samples, dtype=float):
        # rectangle [delta, R] x [-b, b] just right of the imaginary axis;
        # in the stable regime script_L(0) = alpha A + sigma~ A^3 > 0 and no
        # zeros have Re >= 0, so a small positive delta keeps the boundary
        # clear of zeros in both regimes.
        scale = math.sqrt(abs(consts.alpha) * A + consts.tilde_sigma * A**3) + A
        R = 50.0 * scale + 1.0
        b = R
        delta = 1e-9 * R
        rect = Region("rhp", ContourPath([
            Line(complex(delta, -b), complex(R, -b)),
            Line(complex(R, -b), complex(R, b)),
            Line(complex(R, b), complex(delta, b)),
            Line(complex(delta, b), complex(delta, -b)),
        ], "rhp-rect"))
        try:
            cnt = argument_principle_count(rect, _script_L_fn(params, consts, float(A)))
        except BoundaryZero:
            cnt = 1  # a zero on/near the axis is already unstable enough to flag
        if cnt > 0:
            root = _polish_unstable_root(params, consts, float(A), scale)
            resid = abs(complex(script_L_arrays(params, consts, float(A), root)))
            return StabilityVerdict(stable=False, witness_A=float(A),
                                    witness_root=root, witness_residual=resid)
    return StabilityVerdict(stable=True)


def _polish_unstable_root(params, consts, A, scale) -> complex:
    """Newton from a bracketing bisection on the positive real axis."""
    lo, hi = 0.0, max(4.0 * scale, 1e-3)
    flo = complex(script_L_arrays(params, consts, A, complex(lo, 0.0))).real
    fhi = complex(script_L_arrays(params, consts, A, complex(hi, 0.0))).real
    grow = 0
    while flo * fhi > 0 and grow < 60:
        hi *= 2.0
        fhi = complex(script_L_arrays(params, consts, A, complex(hi, 0.0))).real
        grow += 1
    if flo * fhi <= 0:
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            fm = complex(script_L_arrays(params, consts, A, complex(mid, 0.0))).real
            if flo * fm <= 0:
                hi, fhi = mid, fm
            else:
                lo, flo = mid, fm
        seed = complex(0.5 * (lo + hi), 0.0)
    else:
        seed = complex(scale, 0.0)
    lam, res, dval, ok = _newton_polish(params, consts, A, seed)
    if not ok:
        lam, res, dval, ok = _muller_polish(params, consts, A, seed)
    if not ok:
        raise NoConvergence(f"could not polish unstable root at A={A}", last_iterate=lam)
    return lam


def residue_weight(params: FluidParams, consts: DerivedConstants, A, lam_root):
    """Residue of F/L at a simple root: F / L' with L' from the factorization.

    L' at a zero of script_L collapses to rho_sum (D+ + D-) script_L', which
    is the cheap route; ``residue_weight_direct`` differentiates L itself.
    """
    core = core_arrays(params, consts, A, lam_root)
    _, dscript = script_L_and_deriv_arrays(params, consts, A, lam_root)
    rho_sum = params.rho_plus + params.rho_minus
    return core.F / (rho_sum * (core.Dp + core.Dm) * dscript)


def residue_weight_direct(params: FluidParams, consts: DerivedConstants, A, lam_root):
    core = core_arrays(params, consts, A, lam_root)
    return core.F / L_deriv_arrays(params, consts, A, lam_root)
