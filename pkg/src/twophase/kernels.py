"""Fourier-side semigroup assembly: height, velocity, pressure per frequency.

Everything is a contour integral of e^{lambda t} against rational symbol
combinations.  Two evaluation styles coexist:

* pointwise, through ``contours.integrate_exp`` (adaptive, used by oracles and
  the boundary-condition residual checks), and

* vectorized over a whole frequency grid per path family (used by the decay
  pipeline and ``evolve_spectral``), exploiting that every integrand here is
  conjugation-symmetric in lambda so the lower-half paths contribute the
  complex conjugate of the upper-half ones.

Residue-circle contributions are evaluated by the exact residue formula (the
circle quadrature is kept as a cross-check oracle in the test-suite).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import contours
from .contours import ContourPath, build_low_paths
from .errors import ConfigError, QuadratureFailure
from .roots import FrequencyCalibration, root_curve
from .symbols import CoreValues, core_arrays

#: |e^{lambda t}| below e^{-LOG_DEAD} relative to the band scale is dropped.
LOG_DEAD = 46.0


# ---------------------------------------------------------------------------
# smooth frequency cutoffs
# ---------------------------------------------------------------------------

_BUMP_NODES = np.polynomial.legendre.leggauss(64)


def _bump(u):
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return out


_BUMP_TOTAL = None


def mollifier(r):
    """Smooth step: 1 for r <= 1, 0 for r >= 2, C^infty bump-integral between."""
    global _BUMP_TOTAL
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    out = np.zeros_like(r)
    out[r <= 1.0] = 1.0
    mid = (r > 1.0) & (r < 2.0)
    if np.any(mid):
        x, w = _BUMP_NODES
        if _BUMP_TOTAL is None:
            _BUMP_TOTAL = float(np.sum(w * _bump(x)))
        s = 2.0 * r[mid] - 3.0  # maps (1, 2) to (-1, 1)
        half = 0.5 * (1.0 - s)
        nodes = s[:, None] + half[:, None] * (x[None, :] + 1.0)
        out[mid] = np.sum(w[None, :] * _bump(nodes), axis=1) * half / _BUMP_TOTAL
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class CutoffSpec:
    """Low/high thresholds defining the exact three-band partition of unity."""

    A0: float
    A_inf: float

    def __post_init__(self):
        if not (0 < self.A0 < 1 <= 2 <= self.A_inf):
            raise ConfigError(f"cutoffs need 0 < A0 < 1 <= 2 <= A_inf, got {self}")

    def low(self, A):
        return mollifier(np.asarray(A, dtype=float) / self.A0)

    def high(self, A):
        return 1.0 - mollifier(np.asarray(A, dtype=float) / self.A_inf)

    def mid(self, A):
        return 1.0 - self.low(A) - self.high(A)


# ---------------------------------------------------------------------------
# integrand factories (pointwise API)
# ---------------------------------------------------------------------------

def _zfun(z_hat):
    if callable(z_hat):
        return z_hat
    zc = complex(z_hat)
    return lambda lam: np.full(np.shape(lam), zc, dtype=complex)


def eta_integrand(params, consts, A, z_hat=1.0):
    """lambda -> (F/L)(A, lambda) z_hat(lambda)."""
    zf = _zfun(z_hat)

    def f(lam):
        c = core_arrays(params, consts, np.full(np.shape(lam), A), lam)
        return c.F / c.L * zf(lam)

    return f


def _u_pieces(params, consts, c: CoreValues, A, side: str):
    """Shape brackets of the velocity formula for one fluid side.

    Returns (S_I, S_Jt, S_JN, B, sgnA) where the component integrands are
      tangential j: (i xi_j S_I) M(x)/L + (i xi_j S_Jt) e^{-Bx}/(E L)
      normal:       (sgnA A S_I) M(x)/L + S_JN e^{-Bx}/(E L)
    with sgnA = -1 on the upper side and +1 on the lower side.
    """
    w = consts.omega + params.sigma * A * A
    if side == "+":
        S_I = w * (c.L12 - c.Bp * c.L22)
        B = c.Bp
        sgnA = -1.0
    else:
        S_I = w * (c.L12 + c.Bm * c.L22)
        B = c.Bm
        sgnA = +1.0
    mp, mm = params.mu_plus, params.mu_minus
    S_Jt = -w * ((mp + mm) * c.L12 + (mp * (A - c.Bp) - mm * (A - c.Bm)) * c.L22)
    S_JN = -c.E * c.L22 * A * w
    return S_I, S_Jt, S_JN, B, sgnA


def u_integrand(params, consts, xi: Sequence, x_N: float, m: int, side: str,
                z_hat=1.0, derivative: bool = False):
    """Velocity-component integrand at one (xi, x_N); m is 1-based, N = len(xi)+1.

    ``derivative`` returns the analytic normal derivative instead of the value.
    """
    xi = tuple(float(v) for v in xi)
    A = float(np.hypot.reduce(np.asarray(xi))) if len(xi) > 1 else abs(xi[0])
    N = len(xi) + 1
    if not 1 <= m <= N:
        raise ConfigError(f"component m={m} out of range for N={N}")
    if side not in ("+", "-"):
        raise ConfigError(f"side must be '+' or '-', got {side!r}")
    if (side == "+" and x_N < 0) or (side == "-" and x_N > 0):
        raise ConfigError(f"x_N={x_N} lies on the other side of the interface")
    a = abs(x_N)
    zf = _zfun(z_hat)

    def f(lam):
        c = core_arrays(params, consts, np.full(np.shape(lam), A), lam)
        S_I, S_Jt, S_JN, B, sgnA = _u_pieces(params, consts, c, A, side)
        if m < N:
            pre_I = 1j * xi[m - 1] * S_I
            pre_J = 1j * xi[m - 1] * S_Jt
        else:
            pre_I = sgnA * A * S_I
            pre_J = S_JN
        cA = pre_I / (c.L * (A - B))
        cB = pre_J / (c.E * c.L) - cA
        if derivative:
            # d/dx_N with x_N = sign * a: chain rule supplies -sign A, -sign B
            sgn_x = 1.0 if side == "+" else -1.0
            val = (-sgn_x * A) * cA * np.exp(-A * a) + (-sgn_x * B) * cB * np.exp(-B * a)
        else:
            val = cA * np.exp(-A * a) + cB * np.exp(-B * a)
        return val * zf(lam)

    return f


def pressure_integrand(params, consts, xi: Sequence, x_N: float, side: str, z_hat=1.0):
    """Pressure integrand gamma_side e^{-A|x_N|} at one point."""
    xi = tuple(float(v) for v in xi)
    A = float(np.hypot.reduce(np.asarray(xi))) if len(xi) > 1 else abs(xi[0])
    if (side == "+" and x_N < 0) or (side == "-" and x_N > 0):
        raise ConfigError(f"x_N={x_N} lies on the other side of the interface")
    a = abs(x_N)
    mu = params.mu_plus if side == "+" else params.mu_minus
    zf = _zfun(z_hat)

    def f(lam):
        c = core_arrays(params, consts, np.full(np.shape(lam), A), lam)
        w = consts.omega + params.sigma * A * A
        B = c.Bp if side == "+" else c.Bm
        sgn = -1.0 if side == "+" else +1.0
        gam = mu * (A + B) * w * (c.L12 + sgn * B * c.L22) / c.L
        return gam * np.exp(-A * a) * zf(lam)

    return f


def eta_hat_component(params, consts, A: float, t: float, z_hat, path: ContourPath,
                      tol: float = 1e-10) -> complex:
    """(1/2 pi i) contour integral of e^{lambda t} (F/L) z_hat over one path."""
    return complex(contours.integrate_exp(path, t, eta_integrand(params, consts, A, z_hat), tol=tol))


def u_hat_component(params, consts, xi, x_N: float, t: float, z_hat,
                    path: ContourPath, m: int, side: str, tol: float = 1e-10) -> complex:
    return complex(contours.integrate_exp(
        path, t, u_integrand(params, consts, xi, x_N, m, side, z_hat), tol=tol))


def pressure_hat_component(params, consts, xi, x_N: float, t: float, z_hat,
                           path: ContourPath, side: str, tol: float = 1e-10) -> complex:
    return complex(contours.integrate_exp(
        path, t, pressure_integrand(params, consts, xi, x_N, side, z_hat), tol=tol))


def residue_mode(params, consts, A: float, t: float) -> tuple[complex, complex]:
    """The two residue contributions of F/L: e^{lambda_pm t} F / L'(lambda_pm)."""
    from .roots import find_roots, residue_weight
    pair = find_roots(params, consts, A, check_region=False)
    wp = complex(residue_weight(params, consts, A, pair.lambda_plus))
    wm = complex(residue_weight(params, consts, A, pair.lambda_minus))
    return (wp * np.exp(pair.lambda_plus * t), wm * np.exp(pair.lambda_minus * t))


def low_band_path_terms(params, consts, A: float, t: float, integrand,
                        tol: float = 1e-10) -> dict:
    """Per-path values of the low-band decomposition at one frequency.

    Keys 'res+'/'res-' use circle quadrature; tilde keys carry the
    deformation orientation (lower-half paths reversed).  Their sum equals the
    main-contour value by analyticity.
    """
    lp = build_low_paths(consts, A)
    out = {}
    out["res+"] = complex(contours.integrate_exp(lp.gamma_res_plus, t, integrand, tol=tol))
    out["res-"] = complex(contours.integrate_exp(lp.gamma_res_minus, t, integrand, tol=tol))
    for key, path, sign in (
        ("g1+", lp.gamma1_plus, +1), ("g1-", lp.gamma1_minus, -1),
        ("g4+", lp.gamma4_plus, +1), ("g4-", lp.gamma4_minus, -1),
        ("g5+", lp.gamma5_plus, +1), ("g5-", lp.gamma5_minus, -1),
    ):
        out[key] = sign * complex(contours.integrate_exp(path, t, integrand, tol=tol))
    return out


# ---------------------------------------------------------------------------
# vectorized family quadrature
# ---------------------------------------------------------------------------

def _gl_nodes_on(intervals, n_per: int = 16):
    x, w = np.polynomial.legendre.leggauss(n_per)
    ss, ww = [], []
    for (u0, u1) in intervals:
        half = 0.5 * (u1 - u0)
        ss.append(0.5 * (u0 + u1) + half * x)
        ww.append(half * w)
    return np.concatenate(ss), np.concatenate(ww)


def _geometric_intervals(scale: float, length: float, max_panels: int = 96,
                         start_scale: float | None = None):
    """Geometric panels [0, s0], [s0, 4 s0], ... through scale then doubling.

    ``start_scale`` sets the innermost panel width (used where the integrand
    has an endpoint branch point); defaults to 1e-6 of the decay scale.
    """
    if scale >= length or scale <= 0:
        scale = length
    s0 = start_scale if start_scale is not None else max(1e-6 * scale, 1e-14 * length)
    edges = [0.0]
    w = min(s0, scale)
    while edges[-1] + w < length and len(edges) < max_panels:
        edges.append(edges[-1] + w)
        w = w * 4.0 if edges[-1] < scale else w * 2.0
    edges.append(length)
    return list(zip(edges[:-1], edges[1:]))


class _Family:
    """One upper-half path family over a common A grid: lambda(A, s) nodes."""

    def __init__(self, lam, dlam, weights):
        self.lam = lam          # (na, ns) complex
        self.dlam = dlam        # (na, ns) complex
        self.weights = weights  # (ns,) real


def _low_families(params, consts, A: np.ndarray, t: float, refine: int = 0):
    """Upper-half tilde families (arc, spoke, ray) on the active A grid.

    Each family comes with an activity mask: rows whose e^{lambda t} start
    value is already dead are skipped by the caller.
    """
    z0 = consts.z0
    th1 = consts.theta1
    lp_probe = build_low_paths(consts, float(np.max(A)))
    z3 = lp_probe.z3_plus
    fams = {}

    # arc family
    mask1 = (z0 / 4.0) * A * A * t <= LOG_DEAD
    if np.any(mask1):
        Am = A[mask1]
        phase = float((z0 / 4.0) * np.max(Am) ** 2 * t)
        panels = int(np.clip(math.ceil(phase / 4.0) + 4, 4, 512)) * (1 << refine)
        edges = np.linspace(0.0, math.pi / 2.0, panels + 1)
        s, w = _gl_nodes_on(list(zip(edges[:-1], edges[1:])))
        center = -(z0 / 2.0) * Am[:, None] ** 2
        radius = (z0 / 4.0) * Am[:, None] ** 2
        lam = center + radius * np.exp(1j * s[None, :])
        dlam = 1j * radius * np.exp(1j * s[None, :])
        fams["g1+"] = (mask1, _Family(lam, dlam, w))

    # spoke family z1 -> z3
    mask4 = (z0 / 2.0) * A * A * t <= LOG_DEAD
    if np.any(mask4):
        Am = A[mask4]
        rate = max(abs(z3.real) * t, 1.0)
        scale = min(0.25, 4.0 / rate)
        intervals = _geometric_intervals(scale, 1.0)
        # refine by splitting every interval
        for _ in range(refine):
            intervals = [p for (u0, u1) in intervals
                         for p in ((u0, 0.5 * (u0 + u1)), (0.5 * (u0 + u1), u1))]
        s, w = _gl_nodes_on(intervals)
        z1 = -(z0 / 2.0) * Am[:, None] ** 2 + 1j * (z0 / 4.0) * Am[:, None] ** 2
        lam = z1 * (1.0 - s[None, :]) + z3 * s[None, :]
        dlam = np.broadcast_to(z3 - z1, lam.shape)
        fams["g4+"] = (mask4, _Family(lam, dlam, w))

    # outgoing ray from z3
    if abs(z3.real) * t <= LOG_DEAD:
        s_max = (LOG_DEAD / t + z3.real) / math.cos(th1)
        if s_max > 0:
            scale = min(s_max, 4.0 / (t * math.cos(th1)))
            intervals = _geometric_intervals(scale, s_max)
            for _ in range(refine):
                intervals = [p for (u0, u1) in intervals
                             for p in ((u0, 0.5 * (u0 + u1)), (0.5 * (u0 + u1), u1))]
            s, w = _gl_nodes_on(intervals)
            lam = (z3 + s * np.exp(1j * (math.pi - th1)))[None, :]
            dlam = np.full_like(lam, np.exp(1j * (math.pi - th1)))
            fams["g5+"] = (np.ones_like(A, dtype=bool),
                           _Family(np.broadcast_to(lam, (A.size, s.size)),
                                   np.broadcast_to(dlam, (A.size, s.size)), w))
    return fams


def _high_family(consts, t: float, a: float, y_top: float, refine: int = 0):
    """Upper half of the left contour: half vertical segment plus the ray."""
    th1 = consts.theta1
    nodes = []
    # vertical piece from 0 to i y_top (lower half handled by conjugation)
    phase = y_top * t
    panels = int(np.clip(math.ceil(phase / 4.0) + 4, 4, 4096)) * (1 << refine)
    edges = np.linspace(0.0, y_top, panels + 1)
    s, w = _gl_nodes_on(list(zip(edges[:-1], edges[1:])))
    lam_v = -a + 1j * s
    dlam_v = np.full_like(lam_v, 1j)
    nodes.append((lam_v, dlam_v, w))
    # outgoing ray
    s_max = (LOG_DEAD / t - 0.0) / math.cos(th1)
    scale = min(s_max, 4.0 / (t * math.cos(th1)))
    intervals = _geometric_intervals(scale, s_max)
    for _ in range(refine):
        intervals = [p for (u0, u1) in intervals
                     for p in ((u0, 0.5 * (u0 + u1)), (0.5 * (u0 + u1), u1))]
    s, w = _gl_nodes_on(intervals)
    lam_r = (-a + 1j * y_top) + s * np.exp(1j * (math.pi - th1))
    dlam_r = np.full_like(lam_r, np.exp(1j * (math.pi - th1)))
    nodes.append((lam_r, dlam_r, w))
    lam = np.concatenate([n[0] for n in nodes])
    dlam = np.concatenate([n[1] for n in nodes])
    w = np.concatenate([n[2] for n in nodes])
    return _Family(lam[None, :], dlam[None, :], w)


def _accumulate_eta(params, consts, A, fam: _Family, t):
    """Sum over family nodes of w e^{lambda t} (F/L) dlam, rows = A entries."""
    lam = fam.lam if fam.lam.shape[0] == A.size else np.broadcast_to(fam.lam, (A.size, fam.lam.shape[1]))
    c = core_arrays(params, consts, A[:, None], lam)
    integ = c.F / c.L
    kern = np.exp(lam * t) * (fam.dlam if fam.dlam.shape == lam.shape
                              else np.broadcast_to(fam.dlam, lam.shape))
    return np.sum(fam.weights[None, :] * kern * integ, axis=1)


def low_band_eta_weight(params, consts, A, t: float, rel_tol: float = 1e-6,
                        include_residue: bool = True, include_tilde: bool = True):
    """Real weight r(A, t) with eta_hat = r * z_hat on the low band.

    Residue modes are exact; the remainder paths are integrated with node
    doubling until the weight stabilizes to rel_tol (relative to the total).
    """
    A = np.asarray(A, dtype=float)
    total = np.zeros(A.shape, dtype=complex)
    if include_residue:
        lam_p, dscript = root_curve(params, consts, A)
        c = core_arrays(params, consts, A, lam_p)
        rho_sum = params.rho_plus + params.rho_minus
        wres = c.F / (rho_sum * (c.Dp + c.Dm) * dscript)
        total += wres * np.exp(lam_p * t)
    if include_tilde:
        total += _tilde_eta_half(params, consts, A, t, rel_tol)
    return 2.0 * np.real(total)


def _tilde_eta_half(params, consts, A, t, rel_tol):
    prev = None
    for refine in range(3):
        fams = _low_families(params, consts, A, t, refine=refine)
        acc = np.zeros(A.shape, dtype=complex)
        for key, (mask, fam) in fams.items():
            sub = _accumulate_eta(params, consts, A[mask], fam, t)
            acc[mask] += sub
        acc /= (2j * math.pi)
        if prev is not None:
            scale = max(float(np.max(np.abs(acc))), 1e-300)
            if float(np.max(np.abs(acc - prev))) <= rel_tol * scale:
                return acc
        prev = acc
    return prev


def high_band_eta_weight(params, consts, A, t: float, a: float, y_top: float,
                         rel_tol: float = 1e-6):
    """Real weight on the mid/high bands from the left vertical contour."""
    A = np.asarray(A, dtype=float)
    if a * t > 2.0 * LOG_DEAD:
        return np.zeros(A.shape)
    prev = None
    for refine in range(4):
        fam = _high_family(consts, t, a, y_top, refine=refine)
        acc = _accumulate_eta(params, consts, A, fam, t) / (2j * math.pi)
        if prev is not None:
            scale = max(float(np.max(np.abs(acc))), 1e-300)
            if float(np.max(np.abs(acc - prev))) <= rel_tol * scale:
                return 2.0 * np.real(acc)
        prev = acc
    raise QuadratureFailure("high-band eta weight did not stabilize under refinement")


def _u_coeff_arrays(params, consts, c: CoreValues, A, L_den=None):
    """Exponential-split coefficients for both sides and both component kinds.

    Returns dict[(kind, side)] = (cA, cB) where kind is 't' (tangential shape,
    to be multiplied by i xi_j) or 'n' (normal component).  ``L_den`` replaces
    the determinant denominator (residue evaluation passes L' there, where L
    itself vanishes).
    """
    w = consts.omega + params.sigma * A * A
    mp, mm = params.mu_plus, params.mu_minus
    den = c.L if L_den is None else L_den
    S_Jt = -w * ((mp + mm) * c.L12 + (mp * (A - c.Bp) - mm * (A - c.Bm)) * c.L22)
    S_JN = -c.E * c.L22 * A * w
    out = {}
    for side, B, S_I, sgnA in (("+", c.Bp, w * (c.L12 - c.Bp * c.L22), -1.0),
                               ("-", c.Bm, w * (c.L12 + c.Bm * c.L22), +1.0)):
        cA_t = S_I / (den * (A - B))
        cB_t = S_Jt / (c.E * den) - cA_t
        cA_n = sgnA * A * S_I / (den * (A - B))
        cB_n = S_JN / (c.E * den) - cA_n
        out[("t", side)] = (cA_t, cB_t)
        out[("n", side)] = (cA_n, cB_n)
    return out


def _accumulate_u(params, consts, A, x, fam: _Family, t, chunk: int = 48,
                  want_derivative: bool = False):
    """Contour sums of the velocity coefficient fields for one family.

    Returns (WA, R[, WA_d, R_d]): WA[(kind, side)] is the coefficient of
    e^{-A x} (shape (na,)); R[(kind, side)] the accumulated e^{-B x} part
    (shape (na, nx)).  Derivative variants carry the extra -A / -B factors
    (normal derivative with respect to the distance |x_N| from the interface;
    the caller applies the side sign).
    """
    na = A.size
    ns = fam.lam.shape[1]
    lam = fam.lam if fam.lam.shape[0] == na else np.broadcast_to(fam.lam, (na, ns))
    dlam = fam.dlam if fam.dlam.shape == lam.shape else np.broadcast_to(fam.dlam, lam.shape)
    c = core_arrays(params, consts, A[:, None], lam)
    coeffs = _u_coeff_arrays(params, consts, c, A[:, None])
    kern = fam.weights[None, :] * np.exp(lam * t) * dlam

    WA = {}
    WAd = {}
    for key, (cA, cB) in coeffs.items():
        WA[key] = np.sum(kern * cA, axis=1)
        if want_derivative:
            WAd[key] = np.sum(kern * cA, axis=1) * (-A)
    R = {key: np.zeros((na, x.size), dtype=complex) for key in coeffs}
    Rd = {key: np.zeros((na, x.size), dtype=complex) for key in coeffs} if want_derivative else None
    for lo in range(0, ns, chunk):
        hi = min(ns, lo + chunk)
        for side, B in (("+", c.Bp), ("-", c.Bm)):
            eb = np.exp(-B[:, lo:hi, None] * x[None, None, :])
            for kind in ("t", "n"):
                cB = coeffs[(kind, side)][1][:, lo:hi]
                kb = kern[:, lo:hi] * cB
                R[(kind, side)] += np.einsum("as,asx->ax", kb, eb)
                if want_derivative:
                    Rd[(kind, side)] += np.einsum("as,asx->ax", -kb * B[:, lo:hi], eb)
    if want_derivative:
        return WA, R, WAd, Rd
    return WA, R


class UWeightField:
    """Velocity weight fields on an (A, x) grid for one time.

    value(kind, side) = wA e^{-A x} + R; fields are real after the conjugate
    fold.  ``deriv`` holds d/d|x_N| variants when requested.
    """

    def __init__(self, A, x, wA, R, wAd=None, Rd=None):
        self.A = A
        self.x = x
        self.wA = wA
        self.R = R
        self.wAd = wAd
        self.Rd = Rd

    def value(self, kind: str, side: str):
        wA = self.wA[(kind, side)]
        return wA[:, None] * np.exp(-self.A[:, None] * self.x[None, :]) + self.R[(kind, side)]

    def deriv(self, kind: str, side: str):
        wAd = self.wAd[(kind, side)]
        return wAd[:, None] * np.exp(-self.A[:, None] * self.x[None, :]) + self.Rd[(kind, side)]


def _fold_real(d):
    return {k: 2.0 * np.real(v) for k, v in d.items()}


def low_band_u_weights(params, consts, A, x, t: float, rel_tol: float = 1e-5,
                       include_residue: bool = True, include_tilde: bool = True,
                       want_derivative: bool = False) -> UWeightField:
    """Velocity weight fields for the low band (residue modes + remainder)."""
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    acc_wA = {k: np.zeros(A.size, dtype=complex) for k in
              (("t", "+"), ("t", "-"), ("n", "+"), ("n", "-"))}
    acc_R = {k: np.zeros((A.size, x.size), dtype=complex) for k in acc_wA}
    acc_wAd = {k: np.zeros(A.size, dtype=complex) for k in acc_wA} if want_derivative else None
    acc_Rd = {k: np.zeros((A.size, x.size), dtype=complex) for k in acc_wA} if want_derivative else None

    if include_residue:
        lam_p, dscript = root_curve(params, consts, A)
        c = core_arrays(params, consts, A, lam_p)
        rho_sum = params.rho_plus + params.rho_minus
        denom = rho_sum * (c.Dp + c.Dm) * dscript  # = L'(lambda_plus)
        coeffs = _u_coeff_arrays(params, consts, c, A, L_den=denom)
        phase = np.exp(lam_p * t)
        for key, (cA, cB) in coeffs.items():
            wA = cA * phase
            acc_wA[key] += wA
            B = c.Bp if key[1] == "+" else c.Bm
            rB = cB * phase
            acc_R[key] += rB[:, None] * np.exp(-B[:, None] * x[None, :])
            if want_derivative:
                acc_wAd[key] += wA * (-A)
                acc_Rd[key] += (-B * rB)[:, None] * np.exp(-B[:, None] * x[None, :])

    if include_tilde:
        prev = None
        for refine in range(3):
            fams = _low_families(params, consts, A, t, refine=refine)
            wA_l = {k: np.zeros(A.size, dtype=complex) for k in acc_wA}
            R_l = {k: np.zeros((A.size, x.size), dtype=complex) for k in acc_wA}
            wAd_l = {k: np.zeros(A.size, dtype=complex) for k in acc_wA}
            Rd_l = {k: np.zeros((A.size, x.size), dtype=complex) for k in acc_wA}
            for key, (mask, fam) in fams.items():
                got = _accumulate_u(params, consts, A[mask], x, fam, t,
                                    want_derivative=want_derivative)
                if want_derivative:
                    WA, R, WAd, Rd = got
                else:
                    WA, R = got
                for kk in wA_l:
                    wA_l[kk][mask] += WA[kk]
                    R_l[kk][mask] += R[kk]
                    if want_derivative:
                        wAd_l[kk][mask] += WAd[kk]
                        Rd_l[kk][mask] += Rd[kk]
            if prev is not None:
                num = max(float(np.max(np.abs(R_l[("n", "-")] - prev))), 0.0)
                scale = max(float(np.max(np.abs(R_l[("n", "-")]))), 1e-300)
                if num <= rel_tol * scale:
                    break
            prev = R_l[("n", "-")].copy()
        for kk in acc_wA:
            acc_wA[kk] += wA_l[kk] / (2j * math.pi)
            acc_R[kk] += R_l[kk] / (2j * math.pi)
            if want_derivative:
                acc_wAd[kk] += wAd_l[kk] / (2j * math.pi)
                acc_Rd[kk] += Rd_l[kk] / (2j * math.pi)

    return UWeightField(A, x, _fold_real(acc_wA), _fold_real(acc_R),
                        _fold_real(acc_wAd) if want_derivative else None,
                        _fold_real(acc_Rd) if want_derivative else None)


def high_band_u_weights(params, consts, A, x, t: float, a: float, y_top: float,
                        rel_tol: float = 1e-5, want_derivative: bool = False) -> UWeightField:
    """Velocity weight fields for the mid/high bands from the left contour."""
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    keys = (("t", "+"), ("t", "-"), ("n", "+"), ("n", "-"))
    if a * t > 2.0 * LOG_DEAD:
        zero1 = {k: np.zeros(A.size) for k in keys}
        zero2 = {k: np.zeros((A.size, x.size)) for k in keys}
        return UWeightField(A, x, zero1, zero2,
                            dict(zero1) if want_derivative else None,
                            dict(zero2) if want_derivative else None)
    prev = None
    for refine in range(4):
        fam = _high_family(consts, t, a, y_top, refine=refine)
        got = _accumulate_u(params, consts, A, x, fam, t, want_derivative=want_derivative)
        if want_derivative:
            WA, R, WAd, Rd = got
        else:
            WA, R = got
            WAd = Rd = None
        ref = R[("n", "-")]
        if prev is not None:
            scale = max(float(np.max(np.abs(ref))), 1e-300)
            if float(np.max(np.abs(ref - prev))) <= rel_tol * scale:
                break
        prev = ref.copy()
    tp = 2j * math.pi
    return UWeightField(
        A, x,
        _fold_real({k: v / tp for k, v in WA.items()}),
        _fold_real({k: v / tp for k, v in R.items()}),
        _fold_real({k: v / tp for k, v in WAd.items()}) if want_derivative else None,
        _fold_real({k: v / tp for k, v in Rd.items()}) if want_derivative else None,
    )


def _pressure_vals(params, consts, c: CoreValues, Acol, side: str):
    mu = params.mu_plus if side == "+" else params.mu_minus
    sgn = -1.0 if side == "+" else +1.0
    w = consts.omega + params.sigma * Acol * Acol
    B = c.Bp if side == "+" else c.Bm
    return mu * (Acol + B) * w * (c.L12 + sgn * B * c.L22) / c.L


def pressure_weight(params, consts, A, t: float, side: str, band: str,
                    calib: Optional[FrequencyCalibration] = None):
    """Real weight P(A, t) for one band: p_hat = P e^{-A |x_N|} z_hat."""
    A = np.asarray(A, dtype=float)
    total = np.zeros(A.shape, dtype=complex)
    if band == "low":
        lam_p, dscript = root_curve(params, consts, A)
        c = core_arrays(params, consts, A, lam_p)
        rho_sum = params.rho_plus + params.rho_minus
        mu = params.mu_plus if side == "+" else params.mu_minus
        sgn = -1.0 if side == "+" else +1.0
        w = consts.omega + params.sigma * A * A
        B = c.Bp if side == "+" else c.Bm
        num = mu * (A + B) * w * (c.L12 + sgn * B * c.L22)
        total += num / (rho_sum * (c.Dp + c.Dm) * dscript) * np.exp(lam_p * t)
        fams = _low_families(params, consts, A, t)
        for key, (mask, fam) in fams.items():
            Am = A[mask]
            lam = fam.lam if fam.lam.shape[0] == Am.size else np.broadcast_to(
                fam.lam, (Am.size, fam.lam.shape[1]))
            cc = core_arrays(params, consts, Am[:, None], lam)
            vals = _pressure_vals(params, consts, cc, Am[:, None], side)
            kern = fam.weights[None, :] * np.exp(lam * t) * (
                fam.dlam if fam.dlam.shape == lam.shape else np.broadcast_to(fam.dlam, lam.shape))
            total[mask] += np.sum(kern * vals, axis=1) / (2j * math.pi)
    elif band in ("mid", "high"):
        if calib is None:
            raise ConfigError("mid/high pressure weight needs the calibration")
        a, y = (calib.a0, calib.y_top) if band == "mid" else (1.0, calib.y_high)
        if a * t > 2.0 * LOG_DEAD:
            return np.zeros(A.shape)
        fam = _high_family(consts, t, a, y)
        lam = np.broadcast_to(fam.lam, (A.size, fam.lam.shape[1]))
        cc = core_arrays(params, consts, A[:, None], lam)
        vals = _pressure_vals(params, consts, cc, A[:, None], side)
        kern = fam.weights[None, :] * np.exp(lam * t) * np.broadcast_to(fam.dlam, lam.shape)
        total += np.sum(kern * vals, axis=1) / (2j * math.pi)
    else:
        raise ConfigError(f"unknown band {band!r}")
    return 2.0 * np.real(total)
