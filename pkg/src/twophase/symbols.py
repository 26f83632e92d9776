"""Boundary-symbol algebra at a single frequency/spectral point.

The whole solver reduces to rational-plus-square-root expressions in the
radial tangential frequency A = |xi'| and the spectral parameter lambda.  This
module evaluates every such expression with the principal square-root branch
(Re sqrt > 0, cut along the negative real axis) and exposes both a typed
scalar API (``eval_core`` and friends) and low-level array helpers used by the
vectorized contour quadrature elsewhere.

Scalar entry points validate their inputs and raise; the ``*_arrays`` helpers
trust the caller (they are fed points that already live on certified paths).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BranchCutViolation, ConfigError
from .params import DerivedConstants, FluidParams


def branch_sqrt(z: complex) -> complex:
    """Principal square root with the cut along (-inf, 0].

    Raises BranchCutViolation for arguments on the cut (real and <= 0); the
    result has strictly positive real part everywhere else.
    """
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0:
        raise BranchCutViolation(f"sqrt argument {z} lies on the branch cut (-inf, 0]")
    return complex(np.sqrt(z))


@dataclass(frozen=True)
class SymbolPoint:
    """One evaluation point (A, lambda) with optional tangential vector xi.

    ``xi`` is only needed by the componentwise velocity symbols; when given,
    its Euclidean norm must reproduce ``A`` to 1e-12 relative.
    """

    A: float
    lam: complex
    xi: Optional[tuple] = None

    def __post_init__(self):
        if self.A < 0:
            raise ConfigError(f"A must be >= 0, got {self.A}")
        if self.xi is not None:
            xi = tuple(float(x) for x in self.xi)
            object.__setattr__(self, "xi", xi)
            norm = float(np.hypot.reduce(np.asarray(xi))) if len(xi) > 1 else abs(xi[0])
            scale = max(self.A, norm, 1e-300)
            if abs(norm - self.A) > 1e-12 * scale:
                raise ConfigError(f"|xi| = {norm} does not match A = {self.A}")
        lam = complex(self.lam)
        object.__setattr__(self, "lam", lam)
        if self.A == 0 and lam == 0:
            raise ConfigError("A = 0 and lambda = 0 simultaneously is rejected")

    @property
    def dimension(self) -> int:
        """Ambient dimension N implied by xi (len(xi) = N - 1)."""
        if self.xi is None:
            raise ConfigError("SymbolPoint has no tangential vector xi")
        return len(self.xi) + 1


def check_off_cut(params: FluidParams, consts: DerivedConstants, point: SymbolPoint) -> None:
    """Raise when lambda sits on the shared branch cut (-inf, -z0 A^2]."""
    lam = point.lam
    if lam.imag == 0.0 and lam.real <= -consts.z0 * point.A**2:
        raise BranchCutViolation(
            f"lambda = {lam} lies on the cut (-inf, -z0 A^2] for A = {point.A}"
        )


# ---------------------------------------------------------------------------
# array-level building blocks (trusted inputs, numpy broadcasting throughout)
# ---------------------------------------------------------------------------

def b_pm_arrays(params: FluidParams, A, lam):
    """B_pm = sqrt((rho_pm/mu_pm) lambda + A^2) with the principal branch."""
    A = np.asarray(A)
    lam = np.asarray(lam, dtype=complex)
    bp = np.sqrt(params.rho_plus / params.mu_plus * lam + A * A)
    bm = np.sqrt(params.rho_minus / params.mu_minus * lam + A * A)
    return bp, bm


class CoreValues:
    """Plain container for the full symbol set on arrays (no validation)."""

    __slots__ = ("A", "lam", "Bp", "Bm", "Dp", "Dm", "E",
                 "L11", "L12", "L21", "L22", "F", "L",
                 "script_L", "script_F", "script_G")

    def __init__(self, **kw):
        for k in self.__slots__:
            setattr(self, k, kw[k])


def core_arrays(params: FluidParams, consts: DerivedConstants, A, lam) -> CoreValues:
    """Evaluate every core symbol on broadcastable arrays of (A, lambda)."""
    A = np.asarray(A)
    lam = np.asarray(lam, dtype=complex)
    mp, mm = params.mu_plus, params.mu_minus
    Bp, Bm = b_pm_arrays(params, A, lam)
    Dp = mp * Bp + mm * A
    Dm = mm * Bm + mp * A
    E = mp * Bp + mm * Bm
    F = (
        -((mp - mm) ** 2) * A**3
        + ((3 * mp - mm) * mp * Bp + (3 * mm - mp) * mm * Bm) * A**2
        + (E**2 + mp * mm * (Bp + Bm) ** 2) * A
        + E * (mp * Bp**2 + mm * Bm**2)
    )
    L11 = mp * Bp * (A + Bp) + mm * Bm * (Bm + A)
    L12 = mp * A * (Bp - A) - mm * A * (Bm - A)
    L21 = mp * (-A + Bp) - mm * (-A + Bm)
    L22 = mp * (A + Bp) + mm * (A + Bm)
    L = lam * F + A * (consts.omega + params.sigma * A**2) * (Dp + Dm)
    rho_sum = params.rho_plus + params.rho_minus
    script_L = (
        lam**2
        + 4.0 * A * Dp * Dm / (rho_sum * (Dp + Dm)) * lam
        + consts.alpha * A
        + consts.tilde_sigma * A**3
    )
    zp, zm = zeta_arrays(consts, A)
    script_F = (lam - zp) * (lam - zm)
    return CoreValues(
        A=A, lam=lam, Bp=Bp, Bm=Bm, Dp=Dp, Dm=Dm, E=E,
        L11=L11, L12=L12, L21=L21, L22=L22, F=F, L=L,
        script_L=script_L, script_F=script_F, script_G=script_L - script_F,
    )


def zeta_arrays(consts: DerivedConstants, A):
    """Leading small-A root approximations zeta_pm(A).

    alpha < 0 (inverted stratification) is tolerated via the principal complex
    powers so that downstream evaluations stay finite; the approximations are
    only meaningful in the stable regime.
    """
    A = np.asarray(A)
    alpha = complex(consts.alpha)
    osc = 1j * np.sqrt(alpha) * np.sqrt(A)
    damp = np.sqrt(2.0) * alpha**0.25 * consts.beta * A ** 1.25
    zp = osc - damp * (1.0 + 1j)
    zm = -osc - damp * (1.0 - 1j)
    return zp, zm


def script_L_arrays(params: FluidParams, consts: DerivedConstants, A, lam):
    """Normalized boundary symbol alone (cheaper than the full core set)."""
    A = np.asarray(A)
    lam = np.asarray(lam, dtype=complex)
    mp, mm = params.mu_plus, params.mu_minus
    Bp, Bm = b_pm_arrays(params, A, lam)
    Dp = mp * Bp + mm * A
    Dm = mm * Bm + mp * A
    rho_sum = params.rho_plus + params.rho_minus
    return (
        lam**2
        + 4.0 * A * Dp * Dm / (rho_sum * (Dp + Dm)) * lam
        + consts.alpha * A
        + consts.tilde_sigma * A**3
    )


def script_L_and_deriv_arrays(params: FluidParams, consts: DerivedConstants, A, lam):
    """(script_L, d/dlambda script_L) for Newton steps and residue weights."""
    A = np.asarray(A)
    lam = np.asarray(lam, dtype=complex)
    mp, mm = params.mu_plus, params.mu_minus
    Bp, Bm = b_pm_arrays(params, A, lam)
    Dp = mp * Bp + mm * A
    Dm = mm * Bm + mp * A
    # dD_pm/dlambda = mu_pm * dB_pm = rho_pm / (2 B_pm)
    dDp = params.rho_plus / (2.0 * Bp)
    dDm = params.rho_minus / (2.0 * Bm)
    rho_sum = params.rho_plus + params.rho_minus
    S = Dp + Dm
    P = Dp * Dm
    c = 4.0 * A * P / (rho_sum * S)
    dc = 4.0 * A * ((dDp * Dm + Dp * dDm) * S - P * (dDp + dDm)) / (rho_sum * S * S)
    val = lam**2 + c * lam + consts.alpha * A + consts.tilde_sigma * A**3
    deriv = 2.0 * lam + c + dc * lam
    return val, deriv


def L_deriv_arrays(params: FluidParams, consts: DerivedConstants, A, lam):
    """d/dlambda of the boundary determinant L, by direct differentiation.

    Independent of the factorized route; used for the residue cross-check.
    """
    A = np.asarray(A)
    lam = np.asarray(lam, dtype=complex)
    mp, mm = params.mu_plus, params.mu_minus
    rp, rm = params.rho_plus, params.rho_minus
    Bp, Bm = b_pm_arrays(params, A, lam)
    E = mp * Bp + mm * Bm
    dBp = rp / (2.0 * mp * Bp)
    dBm = rm / (2.0 * mm * Bm)
    dE = mp * dBp + mm * dBm
    F = (
        -((mp - mm) ** 2) * A**3
        + ((3 * mp - mm) * mp * Bp + (3 * mm - mp) * mm * Bm) * A**2
        + (E**2 + mp * mm * (Bp + Bm) ** 2) * A
        + E * (mp * Bp**2 + mm * Bm**2)
    )
    dF = (
        ((3 * mp - mm) * mp * dBp + (3 * mm - mp) * mm * dBm) * A**2
        + (2.0 * E * dE + 2.0 * mp * mm * (Bp + Bm) * (dBp + dBm)) * A
        + dE * (mp * Bp**2 + mm * Bm**2)
        + E * (rp + rm)
    )
    dSum = rp / (2.0 * Bp) + rm / (2.0 * Bm)  # d(Dp+Dm)/dlambda
    return F + lam * dF + A * (consts.omega + params.sigma * A**2) * dSum


def M_pm_arrays(params: FluidParams, A, lam, a):
    """Difference kernels M_pm(a) = (e^{-A a} - e^{-B_pm a}) / (A - B_pm).

    Stable through the removable singularity A ~ B: switched to
    -a e^{-A a} phi((A - B) a) with phi(z) = (e^z - 1)/z there.
    """
    A = np.asarray(A, dtype=float)
    lam = np.asarray(lam, dtype=complex)
    a = np.asarray(a, dtype=float)
    Bp, Bm = b_pm_arrays(params, A, lam)
    return _m_kernel(A, Bp, a), _m_kernel(A, Bm, a)


def _expm1z_over_z(z):
    """(e^z - 1)/z, series for tiny |z|."""
    z = np.asarray(z, dtype=complex)
    out = np.ones_like(z)
    small = np.abs(z) < 1e-3
    zs = z[small]
    out[small] = 1.0 + zs / 2.0 + zs * zs / 6.0 + zs**3 / 24.0
    zb = z[~small]
    out[~small] = np.expm1(zb) / zb
    return out


def _m_kernel(A, B, a):
    A, B, a = np.broadcast_arrays(np.asarray(A, dtype=complex), B, np.asarray(a, dtype=complex))
    diff = A - B
    near = np.abs(diff) <= 1e-6 * (np.abs(A) + np.abs(B))
    out = np.empty(np.broadcast(A, B, a).shape, dtype=complex)
    safe = ~near
    out[safe] = (np.exp(-A[safe] * a[safe]) - np.exp(-B[safe] * a[safe])) / diff[safe]
    # removable singularity: (e^{-Aa} - e^{-Ba})/(A-B) = -a e^{-Aa} (e^{z}-1)/z, z = (A-B) a
    z = diff[near] * a[near]
    out[near] = -a[near] * np.exp(-A[near] * a[near]) * _expm1z_over_z(z)
    if out.shape == ():
        return out[()]
    return out


# ---------------------------------------------------------------------------
# typed scalar API
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoreSymbols:
    """Every core boundary symbol at one (A, lambda)."""

    B_plus: complex
    B_minus: complex
    D_plus: complex
    D_minus: complex
    E: complex
    L11: complex
    L12: complex
    L21: complex
    L22: complex
    F: complex
    L: complex
    script_L: complex
    script_F: complex
    script_G: complex


def eval_core(params: FluidParams, consts: DerivedConstants, point: SymbolPoint) -> CoreSymbols:
    """Evaluate the full symbol set at one point, with branch validation."""
    check_off_cut(params, consts, point)
    v = core_arrays(params, consts, point.A, point.lam)
    return CoreSymbols(
        B_plus=complex(v.Bp), B_minus=complex(v.Bm),
        D_plus=complex(v.Dp), D_minus=complex(v.Dm), E=complex(v.E),
        L11=complex(v.L11), L12=complex(v.L12), L21=complex(v.L21), L22=complex(v.L22),
        F=complex(v.F), L=complex(v.L),
        script_L=complex(v.script_L), script_F=complex(v.script_F), script_G=complex(v.script_G),
    )


def eval_M(params: FluidParams, point: SymbolPoint, a: float) -> tuple[complex, complex]:
    """M_pm(a) for a >= 0 at the given point."""
    if a < 0:
        raise ConfigError(f"M_pm requires a >= 0, got {a}")
    mp_, mm_ = M_pm_arrays(params, point.A, point.lam, a)
    return complex(mp_), complex(mm_)


def zeta(consts: DerivedConstants, A: float) -> tuple[complex, complex]:
    """Conjugate pair of two-term root approximations at frequency A > 0."""
    if A <= 0:
        raise ConfigError(f"zeta requires A > 0, got {A}")
    zp, zm = zeta_arrays(consts, A)
    return complex(zp), complex(zm)


@dataclass(frozen=True)
class KernelSymbols:
    """Velocity numerators at one point: I_{m,pm} and J_m for m = 1..N.

    ``I_plus[m-1]``/``I_minus[m-1]`` multiply the difference kernel M_pm,
    ``J[m-1]`` (divided by E) multiplies the pure e^{-B_pm x_N} profile.
    """

    I_plus: tuple
    I_minus: tuple
    J: tuple


def eval_kernel_symbols(params: FluidParams, consts: DerivedConstants,
                        point: SymbolPoint) -> KernelSymbols:
    """Componentwise velocity numerators; requires point.xi and A > 0."""
    if point.xi is None:
        raise ConfigError("eval_kernel_symbols needs the tangential vector xi")
    if point.A <= 0:
        raise ConfigError("eval_kernel_symbols requires A > 0")
    c = eval_core(params, consts, point)
    A = point.A
    w = consts.omega + params.sigma * A**2
    mp, mm = params.mu_plus, params.mu_minus
    tang_bracket = (mp + mm) * c.L12 + (mp * (A - c.B_plus) - mm * (A - c.B_minus)) * c.L22
    I_plus, I_minus, J = [], [], []
    for xij in point.xi:
        I_plus.append(1j * xij * w * (c.L12 - c.B_plus * c.L22))
        I_minus.append(1j * xij * w * (c.L12 + c.B_minus * c.L22))
        J.append(-1j * xij * w * tang_bracket)
    I_plus.append(-A * w * (c.L12 - c.B_plus * c.L22))
    I_minus.append(A * w * (c.L12 + c.B_minus * c.L22))
    J.append(-c.E * c.L22 * A * w)
    return KernelSymbols(I_plus=tuple(I_plus), I_minus=tuple(I_minus), J=tuple(J))


def kernel_symbol_arrays(params: FluidParams, consts: DerivedConstants,
                         core: CoreValues, xi: Sequence, A):
    """Array version of the velocity numerators given precomputed core values.

    ``xi`` is the (N-1)-tuple of tangential components matching ``A`` in
    magnitude elementwise (each entry broadcastable against the core arrays).
    Returns (I_plus, I_minus, J) as lists of arrays indexed by component.
    """
    A = np.asarray(A)
    w = consts.omega + params.sigma * A**2
    mp, mm = params.mu_plus, params.mu_minus
    fac_p = core.L12 - core.Bp * core.L22
    fac_m = core.L12 + core.Bm * core.L22
    tang = (mp + mm) * core.L12 + (mp * (A - core.Bp) - mm * (A - core.Bm)) * core.L22
    I_plus = [1j * np.asarray(xij) * w * fac_p for xij in xi]
    I_minus = [1j * np.asarray(xij) * w * fac_m for xij in xi]
    J = [-1j * np.asarray(xij) * w * tang for xij in xi]
    I_plus.append(-A * w * fac_p)
    I_minus.append(A * w * fac_m)
    J.append(-core.E * core.L22 * A * w)
    return I_plus, I_minus, J
