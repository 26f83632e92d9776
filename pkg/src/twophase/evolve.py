"""Band-decomposed time evolution on a frequency grid.

``evolve_spectral`` drives the vectorized weight machinery of ``kernels``
over a sampled grid and assembles height, velocity and pressure snapshots,
including the forced (diffusive) part when a forcing is present.  Boundary
jets (values and normal derivatives at the interface) ride along so the
boundary-condition residual diagnostics are cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import contours, kernels, layers
from .errors import ConfigError, SymmetryViolation
from .kernels import CutoffSpec
from .layers import AxialProfile
from .params import DerivedConstants, FluidParams
from .roots import FrequencyCalibration
from .transform import DataPreset, FrequencyGrid, hermitian_defect


@dataclass(frozen=True)
class ForcingComponent:
    """One separable forcing component: f_j(x) = transverse(x') * axial(x_N)."""

    component: int          # 0-based; dimension-1 is the normal component
    side: int               # +1 upper fluid, -1 lower fluid
    axial: AxialProfile
    transverse: DataPreset

    @classmethod
    def from_config(cls, d: dict, dimension: int) -> "ForcingComponent":
        comp = d.get("component", "normal")
        if comp == "normal":
            comp = dimension - 1
        elif comp == "tangential":
            comp = 0
        side = {"+": 1, "-": -1, 1: 1, -1: -1}.get(d.get("side", "+"))
        if side is None:
            raise ConfigError(f"forcing side must be '+' or '-', got {d.get('side')!r}")
        return cls(component=int(comp), side=side,
                   axial=AxialProfile.from_config(d.get("axial")),
                   transverse=DataPreset.from_config(d.get("transverse")))


@dataclass
class DrivingData:
    """Initial data: height transform plus optional separable forcing."""

    d_preset: DataPreset
    forcing: tuple = ()

    def d_hat(self, xi, dimension: int = 2):
        if dimension == 3:
            vals = self.d_preset.analytic_transform_radial(np.abs(xi))
        else:
            vals = self.d_preset.analytic_transform(xi)
        if vals is None:
            raise ConfigError(f"preset {self.d_preset.kind!r} has no sampled transform; "
                              "use transform.forward_d on a grid")
        return vals

    def has_forcing(self) -> bool:
        return any(not fc.axial.is_zero() for fc in self.forcing)


def _forcing_components(forcing, xi_val: float):
    comps = []
    for fc in forcing:
        if fc.axial.is_zero():
            continue
        factor = complex(fc.transverse.analytic_transform(np.asarray([xi_val]))[0])
        comps.append((fc.component, fc.side, fc.axial, factor))
    return comps


def forcing_trace_integrand(params: FluidParams, consts: DerivedConstants,
                            xi_val: float, forcing, dimension: int = 2) -> Callable:
    """lambda-array integrand of the forced interface trace at one frequency."""
    xi = (xi_val,) if dimension == 2 else (xi_val, 0.0)
    comps = _forcing_components(forcing, xi_val)

    def f(lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        if not comps:
            return np.zeros(lam.shape, dtype=complex)
        return layers.forced_interface_curve(params, consts, xi, lam, comps)["trace"]

    return f


@dataclass
class SpectralField:
    """One time snapshot of the Fourier-side solution on the sampled grids.

    u/du/p are indexed [component, xi, x_N] (component rows beyond the
    computed set stay zero for the axisymmetric reduction); boundary jets
    u0/dNu0/p0 are indexed [component, xi, side] with side 0 = upper fluid.
    """

    t: float
    xi: np.ndarray
    x_N: np.ndarray
    eta: np.ndarray
    u: np.ndarray
    du: np.ndarray
    p: np.ndarray
    u0: np.ndarray
    dNu0: np.ndarray
    p0: np.ndarray
    dimension: int = 2
    band_label: np.ndarray = field(default=None)

    def to_rows(self):
        """Flatten to the documented CSV rows (band, xi, x_N, component, side, re, im, t)."""
        rows = []
        names = {0: "u1", 1: "uN"} if self.dimension == 2 else {1: "uN"}
        for i, xv in enumerate(self.xi):
            band = self.band_label[i] if self.band_label is not None else ""
            rows.append((band, xv, 0.0, "eta", "0", self.eta[i].real, self.eta[i].imag, self.t))
            for k, xn in enumerate(self.x_N):
                side = "+" if xn >= 0 else "-"
                for m, name in names.items():
                    v = self.u[m, i, k]
                    rows.append((band, xv, xn, name, side, v.real, v.imag, self.t))
                rows.append((band, xv, xn, "p", side, self.p[i, k].real, self.p[i, k].imag, self.t))
        return rows


def evolve_spectral(params: FluidParams, consts: DerivedConstants,
                    calib: FrequencyCalibration, data: DrivingData,
                    t_list, grids: dict) -> list:
    """Full band-decomposed snapshots at the requested times.

    ``grids`` holds "frequency" (FrequencyGrid) and "x_N" (sorted array with
    both signs).  The forced part is evaluated pointwise per frequency and is
    expensive; leave the forcing empty when only height data drive the run.
    """
    fgrid: FrequencyGrid = grids["frequency"]
    x_N = np.asarray(grids["x_N"], dtype=float)
    dim = fgrid.dimension
    xi = fgrid.nodes
    try:
        d_hat = data.d_hat(xi, dimension=dim)
    except ConfigError:
        if fgrid.kind != "uniform" or dim != 2:
            raise
        from .transform import forward_d
        d_hat = forward_d(data.d_preset, fgrid)  # numeric transform fallback
    if fgrid.kind == "uniform" and dim == 2:
        if hermitian_defect(d_hat, fgrid) > 1e-10:
            raise SymmetryViolation("initial height transform is not Hermitian")
    A = np.abs(xi)
    cs = CutoffSpec(calib.A0, calib.A_inf)

    # compute on the distinct radial frequencies, then scatter back; the
    # zero node takes the continuous A -> 0+ limit of every weight (the
    # residue pair tends to the identity there, the velocity weights to zero)
    A_pos, inv = np.unique(A, return_inverse=True)
    A_eval = np.where(A_pos > 0, A_pos, 1e-9)
    x_plus = np.unique(np.concatenate([np.abs(x_N), [0.0]]))

    phi = {"low": cs.low(A_pos), "mid": cs.mid(A_pos), "high": cs.high(A_pos)}
    labels = np.array(["low", "mid", "high"])[
        np.argmax(np.vstack([phi["low"], phi["mid"], phi["high"]]), axis=0)]

    fields = []
    for t in np.asarray(t_list, dtype=float):
        eta_w = np.zeros(A_pos.shape)
        u_vals = {}
        du_vals = {}
        p_w = {"+": np.zeros(A_pos.shape), "-": np.zeros(A_pos.shape)}
        for key in (("t", "+"), ("t", "-"), ("n", "+"), ("n", "-")):
            u_vals[key] = np.zeros((A_pos.size, x_plus.size))
            du_vals[key] = np.zeros((A_pos.size, x_plus.size))

        band_defs = []
        low_mask = phi["low"] > 0
        if np.any(low_mask):
            band_defs.append(("low", low_mask, None))
        mid_mask = phi["mid"] > 0
        if np.any(mid_mask):
            band_defs.append(("mid", mid_mask, (calib.a0, calib.y_top)))
        high_mask = phi["high"] > 0
        if np.any(high_mask):
            band_defs.append(("high", high_mask, (1.0, calib.y_high)))

        for band, mask, anchor in band_defs:
            Am = A_eval[mask]
            w_phi = phi[band][mask]
            if band == "low":
                eta_w[mask] += w_phi * kernels.low_band_eta_weight(params, consts, Am, t)
                uw = kernels.low_band_u_weights(params, consts, Am, x_plus, t,
                                                want_derivative=True)
            else:
                a, y = anchor
                eta_w[mask] += w_phi * kernels.high_band_eta_weight(params, consts, Am, t, a, y)
                uw = kernels.high_band_u_weights(params, consts, Am, x_plus, t, a, y,
                                                 want_derivative=True)
            for key in u_vals:
                u_vals[key][mask] += w_phi[:, None] * uw.value(*key)
                du_vals[key][mask] += w_phi[:, None] * uw.deriv(*key)
            for side in ("+", "-"):
                p_w[side][mask] += w_phi * kernels.pressure_weight(
                    params, consts, Am, t, side, band, calib)

        # scatter to the signed grid and multiply the data transform
        eta = (eta_w[inv] * d_hat).astype(complex)
        nxi, nx = xi.size, x_N.size
        u = np.zeros((dim, nxi, nx), dtype=complex)
        du = np.zeros((dim, nxi, nx), dtype=complex)
        p = np.zeros((nxi, nx), dtype=complex)
        u0 = np.zeros((dim, nxi, 2), dtype=complex)
        dNu0 = np.zeros((dim, nxi, 2), dtype=complex)
        p0 = np.zeros((nxi, 2), dtype=complex)

        col_of = np.searchsorted(x_plus, np.abs(x_N))
        zero_col = int(np.searchsorted(x_plus, 0.0))
        for k, xn in enumerate(x_N):
            side = "+" if xn >= 0 else "-"
            sgn_n = 1.0 if xn >= 0 else -1.0
            col = col_of[k]
            wt = u_vals[("t", side)][inv, col]
            wn = u_vals[("n", side)][inv, col]
            dwt = du_vals[("t", side)][inv, col] * sgn_n
            dwn = du_vals[("n", side)][inv, col] * sgn_n
            if dim == 2:
                u[0, :, k] = 1j * xi * wt * d_hat
                du[0, :, k] = 1j * xi * dwt * d_hat
            u[dim - 1, :, k] = wn * d_hat
            du[dim - 1, :, k] = dwn * d_hat
            p[:, k] = p_w[side][inv] * np.exp(-A * abs(xn)) * d_hat
        for s_idx, side, sgn_n in ((0, "+", 1.0), (1, "-", -1.0)):
            if dim == 2:
                u0[0, :, s_idx] = 1j * xi * u_vals[("t", side)][inv, zero_col] * d_hat
                dNu0[0, :, s_idx] = 1j * xi * du_vals[("t", side)][inv, zero_col] * sgn_n * d_hat
            u0[dim - 1, :, s_idx] = u_vals[("n", side)][inv, zero_col] * d_hat
            dNu0[dim - 1, :, s_idx] = du_vals[("n", side)][inv, zero_col] * sgn_n * d_hat
            p0[:, s_idx] = p_w[side][inv] * d_hat

        fld = SpectralField(t=float(t), xi=xi, x_N=x_N, eta=eta, u=u, du=du, p=p,
                            u0=u0, dNu0=dNu0, p0=p0, dimension=dim,
                            band_label=labels[inv])
        if data.has_forcing():
            _add_forced_part(params, consts, calib, data, fld)
        fields.append(fld)
    return fields


def _forced_paths(consts, calib, A: float, t: float):
    """Upper-half-plane paths covering all bands at A, with cutoff weights.

    Lower-half contributions are the complex conjugates (fold=True) because
    every integrand column here is conjugation symmetric or antisymmetric.
    Entries are (weight, path, fold).
    """
    cs = CutoffSpec(calib.A0, calib.A_inf)
    paths = []
    if cs.low(A) > 0:
        lp = contours.build_low_paths(consts, A)
        paths += [(cs.low(A), path, True) for path in
                  (lp.gamma_res_plus, lp.gamma1_plus, lp.gamma4_plus, lp.gamma5_plus)]
    if cs.mid(A) > 0 and calib.a0 * t < 2 * kernels.LOG_DEAD:
        hp = contours.build_high_paths(consts, calib.a0, calib.y_top)
        paths.append((cs.mid(A), hp.combined, False))
    if cs.high(A) > 0 and t < 2 * kernels.LOG_DEAD:
        hp = contours.build_high_paths(consts, 1.0, calib.y_high)
        paths.append((cs.high(A), hp.combined, False))
    return paths


def _add_forced_part(params, consts, calib, data: DrivingData, fld: SpectralField):
    """Pointwise forced contributions at each frequency.

    Adds (a) the interface-trace feedback through the height equation, with
    the trace as a lambda-dependent datum inside the hyperbolic integrands,
    and (b) the diffusive interface velocity itself, integrated over a sector
    contour anchored near zero.  Boundary jets of the trace-driven part ride
    along; the diffusive part contributes its (side-independent) interface
    value only.  Interior forced fields are deliberately not gridded here:
    per-node quadrature of the glued solves is the cost ceiling of the CLI
    demo path, not of the acceptance surface.
    """
    t = fld.t
    dim = fld.dimension
    for i, xv in enumerate(fld.xi):
        A = abs(float(xv))
        if A == 0:
            continue
        xi_vec = (float(xv),) if dim == 2 else (float(xv), 0.0)
        all_comps = _forcing_components(data.forcing, float(xv))
        paths = _forced_paths(consts, calib, A, t)
        comps = list(range(1, dim + 1)) if dim == 2 else [dim]

        # fold parity flips with every tangential i-xi factor; group the
        # forcing by whether the forced component is the normal one so every
        # integrand column has a definite conjugation symmetry within a group
        groups = []
        normal_group = [fc for fc in all_comps if fc[0] == dim - 1]
        tang_group = [fc for fc in all_comps if fc[0] != dim - 1]
        if normal_group:
            groups.append((normal_group, +1.0))
        if tang_group:
            groups.append((tang_group, -1.0))

        for fcomps, gpar in groups:
            # column layout: eta, then (value, dN value) per (side, component)
            parity = [gpar]
            for _ in ("+", "-"):
                for m in comps:
                    pm = gpar if m == dim else -gpar
                    parity += [pm, pm]
            parity = np.asarray(parity, dtype=float)

            def stacked(lam, fcomps=fcomps):
                lam = np.atleast_1d(np.asarray(lam, dtype=complex))
                z = layers.forced_interface_curve(params, consts, xi_vec, lam,
                                                  fcomps)["trace"]
                c = kernels.core_arrays(params, consts, np.full(lam.shape, A), lam)
                cols = [c.F / c.L * z]
                coeffs = kernels._u_coeff_arrays(params, consts, c, A)
                for side, sgn_x in (("+", 1.0), ("-", -1.0)):
                    B = c.Bp if side == "+" else c.Bm
                    for m in comps:
                        kind = "t" if m < dim else "n"
                        pre = 1j * xi_vec[0] if m < dim else 1.0
                        cA, cB = coeffs[(kind, side)]
                        cols.append(pre * (cA + cB) * z)
                        cols.append(pre * (-sgn_x * A * cA - sgn_x * B * cB) * z)
                return np.stack(cols, axis=-1)

            total = np.zeros(parity.shape, dtype=complex)
            for wphi, path, fold in paths:
                val = wphi * contours.integrate_exp(path, t, stacked, tol=1e-6)
                if fold:
                    val = np.where(parity > 0, 2.0 * val.real, 2j * val.imag)
                total = total + val
            fld.eta[i] += total[0]
            col = 1
            for s_idx in (0, 1):
                for m in comps:
                    fld.u0[m - 1, i, s_idx] += total[col]
                    fld.dNu0[m - 1, i, s_idx] += total[col + 1]
                    col += 2

            # diffusive interface velocity (continuous across the interface);
            # upper sector ray only, the lower one folded by conjugation
            anchor = min(consts.lambda1, 1.0 / max(t, 1.0))
            upper = contours.ContourPath(
                [contours.Ray(anchor, math.pi - consts.theta1)], "sector+")

            def diffusive(lam, fcomps=fcomps):
                curve = layers.forced_interface_curve(params, consts, xi_vec, lam, fcomps)
                return np.moveaxis(curve["uP0"], 0, -1)

            vals = contours.integrate_exp(upper, t, diffusive, tol=1e-6)
            for m in comps:
                pm = gpar if m == dim else -gpar
                v = 2.0 * vals[m - 1].real if pm > 0 else 2j * vals[m - 1].imag
                fld.u0[m - 1, i, 0] += v
                fld.u0[m - 1, i, 1] += v


# ---------------------------------------------------------------------------
# residual diagnostics
# ---------------------------------------------------------------------------

def velocity_jump(field: SpectralField) -> np.ndarray:
    """Max over components of |[[u]]| at the interface, per frequency, scaled."""
    jump = np.abs(field.u0[:, :, 0] - field.u0[:, :, 1]).max(axis=0)
    scale = np.abs(field.u0).max() or 1.0
    return jump / scale


def divergence_residual(field: SpectralField) -> np.ndarray:
    """|i xi . u' + dN u_N| / scale on the sampled (xi, x_N) grid."""
    if field.dimension != 2:
        raise ConfigError("divergence residual implemented for the planar case")
    div = 1j * field.xi[:, None] * field.u[0] + field.du[1]
    scale = max(float(np.abs(field.u).max()), 1e-300)
    return np.abs(div) / scale


def stress_jump_residual(field: SpectralField, params: FluidParams,
                         consts: DerivedConstants,
                         eta_hat: Optional[np.ndarray] = None) -> dict:
    """Fourier-side residuals of the interface stress rows, data-scaled.

    tangential row: [[mu (dN u_j + i xi_j u_N)]] = 0
    normal row:     [[2 mu dN u_N - p]] = (omega + sigma A^2) eta
    """
    if eta_hat is None:
        eta_hat = field.eta
    A = np.abs(field.xi)
    mp_, mm_ = params.mu_plus, params.mu_minus
    w = consts.omega + params.sigma * A**2
    normal = ((2 * mp_ * field.dNu0[field.dimension - 1, :, 0] - field.p0[:, 0])
              - (2 * mm_ * field.dNu0[field.dimension - 1, :, 1] - field.p0[:, 1])
              - w * eta_hat)
    scale = max(float(np.max(np.abs(w * eta_hat))), 1e-300)
    out = {"normal": np.abs(normal) / scale}
    if field.dimension == 2:
        tang = (mp_ * (field.dNu0[0, :, 0] + 1j * field.xi * field.u0[1, :, 0])
                - mm_ * (field.dNu0[0, :, 1] + 1j * field.xi * field.u0[1, :, 1]))
        out["tangential"] = np.abs(tang) / scale
    return out
