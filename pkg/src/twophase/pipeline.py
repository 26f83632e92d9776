"""Decay-rate measurement pipelines.

Turns the vectorized band weights into L_q norm time series with per-time
adaptive frequency grids.  The low band needs two resolutions: the residue
modes oscillate on the sqrt(A) scale (fine grid, closed form), while the
remainder-path contributions are smooth in A (coarse grid, contour
quadrature, interpolated onto the fine grid).  Norms are grid norms: a
trapezoid rule in sqrt(A) and log x_N, and Parseval in the tangential
variable for q = 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import kernels
from .decay import DecayRateSpec, DecayReport, fit_exponential, make_report
from .errors import ConfigError, HypothesisViolation
from .kernels import CutoffSpec
from .params import DerivedConstants, FluidParams
from .roots import FrequencyCalibration, root_curve
from .symbols import core_arrays
from .transform import DataPreset

_trapz = getattr(np, "trapezoid", None) or np.trapz

#: envelope e^{-LOG_LIVE} marks where residue modes stop contributing to norms
LOG_LIVE = 22.0


@dataclass(frozen=True)
class MeasureOptions:
    """Grid sizes of the measurement pipelines (halved by fast mode)."""

    fast: bool = False
    n_u_fine: int = 4096
    n_A_coarse: int = 96
    n_x: int = 160
    n_times: int = 25
    window: tuple = (1e2, 1e4)

    def scaled(self) -> "MeasureOptions":
        if not self.fast:
            return self
        return MeasureOptions(fast=True,
                              n_u_fine=self.n_u_fine // 2,
                              n_A_coarse=max(48, self.n_A_coarse // 2),
                              n_x=max(64, self.n_x // 2),
                              n_times=max(13, int(self.n_times * 0.6)),
                              window=self.window)


def damping_coeff(consts: DerivedConstants) -> float:
    """Leading small-A damping rate coefficient of the slow modes."""
    return math.sqrt(2.0) * abs(consts.alpha) ** 0.25 * consts.beta


def live_A(consts: DerivedConstants, calib: FrequencyCalibration, t: float) -> float:
    """Frequency beyond which the slow-mode envelope is norm-dead at time t."""
    c_damp = damping_coeff(consts)
    if c_damp * t <= 0:
        return 2.0 * calib.A0
    return min((LOG_LIVE / (c_damp * t)) ** 0.8, 2.0 * calib.A0)


def _fine_u_grid(consts, calib, t, n_u):
    u_max = min(math.sqrt(2.0 * calib.A0), 1.3 * math.sqrt(live_A(consts, calib, t)))
    du = u_max / n_u
    u = np.linspace(du, u_max, n_u)
    return u, u * u


def _coarse_A(consts, calib, t, n_A):
    u_max = min(math.sqrt(2.0 * calib.A0), 1.3 * math.sqrt(live_A(consts, calib, t)))
    u = np.linspace(u_max / n_A, u_max, n_A)
    return u, u * u


def _interp_rows(u_fine, u_coarse, values):
    """Linear interpolation along the first axis from coarse to fine u nodes."""
    values = np.asarray(values)
    if values.ndim == 1:
        return np.interp(u_fine, u_coarse, values)
    out = np.empty((u_fine.size,) + values.shape[1:])
    for j in range(values.shape[1]):
        out[:, j] = np.interp(u_fine, u_coarse, values[:, j])
    return out


def _x_grid(consts, calib, t, n_x):
    """Log-spaced normal grid wide enough for the e^{-A x} tails that matter."""
    A_floor = max(1e-3 * live_A(consts, calib, t), 1e-8)
    X = min(25.0 / A_floor, 1e9)
    return np.concatenate([[0.0], np.geomspace(1e-3, X, n_x - 1)])


def low_band_H_norms(params: FluidParams, consts: DerivedConstants,
                     calib: FrequencyCalibration, d_amp: Callable,
                     times, opts: MeasureOptions) -> np.ndarray:
    """L2 grid norms of the low-band height via Parseval in the frequency."""
    cs = CutoffSpec(calib.A0, calib.A_inf)
    norms = []
    for t in np.asarray(times, dtype=float):
        u, A = _fine_u_grid(consts, calib, t, opts.n_u_fine)
        w = kernels.low_band_eta_weight(params, consts, A, t, include_tilde=False)
        uc, Ac = _coarse_A(consts, calib, t, opts.n_A_coarse)
        wt = kernels.low_band_eta_weight(params, consts, Ac, t, include_residue=False)
        w = w + _interp_rows(u, uc, wt)
        eta = cs.low(A) * w * np.abs(d_amp(A))
        norms.append(math.sqrt(_trapz(eta**2 * 2.0 * u, u) / math.pi))
    return np.asarray(norms)


def low_band_U_norms(params: FluidParams, consts: DerivedConstants,
                     calib: FrequencyCalibration, d_amp: Callable,
                     times, opts: MeasureOptions) -> np.ndarray:
    """L2 grid norms of the low-band velocity over the (x', x_N) plane.

    Tangential modulus is A times the tangential shape weight; both fluid
    sides and both components enter the squared norm.  The x_N quadrature is
    trapezoid on a log grid wide enough for the slowest e^{-A x_N} tails.
    """
    cs = CutoffSpec(calib.A0, calib.A_inf)
    norms = []
    for t in np.asarray(times, dtype=float):
        u, A = _fine_u_grid(consts, calib, t, opts.n_u_fine)
        x = _x_grid(consts, calib, t, opts.n_x)
        res = kernels.low_band_u_weights(params, consts, A, x, t, include_tilde=False)
        uc, Ac = _coarse_A(consts, calib, t, opts.n_A_coarse)
        til = kernels.low_band_u_weights(params, consts, Ac, x, t, include_residue=False)
        phi_d = cs.low(A) * np.abs(d_amp(A))
        total = 0.0
        for side in ("+", "-"):
            wt = res.value("t", side) + _interp_rows(u, uc, til.value("t", side))
            wn = res.value("n", side) + _interp_rows(u, uc, til.value("n", side))
            dens = (A[:, None] * wt) ** 2 + wn**2
            dens *= (phi_d**2)[:, None]
            per_A = _trapz(dens, x, axis=1)
            total += _trapz(per_A * 2.0 * u, u) / math.pi
        norms.append(math.sqrt(total))
    return np.asarray(norms)


def _res_mode_eta(params, consts, A, t):
    """Complex residue-mode sum weight: eta = weight * d_hat (real)."""
    lam_p, dscript = root_curve(params, consts, A)
    c = core_arrays(params, consts, A, lam_p)
    rho_sum = params.rho_plus + params.rho_minus
    w = c.F / (rho_sum * (c.Dp + c.Dm) * dscript)
    return 2.0 * np.real(w * np.exp(lam_p * t))


def res_H_norms(params: FluidParams, consts: DerivedConstants,
                calib: FrequencyCalibration, d_amp: Callable, times,
                q: float, opts: MeasureOptions) -> np.ndarray:
    """Residue-part height norms for q = 2 (Parseval) or q = inf (sup field).

    The sup is taken over an x grid that tracks the dispersive ridge: the
    stationary point of x A +- sqrt(alpha A) t sweeps x ~ t^{7/5}, so the
    grid spans the ridge positions of the live frequency window plus the
    near field.  The frequency grid resolves the fastest phase on that grid.
    """
    cs = CutoffSpec(calib.A0, calib.A_inf)
    out = []
    for t in np.asarray(times, dtype=float):
        if math.isinf(q):
            n_u = int(np.clip(2 ** math.ceil(math.log2(64.0 * t**0.6 + 256)), 2048, 32768))
        else:
            n_u = opts.n_u_fine
        u, A = _fine_u_grid(consts, calib, t, n_u)
        eta = cs.low(A) * _res_mode_eta(params, consts, A, t) * np.abs(d_amp(A))
        if math.isinf(q):
            A_lo = max(live_A(consts, calib, t) / 30.0, float(A[0]))
            A_hi = min(2.0 * calib.A0, 30.0 * live_A(consts, calib, t))
            ridge = 0.5 * math.sqrt(abs(consts.alpha)) * t / np.sqrt(
                np.geomspace(A_lo, A_hi, 96))
            xs = np.concatenate([np.linspace(0.0, ridge.min(), 32), np.sort(ridge)])
            phase = np.cos(xs[:, None] * A[None, :])
            vals = phase @ (eta * 2.0 * u) * (u[1] - u[0]) / math.pi
            out.append(float(np.max(np.abs(vals))))
        else:
            out.append(math.sqrt(_trapz(eta**2 * 2.0 * u, u) / math.pi))
    return np.asarray(out)


def high_band_H_norms(params: FluidParams, consts: DerivedConstants,
                      calib: FrequencyCalibration, d_preset: DataPreset,
                      times, n_A: int = 384) -> np.ndarray:
    """L2 norms of the height for data supported at high frequencies.

    The data transform must vanish below the high threshold; there the two
    upper-band cutoffs sum to one and the abscissa-1 left contour is
    certified, so a single contour serves the whole support.
    """
    if d_preset.kind != "hf_ring":
        raise ConfigError("high-band measurement expects an hf_ring preset")
    if d_preset.floor < calib.A_inf:
        raise ConfigError(
            f"ring floor {d_preset.floor} below the high threshold {calib.A_inf}")
    A = np.linspace(d_preset.floor, d_preset.center + 6.0 * d_preset.width, n_A)
    d = np.abs(d_preset.analytic_transform(A))
    norms = []
    for t in np.asarray(times, dtype=float):
        w = kernels.high_band_eta_weight(params, consts, A, t, 1.0, calib.y_high)
        eta = w * d
        norms.append(math.sqrt(_trapz(eta**2, A) / math.pi))
    return np.asarray(norms)


# ---------------------------------------------------------------------------
# spec-driven measurement entry point
# ---------------------------------------------------------------------------

def measure_low_band(params: FluidParams, consts: DerivedConstants,
                     calib: FrequencyCalibration, spec: DecayRateSpec,
                     d_preset: DataPreset, opts: Optional[MeasureOptions] = None,
                     tolerance: float = 0.08) -> DecayReport:
    """Norm series + fit for one low-band spec against a height preset."""
    opts = (opts or MeasureOptions()).scaled()
    if spec.N != 2:
        raise HypothesisViolation("measurements are implemented for the planar case")
    times = np.geomspace(opts.window[0], opts.window[1], opts.n_times)

    def d_amp(A):
        return d_preset.analytic_transform(A)

    if spec.part == "res":
        norms = res_H_norms(params, consts, calib, d_amp, times, spec.q, opts)
        note = "residue-mode part"
        if math.isinf(spec.q):
            note += ("; sup-norm prediction is an upper bound: dispersive "
                     "cancellation makes the measured decay faster")
    elif spec.component == "H":
        if math.isinf(spec.q):
            raise HypothesisViolation(
                "sup-norm series are measured on the residue part (part='res')")
        norms = low_band_H_norms(params, consts, calib, d_amp, times, opts)
        note = "full low band"
    else:
        norms = low_band_U_norms(params, consts, calib, d_amp, times, opts)
        note = "full low band"
    return make_report(spec, times, norms, opts.window, tolerance, note=note)


def measure_high_band(params: FluidParams, consts: DerivedConstants,
                      calib: FrequencyCalibration, d_preset: DataPreset,
                      t_lo: float = 1.0, t_hi: float = 20.0, n_times: int = 20):
    """Exponential-decay measurement for high-frequency data.

    Returns (times, norms, gamma, envelope_misfit) with gamma from the
    log-linear fit and the misfit the largest relative deviation of the
    norms from the fitted envelope.
    """
    times = np.linspace(t_lo, t_hi, n_times)
    norms = high_band_H_norms(params, consts, calib, d_preset, times)
    gamma, misfit = fit_exponential(times, norms)
    return times, norms, gamma, misfit
