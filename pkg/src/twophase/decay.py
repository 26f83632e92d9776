"""Predicted decay exponents, grid norms, and rate fitting.

``predicted_rate`` is pure arithmetic in (N, p, q) per solution part;
``fit_rate`` least-squares the measured log norms against log t and flags
exponential regimes where a log-linear model fits better.  Grid norms are
exactly that: quadrature on the sampled grid, documented as such.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, HypothesisViolation, NonPolynomialDecay

#: sentinel returned by predicted_rate for exponentially decaying parts
EXPONENTIAL = "exponential"

_PARTS = ("res", "tilde", "parabolic", "high", "combined")
_COMPONENTS = ("H", "U")


@dataclass(frozen=True)
class DecayRateSpec:
    """One (N, p, q, component, part) decay measurement request.

    gamma1 tunes the remainder-part height rate; it must sit inside
    (0, min(1, 2(N-1)(1/p - 1/2))) and defaults to 90% of the supremum.
    j, k select time/space derivative orders for the diffusive (parabolic)
    scale and are zero for everything acceptance-facing.
    """

    N: int
    p: float
    q: float
    component: str
    part: str
    gamma1: Optional[float] = None
    j: int = 0
    k: int = 0

    def __post_init__(self):
        if self.component not in _COMPONENTS:
            raise ConfigError(f"component must be H or U, got {self.component!r}")
        if self.part not in _PARTS:
            raise ConfigError(f"part must be one of {_PARTS}, got {self.part!r}")
        if self.N < 2:
            raise ConfigError("N >= 2 required")
        if not (1 <= self.p and self.p <= math.inf and 1 <= self.q):
            raise ConfigError("p, q must be >= 1")

    def gamma1_value(self) -> float:
        cap = min(1.0, 2.0 * (self.N - 1) * (1.0 / self.p - 0.5))
        if self.gamma1 is None:
            return 0.9 * cap
        if not (0.0 < self.gamma1 < cap):
            raise HypothesisViolation(
                f"gamma1 = {self.gamma1} outside (0, {cap}) for N={self.N}, p={self.p}")
        return self.gamma1

    def label(self) -> str:
        q = "inf" if math.isinf(self.q) else f"{self.q:g}"
        return f"{self.component}_{self.part}_p{self.p:g}_q{q}"


def _inv(x: float) -> float:
    return 0.0 if math.isinf(x) else 1.0 / x


def predicted_rate(spec: DecayRateSpec):
    """Predicted algebraic decay exponent, or the EXPONENTIAL flag.

    Low-band hypotheses demand 1 <= p < 2 <= q <= inf; the diffusive part
    allows 1 < p <= q <= inf.  Violations raise HypothesisViolation.
    """
    N, p, q = spec.N, spec.p, spec.q
    ip, iq = _inv(p), _inv(q)

    def need_low_band():
        if not (1 <= p < 2 <= q):
            raise HypothesisViolation(
                f"low-band rates need 1 <= p < 2 <= q, got p={p}, q={q}")

    if spec.part == "high":
        return EXPONENTIAL

    if spec.part == "res":
        need_low_band()
        base = 4.0 * (N - 1) / 5.0 * (ip - iq)
        if spec.component == "H":
            return base
        return base + 4.0 / 5.0 * (0.5 - iq)

    if spec.part == "tilde":
        need_low_band()
        if spec.component == "H":
            return (N - 1) / 2.0 * (ip - iq) + 0.75 * spec.gamma1_value()
        return N / 2.0 * (ip - iq)

    if spec.part == "parabolic":
        if spec.component == "H":
            raise HypothesisViolation("the forced diffusive part has no height component")
        if not (1 < p <= q):
            raise HypothesisViolation(f"diffusive rates need 1 < p <= q, got p={p}, q={q}")
        return spec.j + spec.k / 2.0 + N / 2.0 * (ip - iq)

    # combined: the slower of the residue-mode and remainder routes
    need_low_band()
    if spec.component == "H":
        return min(4.0 * (N - 1) / 5.0 * (ip - iq),
                   (N - 1) / 2.0 * (ip - iq) + 0.75 * spec.gamma1_value())
    return min(4.0 * (N - 1) / 5.0 * (ip - iq) + 4.0 / 5.0 * (0.5 - iq),
               N / 2.0 * (ip - iq))


# ---------------------------------------------------------------------------
# grid norms and fitting
# ---------------------------------------------------------------------------

def grid_lq_norm(values: np.ndarray, weights: np.ndarray, q: float) -> float:
    """L_q norm of sampled data against quadrature weights (max for q = inf)."""
    v = np.abs(np.asarray(values, dtype=float))
    if math.isinf(q):
        return float(np.max(v))
    w = np.asarray(weights, dtype=float)
    return float(np.sum(w * v**q) ** (1.0 / q))


def lq_time_series(fields: Sequence, q: float):
    """Grid L_q norms of a list of PhysicalFields; returns (times, norms)."""
    times, norms = [], []
    for f in fields:
        dx = float(f.x[1] - f.x[0]) if len(f.x) > 1 else 1.0
        w = np.full(f.values.shape, dx)
        times.append(f.t)
        norms.append(grid_lq_norm(f.values, w, q))
    return np.asarray(times), np.asarray(norms)


def fit_rate(times, norms, window: Optional[tuple] = None,
             exp_margin: float = 0.25):
    """Least-squares decay exponent r with norm ~ C t^{-r} on the window.

    Returns (rate, residual); residual is the max absolute log-log misfit.
    Raises NonPolynomialDecay when a log-linear (exponential) model fits
    better by the given SSE margin factor.
    """
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if window is not None:
        m = (times >= window[0]) & (times <= window[1])
        times, norms = times[m], norms[m]
    if times.size < 3:
        raise ConfigError("rate fit needs at least 3 samples in the window")
    if np.any(norms <= 0):
        raise ConfigError("rate fit needs positive norms")
    ln = np.log(norms)
    lt = np.log(times)
    A_log = np.vstack([lt, np.ones_like(lt)]).T
    coef_log, res_log, *_ = np.linalg.lstsq(A_log, ln, rcond=None)
    sse_log = float(res_log[0]) if res_log.size else 0.0
    A_lin = np.vstack([times, np.ones_like(times)]).T
    coef_lin, res_lin, *_ = np.linalg.lstsq(A_lin, ln, rcond=None)
    sse_lin = float(res_lin[0]) if res_lin.size else 0.0
    if sse_lin < exp_margin * sse_log:
        raise NonPolynomialDecay(
            f"log-linear model fits better (SSE {sse_lin:.3e} vs {sse_log:.3e})",
            rate=-float(coef_lin[0]))
    fit = A_log @ coef_log
    residual = float(np.max(np.abs(fit - ln)))
    return -float(coef_log[0]), residual


def fit_exponential(times, norms):
    """Log-linear fit: returns (gamma, max relative envelope misfit).

    gamma > 0 means norm ~ C e^{-gamma t}; the misfit is the largest
    |norm - C e^{-gamma t}| / (C e^{-gamma t}) over the samples.
    """
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if np.any(norms <= 0):
        raise ConfigError("exponential fit needs positive norms")
    ln = np.log(norms)
    A_lin = np.vstack([times, np.ones_like(times)]).T
    coef, *_ = np.linalg.lstsq(A_lin, ln, rcond=None)
    fit = A_lin @ coef
    misfit = float(np.max(np.abs(np.exp(ln - fit) - 1.0)))
    return -float(coef[0]), misfit


@dataclass
class DecayReport:
    """Measured-versus-predicted record for one spec."""

    spec: DecayRateSpec
    times: np.ndarray
    norms: np.ndarray
    fitted_exponent: float
    predicted_exponent: object
    window: tuple
    tolerance: float
    fit_residual: float
    verdict: bool
    note: str = ""

    def to_json(self) -> dict:
        pred = self.predicted_exponent
        return {
            "spec": {
                "N": self.spec.N, "p": self.spec.p,
                "q": ("inf" if math.isinf(self.spec.q) else self.spec.q),
                "component": self.spec.component, "part": self.spec.part,
            },
            "fitted": self.fitted_exponent,
            "predicted": pred if isinstance(pred, str) else float(pred),
            "window": list(self.window),
            "tolerance": self.tolerance,
            "fit_residual": self.fit_residual,
            "verdict": "pass" if self.verdict else "fail",
            "note": self.note,
        }


def make_report(spec: DecayRateSpec, times, norms, window: tuple,
                tolerance: float, note: str = "") -> DecayReport:
    """Fit the series and compare against the prediction at the tolerance."""
    predicted = predicted_rate(spec)
    fitted, residual = fit_rate(times, norms, window=window)
    if isinstance(predicted, str):
        verdict = False  # exponential parts use fit_exponential instead
    else:
        verdict = abs(fitted - predicted) <= tolerance
    return DecayReport(spec=spec, times=np.asarray(times), norms=np.asarray(norms),
                       fitted_exponent=fitted, predicted_exponent=predicted,
                       window=window, tolerance=tolerance,
                       fit_residual=residual, verdict=verdict, note=note)
