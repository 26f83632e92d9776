"""Physical parameters and the scalar constants derived from them.

Everything downstream (symbols, contours, roots, kernels) is a function of a
``FluidParams`` instance plus the handful of derived scalars collected in
``DerivedConstants``.  All quantities are nondimensional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError

#: Contour half-angles are arctan(j/16); these never change.
THETA1 = math.atan(1.0 / 16.0)
THETA2 = math.atan(2.0 / 16.0)


@dataclass(frozen=True)
class FluidParams:
    """Densities, viscosities, surface tension and gravity for the two fluids.

    ``_plus`` refers to the upper fluid (x_N > 0), ``_minus`` to the lower.
    All six numbers must be strictly positive.  The heavier-below arrangement
    ``rho_minus > rho_plus`` is the stable regime; the inverted arrangement is
    allowed for instability experiments but flagged by ``stable_regime()``.
    """

    rho_plus: float
    rho_minus: float
    mu_plus: float
    mu_minus: float
    sigma: float
    gravity: float

    def __post_init__(self):
        for name in ("rho_plus", "rho_minus", "mu_plus", "mu_minus", "sigma", "gravity"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"FluidParams.{name} must be a finite positive number, got {value!r}")

    def stable_regime(self) -> bool:
        """True when the lower fluid is heavier (no Rayleigh-Taylor growth)."""
        return self.rho_minus > self.rho_plus

    @classmethod
    def from_dict(cls, d: dict) -> "FluidParams":
        required = {"rho_plus", "rho_minus", "mu_plus", "mu_minus", "sigma", "gravity"}
        missing = required - set(d)
        if missing:
            raise ConfigError(f"fluids config missing fields: {sorted(missing)}")
        return cls(**{k: float(d[k]) for k in required})


@dataclass(frozen=True)
class DerivedConstants:
    """Scalar constants fixed by the fluid parameters.

    z0          slowest kinematic viscosity min(mu+/rho+, mu-/rho-)
    omega       buoyancy coefficient (rho- - rho+) * gravity
    alpha       omega / (rho+ + rho-)
    beta        sqrt(rho+ mu+) sqrt(rho- mu-) / ((rho+ + rho-)(sqrt(rho+ mu+) + sqrt(rho- mu-)))
    tilde_sigma sigma / (rho+ + rho-)
    theta1/2    arctan(1/16), arctan(2/16): ray half-angles of the main contour
    lambda1     resolvent-scale anchor of the main contour (config input, >= ~1;
                certified a posteriori by the root module, never assumed)
    """

    z0: float
    omega: float
    alpha: float
    beta: float
    tilde_sigma: float
    theta1: float
    theta2: float
    lambda1: float


def derive_constants(params: FluidParams, lambda1_override: float | None = None) -> DerivedConstants:
    """Compute every derived scalar from the physical inputs.

    ``lambda1_override`` replaces the default anchor scale 1.0.  The value is
    a configuration input: the resolvent theory only guarantees existence of a
    workable scale, so the root-certification pass must validate whatever is
    chosen here before any evolution run.
    """
    if lambda1_override is not None:
        lambda1 = float(lambda1_override)
        if not (math.isfinite(lambda1) and lambda1 > 0):
            raise ConfigError(f"lambda1 must be positive, got {lambda1_override!r}")
    else:
        lambda1 = 1.0

    rho_sum = params.rho_plus + params.rho_minus
    omega = (params.rho_minus - params.rho_plus) * params.gravity
    sp = math.sqrt(params.rho_plus * params.mu_plus)
    sm = math.sqrt(params.rho_minus * params.mu_minus)
    return DerivedConstants(
        z0=min(params.mu_plus / params.rho_plus, params.mu_minus / params.rho_minus),
        omega=omega,
        alpha=omega / rho_sum,
        beta=sp * sm / (rho_sum * (sp + sm)),
        tilde_sigma=params.sigma / rho_sum,
        theta1=THETA1,
        theta2=THETA2,
        lambda1=lambda1,
    )
