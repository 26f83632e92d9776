"""Spectral evaluator for the linearized two-phase Stokes semigroup.

The package evaluates the Fourier-side solution formulas of the linearized
two-fluid problem with surface tension and gravity (height, velocity and
pressure) through contour integrals of boundary-symbol expressions, certifies
the root structure of the boundary symbol, and measures L_p-L_q time-decay
rates against the predicted exponents.
"""

from .params import FluidParams, DerivedConstants, derive_constants
from .symbols import (SymbolPoint, CoreSymbols, KernelSymbols, branch_sqrt,
                      eval_core, eval_M, eval_kernel_symbols, zeta)
from .roots import (RootPair, FrequencyCalibration, StabilityVerdict,
                    calibrate, calibrate_A0, calibrate_high, classify_stability,
                    find_roots, verify_rouche)
from .kernels import (CutoffSpec, eta_hat_component, pressure_hat_component,
                      residue_mode, u_hat_component)
from .evolve import (DrivingData, ForcingComponent, SpectralField,
                     evolve_spectral, stress_jump_residual)
from .decay import (DecayRateSpec, DecayReport, EXPONENTIAL, fit_rate,
                    lq_time_series, predicted_rate)
from .transform import (DataPreset, FrequencyGrid, PhysicalField, forward_d,
                        inverse_1d, inverse_radial, apply_cutoffs)

__version__ = "0.1.0"

__all__ = [
    "FluidParams", "DerivedConstants", "derive_constants",
    "SymbolPoint", "CoreSymbols", "KernelSymbols", "branch_sqrt",
    "eval_core", "eval_M", "eval_kernel_symbols", "zeta",
    "RootPair", "FrequencyCalibration", "StabilityVerdict",
    "calibrate", "calibrate_A0", "calibrate_high", "classify_stability",
    "find_roots", "verify_rouche",
    "CutoffSpec", "eta_hat_component", "pressure_hat_component",
    "residue_mode", "u_hat_component",
    "DrivingData", "ForcingComponent", "SpectralField",
    "evolve_spectral", "stress_jump_residual",
    "DecayRateSpec", "DecayReport", "EXPONENTIAL", "fit_rate",
    "lq_time_series", "predicted_rate",
    "DataPreset", "FrequencyGrid", "PhysicalField", "forward_d",
    "inverse_1d", "inverse_radial", "apply_cutoffs",
    "__version__",
]
