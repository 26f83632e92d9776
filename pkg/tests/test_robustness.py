"""Off-default parameter sets: calibration must adapt, not assume."""

import numpy as np
import pytest

from twophase.decay import DecayRateSpec
from twophase.errors import CalibrationFailure
from twophase.params import FluidParams, derive_constants
from twophase.pipeline import MeasureOptions, measure_low_band
from twophase.roots import _right_of_gamma0_region, calibrate
from twophase.contours import argument_principle_count
from twophase.transform import DataPreset


def test_viscosity_contrast_pushes_high_threshold():
    # with strongly unequal viscosities the slow mode crosses the abscissa-1
    # rectangle around A ~ 4; the winding certificate must push A_inf past it
    p = FluidParams(rho_plus=1.0, rho_minus=2.0, mu_plus=3.0, mu_minus=0.4,
                    sigma=1.0, gravity=3.0)
    c = derive_constants(p)
    calib = calibrate(p, c)
    assert calib.A_inf >= 8.0
    rep = measure_low_band(p, c, calib,
                           DecayRateSpec(N=2, p=1, q=2, component="H", part="combined"),
                           DataPreset(kind="gaussian"),
                           MeasureOptions(fast=True), tolerance=0.12)
    assert rep.verdict


def test_contour_scale_too_small_is_refused():
    # strong gravity pushes underdamped roots right of the default-scale main
    # contour; calibration must refuse and name the cure
    p = FluidParams(rho_plus=0.3, rho_minus=4.0, mu_plus=1.0, mu_minus=2.5,
                    sigma=0.5, gravity=9.8)
    with pytest.raises(CalibrationFailure, match="lambda1"):
        calibrate(p, derive_constants(p))
    calib = calibrate(p, derive_constants(p, lambda1_override=3.0))
    assert 0 < calib.A0 < 1 <= 2 <= calib.A_inf


def test_right_of_contour_region_orientation(consts):
    # the left wedge behind the anchor (captured spectrum) is excluded, the
    # sector right of the rays is counted
    reg = _right_of_gamma0_region(consts, 200.0)
    assert argument_principle_count(reg, lambda lam: lam - (-2.96 + 3.02j)) == 1
    assert argument_principle_count(reg, lambda lam: lam - 10.0) == 0
    assert argument_principle_count(reg, lambda lam: lam - (-2 + 0.05j)) == 0


def test_unstable_arrangement_cannot_calibrate():
    p = FluidParams(rho_plus=2.0, rho_minus=1.0, mu_plus=1.0, mu_minus=1.0,
                    sigma=1.0, gravity=3.0)
    with pytest.raises(CalibrationFailure):
        calibrate(p, derive_constants(p))
