"""Command-line interface: calibrate / evolve / decay / roots / verify / contours.

Every command takes a JSON config (single source of truth), writes its
artifacts into the output directory, and echoes the resolved config there.
Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import contours, kernels, pipeline, plots, roots as roots_mod
from .config import RunConfig, load_config, thread_cap
from .errors import ConfigError, TwophaseError
from .evolve import (divergence_residual, evolve_spectral,
                     stress_jump_residual, velocity_jump)
from .kernels import (eta_integrand, low_band_path_terms, residue_mode,
                      u_integrand)
from .roots import FrequencyCalibration, calibrate, find_roots, verify_rouche
from .symbols import SymbolPoint, eval_core, zeta_arrays
from .transform import (DataPreset, FrequencyGrid, forward_d, forward_field,
                        inverse_1d, parseval_ratio)

FMT = "%.17g"


def _fmt(v) -> str:
    if isinstance(v, (np.floating, float)):
        return FMT % v
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _prepare_out(cfg: RunConfig) -> str:
    os.makedirs(cfg.output_dir, exist_ok=True)
    write_json(os.path.join(cfg.output_dir, "config_resolved.json"), cfg.raw)
    return cfg.output_dir


def _load_or_calibrate(cfg: RunConfig) -> FrequencyCalibration:
    path = os.path.join(cfg.output_dir, "calibration.json")
    params, consts = cfg.fluids, cfg.consts
    if os.path.exists(path):
        return FrequencyCalibration.load(path, params, consts)
    calib = calibrate(params, consts)
    os.makedirs(cfg.output_dir, exist_ok=True)
    calib.save(path)
    return calib


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_symbols(cfg: RunConfig, args) -> int:
    out = _prepare_out(cfg)
    params, consts = cfg.fluids, cfg.consts
    table = []
    for A in (1e-3, 1e-2, 1e-1, 1.0, 4.0):
        for lam in (0.0, 1.0, 1j, -0.1 + 0.5j):
            if A == 0 and lam == 0:
                continue
            cs = eval_core(params, consts, SymbolPoint(A=A, lam=lam))
            table.append({
                "A": A, "lambda": [lam.real, lam.imag],
                "B_plus": [cs.B_plus.real, cs.B_plus.imag],
                "B_minus": [cs.B_minus.real, cs.B_minus.imag],
                "F": [cs.F.real, cs.F.imag],
                "L": [cs.L.real, cs.L.imag],
                "script_L": [cs.script_L.real, cs.script_L.imag],
            })
    write_json(os.path.join(out, "symbols.json"), {
        "constants": {
            "z0": consts.z0, "omega": consts.omega, "alpha": consts.alpha,
            "beta": consts.beta, "tilde_sigma": consts.tilde_sigma,
            "theta1": consts.theta1, "theta2": consts.theta2,
            "lambda1": consts.lambda1, "stable_regime": cfg.fluids.stable_regime(),
        },
        "samples": table,
    })
    print(f"symbols: wrote {out}/symbols.json")
    return 0


def cmd_calibrate(cfg: RunConfig, args) -> int:
    out = _prepare_out(cfg)
    calib = calibrate(cfg.fluids, cfg.consts)
    calib.save(os.path.join(out, "calibration.json"))
    print(f"calibrate: A0={calib.A0} A_inf={calib.A_inf} a0={calib.a0}")
    return 0


def cmd_roots(cfg: RunConfig, args) -> int:
    out = _prepare_out(cfg)
    params, consts = cfg.fluids, cfg.consts
    calib = _load_or_calibrate(cfg)
    n_A = cfg.numerics["roots_n_A"]
    rows = []
    for A in np.geomspace(1e-4, calib.A0, n_A):
        pair = find_roots(params, consts, float(A))
        zp, _ = zeta_arrays(consts, float(A))
        rk = verify_rouche(params, consts, float(A), "K-boundary", samples=256)
        rr = verify_rouche(params, consts, float(A), "Res-circles", samples=256)
        _, dscript = roots_mod.script_L_and_deriv_arrays(params, consts, float(A),
                                                         pair.lambda_plus)
        rows.append({
            "A": float(A),
            "re_lambda_plus": pair.lambda_plus.real,
            "im_lambda_plus": pair.lambda_plus.imag,
            "gap_to_zeta": abs(pair.lambda_plus - complex(zp)),
            "abs_dscript": abs(complex(dscript)),
            "margin_K": rk.margin,
            "margin_Res": rr.margin,
        })
    header = ["A", "re_lambda_plus", "im_lambda_plus", "gap_to_zeta",
              "abs_dscript", "margin_K", "margin_Res"]
    write_csv(os.path.join(out, "roots.csv"), header,
              [[r[h] for h in header] for r in rows])
    if cfg.figures:
        plots.save_roots_figure(rows, os.path.join(out, "roots.png"))
    print(f"roots: wrote {out}/roots.csv ({len(rows)} rows)")
    return 0


def cmd_contours(cfg: RunConfig, args) -> int:
    out = _prepare_out(cfg)
    consts = cfg.consts
    A = args.A if args.A is not None else 0.1
    lp = contours.build_low_paths(consts, A)
    calib = _load_or_calibrate(cfg)
    hp_mid = contours.build_high_paths(consts, calib.a0, calib.y_top)
    hp_high = contours.build_high_paths(consts, 1.0, calib.y_high)
    payload = [contours.build_gamma0(consts).to_json()]
    payload += [p.to_json() for p in (
        lp.gamma1_plus, lp.gamma1_minus, lp.gamma2_plus, lp.gamma2_minus,
        lp.gamma3, lp.gamma4_plus, lp.gamma4_minus, lp.gamma5_plus,
        lp.gamma5_minus, lp.gamma_res_plus, lp.gamma_res_minus,
        hp_mid.gamma6, hp_mid.gamma7_lower, hp_mid.gamma7_upper,
        hp_high.gamma6,
    )]
    write_json(os.path.join(out, "contours.json"), {"A": A, "paths": payload})
    if cfg.figures:
        plots.save_contours_figure(payload, os.path.join(out, "contours.png"),
                                   extent=max(3.0, 2.5 * consts.lambda1))
    print(f"contours: wrote {out}/contours.json (A={A})")
    return 0


def cmd_evolve(cfg: RunConfig, args) -> int:
    out = _prepare_out(cfg)
    params, consts = cfg.fluids, cfg.consts
    calib = _load_or_calibrate(cfg)
    grids = {"frequency": cfg.frequency_grid(), "x_N": cfg.x_N_grid()}
    data = cfg.driving_data()
    workers = thread_cap(args.threads)
    times = list(cfg.times)
    if workers > 1 and len(times) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            fields = list(pool.map(
                lambda t: evolve_spectral(params, consts, calib, data, [t], grids)[0],
                times))
    else:
        fields = evolve_spectral(params, consts, calib, data, times, grids)

    header = ["band", "xi", "x_N", "component", "side", "re", "im", "t"]
    for fld in fields:
        tag = _fmt(fld.t).replace(".", "p")
        write_csv(os.path.join(out, f"spectral_t{tag}.csv"), header, fld.to_rows())
        phys = inverse_1d(fld.eta, grids["frequency"], t=fld.t, component="eta")
        write_csv(os.path.join(out, f"physical_eta_t{tag}.csv"), ["x", "value"],
                  list(zip(phys.x, phys.values)))
        if cfg.figures:
            plots.save_field_figure(phys.x, phys.values,
                                    os.path.join(out, f"eta_t{tag}.png"),
                                    title=f"height at t={fld.t:g}")
    diag = {
        "velocity_jump_max": float(max(velocity_jump(f).max() for f in fields)),
        "divergence_max": float(max(divergence_residual(f).max() for f in fields))
        if fields[0].dimension == 2 else None,
        "stress_normal_max": float(max(
            stress_jump_residual(f, params, consts)["normal"].max() for f in fields)),
    }
    write_json(os.path.join(out, "evolve_diagnostics.json"), diag)
    print(f"evolve: wrote {len(fields)} snapshots to {out}")
    return 0


def cmd_decay(cfg: RunConfig, args) -> int:
    out = _prepare_out(cfg)
    params, consts = cfg.fluids, cfg.consts
    calib = _load_or_calibrate(cfg)
    if not cfg.specs:
        print("decay: no specs configured, nothing to do")
        return 0
    opts = pipeline.MeasureOptions(fast=cfg.numerics["fast"])
    failures = 0
    for spec, tol in zip(cfg.specs, cfg.spec_tolerances):
        if spec.part == "high":
            ring = cfg.d_preset if cfg.d_preset.kind == "hf_ring" else DataPreset(
                kind="hf_ring", center=calib.A_inf + 2.0, width=1.0, floor=calib.A_inf)
            times, norms, gamma, misfit = pipeline.measure_high_band(
                params, consts, calib, ring)
            ratio = norms[1:] / norms[:-1]
            env = np.exp(-gamma * np.diff(times))
            worst = float(np.max(ratio / env))
            ok = gamma > 0 and worst <= 1.05
            payload = {"spec": {"component": spec.component, "part": "high"},
                       "fitted_gamma": gamma, "envelope_worst_ratio": worst,
                       "verdict": "pass" if ok else "fail"}
            name = spec.label()
            write_json(os.path.join(out, f"decay_{name}.json"), payload)
            write_csv(os.path.join(out, f"decay_{name}.csv"), ["t", "norm"],
                      list(zip(times, norms)))
            if cfg.figures:
                plots.save_exponential_figure(times, norms, gamma,
                                              os.path.join(out, f"decay_{name}.png"))
            failures += 0 if ok else 1
            print(f"decay {name}: gamma={gamma:.4f} envelope={worst:.4f} "
                  f"{'pass' if ok else 'fail'}")
            continue
        report = pipeline.measure_low_band(params, consts, calib, spec,
                                           cfg.d_preset, opts, tolerance=tol)
        name = spec.label()
        write_json(os.path.join(out, f"decay_{name}.json"), report.to_json())
        write_csv(os.path.join(out, f"decay_{name}.csv"), ["t", "norm"],
                  list(zip(report.times, report.norms)))
        if cfg.figures:
            plots.save_decay_figure(report, os.path.join(out, f"decay_{name}.png"))
        failures += 0 if report.verdict else 1
        print(f"decay {name}: fitted={report.fitted_exponent:.4f} "
              f"predicted={report.predicted_exponent} "
              f"{'pass' if report.verdict else 'fail'}")
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _suite_factorization(params_list, consts_list, rng, n):
    worst = 0.0
    from .symbols import core_arrays
    for params, consts in zip(params_list, consts_list):
        A = 10 ** rng.uniform(-3, 1, size=n)
        lam = (rng.normal(size=n) + 1j * rng.normal(size=n)) * 10 ** rng.uniform(-2, 2, size=n)
        c = core_arrays(params, consts, A, lam)
        rho_sum = params.rho_plus + params.rho_minus
        rel = np.abs(c.L - rho_sum * (c.Dp + c.Dm) * c.script_L) / np.abs(c.L)
        worst = max(worst, float(np.max(rel)))
    return {"worst": worst, "tol": 1e-12, "passed": worst <= 1e-12}


def _suite_interface(params, consts, rng, n):
    from .layers import reduce_rhs, solve_interface, transmission_residuals
    worst_solve, worst_res = 0.0, 0.0
    for _ in range(n):
        A = 10 ** rng.uniform(-2, 0.5)
        lam = complex(rng.normal(), rng.normal()) * 10 ** rng.uniform(-1, 1.5)
        pt = SymbolPoint(A=A, lam=lam, xi=(A,))
        core = eval_core(params, consts, pt)
        g = tuple(complex(*rng.normal(size=2)) for _ in range(2))
        h = tuple(complex(*rng.normal(size=2)) for _ in range(2))
        rhs = reduce_rhs(params, core, (A,), g, h)
        mat = np.array([[core.L22, -core.L12], [-core.L21, core.L11]])
        dense = np.linalg.solve(mat, np.array([rhs.G, rhs.H]))
        coeffs = solve_interface(params, pt, rhs, consts=consts, core=core)
        got = np.array([coeffs.beta_prime_dot_minus, coeffs.beta_N_minus])
        worst_solve = max(worst_solve, float(np.max(np.abs(got - dense))
                                             / max(1.0, float(np.max(np.abs(dense))))))
        worst_res = max(worst_res, max(transmission_residuals(params, pt, rhs, coeffs).values()))
    return {"worst_solve": worst_solve, "worst_residual": worst_res,
            "tol": [1e-12, 1e-10],
            "passed": worst_solve <= 1e-12 and worst_res <= 1e-10}


def _suite_rouche(params, consts, calib):
    margins = []
    for A in np.geomspace(1e-4, calib.A0, 8):
        margins.append(verify_rouche(params, consts, float(A), "K-boundary", 256).margin)
        margins.append(verify_rouche(params, consts, float(A), "Res-circles", 256).margin)
    worst = float(np.min(margins))
    return {"worst_margin": worst, "passed": worst > 0}


def _suite_residue(params, consts, calib, rng, n):
    worst = 0.0
    for _ in range(n):
        t = 10 ** rng.uniform(0, 3)
        A_cap = min(0.9 * calib.A0, (12.0 / t) ** (2.0 / 3.0))
        A = 10 ** rng.uniform(math.log10(max(1e-3, A_cap / 30)), math.log10(A_cap))
        lp = contours.build_low_paths(consts, A)
        quad = complex(contours.integrate_exp(
            lp.gamma_res_plus, t, eta_integrand(params, consts, A), tol=1e-11))
        modes = residue_mode(params, consts, A, t)
        worst = max(worst, abs(quad - modes[0]) / abs(modes[0]))
    return {"worst": worst, "tol": 1e-8, "passed": worst <= 1e-8}


def _suite_path_independence(params, consts, calib, rng, n):
    worst = 0.0
    g0 = contours.build_gamma0(consts)
    for _ in range(n):
        A = 10 ** rng.uniform(-2, math.log10(calib.A0))
        t = 10 ** rng.uniform(math.log10(0.05), math.log10(0.5))
        f = eta_integrand(params, consts, A)
        v0 = complex(contours.integrate_exp(g0, t, f, tol=1e-11))
        vsum = sum(low_band_path_terms(params, consts, A, t, f, tol=1e-11).values())
        worst = max(worst, abs(v0 - vsum) / abs(v0))
    return {"worst": worst, "tol": 1e-6, "passed": worst <= 1e-6}


def _suite_boundary(params, consts, calib, rng, n):
    worst = {"jump": 0.0, "divergence": 0.0, "stress": 0.0}
    for _ in range(n):
        A = 10 ** rng.uniform(-2, math.log10(1.8 * calib.A0))
        t = rng.choice([1.0, 10.0])
        terms = lambda integ: sum(
            low_band_path_terms(params, consts, A, t, integ, tol=1e-10).values())
        u0p = terms(u_integrand(params, consts, (A,), 0.0, 2, "+"))
        u0m = terms(u_integrand(params, consts, (A,), 0.0, 2, "-"))
        u1p = terms(u_integrand(params, consts, (A,), 0.0, 1, "+"))
        u1m = terms(u_integrand(params, consts, (A,), 0.0, 1, "-"))
        scale = max(abs(u0p), abs(u1p), 1e-300)
        worst["jump"] = max(worst["jump"], abs(u0p - u0m) / scale, abs(u1p - u1m) / scale)
        x = 0.4
        du2 = terms(u_integrand(params, consts, (A,), x, 2, "+", derivative=True))
        u1x = terms(u_integrand(params, consts, (A,), x, 1, "+"))
        u2x = terms(u_integrand(params, consts, (A,), x, 2, "+"))
        worst["divergence"] = max(worst["divergence"],
                                  abs(1j * A * u1x + du2) / max(abs(u2x), abs(u1x), 1e-300))
        eta = terms(eta_integrand(params, consts, A))
        du2p = terms(u_integrand(params, consts, (A,), 0.0, 2, "+", derivative=True))
        du2m = terms(u_integrand(params, consts, (A,), 0.0, 2, "-", derivative=True))
        pp = terms(kernels.pressure_integrand(params, consts, (A,), 0.0, "+"))
        pm = terms(kernels.pressure_integrand(params, consts, (A,), 0.0, "-"))
        target = (consts.omega + params.sigma * A**2) * eta
        lhs = (2 * params.mu_plus * du2p - pp) - (2 * params.mu_minus * du2m - pm)
        worst["stress"] = max(worst["stress"], abs(lhs - target) / max(abs(target), 1e-300))
    passed = all(v <= 1e-8 for v in worst.values())
    return {**worst, "tol": 1e-8, "passed": passed}


def _suite_transform(params):
    grid = FrequencyGrid.uniform(512, 16.0)
    d = DataPreset(kind="gaussian")
    dh = forward_d(d, grid)
    field = inverse_1d(dh, grid)
    rt = forward_field(field, grid)
    worst_rt = float(np.max(np.abs(rt - dh)) / np.max(np.abs(dh)))
    pr = abs(parseval_ratio(field, dh, grid) - 1.0)
    passed = worst_rt <= 1e-9 and pr <= 1e-6
    return {"roundtrip": worst_rt, "parseval": pr, "tol": [1e-9, 1e-6], "passed": passed}


def cmd_verify(cfg: RunConfig, args) -> int:
    out = _prepare_out(cfg)
    params, consts = cfg.fluids, cfg.consts
    calib = _load_or_calibrate(cfg)
    scale = cfg.numerics["verify_scale"]
    rng = np.random.default_rng(cfg.numerics["seed"])

    def n_of(base):
        return max(4, int(base * scale))

    results = {}
    results["factorization"] = _suite_factorization([params], [consts], rng, n_of(2000))
    results["interface_solve"] = _suite_interface(params, consts, rng, n_of(100))
    results["rouche_margins"] = _suite_rouche(params, consts, calib)
    results["residue_vs_quadrature"] = _suite_residue(params, consts, calib, rng, n_of(6))
    results["path_independence"] = _suite_path_independence(params, consts, calib, rng, n_of(5))
    results["boundary_residuals"] = _suite_boundary(params, consts, calib, rng, n_of(4))
    results["transform"] = _suite_transform(params)
    all_pass = all(r["passed"] for r in results.values())
    results["all_passed"] = all_pass
    write_json(os.path.join(out, "verify.json"), _to_jsonable(results))
    for name, r in results.items():
        if isinstance(r, dict):
            print(f"verify {name}: {'pass' if r['passed'] else 'FAIL'}")
    return 0 if all_pass else 1


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {k: _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


COMMANDS = {
    "symbols": cmd_symbols,
    "roots": cmd_roots,
    "calibrate": cmd_calibrate,
    "evolve": cmd_evolve,
    "decay": cmd_decay,
    "verify": cmd_verify,
    "contours": cmd_contours,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="twophase",
        description="Spectral evaluator for the linearized two-phase Stokes semigroup")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("action", nargs="?", default=None,
                        help="subaction (contours: 'dump')")
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--threads", type=int, default=None, help="worker cap")
    parser.add_argument("--A", type=float, default=None,
                        help="frequency for 'contours dump'")
    parser.add_argument("--fast", action="store_true",
                        help="half-resolution decay measurement")
    args = parser.parse_args(argv)

    if args.command == "contours" and args.action not in (None, "dump"):
        parser.error(f"unknown contours action {args.action!r}")

    try:
        cfg = load_config(args.config, out_override=args.out)
        if args.fast:
            cfg.numerics["fast"] = True
        return COMMANDS[args.command](cfg, args)
    except ConfigError as e:
        print(json.dumps({"error": "ConfigError", "message": str(e)}), file=sys.stderr)
        return 2
    except TwophaseError as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e)}),
              file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
