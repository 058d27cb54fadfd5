"""Command-line front end.

Subcommands: construct, verify, distortion, dini.  Each run writes a JSON
report plus CSV curves and PNG figures into a directory named by the
command and a hash of the configuration, so identical configurations land
in identical places with byte-identical reports modulo the timestamp.

Exit codes: 0 success, 1 certification/check failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import plots, reports
from .construct import (
    build_acip_map,
    build_lebesgue_member,
    check_extension_condition,
)
from .densities import build_density, uniform_profile
from .distortion import classify_distortion
from .maps import check_c1_circle
from .moduli import canonical_modulus_estimate, dini_classify, parse_modulus
from .transfer import birkhoff_average, invariance_residual

USAGE_ERROR = 2
CHECK_FAILURE = 1


def _build_parser():
    p = argparse.ArgumentParser(
        prog="circlemaps",
        description="Construct and verify expanding circle maps with prescribed derivative regularity.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("construct", "build a map and write its certificate"),
        ("verify", "re-run invariance/gluing/regularity checks on a map"),
        ("distortion", "distortion growth analysis and bounded/unbounded verdict"),
        ("dini", "Dini-integrability classification of a modulus"),
    ):
        cmd = sub.add_parser(name, help=helptext)
        cmd.add_argument("--config", type=str, default=None, help="flat key=value file; flags override")
        cmd.add_argument("--mode", choices=["acip", "lebesgue"], default=None,
                         help="construction route (default acip)")
        cmd.add_argument("--modulus", type=str, default=None,
                         help='descriptor like "holder:alpha=0.5,C=1", "log-nondini", "almost-lipschitz", "zero"')
        cmd.add_argument("--seed", type=int, default=None, help="seed for the lebesgue family tail (default 0)")
        cmd.add_argument("--grid", type=int, default=None, help="grid size, power of two (default 4096)")
        cmd.add_argument("--kmax", type=int, default=None, help="deepest distortion level (default 40)")
        cmd.add_argument("--tol", type=float, default=None, help="invariance tolerance (default 5e-6)")
        cmd.add_argument("--out", type=str, default=None, help="output root (default ./runs)")
        cmd.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    return p


_DEFAULTS = {
    "mode": "acip",
    "modulus": "holder:alpha=0.5,C=1",
    "seed": 0,
    "grid": 4096,
    "kmax": 40,
    "tol": 5e-6,
    "out": "runs",
}


def _read_config_file(path):
    cfg = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"malformed config line: {raw!r}")
        key, val = line.split("=", 1)
        cfg[key.strip()] = val.strip()
    return cfg


def _resolve_config(args) -> dict:
    cfg = dict(_DEFAULTS)
    if args.config:
        file_cfg = _read_config_file(args.config)
        unknown = set(file_cfg) - set(_DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    for key in _DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    cfg["seed"] = int(cfg["seed"])
    cfg["grid"] = int(cfg["grid"])
    cfg["kmax"] = int(cfg["kmax"])
    cfg["tol"] = float(cfg["tol"])
    if cfg["grid"] < 16 or cfg["grid"] & (cfg["grid"] - 1):
        raise ValueError(f"grid must be a power of two >= 16, got {cfg['grid']}")
    if cfg["tol"] <= 0:
        raise ValueError("tol must be positive")
    cfg["figures"] = not getattr(args, "no_figures", False)
    return cfg


def _build_map(cfg):
    omega = parse_modulus(cfg["modulus"])
    if cfg["mode"] == "acip":
        profile = build_density(omega)
        return build_acip_map(profile), profile, omega
    f = build_lebesgue_member(omega, cfg["seed"])
    return f, uniform_profile(), omega


def _dyadic_scales(cutoff, floor=1e-5):
    scales = [2.0 ** (-j) for j in range(1, 60)]
    keep = [t for t in scales if floor <= t <= cutoff]
    return np.asarray(keep if keep else [cutoff])


def cmd_construct(cfg) -> int:
    f, profile, omega = _build_map(cfg)
    rundir = reports.run_directory(cfg["out"], "construct", cfg)
    glue = check_c1_circle(f, tol=1e-8)
    inv = invariance_residual(f, profile, cfg["grid"])
    residuals = {
        "full_branch": f.certificate["full_branch_residuals"],
        "expansion": f.certificate["expansion"],
        "inverse_consistency": f.certificate["inverse_residuals"],
        "gluing": {
            "interior": glue.interior_residual,
            "endpoint": glue.endpoint_residual,
            "passed": glue.passed,
        },
        "invariance": {"sup_residual": inv, "grid": cfg["grid"], "passed": inv <= cfg["tol"]},
    }
    if cfg["mode"] == "lebesgue":
        residuals["extension_condition"] = check_extension_condition(
            float(np.asarray(f.deriv_branch(1, 0.0))),
            float(np.asarray(f.deriv_branch(1, f.a))),
        )
    else:
        residuals["density_certification"] = profile.certification.as_dict()

    checks = {
        "expansion": f.certificate["expansion"]["lam_raw"] > 1.0,
        "gluing": glue.passed,
        "invariance": inv <= cfg["tol"],
    }
    if cfg["mode"] == "lebesgue":
        checks["extension_condition"] = residuals["extension_condition"] <= 1e-10
    else:
        checks["density_certification"] = profile.certification.passed
    failing = [name for name, ok in sorted(checks.items()) if not ok]

    payload = {
        "command": "construct",
        "config": {k: v for k, v in cfg.items() if k != "figures"},
        "map": {
            "kind": cfg["mode"],
            "breakpoint": f.a,
            "modulus": omega.descriptor,
            "seed": cfg["seed"],
        },
        "residuals": residuals,
        "passed": not failing,
        "first_failure": failing[0] if failing else None,
    }
    cert = reports.write_json(rundir / "certificate.json", payload)
    reports.write_csv(rundir / "map.csv", ["x", "f", "fprime"], reports.map_rows(f))
    reports.write_csv(rundir / "density.csv", ["x", "rho", "g"], reports.density_rows(profile))
    if cfg["figures"]:
        plots.plot_map(f, rundir / "map.png")
        plots.plot_density(profile, rundir / "density.png")
    print(f"certificate: {cert}")
    if failing:
        print(f"FAILED: {failing[0]}", file=sys.stderr)
        return CHECK_FAILURE
    return 0


def cmd_verify(cfg) -> int:
    f, profile, omega = _build_map(cfg)
    rundir = reports.run_directory(cfg["out"], "verify", cfg)

    inv = invariance_residual(f, profile, cfg["grid"])
    glue = check_c1_circle(f, tol=1e-8)

    cutoff = f.provenance.get("bump_cutoff", 0.125)
    scales = _dyadic_scales(cutoff)
    ratio_windows = {}
    ratios_ok = True
    for branch, (lo, hi) in ((1, (0.0, f.a)), (2, (f.a, 1.0))):
        est = canonical_modulus_estimate(
            lambda x, b=branch: np.asarray(f.deriv_branch(b, x), dtype=float),
            scales,
            samples_per_scale=256,
            domain=(lo, hi),
        )
        lo_r, hi_r = est.ratio_against(omega)
        ratio_windows[f"branch{branch}"] = [lo_r, hi_r]
        if not (0.1 <= lo_r and hi_r <= 10.0):
            ratios_ok = False
    if omega.family == "zero":
        ratios_ok = True  # flat derivative: the ratio window is vacuous

    rng = np.random.default_rng(cfg["seed"] + 1)
    seeds = rng.uniform(0.05, 0.95, 4)
    averages = birkhoff_average(f, lambda x: (x < 0.5).astype(float), seeds, 20000)
    expected = float(np.asarray(profile.cumulative(0.5)))
    birkhoff_ok = bool(np.all(np.abs(averages - expected) <= 0.05))

    checks = {
        "invariance": inv <= cfg["tol"],
        "gluing": glue.passed,
        "modulus_ratio": ratios_ok,
        "birkhoff": birkhoff_ok,
    }
    failing = [name for name, ok in sorted(checks.items()) if not ok]
    payload = {
        "command": "verify",
        "config": {k: v for k, v in cfg.items() if k != "figures"},
        "map": {"kind": cfg["mode"], "modulus": omega.descriptor, "seed": cfg["seed"]},
        "checks": {
            "invariance": {"sup_residual": inv, "grid": cfg["grid"], "tol": cfg["tol"], "passed": checks["invariance"]},
            "gluing": {
                "interior": glue.interior_residual,
                "endpoint": glue.endpoint_residual,
                "passed": glue.passed,
            },
            "modulus_ratio": {"windows": ratio_windows, "bounds": [0.1, 10.0], "passed": ratios_ok},
            "birkhoff": {
                "averages": list(map(float, averages)),
                "expected": expected,
                "tolerance": 0.05,
                "passed": birkhoff_ok,
            },
        },
        "passed": not failing,
        "first_failure": failing[0] if failing else None,
    }
    rep = reports.write_json(rundir / "verification.json", payload)

    xs, y1, y2, w1, w2 = f.preimage_table(cfg["grid"])
    rho = np.asarray(profile.density(xs), dtype=float)
    push = np.asarray(profile.density(y1), dtype=float) * w1 + np.asarray(profile.density(y2), dtype=float) * w2
    reports.write_csv(rundir / "invariance.csv", ["x", "rho", "pushed"], zip(xs, rho, push))
    if cfg["figures"]:
        plots.plot_invariance(xs, rho, push, rundir / "invariance.png")
    print(f"report: {rep}")
    if failing:
        print(f"FAILED: {failing[0]}", file=sys.stderr)
        return CHECK_FAILURE
    return 0


def cmd_distortion(cfg) -> int:
    f, _, omega = _build_map(cfg)
    rundir = reports.run_directory(cfg["out"], "distortion", cfg)
    verdict, report = classify_distortion(f, omega, k_max=cfg["kmax"])
    payload = {
        "command": "distortion",
        "config": {k: v for k, v in cfg.items() if k != "figures"},
        "map": {"kind": cfg["mode"], "modulus": omega.descriptor, "seed": cfg["seed"]},
        "report": report.as_dict(),
    }
    rep = reports.write_json(rundir / "distortion.json", payload)
    reports.write_csv(
        rundir / "distortion.csv",
        ["k", "distortion", "witness", "lower_bound"],
        report.rows(),
    )
    if cfg["figures"]:
        plots.plot_distortion(report, rundir / "distortion.png")
    print(f"report: {rep}")
    print(f"verdict: {verdict}")
    return 0


def cmd_dini(cfg) -> int:
    omega = parse_modulus(cfg["modulus"])
    rundir = reports.run_directory(cfg["out"], "dini", cfg)
    result = dini_classify(omega)
    agree = dini_classify(omega, sigma=3.0)
    payload = {
        "command": "dini",
        "config": {k: v for k, v in cfg.items() if k != "figures"},
        "modulus": omega.descriptor,
        "verdict": result.verdict,
        "integral": result.integral,
        "detail": result.detail,
        "sigma_consistency": {
            "sigma2": result.verdict,
            "sigma3": agree.verdict,
            "agree": result.verdict == agree.verdict,
        },
    }
    rep = reports.write_json(rundir / "dini.json", payload)
    mask = result.partial_sums > 0
    reports.write_csv(
        rundir / "dini_trace.csv",
        ["k", "partial_sum"],
        zip(result.ks[mask].tolist(), result.partial_sums[mask].tolist()),
    )
    if cfg["figures"]:
        plots.plot_dini_trace(result.ks, result.partial_sums, rundir / "dini.png", verdict=result.verdict)
    print(f"report: {rep}")
    print(f"verdict: {result.verdict}" + (f" integral={result.integral:.12g}" if result.integral is not None else ""))
    return 0


_COMMANDS = {
    "construct": cmd_construct,
    "verify": cmd_verify,
    "distortion": cmd_distortion,
    "dini": cmd_dini,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        return _COMMANDS[args.command](cfg)
    except ValueError as exc:
        # bad modulus descriptors and malformed parameters surface here
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except RuntimeError as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return CHECK_FAILURE


if __name__ == "__main__":
    sys.exit(main())
