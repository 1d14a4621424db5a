"""Command-line front end.

Four subcommands: simulate (trajectory CSV), thresholds (window-product
report with JSON, CSV and a figure), reproduce (full report for a bundled
preset: trajectories, figures, thresholds, verdicts), and check
(hypothesis table for a scenario).  A scenario argument is either a preset
name or a path to a scenario document.

Exit codes: 0 success, 1 usage or parse errors, 2 validation errors,
3 numerical failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import analysis, figures, scenario_io
from .auxiliary import find_attractor, pair_system
from .coefficients import check_h4, validate_h1_h2
from .dynamics import check_monotonicity, h3_requirements_met, simulate
from .errors import (AperiodicInput, NoConvergence, PositivityViolation,
                     ReferenceWindowExhausted, ScenarioParseError,
                     ScenarioValidationError)
from .thresholds import build_references, lambda_scan, r_autonomous, r_periodic

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser():
    parser = _Parser(prog="ecoepi",
                     description="discrete predator-prey-disease toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario and export the "
                                        "trajectory")
    p.add_argument("scenario", help="preset name or scenario file")
    p.add_argument("--steps", type=int, default=None,
                   help="number of steps (default: scenario run settings)")
    p.add_argument("--out", required=True, help="trajectory CSV path")
    p.add_argument("--plot", action="store_true",
                   help="also render the trajectory figure next to the CSV")

    p = sub.add_parser("thresholds", help="window-product threshold report")
    p.add_argument("scenario", help="preset name or scenario file")
    p.add_argument("--lambda-max", type=int, default=None,
                   help="largest window length minus one to sweep")
    p.add_argument("--out", required=True,
                   help="output prefix (writes .json, .csv and .png)")

    p = sub.add_parser("reproduce", help="full report for a bundled preset")
    p.add_argument("preset", help="preset name")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("check", help="hypothesis table for a scenario")
    p.add_argument("scenario", help="preset name or scenario file")

    return parser


def _load(arg, validate=True):
    if arg in scenario_io.PRESET_NAMES:
        return scenario_io.preset_scenario(arg)
    return scenario_io.parse_scenario(arg, validate=validate)


def _out_prefix(out):
    path = Path(out)
    if path.suffix == ".json":
        path = path.with_suffix("")
    return path


def cmd_simulate(args):
    loaded = _load(args.scenario)
    steps = args.steps if args.steps is not None else loaded.run.steps
    traj = simulate(loaded.scenario, steps)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    scenario_io.write_trajectory_csv(traj, out)
    summary = {
        "label": loaded.scenario.label,
        "steps": int(steps),
        "final": {"S": float(traj.S[-1]), "I": float(traj.I[-1]),
                  "P": float(traj.P[-1])},
    }
    scenario_io.write_json(summary, out.parent / (out.stem + ".summary.json"))
    if args.plot:
        figures.plot_trajectory(traj, out.parent / (out.stem + ".png"),
                                title=loaded.scenario.label or args.scenario)
    print(f"wrote {out} ({len(traj)} rows)")
    return EXIT_OK


def _require_admissible(loaded):
    horizon = max(loaded.run.steps, 1000)
    report = validate_h1_h2(loaded.scenario.coeffs, horizon=horizon)
    if not report.ok:
        details = "; ".join(msg for (_, msg, _idx) in report.violations)
        raise ScenarioValidationError(
            f"threshold analysis needs admissible coefficients: {details}")


def _threshold_artifacts(loaded, lambda_max, prefix, label):
    scen = loaded.scenario
    run = loaded.run
    refs = build_references(scen, burn_in=run.burn_in,
                            window=run.attractor_window,
                            tol=run.attractor_tol)
    report = lambda_scan(scen, lambda_max=lambda_max, refs=refs)
    doc = report.to_json_dict()
    try:
        doc["r_periodic"] = {
            "lower": r_periodic(scen.coeffs, scen.g, "lower", refs),
            "upper": r_periodic(scen.coeffs, scen.g, "upper", refs),
        }
    except AperiodicInput:
        pass
    try:
        doc["r_autonomous"] = {
            "lower": r_autonomous(scen.coeffs, "lower"),
            "upper": r_autonomous(scen.coeffs, "upper"),
        }
    except ValueError:
        pass
    scenario_io.write_json(doc, prefix.with_suffix(".json"))
    scenario_io.write_threshold_csv(report, prefix.with_suffix(".csv"))
    figures.plot_lambda_scan(report, prefix.with_suffix(".png"), title=label)
    return report


def cmd_thresholds(args):
    loaded = _load(args.scenario)
    _require_admissible(loaded)
    lambda_max = (args.lambda_max if args.lambda_max is not None
                  else loaded.run.lambda_max)
    prefix = _out_prefix(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    report = _threshold_artifacts(loaded, lambda_max, prefix,
                                  loaded.scenario.label or args.scenario)
    print(f"classification: {report.classification}")
    return EXIT_OK


def cmd_reproduce(args):
    preset = scenario_io.get_preset(args.preset)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    trajs = []
    loadeds = []
    for idx in range(len(preset.initials)):
        loaded = scenario_io.preset_scenario(preset.name, idx)
        loadeds.append(loaded)
        stem = f"{preset.name}-start{idx}"
        scenario_io.serialize_scenario(loaded,
                                       out_dir / f"{stem}.scenario.json")
        traj = simulate(loaded.scenario, loaded.run.steps)
        trajs.append(traj)
        scenario_io.write_trajectory_csv(traj,
                                         out_dir / f"{stem}.trajectory.csv")
        figures.plot_trajectory(
            traj, out_dir / f"{stem}.png",
            title=f"{preset.name}, start {preset.initials[idx]}")

    first = loadeds[0]
    _require_admissible(first)
    run = first.run
    prefix = out_dir / f"{preset.name}-thresholds"
    report = _threshold_artifacts(first, run.lambda_max, prefix, preset.name)

    refs = build_references(first.scenario, burn_in=run.burn_in,
                            window=run.attractor_window,
                            tol=run.attractor_tol)
    no_predation = not np.any(
        first.scenario.coeffs.predation.array(0, run.steps + 1))
    attractivity = None
    if no_predation and preset.expected == "Extinction":
        attractivity = analysis.check_attractivity(
            trajs, refs.prey, refs.predator, tol=run.attractivity_tol)

    traj_ok = True
    for idx, traj in enumerate(trajs):
        ext = analysis.detect_extinction(traj, tol=run.extinction_tol,
                                         tail=run.extinction_tail)
        per = analysis.detect_persistence(traj, eps=run.persistence_eps,
                                          tail=run.persistence_tail)
        bound = analysis.verify_bound_L(traj, slack=run.bound_slack)
        verdict = analysis.verdict_json_dict(extinction=ext, persistence=per,
                                             attractivity=attractivity,
                                             bound=bound)
        scenario_io.write_json(
            verdict, out_dir / f"{preset.name}-start{idx}.verdict.json")
        if preset.expected == "Extinction":
            traj_ok = traj_ok and ext.extinct and not per.persistent
        else:
            traj_ok = traj_ok and per.persistent and not ext.extinct

    ok = report.classification == preset.expected and traj_ok
    status = "PASS" if ok else "FAIL"
    print(f"{preset.name}: classification={report.classification} "
          f"expected={preset.expected} trajectories="
          f"{'concordant' if traj_ok else 'discordant'} -> {status}")
    return EXIT_OK


def _check_lines(loaded):
    scen = loaded.scenario
    coeffs = scen.coeffs
    run = loaded.run
    horizon = max(run.steps, 1000)
    lines = []

    def add(tag, ok, detail):
        lines.append((tag, "PASS" if ok else "FAIL", detail))

    report = validate_h1_h2(coeffs, horizon=horizon)
    h1_msgs = [f"{m} (index {i})" if i >= 0 else m
               for (grp, m, i) in report.violations if grp == "h1"]
    add("H1", report.h1_ok,
        "coefficients nonnegative, mortality positive and below infected "
        "removal" if report.h1_ok else "; ".join(h1_msgs))
    h2_msgs = [f"{m} (index {i})" for (grp, m, i) in report.violations
               if grp == "h2"]
    add("H2", report.h2_ok,
        "recruitment, predator growth and competition stay positive"
        if report.h2_ok else "; ".join(h2_msgs))

    viol_f = check_monotonicity(scen.f)
    viol_g = check_monotonicity(scen.g)
    declared_ok = h3_requirements_met(scen.f, scen.g)
    if viol_f or viol_g:
        witness = (viol_f or viol_g)[0]
        add("H3", False,
            f"declared monotonicity violated on the sample grid at "
            f"{witness[1]} -> {witness[2]} (axis {witness[0]})")
    elif not declared_ok:
        add("H3", False, "declared monotonicity directions do not meet the "
                         "standing requirements")
    else:
        add("H3", True, "response monotonicity verified on a 20^3 grid")

    h4 = None
    for width in range(0, 65):
        if horizon < width + 1:
            break
        cand = check_h4(coeffs, window=width, horizon=horizon)
        if cand.holds:
            h4 = cand
            break
    if h4 is not None:
        add("H4", True,
            f"survival products decay geometrically (window {h4.window}, "
            f"rate {h4.decay_rate:.6f}, constant {h4.bound_constant:.3f})")
    else:
        add("H4", False,
            "no window up to 64 shows decaying survival products")

    try:
        traj = simulate(scen, run.steps)
        again = simulate(scen, run.steps)
        add("H5", bool(np.array_equal(traj.states, again.states)),
            "repeated runs are bit-identical (unique forward solution)")
        positive_start = all(v > 0 for v in scen.initial)
        if positive_start:
            ok6 = bool(np.min(traj.states) > 0)
            detail6 = "positive start stays strictly positive"
        else:
            ok6 = bool(np.min(traj.states) >= 0)
            detail6 = "nonnegative start stays nonnegative"
        add("H6", ok6, detail6)
        total = traj.states.sum(axis=1)
        ok7 = bool(np.all(np.isfinite(total)))
        detail7 = f"total population bounded (max {np.max(total):.4f})"
        if scen.g.predator_factor is not None:
            try:
                bound = analysis.eventual_bound(coeffs, scen.f, scen.g,
                                                len(traj),
                                                slack=run.bound_slack)
            except ValueError:
                detail7 += ", eventual bound unavailable"
            else:
                tail = total[len(total) // 2:]
                ok7 = ok7 and bool(np.max(tail) <= bound)
                detail7 += f", eventual bound {bound:.4f}"
        add("H7", ok7, detail7)
    except PositivityViolation as exc:
        add("H5", False, f"simulation failed: {exc}")
        add("H6", False, "not evaluated")
        add("H7", False, "not evaluated")

    for tag, variant, eps in (("H8", "lower", 1e-3), ("H9", "upper", 1e-3)):
        try:
            if variant == "lower":
                # base convergence rides along with the lowered family
                find_attractor(pair_system(coeffs, scen.f, scen.g, "base"),
                               (1.0, 1.0), burn_in=run.burn_in,
                               window=run.attractor_window,
                               tol=run.attractor_tol)
            sys_var = pair_system(coeffs, scen.f, scen.g, variant, eps)
            refs = [find_attractor(sys_var, seed, burn_in=run.burn_in,
                                   window=run.attractor_window,
                                   tol=run.attractor_tol)
                    for seed in ((1.0, 1.0), (0.25, 2.0))]
            gap = float(np.max(np.abs(refs[0].values - refs[1].values)))
            ok = gap < 100 * run.attractor_tol
            add(tag, ok,
                f"{variant}-variant pair attractor is seed-independent "
                f"(gap {gap:.2e}, eps {eps})")
        except NoConvergence as exc:
            add(tag, False, f"{variant}-variant pair system: {exc}")
    return lines


def cmd_check(args):
    loaded = _load(args.scenario, validate=False)
    lines = _check_lines(loaded)
    width = max(len(tag) for tag, _, _ in lines)
    for tag, verdict, detail in lines:
        print(f"{tag:<{width}}  {verdict:<4}  {detail}")
    n_fail = sum(1 for _, v, _ in lines if v == "FAIL")
    print(f"{len(lines) - n_fail}/{len(lines)} hypothesis checks passed")
    return EXIT_OK


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:      # --help
        return 0 if exc.code in (0, None) else EXIT_USAGE

    handlers = {
        "simulate": cmd_simulate,
        "thresholds": cmd_thresholds,
        "reproduce": cmd_reproduce,
        "check": cmd_check,
    }
    try:
        return handlers[args.command](args)
    except ScenarioParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (PositivityViolation, NoConvergence, ReferenceWindowExhausted,
            AperiodicInput, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
