"""Command-line entry points.

  spinctrl run <preset|config.toml|manifest.json>   closed-loop run -> artifact
  spinctrl validate <test1|test2> --method A|B      estimated vs exact feedback
  spinctrl estimate-w <preset|config.toml>          one-point value estimate
  spinctrl emit-config <preset>                     write the TOML for a preset

Exit codes: 0 success, 2 configuration error, 3 numerical failure.  Presets
remember the sample counts of the full-scale experiments; the effective
count is capped at 10^4 unless --full is passed.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import backends
from .artifacts import read_manifest, write_artifact
from .driver import orthogonality_angles, realized_cost, run_algorithm
from .errors import ConfigError, NumericalFailure
from .feynman_kac import estimate_w, value_function_W
from .integrator import sphere_deviation
from .rng import NS_ESTIMATOR, SeedPolicy
from .scenarios import ScenarioSpec, from_dict, load_scenario, preset, emit_config, validate_run

SAMPLE_CAP = 10_000
OSCILLATORY_FACTOR = 0.1


def _add_common(sub: argparse.ArgumentParser, with_method=True) -> None:
    sub.add_argument("--seed", type=int, default=None, help="master seed (default: scenario's)")
    sub.add_argument("--tau", type=float, default=None, help="step size override")
    sub.add_argument("--samples", type=int, default=None, help="Monte-Carlo samples M")
    sub.add_argument("--hbar", type=float, default=None, help="stencil width (default 1/sqrt(M))")
    sub.add_argument("--quad-points", type=int, default=None, help="Gauss-Legendre points per step")
    sub.add_argument("--threads", type=int, default=1, help="worker threads (never changes results)")
    if with_method:
        sub.add_argument("--method", choices=["A", "B"], default=None, help="gradient estimator")
    sub.add_argument("--out-dir", default=None, help="artifact directory")
    sub.add_argument("--full", action="store_true", help="lift the 10^4 sample cap")
    sub.add_argument("--strict", action="store_true", help="turn regime warnings into errors")
    sub.add_argument("--backend", default=None, help="path kernel: auto|cython|numpy")


def _resolve_scenario(source: str):
    """Scenario plus run-knob defaults; manifests restore their exact knobs."""
    path = Path(source)
    if path.suffix == ".json" and path.exists():
        manifest = read_manifest(path)
        spec = from_dict(manifest["scenario"])
        return spec, manifest.get("run", {})
    return load_scenario(source), {}


def _effective_knobs(spec: ScenarioSpec, args, manifest_run: dict) -> dict:
    def pick(cli_value, manifest_key, spec_value):
        if cli_value is not None:
            return cli_value
        if manifest_key in manifest_run:
            return manifest_run[manifest_key]
        return spec_value

    knobs = {
        "tau": pick(args.tau, "tau", spec.tau),
        "samples": int(pick(args.samples, "samples", spec.samples)),
        "hbar": pick(args.hbar, "hbar", spec.hbar),
        "quad_points": int(pick(args.quad_points, "quad_points", spec.quad_points)),
        "method": pick(getattr(args, "method", None), "method", spec.method),
        "seed": int(pick(args.seed, "master_seed", spec.seed)),
        "threads": args.threads,
    }
    if not args.full and knobs["samples"] > SAMPLE_CAP:
        print(
            f"note: capping samples at {SAMPLE_CAP} (scenario asks for "
            f"{knobs['samples']}); pass --full for the complete budget",
            file=sys.stderr,
        )
        knobs["samples"] = SAMPLE_CAP
    return knobs


def _apply_warnings(spec: ScenarioSpec, knobs: dict, strict: bool) -> None:
    regime = spec.overflow_warning()
    if regime:
        if strict:
            raise ConfigError(regime)
        print(f"warning: {regime}", file=sys.stderr)
    hbar = knobs.get("hbar")
    samples = knobs.get("samples", 0)
    if (
        hbar is not None
        and samples <= 10_000
        and hbar < OSCILLATORY_FACTOR / math.sqrt(samples)
    ):
        print(
            f"warning: hbar = {hbar:g} is far below 1/sqrt(M) = "
            f"{1.0 / math.sqrt(samples):.3g}; at this sample budget the "
            "stencil gradient tends to oscillate",
            file=sys.stderr,
        )


def _select_backend(name):
    if name is not None:
        backends.get_backend(name)
    else:
        backends.get_backend()


def cmd_run(args) -> int:
    spec, manifest_run = _resolve_scenario(args.scenario)
    knobs = _effective_knobs(spec, args, manifest_run)
    _apply_warnings(spec, knobs, args.strict)
    _select_backend(args.backend or manifest_run.get("backend"))

    params = spec.model_params()
    payoff = spec.terminal_payoff()
    target = spec.target_profile()
    part = spec.partition(knobs["tau"])
    cfg = spec.estimator_config(
        samples=knobs["samples"], hbar=knobs["hbar"],
        quad_points=knobs["quad_points"], method=knobs["method"],
        threads=knobs["threads"],
    )
    run = run_algorithm(
        params, spec.initial_config(), payoff, target, part, cfg,
        SeedPolicy(knobs["seed"]),
    )
    outdir = args.out_dir or f"runs/{spec.name}-seed{knobs['seed']}"
    run_meta = {k: knobs[k] for k in ("tau", "samples", "hbar", "quad_points", "threads")}
    artifact = write_artifact(outdir, spec.to_dict(), run, run_meta)
    cost = realized_cost(run, params, target, payoff, cfg.quad_points)
    angles = orthogonality_angles(run.states, run.u_state)
    print(f"run {spec.name}: backend={run.backend} method={run.method} "
          f"samples={cfg.samples} seed={knobs['seed']}")
    print(f"  realized cost {cost.total:.6g} "
          f"(tracking {cost.tracking:.6g}, control {cost.control:.6g}, "
          f"terminal {cost.terminal:.6g})")
    print(f"  sphere deviation {sphere_deviation(run.states):.3e}, "
          f"max orthogonality angle {angles.max() if angles.size else 0.0:.3e}")
    print(f"  artifact: {artifact.outdir}")
    return 0


def cmd_validate(args) -> int:
    spec, _ = _resolve_scenario(args.scenario)
    knobs = _effective_knobs(spec, args, {})
    _apply_warnings(spec, knobs, args.strict)
    _select_backend(args.backend)
    result = validate_run(
        spec, knobs["method"], knobs["samples"], seed=knobs["seed"],
        tau=knobs["tau"], hbar=knobs["hbar"], quad_points=knobs["quad_points"],
        threads=knobs["threads"],
    )
    outdir = args.out_dir or f"runs/validate-{spec.name}-{knobs['method']}-seed{knobs['seed']}"
    run_meta = {k: knobs[k] for k in ("tau", "samples", "hbar", "quad_points", "threads")}
    write_artifact(outdir, spec.to_dict(), result.run, run_meta, err=result.err)
    print(
        f"validate {spec.name} method={knobs['method']} samples={knobs['samples']} "
        f"seed={knobs['seed']}: time-averaged err = {result.err_time_avg:.6g}, "
        f"final err = {result.err[-1]:.6g}"
    )
    print(f"  artifact: {Path(outdir)}")
    return 0


def cmd_estimate_w(args) -> int:
    spec, manifest_run = _resolve_scenario(args.scenario)
    knobs = _effective_knobs(spec, args, manifest_run)
    _apply_warnings(spec, knobs, args.strict)
    _select_backend(args.backend)
    params = spec.model_params()
    part = spec.partition(knobs["tau"])
    cfg = spec.estimator_config(
        samples=knobs["samples"], hbar=knobs["hbar"],
        quad_points=knobs["quad_points"], method=knobs["method"],
        threads=knobs["threads"],
    )
    est = estimate_w(
        params, spec.terminal_payoff(), spec.target_profile(), part,
        args.t, spec.initial_config(), cfg, SeedPolicy(knobs["seed"]),
        context=(NS_ESTIMATOR, 0, 0, 0, 0),
    )
    print(
        f"w({args.t:g}, m0) = {est.value:.6g} +/- {est.std_error:.3g} "
        f"(M = {est.samples_used}, flagged {est.flagged_fraction:.2%})"
    )
    print(f"W = -log(w)/beta = {value_function_W(est, params.beta):.6g}")
    return 0


def cmd_emit_config(args) -> int:
    text = emit_config(preset(args.preset))
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinctrl",
        description="Feedback control of interacting stochastic spins",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="closed-loop controlled run")
    p_run.add_argument("scenario", help="preset name, config .toml, or manifest.json")
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_val = sub.add_parser("validate", help="estimated vs exact feedback on a test problem")
    p_val.add_argument("scenario", help="test1 or test2")
    _add_common(p_val)
    p_val.set_defaults(func=cmd_validate)

    p_est = sub.add_parser("estimate-w", help="single-point value function estimate")
    p_est.add_argument("scenario", help="preset name or config .toml")
    p_est.add_argument("--t", type=float, default=0.0, help="grid time to estimate at")
    _add_common(p_est, with_method=False)
    p_est.set_defaults(func=cmd_estimate_w)

    p_cfg = sub.add_parser("emit-config", help="print the TOML config of a preset")
    p_cfg.add_argument("preset")
    p_cfg.add_argument("-o", "--out", default=None)
    p_cfg.set_defaults(func=cmd_emit_config)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
