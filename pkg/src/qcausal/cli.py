"""Command-line front end.

One subcommand per capability: bell (pair correlations or the three-angle
scan), doubleslit (interference with or without a which-path marker), wave
(the lattice automaton against its analytic oracles), pendulum (local
integration against closed forms), analyze (locality classification of a
model declaration file), lhv (exhaustive deterministic-strategy bound).

Every subcommand writes <name>.json and <name>.csv into the output
directory (--out, else $QCAUSAL_OUTPUT_DIR, else the working directory)
and prints a short text summary.  JSON is sorted and timestamp-free, so a
repeated invocation with the same seed is byte-identical.  Exit codes:
0 success, 1 configuration or usage error, 2 internal invariant failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, InvariantViolation
from .experiments import bell, doubleslit, pendulum
from .locality import classify_model, load_model_spec, ref_to_text
from .wave import (
    BOUNDARIES,
    compare_analytic,
    make_grid,
    gaussian_profile,
    run_wave,
    standing_wave_grid,
    traveling_pulse_grid,
    wave_energy,
    wave_step,
    write_snapshots_csv,
)

OUTPUT_DIR_ENV = "QCAUSAL_OUTPUT_DIR"


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; here 2 is reserved for
    invariant failures, so usage problems exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _angles_triple(raw: str) -> tuple[float, float, float]:
    parts = [p for p in raw.split(",") if p.strip()]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated angles, got {raw!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad angle in {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qcausal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", metavar="subcommand")
    sub.required = True

    def add_common(p):
        p.add_argument("--out", default=None, help=f"output directory (default ${OUTPUT_DIR_ENV} or .)")

    p = sub.add_parser("bell", parents=[], help="entangled-pair correlations")
    p.add_argument("--angle-a", type=float, default=None, help="wing A analyzer angle, degrees")
    p.add_argument("--angle-b", type=float, default=None, help="wing B analyzer angle, degrees")
    p.add_argument("--angles", type=_angles_triple, default=None, help="a,b,c for the three-pair scan")
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--runtime", choices=("centralized", "refined"), default="centralized")
    p.add_argument("--form", choices=bell.FORMS, default="identical")
    p.add_argument("--spindir", type=float, default=None, help="fix the emission direction (default: uniform)")
    p.add_argument("--scheduler", choices=("round-robin", "randomized"), default="round-robin")
    add_common(p)

    p = sub.add_parser("doubleslit", help="two-slit screen histogram")
    p.add_argument("--marker", choices=("on", "off"), required=True)
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--runtime", choices=("centralized", "refined"), default="centralized")
    p.add_argument("--geometry", choices=("default", "small"), default="default")
    p.add_argument("--scheduler", choices=("round-robin", "randomized"), default="round-robin")
    add_common(p)

    p = sub.add_parser("wave", help="lattice wave automaton")
    p.add_argument("--cells", type=int, default=200)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--courant", type=float, default=1.0, help="v dt/dx (dx = dt = 1)")
    p.add_argument("--init", choices=("gaussian", "sine"), default="gaussian")
    p.add_argument("--sigma", type=float, default=None, help="gaussian width (default cells/16)")
    p.add_argument("--mode", type=int, default=1, help="sine mode number")
    p.add_argument(
        "--velocity",
        choices=("traveling", "zero"),
        default="traveling",
        help="gaussian bootstrap: right-moving pulse or released from rest",
    )
    p.add_argument("--boundary", choices=BOUNDARIES, default="periodic")
    p.add_argument("--stride", type=int, default=1, help="snapshot every N steps")
    add_common(p)

    p = sub.add_parser("pendulum", help="coupled pendulums vs closed forms")
    p.add_argument("--mode", choices=pendulum.MODES, required=True)
    p.add_argument("--k", type=float, default=0.5, help="coupling spring constant")
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--omega", type=float, default=1.0, help="uncoupled frequency omega_0")
    p.add_argument("--steps", type=int, default=1024, help="integration steps per period")
    p.add_argument("--periods", type=float, default=10.0)
    p.add_argument("--amplitude", type=float, default=1.0)
    add_common(p)

    p = sub.add_parser("analyze", help="classify a model declaration file")
    p.add_argument("specpath", help="path to a .model file")
    add_common(p)

    p = sub.add_parser("lhv", help="deterministic local-strategy bound")
    p.add_argument("--angles", type=_angles_triple, required=True)
    p.add_argument("--form", choices=bell.FORMS, default="identical")
    add_common(p)

    return parser


def _output_dir(args) -> Path:
    out = args.out or os.environ.get(OUTPUT_DIR_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(outdir: Path, name: str, payload: dict) -> Path:
    path = outdir / f"{name}.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def _write_csv(outdir: Path, name: str, header: list, rows: list) -> Path:
    path = outdir / f"{name}.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


# -- subcommands --------------------------------------------------------------


def cmd_bell(args) -> int:
    outdir = _output_dir(args)
    spindir = "uniform" if args.spindir is None else args.spindir
    if args.angles is not None:
        scan = bell.bell_scan(
            args.angles, args.trials, args.seed, runtime=args.runtime, form=args.form,
            scheduler=args.scheduler,
        )
        payload = scan.to_json_dict()
        rows = []
        for name, res in scan.results.items():
            c = res.stats.counts()
            rows.append(
                [name, res.config.angle_a, res.config.angle_b,
                 c["pp"], c["pm"], c["mp"], c["mm"], repr(res.stats.correlation)]
            )
        jpath = _write_json(outdir, "bell-scan", payload)
        cpath = _write_csv(
            outdir, "bell-scan",
            ["pair", "angle_x", "angle_y", "n_pp", "n_pm", "n_mp", "n_mm", "correlation"],
            rows,
        )
        e = scan.correlations()
        print(f"bell scan at angles {args.angles}, {args.trials} trials, seed {args.seed}")
        print(f"  E(a,b) = {e['ab']:+.4f}  E(a,c) = {e['ac']:+.4f}  E(b,c) = {e['bc']:+.4f}")
        print(f"  margin = {scan.margin():+.4f} (classical minimum {scan.lhv.classical_min_margin:+.4f})")
    else:
        if args.angle_a is None or args.angle_b is None:
            raise ConfigError("bell needs --angle-a and --angle-b (or --angles for the scan)")
        cfg = bell.BellConfig(
            angle_a=args.angle_a,
            angle_b=args.angle_b,
            trials=args.trials,
            seed=args.seed,
            spindir_policy=spindir,
            runtime=args.runtime,
            scheduler=args.scheduler,
        )
        result = bell.run_bell_experiment(cfg)
        payload = result.to_json_dict()
        freq = result.stats.frequencies()
        counts = result.stats.counts()
        rows = [[k, counts[k], repr(freq[k])] for k in ("pp", "pm", "mp", "mm")]
        jpath = _write_json(outdir, "bell", payload)
        cpath = _write_csv(outdir, "bell", ["outcome", "count", "frequency"], rows)
        print(f"bell at ({args.angle_a}, {args.angle_b}) deg, {args.trials} trials, seed {args.seed}")
        print(f"  P(same) = {result.stats.p_same:.4f}")
        print(f"  E = {result.stats.correlation:+.4f} +- {result.stats.correlation_se:.4f}"
              f" (model {bell.model_correlation(args.angle_a, args.angle_b):+.4f})")
    print(f"  wrote {jpath} and {cpath}")
    return 0


def cmd_doubleslit(args) -> int:
    outdir = _output_dir(args)
    geometry = doubleslit.DEFAULT_GEOMETRY if args.geometry == "default" else doubleslit.SMALL_GEOMETRY
    hist = doubleslit.run_double_slit(
        marker=(args.marker == "on"),
        trials=args.trials,
        geometry=geometry,
        seed=args.seed,
        runtime=args.runtime,
        scheduler=args.scheduler,
    )
    payload = hist.to_json_dict()
    pdf = hist.oracle_pdf()
    freq = hist.frequencies()
    rows = [
        [x, int(hist.counts[x]), repr(float(freq[x])), repr(float(pdf[x]))]
        for x in range(geometry.n_cells)
    ]
    jpath = _write_json(outdir, "doubleslit", payload)
    cpath = _write_csv(outdir, "doubleslit", ["cell", "count", "frequency", "oracle_pdf"], rows)
    print(f"double slit, marker {args.marker}, {args.trials} trials, seed {args.seed}")
    print(f"  visibility = {hist.visibility():.4f}  (fringe period {geometry.fringe_period:.1f} cells)")
    print(f"  TV distance to analytic pattern = {hist.tv_distance(pdf):.4f}")
    print(f"  wrote {jpath} and {cpath}")
    return 0


def cmd_wave(args) -> int:
    outdir = _output_dir(args)
    if args.stride < 1:
        raise ConfigError(f"--stride must be >= 1, got {args.stride}")
    n = args.cells
    v = args.courant  # dx = dt = 1
    oracle = None
    if args.init == "sine":
        grid = standing_wave_grid(n, args.mode, v, 1.0, 1.0)
        k = 2.0 * math.pi * args.mode / n
        profile0 = grid.psi_now.copy()

        def oracle(t):
            return profile0 * math.cos(k * v * t)

    else:
        sigma = args.sigma if args.sigma is not None else n / 16.0
        if args.velocity == "traveling":
            grid = traveling_pulse_grid(n, sigma, v, 1.0, 1.0)
            if args.boundary != "periodic":
                raise ConfigError("traveling pulse oracle needs periodic boundary")
            profile0 = grid.psi_now.copy()
            if v == 1.0:
                def oracle(t):
                    return np.roll(profile0, int(round(t)))

        else:
            grid = make_grid(gaussian_profile(n, n / 2.0, sigma), v, 1.0, 1.0, boundary=args.boundary)

    energies = [wave_energy(grid)]
    traj = [(grid.t, grid.psi_now.copy())]
    for step in range(1, args.steps + 1):
        wave_step(grid)
        energies.append(wave_energy(grid))
        if step % args.stride == 0 or step == args.steps:
            traj.append((grid.t, grid.psi_now.copy()))
    e0 = energies[0]
    drift = max(abs(e - e0) for e in energies) / e0 if e0 > 0 else 0.0
    errors = compare_analytic(traj, oracle) if oracle is not None else None

    payload = {
        "schema_version": 1,
        "experiment": "wave",
        "params": {
            "cells": n,
            "steps": args.steps,
            "courant": v,
            "init": args.init,
            "boundary": args.boundary,
            "sigma": args.sigma,
            "mode": args.mode,
            "velocity": args.velocity,
            "stride": args.stride,
        },
        "energy_initial": e0,
        "energy_final": energies[-1],
        "energy_max_rel_drift": drift,
        "oracle_errors": errors,
    }
    jpath = _write_json(outdir, "wave", payload)
    cpath = outdir / "wave.csv"
    write_snapshots_csv(traj, cpath)
    print(f"wave: {n} cells, {args.steps} steps, Courant {v}, init {args.init}")
    print(f"  energy drift (max relative) = {drift:.3e}")
    if errors is not None:
        print(f"  max error vs analytic form = {errors['max_error']:.3e}")
    print(f"  wrote {jpath} and {cpath}")
    return 0


def cmd_pendulum(args) -> int:
    outdir = _output_dir(args)
    result = pendulum.run_pendulum(
        mode=args.mode,
        m=args.m,
        omega0=args.omega,
        k=args.k,
        amplitude=args.amplitude,
        periods=args.periods,
        steps_per_period=args.steps,
    )
    payload = result.to_json_dict()
    jpath = _write_json(outdir, "pendulum", payload)
    cpath = outdir / "pendulum.csv"
    result.write_csv(cpath)
    print(f"pendulum, {args.mode} mode, k = {args.k}, {args.periods} periods")
    print(f"  max deviation from normal-mode oracle = {result.deviation_from_normal_mode:.3e}")
    print(f"  max deviation from combined-frequency form = {result.deviation_from_closed_form:.3e}")
    if result.closed_form_discrepant:
        print("  note: the combined-frequency form disagrees with the normal-mode oracle in this mode")
    print(f"  wrote {jpath} and {cpath}")
    return 0


def cmd_analyze(args) -> int:
    outdir = _output_dir(args)
    spec = load_model_spec(args.specpath)
    report = classify_model(spec)
    payload = report.to_json_dict()
    rows = [
        [e.law_id, e.locality.label, "; ".join(f"{ref_to_text(r)} ({why})" for r, why in e.raisers)]
        for e in report.laws
    ]
    jpath = _write_json(outdir, "analyze", payload)
    cpath = _write_csv(outdir, "analyze", ["law", "class", "raised_by"], rows)
    print(report.to_text(), end="")
    print(f"  wrote {jpath} and {cpath}")
    return 0


def cmd_lhv(args) -> int:
    outdir = _output_dir(args)
    report = bell.lhv_oracle(args.angles, args.form)
    payload = report.to_json_dict()
    rows = [
        [
            "".join("+" if s > 0 else "-" for s in st.wing_a),
            "".join("+" if s > 0 else "-" for s in st.wing_b),
            st.correlations[0], st.correlations[1], st.correlations[2],
            repr(st.margin), st.form_consistent,
        ]
        for st in report.strategies
    ]
    jpath = _write_json(outdir, "lhv", payload)
    cpath = _write_csv(
        outdir, "lhv",
        ["wing_a", "wing_b", "E_ab", "E_ac", "E_bc", "margin", "form_consistent"],
        rows,
    )
    model = report.model_margins()
    print(f"lhv bound at angles {args.angles}, {args.form} form")
    print(f"  {report.n_strategies} deterministic strategies, {len(report.consistent)} form-consistent")
    print(f"  classical minimum margin = {report.classical_min_margin:+.4f}")
    print(f"  model margin = {model['margin']:+.4f} (negative violates the bound)")
    print(f"  wrote {jpath} and {cpath}")
    return 0


_COMMANDS = {
    "bell": cmd_bell,
    "doubleslit": cmd_doubleslit,
    "wave": cmd_wave,
    "pendulum": cmd_pendulum,
    "analyze": cmd_analyze,
    "lhv": cmd_lhv,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.subcommand](args)
    except SystemExit as exc:  # argparse usage errors (code 1) and --help (0)
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"qcausal: error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"qcausal: error: {exc}", file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"qcausal: invariant failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
