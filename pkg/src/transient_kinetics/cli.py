"""Command-line front door.

Subcommands: fit-dsc, arrhenius, predict, simulate, synth. Every command
writes a summary.json that echoes the fully resolved configuration and
the tool version, plus machine-readable CSV/JSONL outputs. Files are
written atomically (write-then-rename). Exit codes are stable: 0
success, 1 computation failure, 2 input error, 3 insufficient data,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    Calibration,
    default_calibration,
    load_calibration_file,
    resolve_preset_path,
)
from .dscfit import (
    fit_arrhenius,
    fit_rate_constant,
    read_trace_csv,
    synthesize_trace,
    write_trace_csv,
)
from .errors import (
    ConfigError,
    DomainError,
    TraceParseError,
    ZeroEnthalpyError,
    UntriggeredTraceError,
)
from .kinetics import (
    ArrheniusParams,
    ExposureSchedule,
    PhotolysisState,
    ScheduleSegment,
    arrhenius_rate,
    integrate_conversion,
)
from .mission import (
    MissionSpecs,
    load_mission,
    run,
    telemetry_to_csv,
    telemetry_to_jsonl,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_INSUFFICIENT = 3
EXIT_IO = 4

ALPHA_TARGETS = (0.5, 0.9, 0.95, 0.99)


class InsufficientDataError(Exception):
    pass


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="\n")
    os.replace(tmp, path)


def _write_summary(outdir: Path, command: str, cal: Calibration, results, extra=None) -> None:
    summary = {
        "tool": "transient-kinetics",
        "version": __version__,
        "command": command,
        "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": cal.to_dict(),
        "results": results,
    }
    if extra:
        summary.update(extra)
    _atomic_write(outdir / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")


def _load_effective_calibration(args) -> Calibration:
    cal = default_calibration()
    for path in args.config or []:
        cal = load_calibration_file(resolve_preset_path(path), cal)
    return cal


def _outdir(args) -> Path:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def cmd_fit_dsc(args) -> int:
    cal = _load_effective_calibration(args)
    outdir = _outdir(args)
    rows = []
    any_failed = False
    for path in args.traces:
        try:
            trace = read_trace_csv(path)
        except OSError as exc:
            raise ConfigError(f"cannot read trace {path}: {exc}") from None
        label = trace.label or Path(path).stem
        row = {
            "label": label,
            "temperature_K": trace.temperature_k,
            "k_per_s": None,
            "total_enthalpy_J": None,
            "residual_rms_W": None,
            "iterations": 0,
            "converged": False,
            "error": "",
        }
        try:
            result = fit_rate_constant(trace)
        except (ZeroEnthalpyError, UntriggeredTraceError) as exc:
            row["error"] = str(exc)
            any_failed = True
        else:
            row.update(
                k_per_s=result.k,
                total_enthalpy_J=result.total_enthalpy,
                residual_rms_W=result.residual_rms,
                iterations=result.iterations,
                converged=result.converged,
            )
            if not result.converged:
                any_failed = True
        rows.append(row)

    lines = ["label,temperature_K,k_per_s,total_enthalpy_J,residual_rms_W,iterations,converged,error"]
    for row in rows:
        lines.append(
            ",".join(
                (
                    row["label"],
                    repr(row["temperature_K"]),
                    "" if row["k_per_s"] is None else repr(row["k_per_s"]),
                    "" if row["total_enthalpy_J"] is None else repr(row["total_enthalpy_J"]),
                    "" if row["residual_rms_W"] is None else repr(row["residual_rms_W"]),
                    str(row["iterations"]),
                    "true" if row["converged"] else "false",
                    row["error"].replace(",", ";"),
                )
            )
        )
    _atomic_write(outdir / "fits.csv", "\n".join(lines) + "\n")
    _write_summary(outdir, "fit-dsc", cal, {"fits": rows})
    return EXIT_FAILED if any_failed else EXIT_OK


def cmd_arrhenius(args) -> int:
    cal = _load_effective_calibration(args)
    outdir = _outdir(args)
    points = []
    path = Path(args.fit_table)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read fit table {path}: {exc}") from None
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ConfigError(f"{path}: empty fit table")
    header = lines[0].split(",")
    try:
        i_temp = header.index("temperature_K")
        i_k = header.index("k_per_s")
        i_conv = header.index("converged")
    except ValueError:
        raise ConfigError(f"{path}: fit table must carry temperature_K,k_per_s,converged columns") from None
    for n, ln in enumerate(lines[1:], start=2):
        cells = ln.split(",")
        if len(cells) <= max(i_temp, i_k, i_conv):
            raise ConfigError(f"{path}:{n}: too few columns")
        if cells[i_conv].strip().lower() != "true" or not cells[i_k].strip():
            continue
        try:
            points.append((float(cells[i_temp]), float(cells[i_k])))
        except ValueError:
            raise ConfigError(f"{path}:{n}: non-numeric fit-table row") from None
    temps = {p[0] for p in points}
    if len(points) < 2 or len(temps) < 2:
        raise InsufficientDataError(
            f"need >= 2 converged rows at distinct temperatures, found {len(points)}"
        )

    fit = fit_arrhenius(points)
    plot_lines = ["inv_temperature_per_K,ln_k"]
    for temp, k in fit.points:
        plot_lines.append(f"{1.0 / temp!r},{math.log(k)!r}")
    _atomic_write(outdir / "arrhenius_points.csv", "\n".join(plot_lines) + "\n")
    results = {
        "pre_exponential_per_s": fit.params.pre_exponential,
        "activation_energy_j_per_mol": fit.params.activation_energy,
        "activation_energy_kj_per_mol": fit.params.activation_energy / 1000.0,
        "r_squared": fit.r_squared,
        "n_points": len(fit.points),
    }
    _write_summary(outdir, "arrhenius", cal, results)
    return EXIT_OK


def _read_schedule_csv(path: Path) -> ExposureSchedule:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read schedule {path}: {exc}") from None
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ConfigError(f"{path}: empty schedule")
    header = [h.strip() for h in lines[0].split(",")]
    if header[:1] != ["duration_s"] or len(header) != 3 or header[2] != "uv_on":
        raise ConfigError(f"{path}: schedule header must be duration_s,temperature_C|temperature_K,uv_on")
    celsius = header[1] == "temperature_C"
    if not celsius and header[1] != "temperature_K":
        raise ConfigError(f"{path}: temperature column must be temperature_C or temperature_K")
    segments = []
    for n, ln in enumerate(lines[1:], start=2):
        cells = [c.strip() for c in ln.split(",")]
        if len(cells) != 3:
            raise ConfigError(f"{path}:{n}: expected 3 columns")
        try:
            duration = float(cells[0])
            temperature = float(cells[1]) + (273.15 if celsius else 0.0)
        except ValueError:
            raise ConfigError(f"{path}:{n}: non-numeric schedule row") from None
        uv = cells[2].lower() in ("true", "1", "yes", "on")
        if cells[2].lower() not in ("true", "1", "yes", "on", "false", "0", "no", "off"):
            raise ConfigError(f"{path}:{n}: bad uv_on value {cells[2]!r}")
        try:
            segments.append(ScheduleSegment(duration, temperature, uv))
        except DomainError as exc:
            raise ConfigError(f"{path}:{n}: {exc}") from None
    try:
        return ExposureSchedule(tuple(segments))
    except DomainError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _times_to_targets(t: np.ndarray, alpha: np.ndarray) -> dict[str, float | None]:
    out: dict[str, float | None] = {}
    for target in ALPHA_TARGETS:
        key = f"{target:g}"
        idx = np.nonzero(alpha >= target)[0]
        if idx.size == 0:
            out[key] = None
            continue
        i = int(idx[0])
        if i == 0 or alpha[i] == target:
            out[key] = float(t[i])
        else:
            frac = (target - alpha[i - 1]) / (alpha[i] - alpha[i - 1])
            out[key] = float(t[i - 1] + frac * (t[i] - t[i - 1]))
    return out


def cmd_predict(args) -> int:
    cal = _load_effective_calibration(args)
    outdir = _outdir(args)
    params = cal.kinetics
    if args.pre_exponential is not None or args.activation_energy_kj is not None:
        params = ArrheniusParams.from_kj_per_mol(
            args.pre_exponential if args.pre_exponential is not None else cal.kinetics.pre_exponential,
            args.activation_energy_kj
            if args.activation_energy_kj is not None
            else cal.kinetics.activation_energy / 1000.0,
        )
    schedule = _read_schedule_csv(resolve_preset_path(args.schedule))
    if args.assume_triggered:
        photolysis = PhotolysisState.saturated(cal.dpi_initial, cal.photolysis_rate)
    else:
        photolysis = PhotolysisState(dpi_initial=cal.dpi_initial, k_photo=cal.photolysis_rate)
    dt = args.dt if args.dt is not None else cal.simulation.dt_s
    dt = min(dt, schedule.min_duration)
    series = integrate_conversion(
        schedule, params, photolysis, dt, hf_sat=cal.hf_saturation
    )
    lines = ["t_s,alpha,hf_fraction"]
    for t, alpha, hf in zip(series.t, series.alpha, series.hf_fraction):
        lines.append(f"{float(t)!r},{float(alpha)!r},{float(hf)!r}")
    _atomic_write(outdir / "conversion_profile.csv", "\n".join(lines) + "\n")
    results = {
        "final_alpha": float(series.alpha[-1]),
        "time_to_alpha_s": _times_to_targets(series.t, series.alpha),
        "pre_exponential_per_s": params.pre_exponential,
        "activation_energy_j_per_mol": params.activation_energy,
        "assume_triggered": bool(args.assume_triggered),
        "dt_s": dt,
    }
    _write_summary(outdir, "predict", cal, results)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cal = _load_effective_calibration(args)
    outdir = _outdir(args)
    mission_path = resolve_preset_path(args.mission)
    world, script, start = load_mission(mission_path, cal.simulation)
    specs = MissionSpecs.from_calibration(cal, alarm_rules=script.alarm_rules)
    dt = args.dt if args.dt is not None else cal.simulation.dt_s
    records = run(world, script, specs.initial_robot(start), specs, dt=dt, seed=args.seed)
    _atomic_write(outdir / "telemetry.jsonl", telemetry_to_jsonl(records))
    _atomic_write(outdir / "telemetry.csv", telemetry_to_csv(records))
    final = records[-1]
    terminal_tags = ("decomposed", "stranded", "timeout")
    terminal = [e.tag for r in records for e in r.events if e.tag in terminal_tags]
    results = {
        "mission": str(mission_path),
        "steps": len(records),
        "simulated_time_s": len(records) * dt,
        "final_alpha": final.alpha,
        "final_position_m": final.position,
        "terminal_events": terminal or ["script-complete"],
        "events": [
            {"t": r.t, "tag": e.tag, "message": e.message} for r in records for e in r.events
        ],
    }
    _write_summary(outdir, "simulate", cal, results, extra={"seed": args.seed, "dt_s": dt})
    return EXIT_OK


def cmd_synth(args) -> int:
    cal = _load_effective_calibration(args)
    outdir = _outdir(args)
    jobs = []
    if args.temperature_c:
        for t_c in args.temperature_c:
            temp_k = t_c + 273.15
            k = args.k if args.k is not None else arrhenius_rate(cal.kinetics, temp_k)
            jobs.append((k, temp_k, f"synth-{t_c:g}C"))
    else:
        if args.k is None:
            raise ConfigError("give --k or at least one --temperature-c")
        jobs.append((args.k, 298.15, "synth"))

    written = []
    for index, (k, temp_k, label) in enumerate(jobs):
        t_end = args.t_end if args.t_end is not None else 20.0 / k
        dt = args.dt_sample if args.dt_sample is not None else t_end / 1500.0
        trace = synthesize_trace(
            k,
            args.enthalpy,
            (dt, t_end),
            noise_fraction=args.noise,
            seed=args.seed + index,
            temperature_k=temp_k,
            uv_on=True,
            label=label,
        )
        path = outdir / f"trace_{label}.csv"
        write_trace_csv(trace, path)
        written.append(
            {
                "file": path.name,
                "k_per_s": k,
                "temperature_K": temp_k,
                "total_enthalpy_J": args.enthalpy,
                "noise_fraction": args.noise,
                "samples": int(trace.time_s.size),
            }
        )
    _write_summary(outdir, "synth", cal, {"traces": written}, extra={"seed": args.seed})
    return EXIT_OK


def _seed_u64(value: str) -> int:
    try:
        seed = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {value!r}") from None
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return seed


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        action="append",
        metavar="PATH",
        help="calibration overlay file (repeatable; later files win)",
    )
    common.add_argument("--seed", type=_seed_u64, default=0, help="seed for anything stochastic")
    common.add_argument("--out", default="out", metavar="DIR", help="output directory")
    common.add_argument("--dt", type=float, default=None, metavar="S", help="integration step (s)")

    parser = argparse.ArgumentParser(
        prog="transient-kinetics",
        description="Kinetics toolkit and lifecycle simulator for UV-degradable silicone composites",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-dsc", parents=[common], help="fit rate constants to DSC trace CSVs")
    p.add_argument("traces", nargs="+", help="trace CSV files")
    p.set_defaults(func=cmd_fit_dsc)

    p = sub.add_parser("arrhenius", parents=[common], help="regress Arrhenius parameters from a fit table")
    p.add_argument("fit_table", help="fits.csv produced by fit-dsc")
    p.set_defaults(func=cmd_arrhenius)

    p = sub.add_parser("predict", parents=[common], help="predict conversion under a schedule")
    p.add_argument("schedule", help="schedule CSV (duration_s,temperature_C|temperature_K,uv_on)")
    p.add_argument("--pre-exponential", type=float, default=None, metavar="A", help="1/s")
    p.add_argument(
        "--activation-energy-kj",
        dest="activation_energy_kj",
        type=float,
        default=None,
        metavar="EA",
        help="kJ/mol",
    )
    p.add_argument(
        "--assume-triggered",
        action="store_true",
        help="treat the sample as fully photolyzed from the start",
    )
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", parents=[common], help="run a mission file")
    p.add_argument("mission", help="mission file (path or preset name)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("synth", parents=[common], help="generate synthetic DSC trace CSVs")
    p.add_argument("--k", type=float, default=None, help="rate constant (1/s)")
    p.add_argument("--enthalpy", type=float, default=10.0, help="total enthalpy (J)")
    p.add_argument(
        "--temperature-c",
        type=float,
        action="append",
        metavar="T",
        help="hold temperature in C; repeatable, k derived from calibration when --k absent",
    )
    p.add_argument("--t-end", dest="t_end", type=float, default=None, help="record length (s)")
    p.add_argument("--dt-sample", dest="dt_sample", type=float, default=None, help="sample spacing (s)")
    p.add_argument("--noise", type=float, default=0.0, help="noise fraction of peak")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InsufficientDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except (TraceParseError, ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
