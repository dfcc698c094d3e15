"""Structured key-value configuration: calibration files and presets.

The file format is line-based: ``[section]`` headers, ``key = value``
entries, ``#`` comments, blank lines ignored. Repeated keys are
preserved in order (the mission script relies on this); scalar lookups
take the last occurrence. The packaged ``presets/`` directory provides
the default calibration and the bundled mission; the directory can be
overridden with the TRANSIENT_KINETICS_PRESETS environment variable.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .errors import ConfigError, DomainError
from .kinetics import DEFAULT_HF_SAT, DEFAULT_K_PHOTO, ArrheniusParams
from .mechanics import (
    DEFAULT_ACTUATOR,
    MATERIAL_PRESETS,
    ActuatorSpec,
    MaterialSpec,
    validate_actuator_wall,
)
from .sensors import (
    PhotodiodeSpec,
    SensorHealth,
    StrainSensorSpec,
    TempSensorSpec,
)

PRESETS_ENV_VAR = "TRANSIENT_KINETICS_PRESETS"
DEFAULT_CALIBRATION_NAME = "default.cfg"

Section = list[tuple[str, str]]


def parse_sections(text: str, source: str = "<config>") -> list[tuple[str, Section]]:
    """Parse structured text into ordered (section, [(key, value), ...])."""
    sections: list[tuple[str, Section]] = []
    current: Section | None = None
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise ConfigError(f"{source}:{line_number}: malformed section header {line!r}")
            current = []
            sections.append((line[1:-1].strip(), current))
            continue
        if current is None:
            raise ConfigError(f"{source}:{line_number}: entry outside any section")
        if "=" in line:
            key, _, value = line.partition("=")
            current.append((key.strip(), value.strip()))
        else:
            # bare keyword entry (argument-less script command)
            current.append((line, ""))
    return sections


def as_float(value: str, context: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{context}: expected a number, got {value!r}") from None


def as_bool(value: str, context: str) -> bool:
    word = value.strip().lower()
    if word in ("true", "1", "yes", "on"):
        return True
    if word in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"{context}: expected a boolean, got {value!r}")


def _section_dict(entries: Section, context: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for key, value in entries:
        out[key] = value
    return out


def _parse_table(value: str, context: str) -> tuple[tuple[float, float], ...]:
    """Parse 'x1:y1, x2:y2, ...' into a monotone anchor table."""
    pairs = []
    for chunk in value.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" not in chunk:
            raise ConfigError(f"{context}: table entries need 'x:y', got {chunk!r}")
        xs, ys = chunk.split(":", 1)
        pairs.append((as_float(xs, context), as_float(ys, context)))
    if len(pairs) < 2:
        raise ConfigError(f"{context}: table needs at least 2 anchor pairs")
    xs = [p[0] for p in pairs]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ConfigError(f"{context}: table x values must be strictly increasing")
    return tuple(pairs)


@dataclass(frozen=True)
class SimulationSettings:
    """Run-level knobs for the mission simulator."""

    dt_s: float = 1.0
    mobility_loss_alpha: float = 0.2
    decomposed_alpha: float = 0.99
    body_thermal_lag_s: float = 0.0
    dose_alarm_fraction: float = 0.5
    alarm_temperature_c: float = 100.0
    uv_current_threshold_a: float = 1e-9
    monitor_bias_v: float = -2.0
    timeout_s: float = 200000.0


@dataclass(frozen=True)
class Calibration:
    """Full effective configuration for every subsystem."""

    kinetics: ArrheniusParams = field(
        default_factory=lambda: ArrheniusParams.from_kj_per_mol(0.1703, 18.09)
    )
    photolysis_rate: float = DEFAULT_K_PHOTO
    hf_saturation: float = DEFAULT_HF_SAT
    dpi_initial: float = 100.0
    materials: dict[str, MaterialSpec] = field(
        default_factory=lambda: dict(MATERIAL_PRESETS)
    )
    actuator: ActuatorSpec = DEFAULT_ACTUATOR
    temp_sensor: TempSensorSpec = TempSensorSpec()
    strain_sensor: StrainSensorSpec = StrainSensorSpec()
    photodiode: PhotodiodeSpec = PhotodiodeSpec()
    health: SensorHealth = SensorHealth()
    simulation: SimulationSettings = SimulationSettings()

    def to_dict(self) -> dict:
        """Echo of the effective configuration, for output summaries."""
        return {
            "kinetics": {
                "pre_exponential_per_s": self.kinetics.pre_exponential,
                "activation_energy_j_per_mol": self.kinetics.activation_energy,
            },
            "photolysis": {
                "rate_per_s": self.photolysis_rate,
                "hf_saturation": self.hf_saturation,
                "dpi_initial_mol_m3": self.dpi_initial,
            },
            "materials": {
                name: {
                    "modulus_pa": m.modulus,
                    "elastic_limit_strain": m.elastic_limit_strain,
                    "fracture_strain": m.fracture_strain,
                    "fracture_stress_pa": m.fracture_stress,
                    "poisson": m.poisson,
                    "density_kg_m3": m.density,
                    "dpi_wt_percent": m.dpi_wt_percent,
                }
                for name, m in sorted(self.materials.items())
            },
            "actuator": {
                "angle_per_pressure_deg_per_kpa": self.actuator.angle_per_pressure,
                "max_pressure_kpa": self.actuator.max_pressure,
                "strain_per_pressure_per_kpa": self.actuator.strain_per_pressure,
                "stride_per_cycle_m": self.actuator.stride_per_cycle,
                "cycle_period_s": self.actuator.cycle_period,
            },
            "sensor_temp": {
                "r0_ohm": self.temp_sensor.r0,
                "tcr_ohm_per_c": self.temp_sensor.slope,
                "t_ref_c": self.temp_sensor.t_ref,
                "fail_resistance_ohm": self.temp_sensor.fail_resistance,
            },
            "sensor_strain": {
                "c0_pf": self.strain_sensor.c0,
                "swing_pf": self.strain_sensor.swing,
                "angle_full_deg": self.strain_sensor.angle_full,
            },
            "sensor_photo": {
                "reverse_current_a": self.photodiode.photo_current_reverse,
                "forward_current_a": self.photodiode.photo_current_forward,
                "dark_current_a": self.photodiode.dark_current,
            },
            "sensor_health": {
                "alpha_degrade": self.health.alpha_degrade,
                "alpha_fail": self.health.alpha_fail,
            },
            "simulation": {
                "dt_s": self.simulation.dt_s,
                "mobility_loss_alpha": self.simulation.mobility_loss_alpha,
                "decomposed_alpha": self.simulation.decomposed_alpha,
                "body_thermal_lag_s": self.simulation.body_thermal_lag_s,
                "dose_alarm_fraction": self.simulation.dose_alarm_fraction,
                "alarm_temperature_c": self.simulation.alarm_temperature_c,
                "uv_current_threshold_a": self.simulation.uv_current_threshold_a,
                "monitor_bias_v": self.simulation.monitor_bias_v,
                "timeout_s": self.simulation.timeout_s,
            },
        }


_KINETICS_KEYS = {"pre_exponential_per_s", "activation_energy_kj_per_mol"}
_PHOTOLYSIS_KEYS = {"rate_per_s", "hf_saturation", "dpi_initial_mol_m3"}
_MATERIAL_KEYS = {
    "modulus_pa",
    "elastic_limit_strain",
    "fracture_strain",
    "fracture_stress_pa",
    "poisson",
    "density_kg_m3",
    "dpi_wt_percent",
}
_ACTUATOR_KEYS = {
    "angle_at_max_deg",
    "strain_at_max",
    "max_pressure_kpa",
    "stride_per_cycle_m",
    "cycle_period_s",
    "angle_table",
    "wall_material",
}
_TEMP_KEYS = {"r0_ohm", "tcr_ohm_per_c", "t_ref_c", "fail_resistance_ohm"}
_STRAIN_KEYS = {"c0_pf", "swing_pf", "angle_full_deg", "capacitance_table"}
_PHOTO_KEYS = {"reverse_current_a", "forward_current_a", "dark_current_a"}
_HEALTH_KEYS = {"alpha_degrade", "alpha_fail"}
_SIMULATION_KEYS = {
    "dt_s",
    "mobility_loss_alpha",
    "decomposed_alpha",
    "body_thermal_lag_s",
    "dose_alarm_fraction",
    "alarm_temperature_c",
    "uv_current_threshold_a",
    "monitor_bias_v",
    "timeout_s",
}


def _check_keys(entries: dict[str, str], allowed: set[str], context: str) -> None:
    unknown = set(entries) - allowed
    if unknown:
        raise ConfigError(f"{context}: unknown keys {sorted(unknown)}")


def apply_sections(base: Calibration, sections, source: str) -> Calibration:
    """Overlay parsed config sections onto an existing calibration.

    Invalid physical values surface as ConfigError carrying the source.
    """
    try:
        return _apply_sections(base, sections, source)
    except ConfigError:
        raise
    except DomainError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def _apply_sections(base: Calibration, sections, source: str) -> Calibration:
    cal = base
    pending_wall: str | None = None
    for name, entries in sections:
        ctx = f"{source} [{name}]"
        data = _section_dict(entries, ctx)
        if name == "kinetics":
            _check_keys(data, _KINETICS_KEYS, ctx)
            pre = data.get("pre_exponential_per_s")
            ea = data.get("activation_energy_kj_per_mol")
            cal = replace(
                cal,
                kinetics=ArrheniusParams.from_kj_per_mol(
                    as_float(pre, ctx) if pre is not None else cal.kinetics.pre_exponential,
                    as_float(ea, ctx)
                    if ea is not None
                    else cal.kinetics.activation_energy / 1000.0,
                ),
            )
        elif name == "photolysis":
            _check_keys(data, _PHOTOLYSIS_KEYS, ctx)
            cal = replace(
                cal,
                photolysis_rate=as_float(data["rate_per_s"], ctx)
                if "rate_per_s" in data
                else cal.photolysis_rate,
                hf_saturation=as_float(data["hf_saturation"], ctx)
                if "hf_saturation" in data
                else cal.hf_saturation,
                dpi_initial=as_float(data["dpi_initial_mol_m3"], ctx)
                if "dpi_initial_mol_m3" in data
                else cal.dpi_initial,
            )
        elif name.startswith("material."):
            mat_name = name[len("material.") :]
            _check_keys(data, _MATERIAL_KEYS, ctx)
            try:
                spec = MaterialSpec(
                    name=mat_name,
                    modulus=as_float(data["modulus_pa"], ctx),
                    elastic_limit_strain=as_float(data["elastic_limit_strain"], ctx),
                    fracture_strain=as_float(data["fracture_strain"], ctx),
                    fracture_stress=as_float(data["fracture_stress_pa"], ctx),
                    poisson=as_float(data["poisson"], ctx),
                    density=as_float(data["density_kg_m3"], ctx),
                    dpi_wt_percent=as_float(data["dpi_wt_percent"], ctx),
                )
            except KeyError as exc:
                raise ConfigError(f"{ctx}: missing key {exc.args[0]!r}") from None
            materials = dict(cal.materials)
            materials[mat_name] = spec
            cal = replace(cal, materials=materials)
        elif name == "actuator":
            _check_keys(data, _ACTUATOR_KEYS, ctx)
            max_p = (
                as_float(data["max_pressure_kpa"], ctx)
                if "max_pressure_kpa" in data
                else cal.actuator.max_pressure
            )
            angle_slope = (
                as_float(data["angle_at_max_deg"], ctx) / max_p
                if "angle_at_max_deg" in data
                else cal.actuator.angle_per_pressure
            )
            strain_slope = (
                as_float(data["strain_at_max"], ctx) / max_p
                if "strain_at_max" in data
                else cal.actuator.strain_per_pressure
            )
            table = (
                _parse_table(data["angle_table"], ctx)
                if "angle_table" in data
                else cal.actuator.angle_table
            )
            actuator = ActuatorSpec(
                angle_per_pressure=angle_slope,
                max_pressure=max_p,
                strain_per_pressure=strain_slope,
                stride_per_cycle=as_float(data["stride_per_cycle_m"], ctx)
                if "stride_per_cycle_m" in data
                else cal.actuator.stride_per_cycle,
                cycle_period=as_float(data["cycle_period_s"], ctx)
                if "cycle_period_s" in data
                else cal.actuator.cycle_period,
                angle_table=table,
            )
            cal = replace(cal, actuator=actuator)
            pending_wall = data.get("wall_material", pending_wall)
        elif name == "sensor.temp":
            _check_keys(data, _TEMP_KEYS, ctx)
            cal = replace(
                cal,
                temp_sensor=TempSensorSpec(
                    r0=as_float(data["r0_ohm"], ctx)
                    if "r0_ohm" in data
                    else cal.temp_sensor.r0,
                    slope=as_float(data["tcr_ohm_per_c"], ctx)
                    if "tcr_ohm_per_c" in data
                    else cal.temp_sensor.slope,
                    t_ref=as_float(data["t_ref_c"], ctx)
                    if "t_ref_c" in data
                    else cal.temp_sensor.t_ref,
                    fail_resistance=as_float(data["fail_resistance_ohm"], ctx)
                    if "fail_resistance_ohm" in data
                    else cal.temp_sensor.fail_resistance,
                ),
            )
        elif name == "sensor.strain":
            _check_keys(data, _STRAIN_KEYS, ctx)
            cal = replace(
                cal,
                strain_sensor=StrainSensorSpec(
                    c0=as_float(data["c0_pf"], ctx)
                    if "c0_pf" in data
                    else cal.strain_sensor.c0,
                    swing=as_float(data["swing_pf"], ctx)
                    if "swing_pf" in data
                    else cal.strain_sensor.swing,
                    angle_full=as_float(data["angle_full_deg"], ctx)
                    if "angle_full_deg" in data
                    else cal.strain_sensor.angle_full,
                    capacitance_table=_parse_table(data["capacitance_table"], ctx)
                    if "capacitance_table" in data
                    else cal.strain_sensor.capacitance_table,
                ),
            )
        elif name == "sensor.photo":
            _check_keys(data, _PHOTO_KEYS, ctx)
            cal = replace(
                cal,
                photodiode=PhotodiodeSpec(
                    photo_current_reverse=as_float(data["reverse_current_a"], ctx)
                    if "reverse_current_a" in data
                    else cal.photodiode.photo_current_reverse,
                    photo_current_forward=as_float(data["forward_current_a"], ctx)
                    if "forward_current_a" in data
                    else cal.photodiode.photo_current_forward,
                    dark_current=as_float(data["dark_current_a"], ctx)
                    if "dark_current_a" in data
                    else cal.photodiode.dark_current,
                ),
            )
        elif name == "sensor.health":
            _check_keys(data, _HEALTH_KEYS, ctx)
            cal = replace(
                cal,
                health=SensorHealth(
                    alpha_degrade=as_float(data["alpha_degrade"], ctx)
                    if "alpha_degrade" in data
                    else cal.health.alpha_degrade,
                    alpha_fail=as_float(data["alpha_fail"], ctx)
                    if "alpha_fail" in data
                    else cal.health.alpha_fail,
                ),
            )
        elif name == "simulation":
            _check_keys(data, _SIMULATION_KEYS, ctx)
            sim = cal.simulation
            updates = {}
            mapping = {
                "dt_s": "dt_s",
                "mobility_loss_alpha": "mobility_loss_alpha",
                "decomposed_alpha": "decomposed_alpha",
                "body_thermal_lag_s": "body_thermal_lag_s",
                "dose_alarm_fraction": "dose_alarm_fraction",
                "alarm_temperature_c": "alarm_temperature_c",
                "uv_current_threshold_a": "uv_current_threshold_a",
                "monitor_bias_v": "monitor_bias_v",
                "timeout_s": "timeout_s",
            }
            for key, attr in mapping.items():
                if key in data:
                    updates[attr] = as_float(data[key], ctx)
            cal = replace(cal, simulation=replace(sim, **updates))
        else:
            raise ConfigError(f"{source}: unknown section [{name}]")

    if pending_wall is not None:
        if pending_wall not in cal.materials:
            raise ConfigError(
                f"{source}: actuator wall_material {pending_wall!r} is not a known material"
            )
        validate_actuator_wall(cal.actuator, cal.materials[pending_wall])
    return cal


def load_calibration_file(path: str | Path, base: Calibration | None = None) -> Calibration:
    base = base if base is not None else Calibration()
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return apply_sections(base, parse_sections(text, str(path)), str(path))


def presets_dir() -> Path:
    """Directory holding preset files; honors the env var override."""
    override = os.environ.get(PRESETS_ENV_VAR)
    if override:
        return Path(override)
    return Path(str(resources.files("transient_kinetics") / "presets"))


def resolve_preset_path(name: str) -> Path:
    """Resolve a path against the cwd first, then the presets directory."""
    direct = Path(name)
    if direct.exists():
        return direct
    candidate = presets_dir() / name
    if candidate.exists():
        return candidate
    raise ConfigError(f"no such file or preset: {name}")


def default_calibration() -> Calibration:
    """Built-in defaults overlaid with the packaged default preset."""
    cal = Calibration()
    preset = presets_dir() / DEFAULT_CALIBRATION_NAME
    if preset.exists():
        cal = load_calibration_file(preset, cal)
    return cal
