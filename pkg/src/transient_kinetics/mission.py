"""Deterministic discrete-time lifecycle simulator over a zoned world.

A robot walks a one-dimensional world of temperature/UV zones under a
scripted command sequence. Each fixed step advances the photolysis dose
and phase conversion with exact exponential updates at the local zone
conditions, moves the gait, reads the three sensors through the
degradation overlay, evaluates alarm rules, and emits a telemetry
record. Runs are bit-reproducible for a given (inputs, seed) pair.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .config import Calibration, SimulationSettings, as_bool, as_float, parse_sections
from .errors import ConfigError, SensorFailedError, SimulationFault
from .kinetics import (
    ArrheniusParams,
    arrhenius_rate,
    trigger_coupling,
)
from .mechanics import ActuatorSpec, GaitState, gait_advance
from .sensors import (
    PhotodiodeSpec,
    SensorHealth,
    StrainSensorSpec,
    TempSensorSpec,
    apply_degradation,
    photodiode_current,
    read_temperature,
    strain_capacitance,
    temp_resistance,
)

TELEMETRY_CSV_HEADER = "t,position,alpha,temp_C,capacitance_pF,photocurrent_A"

# fields alarm rules may reference
RULE_FIELDS = (
    "t",
    "position",
    "alpha",
    "hf_fraction",
    "temp_resistance_ohm",
    "temp_c",
    "capacitance_pf",
    "photocurrent_a",
)

_POSITION_EPS = 1e-9


@dataclass(frozen=True)
class Zone:
    """One environment span: [x_min, x_max] m, hold temperature, UV lamp."""

    x_min: float
    x_max: float
    temperature: float  # K
    uv_on: bool
    name: str

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ConfigError(f"zone {self.name!r}: need x_min < x_max")
        if self.temperature <= 0:
            raise ConfigError(f"zone {self.name!r}: temperature must be > 0 K")


@dataclass(frozen=True)
class Command:
    """One script step: move_to(x), dwell(s), await_uv_dose(frac), self_destruct."""

    kind: str
    value: float | None = None


@dataclass(frozen=True)
class Condition:
    field: str
    op: str
    value: float
    use_abs: bool = False

    def holds(self, record: "TelemetryRecord") -> bool:
        reading = getattr(record, self.field)
        if reading is None:
            return False
        if self.use_abs:
            reading = abs(reading)
        if self.op == ">":
            return reading > self.value
        if self.op == ">=":
            return reading >= self.value
        if self.op == "<":
            return reading < self.value
        if self.op == "<=":
            return reading <= self.value
        raise ConfigError(f"unknown operator {self.op!r}")


@dataclass(frozen=True)
class AlarmRule:
    """Fires its message when every condition holds on a telemetry record."""

    message: str
    conditions: tuple[Condition, ...]
    tag: str = "alarm"


@dataclass(frozen=True)
class MissionScript:
    commands: tuple[Command, ...]
    alarm_rules: tuple[AlarmRule, ...]

    def __post_init__(self):
        if not self.commands:
            raise ConfigError("mission script must contain at least one command")


@dataclass(frozen=True)
class Event:
    tag: str
    message: str


@dataclass(frozen=True)
class SensorHealthSet:
    strain: SensorHealth
    temp: SensorHealth
    photo: SensorHealth


@dataclass(frozen=True)
class RobotState:
    """Full simulated state; advanced immutably one step at a time."""

    position: float
    alpha: float = 0.0
    hf_fraction: float = 0.0
    gait: GaitState = field(default_factory=GaitState)
    sensor_health: SensorHealthSet = field(
        default_factory=lambda: SensorHealthSet(
            strain=SensorHealth(), temp=SensorHealth(), photo=SensorHealth()
        )
    )
    operational: bool = True
    clock: float = 0.0
    body_temperature_c: float | None = None
    active_alarms: tuple[str, ...] = ()


@dataclass(frozen=True)
class TelemetryRecord:
    """One record per simulation step."""

    t: float
    position: float
    alpha: float
    hf_fraction: float
    zone: str
    temp_resistance_ohm: float
    temp_c: float | None
    capacitance_pf: float | None
    photocurrent_a: float
    events: tuple[Event, ...]


@dataclass(frozen=True)
class MissionSpecs:
    """Everything the stepper needs besides the world and the robot."""

    kinetics: ArrheniusParams
    photolysis_rate: float
    hf_sat: float
    actuator: ActuatorSpec
    temp_sensor: TempSensorSpec
    strain_sensor: StrainSensorSpec
    photodiode: PhotodiodeSpec
    settings: SimulationSettings
    alarm_rules: tuple[AlarmRule, ...]
    reaction_order: float = 1.0
    health_template: SensorHealth = SensorHealth()

    @classmethod
    def from_calibration(
        cls,
        cal: Calibration,
        alarm_rules: tuple[AlarmRule, ...] | None = None,
    ) -> "MissionSpecs":
        rules = alarm_rules if alarm_rules is not None else default_alarm_rules(cal.simulation)
        return cls(
            kinetics=cal.kinetics,
            photolysis_rate=cal.photolysis_rate,
            hf_sat=cal.hf_saturation,
            actuator=cal.actuator,
            temp_sensor=cal.temp_sensor,
            strain_sensor=cal.strain_sensor,
            photodiode=cal.photodiode,
            settings=cal.simulation,
            alarm_rules=rules,
            health_template=cal.health,
        )

    def initial_robot(self, position: float) -> RobotState:
        h = self.health_template
        return RobotState(
            position=position,
            gait=GaitState(position=position),
            sensor_health=SensorHealthSet(strain=h, temp=h, photo=h),
        )


def default_alarm_rules(settings: SimulationSettings) -> tuple[AlarmRule, ...]:
    """UV detection plus the hot-while-dosed hazard warning."""
    return (
        AlarmRule(
            message="UV detected",
            tag="uv-detected",
            conditions=(
                Condition("photocurrent_a", ">", settings.uv_current_threshold_a, use_abs=True),
            ),
        ),
        AlarmRule(
            message="accelerated decomposition risk",
            tag="alarm",
            conditions=(
                Condition("hf_fraction", ">=", settings.dose_alarm_fraction),
                Condition("temp_c", ">=", settings.alarm_temperature_c),
            ),
        ),
    )


def evaluate_alarms(rules, record: TelemetryRecord) -> list[str]:
    """Messages of every rule whose conditions all hold on the record."""
    return [rule.message for rule in rules if all(c.holds(record) for c in rule.conditions)]


def validate_world(world) -> tuple[Zone, ...]:
    zones = tuple(world)
    if not zones:
        raise ConfigError("world must contain at least one zone")
    names = [z.name for z in zones]
    if len(set(names)) != len(names):
        raise ConfigError("zone names must be unique")
    for left, right in zip(zones, zones[1:]):
        if right.x_min < left.x_max:
            raise ConfigError(
                f"zones {left.name!r} and {right.name!r} overlap or are out of order"
            )
        if right.x_min > left.x_max:
            raise ConfigError(
                f"gap between zones {left.name!r} and {right.name!r}; spans must be contiguous"
            )
    return zones


def locate_zone(world, position: float) -> Zone:
    """Zone containing the point; shared boundaries belong to the left zone."""
    if position < world[0].x_min or position > world[-1].x_max:
        raise SimulationFault(
            f"position {position:.6g} m escapes world bounds "
            f"[{world[0].x_min:.6g}, {world[-1].x_max:.6g}]"
        )
    for zone in world:
        if position <= zone.x_max:
            return zone
    return world[-1]


def _step_seed(seed: int, step_index: int) -> int:
    return int(np.random.SeedSequence([seed, step_index]).generate_state(1)[0])


def step(
    world,
    robot: RobotState,
    specs: MissionSpecs,
    dt: float,
    drive: float = 0.0,
    noise_seed: int = 0,
    pending_events: tuple[Event, ...] = (),
) -> tuple[RobotState, TelemetryRecord]:
    """Advance one step of length dt.

    Kinetics run at the zone sampled from the start-of-step position;
    sensor readings and events are taken at the end-of-step position.
    ``drive`` in [-1, 1] is the commanded locomotion fraction (sign is
    direction); actual motion also scales with the mobility flag derived
    from the updated conversion.
    """
    if dt <= 0:
        raise SimulationFault("dt must be > 0")
    if not -1.0 <= drive <= 1.0:
        raise SimulationFault("drive must lie in [-1, 1]")

    env = locate_zone(world, robot.position)
    settings = specs.settings

    # photolysis dose (persistent; grows only under UV)
    hf = robot.hf_fraction
    if env.uv_on:
        hf = 1.0 - (1.0 - hf) * math.exp(-specs.photolysis_rate * dt)

    # conversion: exact exponential sub-step at frozen conditions
    g = trigger_coupling(hf, specs.hf_sat)
    k_thermal = arrhenius_rate(specs.kinetics, env.temperature)
    k_eff = k_thermal * g
    alpha = robot.alpha
    if k_eff > 0.0 and alpha < 1.0:
        if specs.reaction_order == 1.0:
            alpha = 1.0 - (1.0 - alpha) * math.exp(-k_eff * dt)
        else:
            base = (1.0 - alpha) ** (1.0 - specs.reaction_order) - (
                1.0 - specs.reaction_order
            ) * k_eff * dt
            alpha = 1.0 if base <= 0.0 else 1.0 - base ** (1.0 / (1.0 - specs.reaction_order))

    mobility = 1.0 if alpha < settings.mobility_loss_alpha else 0.0
    operational = mobility > 0.0

    # locomotion: the pressure cycle runs only while a move is commanded
    gait = robot.gait
    position = robot.position
    if drive != 0.0:
        advanced = gait_advance(gait, specs.actuator, dt, mobility * abs(drive))
        delta = advanced.position - gait.position
        position = robot.position + math.copysign(delta, drive)
        gait = replace(advanced, position=position)
    here = locate_zone(world, position)

    # body temperature tracks the local zone; with zero lag it is not
    # carried as state, so an inert step leaves the robot unchanged
    zone_temp_c = here.temperature - 273.15
    if settings.body_thermal_lag_s > 0.0:
        previous = robot.body_temperature_c if robot.body_temperature_c is not None else zone_temp_c
        relax = math.exp(-dt / settings.body_thermal_lag_s)
        body_temp_c = zone_temp_c + (previous - zone_temp_c) * relax
        tracked_temp_c: float | None = body_temp_c
    else:
        body_temp_c = zone_temp_c
        tracked_temp_c = None

    # sensor health transitions
    old_health = robot.sensor_health
    new_health = SensorHealthSet(
        strain=replace(old_health.strain, status=old_health.strain.status_at(alpha)),
        temp=replace(old_health.temp, status=old_health.temp.status_at(alpha)),
        photo=replace(old_health.photo, status=old_health.photo.status_at(alpha)),
    )

    # readings through the degradation overlay
    raw_resistance = temp_resistance(specs.temp_sensor, body_temp_c)
    resistance = apply_degradation(
        raw_resistance,
        "temp",
        alpha,
        new_health.temp,
        noise_seed=noise_seed,
        fail_resistance=specs.temp_sensor.fail_resistance,
    )
    try:
        temp_reading = read_temperature(specs.temp_sensor, resistance)
    except SensorFailedError:
        temp_reading = None

    raw_capacitance = strain_capacitance(specs.strain_sensor, gait.current_angle)
    capacitance = apply_degradation(
        raw_capacitance, "strain", alpha, new_health.strain, noise_seed=noise_seed
    )

    raw_current = photodiode_current(specs.photodiode, settings.monitor_bias_v, here.uv_on)
    photocurrent = apply_degradation(
        raw_current, "photo", alpha, new_health.photo, noise_seed=noise_seed
    )

    clock = robot.clock + dt
    provisional = TelemetryRecord(
        t=clock,
        position=position,
        alpha=alpha,
        hf_fraction=hf,
        zone=here.name,
        temp_resistance_ohm=resistance,
        temp_c=temp_reading,
        capacitance_pf=capacitance,
        photocurrent_a=photocurrent,
        events=(),
    )
    firing = evaluate_alarms(specs.alarm_rules, provisional)

    events: list[Event] = list(pending_events)
    if here.name != env.name:
        events.append(Event("zone-exit", env.name))
        events.append(Event("zone-entry", here.name))
        if temp_reading is not None:
            events.append(Event("temp-report", f"{here.name}: {temp_reading:.2f} C"))
    for kind, old, new in (
        ("strain", old_health.strain.status, new_health.strain.status),
        ("temp", old_health.temp.status, new_health.temp.status),
        ("photo", old_health.photo.status, new_health.photo.status),
    ):
        if new != old:
            events.append(Event(f"sensor-{new}", kind))
    if robot.operational and not operational:
        events.append(Event("mobility-lost", f"alpha reached {alpha:.4f}"))
    tag_by_message = {rule.message: rule.tag for rule in specs.alarm_rules}
    for message in firing:
        if message not in robot.active_alarms:
            events.append(Event(tag_by_message.get(message, "alarm"), message))
    # leaving a zone while a hazard alarm (any non-detection rule) was
    # active there counts as an escape
    hazard_before = any(
        tag_by_message.get(m, "alarm") == "alarm" for m in robot.active_alarms
    )
    if here.name != env.name and hazard_before:
        events.append(Event("escape", f"left {env.name} under active alarm"))
    if robot.alpha < settings.decomposed_alpha <= alpha:
        events.append(Event("decomposed", f"alpha reached {alpha:.4f}"))

    record = replace(provisional, events=tuple(events))
    new_robot = RobotState(
        position=position,
        alpha=alpha,
        hf_fraction=hf,
        gait=gait,
        sensor_health=new_health,
        operational=operational,
        clock=clock,
        body_temperature_c=tracked_temp_c,
        active_alarms=tuple(firing),
    )
    return new_robot, record


def run(
    world,
    script: MissionScript,
    robot0: RobotState,
    specs: MissionSpecs,
    dt: float = 1.0,
    seed: int = 0,
) -> list[TelemetryRecord]:
    """Execute the script, stepping until it completes or the robot is done.

    Terminates when the command list is exhausted, conversion reaches
    the decomposed threshold, a move target becomes unreachable after
    mobility loss (logged as a "stranded" terminal event), or the
    simulation timeout expires ("timeout" event).
    """
    zones = validate_world(world)
    _validate_script(zones, script)
    settings = specs.settings
    records: list[TelemetryRecord] = []
    robot = robot0
    step_index = 0
    speed = specs.actuator.speed

    def do_step(drive: float, pending: tuple[Event, ...] = ()) -> None:
        nonlocal robot, step_index
        robot, record = step(
            zones,
            robot,
            specs,
            dt,
            drive=drive,
            noise_seed=_step_seed(seed, step_index),
            pending_events=pending,
        )
        records.append(record)
        step_index += 1

    def finished() -> bool:
        return robot.alpha >= settings.decomposed_alpha

    def timed_out() -> bool:
        return robot.clock >= settings.timeout_s

    for command in script.commands:
        if finished():
            break
        pending: tuple[Event, ...] = ()
        if command.kind == "self_destruct":
            pending = (Event("self-destruct", "entering terminal decomposition"),)
        elapsed = 0.0
        while True:
            if finished():
                break
            if timed_out():
                do_step(0.0, (Event("timeout", "simulation timeout expired"),))
                return records
            if command.kind == "move_to":
                remaining = command.value - robot.position
                if abs(remaining) <= _POSITION_EPS:
                    break
                if not robot.operational:
                    do_step(0.0, (Event("stranded", f"cannot reach {command.value:g} m"),))
                    return records
                full = speed * dt
                drive = max(-1.0, min(1.0, remaining / full))
                do_step(drive, pending)
            elif command.kind == "dwell":
                if elapsed >= command.value - 1e-9:
                    break
                do_step(0.0, pending)
                elapsed += dt
            elif command.kind == "await_uv_dose":
                if robot.hf_fraction >= command.value - 1e-12:
                    break
                do_step(0.0, pending)
            elif command.kind == "self_destruct":
                do_step(0.0, pending)
            else:
                raise ConfigError(f"unknown command {command.kind!r}")
            pending = ()
    return records


def _validate_script(zones, script: MissionScript) -> None:
    x_lo, x_hi = zones[0].x_min, zones[-1].x_max
    for command in script.commands:
        if command.kind != "self_destruct" and command.value is None:
            raise ConfigError(f"command {command.kind!r} needs a value")
        if command.kind == "move_to":
            if not x_lo <= command.value <= x_hi:
                raise ConfigError(
                    f"move_to target {command.value:g} outside world [{x_lo:g}, {x_hi:g}]"
                )
        elif command.kind == "dwell":
            if command.value <= 0:
                raise ConfigError("dwell duration must be > 0")
        elif command.kind == "await_uv_dose":
            if not 0.0 <= command.value < 1.0:
                raise ConfigError("await_uv_dose fraction must lie in [0, 1)")
        elif command.kind != "self_destruct":
            raise ConfigError(f"unknown command {command.kind!r}")


_RULE_RE = re.compile(
    r"^\s*(?P<abs>abs\()?\s*(?P<field>[a-z_]+)\s*(?(abs)\))\s*"
    r"(?P<op><=|>=|<|>)\s*(?P<value>[-+0-9.eE]+)\s*$"
)


def parse_alarm_rule(text: str, context: str = "<rule>") -> AlarmRule:
    """Parse 'cond [and cond ...] -> message' into an AlarmRule."""
    if "->" not in text:
        raise ConfigError(f"{context}: rule needs '-> message', got {text!r}")
    cond_part, _, message = text.rpartition("->")
    message = message.strip()
    if not message:
        raise ConfigError(f"{context}: rule message is empty")
    conditions = []
    for chunk in cond_part.split(" and "):
        m = _RULE_RE.match(chunk)
        if not m:
            raise ConfigError(f"{context}: malformed condition {chunk.strip()!r}")
        fld = m.group("field")
        if fld not in RULE_FIELDS:
            raise ConfigError(
                f"{context}: unknown telemetry field {fld!r} (valid: {', '.join(RULE_FIELDS)})"
            )
        try:
            value = float(m.group("value"))
        except ValueError:
            raise ConfigError(f"{context}: bad number in condition {chunk.strip()!r}") from None
        conditions.append(Condition(fld, m.group("op"), value, use_abs=bool(m.group("abs"))))
    return AlarmRule(message=message, conditions=tuple(conditions))


def load_mission(
    path: str | Path,
    settings: SimulationSettings | None = None,
) -> tuple[tuple[Zone, ...], MissionScript, float]:
    """Load a world + script file ([zone.*], [script], [robot], [alarms]).

    Returns (world, script, start_position); the start defaults to the
    midpoint of the first zone.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read mission {path}: {exc}") from None
    sections = parse_sections(text, str(path))

    zones: list[Zone] = []
    commands: list[Command] = []
    rules: list[AlarmRule] = []
    start_position: float | None = None
    saw_alarms = False
    for name, entries in sections:
        ctx = f"{path} [{name}]"
        if name.startswith("zone."):
            data = {k: v for k, v in entries}
            unknown = set(data) - {"name", "x_min", "x_max", "temperature_c", "temperature_k", "uv_on"}
            if unknown:
                raise ConfigError(f"{ctx}: unknown keys {sorted(unknown)}")
            if ("temperature_c" in data) == ("temperature_k" in data):
                raise ConfigError(f"{ctx}: give exactly one of temperature_c / temperature_k")
            if "temperature_c" in data:
                temperature = as_float(data["temperature_c"], ctx) + 273.15
            else:
                temperature = as_float(data["temperature_k"], ctx)
            zones.append(
                Zone(
                    x_min=as_float(data["x_min"], ctx),
                    x_max=as_float(data["x_max"], ctx),
                    temperature=temperature,
                    uv_on=as_bool(data.get("uv_on", "false"), ctx),
                    name=data.get("name", name[len("zone.") :]),
                )
            )
        elif name == "script":
            for key, value in entries:
                if key == "move_to":
                    commands.append(Command("move_to", as_float(value, ctx)))
                elif key == "dwell":
                    commands.append(Command("dwell", as_float(value, ctx)))
                elif key == "await_uv_dose":
                    commands.append(Command("await_uv_dose", as_float(value, ctx)))
                elif key == "self_destruct":
                    commands.append(Command("self_destruct"))
                else:
                    raise ConfigError(f"{ctx}: unknown command {key!r}")
        elif name == "robot":
            data = {k: v for k, v in entries}
            unknown = set(data) - {"position"}
            if unknown:
                raise ConfigError(f"{ctx}: unknown keys {sorted(unknown)}")
            if "position" in data:
                start_position = as_float(data["position"], ctx)
        elif name == "alarms":
            saw_alarms = True
            for key, value in entries:
                if key != "rule":
                    raise ConfigError(f"{ctx}: only 'rule = ...' entries are allowed")
                rules.append(parse_alarm_rule(value, ctx))
        else:
            raise ConfigError(f"{path}: unknown section [{name}]")

    world = validate_world(zones)
    if saw_alarms:
        alarm_rules = tuple(rules)
    else:
        alarm_rules = default_alarm_rules(settings if settings is not None else SimulationSettings())
    script = MissionScript(commands=tuple(commands), alarm_rules=alarm_rules)
    _validate_script(world, script)
    if start_position is None:
        start_position = 0.5 * (world[0].x_min + world[0].x_max)
    if not world[0].x_min <= start_position <= world[-1].x_max:
        raise ConfigError(f"{path}: robot start position {start_position:g} outside world")
    return world, script, start_position


def record_to_dict(record: TelemetryRecord) -> dict:
    return {
        "t": record.t,
        "position": record.position,
        "alpha": record.alpha,
        "hf_fraction": record.hf_fraction,
        "zone": record.zone,
        "temp_resistance_ohm": record.temp_resistance_ohm,
        "temp_c": record.temp_c,
        "capacitance_pf": record.capacitance_pf,
        "photocurrent_a": record.photocurrent_a,
        "events": [{"tag": e.tag, "message": e.message} for e in record.events],
    }


def telemetry_to_jsonl(records) -> str:
    return "".join(json.dumps(record_to_dict(r)) + "\n" for r in records)


def _csv_num(value: float | None) -> str:
    return "nan" if value is None else repr(value)


def telemetry_to_csv(records) -> str:
    lines = [TELEMETRY_CSV_HEADER]
    for r in records:
        lines.append(
            ",".join(
                (
                    repr(r.t),
                    repr(r.position),
                    repr(r.alpha),
                    _csv_num(r.temp_c),
                    _csv_num(r.capacitance_pf),
                    repr(r.photocurrent_a),
                )
            )
        )
    return "\n".join(lines) + "\n"
