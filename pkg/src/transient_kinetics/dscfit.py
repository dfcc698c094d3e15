"""Isothermal photo-DSC trace ingestion, rate fitting, and Arrhenius regression.

A trace is a sampled exothermic heat-flow record q(t). For a first-order
transition the model is q(t) = k * dH_total * exp(-k t); fitting (k,
dH_total) jointly by damped Gauss-Newton gives the per-temperature rate
constant, and ordinary least squares of ln k on 1/T yields the Arrhenius
parameters.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DomainError,
    TraceParseError,
    UntriggeredTraceError,
    ZeroEnthalpyError,
)
from .kinetics import GAS_CONSTANT, ArrheniusParams

# numpy 2.0 renamed trapz
_trapezoid = getattr(np, "trapezoid", None) or np.trapz

TRACE_HEADER = "time_s,heat_flow_W"

MIN_FIT_SAMPLES = 8
MAX_FIT_ITERATIONS = 200
STEP_TOLERANCE = 1e-9
DAMPING_MIN = 1e-12
DAMPING_MAX = 1e8
BASELINE_TAIL_FRACTION = 0.05


@dataclass(frozen=True)
class DscTrace:
    """Isothermal heat-flow record (exothermic positive, W) at a fixed hold."""

    time_s: np.ndarray
    heat_flow_w: np.ndarray
    temperature_k: float
    uv_on: bool
    label: str = ""

    def __post_init__(self):
        time_s = np.asarray(self.time_s, dtype=float)
        heat = np.asarray(self.heat_flow_w, dtype=float)
        object.__setattr__(self, "time_s", time_s)
        object.__setattr__(self, "heat_flow_w", heat)
        if time_s.ndim != 1 or heat.ndim != 1 or time_s.size != heat.size:
            raise DomainError("time and heat flow must be 1-d arrays of equal length")
        # two points suffice to integrate; fitting demands MIN_FIT_SAMPLES
        if time_s.size < 2:
            raise DomainError("trace needs at least 2 samples")
        if np.any(np.diff(time_s) <= 0):
            raise DomainError("sample times must be strictly increasing")
        if self.temperature_k <= 0:
            raise DomainError("temperature_k must be > 0")

    @property
    def duration(self) -> float:
        return float(self.time_s[-1] - self.time_s[0])


@dataclass(frozen=True)
class FitResult:
    """Outcome of a single-trace rate fit."""

    k: float
    total_enthalpy: float
    residual_rms: float
    iterations: int
    converged: bool
    objective_history: tuple[float, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class ArrheniusFit:
    """Arrhenius regression over (temperature, rate constant) points."""

    params: ArrheniusParams
    r_squared: float
    points: tuple[tuple[float, float], ...]


def estimate_baseline(trace: DscTrace, tail_fraction: float = BASELINE_TAIL_FRACTION) -> float:
    """Median heat flow over the trailing window, assumed post-reaction."""
    if not 0.0 < tail_fraction <= 1.0:
        raise DomainError("tail_fraction must lie in (0, 1]")
    n_tail = max(1, int(math.ceil(tail_fraction * trace.time_s.size)))
    return float(np.median(trace.heat_flow_w[-n_tail:]))


def total_enthalpy(trace: DscTrace, baseline: float = 0.0) -> float:
    """Trapezoidal integral of the baseline-subtracted heat flow, in J."""
    corrected = trace.heat_flow_w - baseline
    value = float(_trapezoid(corrected, trace.time_s))
    if value <= 0.0:
        raise ZeroEnthalpyError(
            "trace released no net heat; conversion is undefined"
        )
    return value


def conversion_profile(trace: DscTrace, baseline: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative released-heat fraction over time.

    Returns (t, alpha) with alpha nondecreasing, clipped to [0, 1], and
    ending at exactly 1 by construction.
    """
    corrected = trace.heat_flow_w - baseline
    widths = np.diff(trace.time_s)
    increments = 0.5 * (corrected[1:] + corrected[:-1]) * widths
    cumulative = np.concatenate(([0.0], np.cumsum(increments)))
    # normalize by the same accumulation so the last sample is exactly 1
    total = float(cumulative[-1])
    if total <= 0.0:
        raise ZeroEnthalpyError("trace released no net heat; conversion is undefined")
    alpha = cumulative / total
    alpha = np.minimum(np.maximum.accumulate(alpha), 1.0)
    alpha = np.maximum(alpha, 0.0)
    return trace.time_s.copy(), alpha


def _initial_guess(trace: DscTrace, baseline: float) -> tuple[float, float]:
    """Seed (k0, dH0): dH0 from integration, k0 = 1/t63 on the cumulative curve.

    t63 is the first time the cumulative enthalpy passes 63.2% of the
    total, which equals 1/k exactly for a noiseless exponential decay.
    """
    dh0 = total_enthalpy(trace, baseline)
    t, alpha = conversion_profile(trace, baseline)
    target = 1.0 - math.exp(-1.0)
    above = np.nonzero(alpha >= target)[0]
    t0 = float(trace.time_s[0])
    if above.size and float(t[above[0]]) > t0:
        k0 = 1.0 / (float(t[above[0]]) - t0)
    else:
        k0 = 3.0 / max(trace.duration, 1e-12)
    return k0, dh0


def fit_rate_constant(
    trace: DscTrace,
    baseline: float | None = None,
    keep_history: bool = False,
) -> FitResult:
    """Fit (k, dH_total) of q(t) = k dH exp(-k t) by damped Gauss-Newton.

    ``baseline`` of None estimates the offset from the trailing-window
    median before fitting. Damping grows tenfold on rejected steps and
    shrinks tenfold on accepted ones; convergence is declared when the
    relative parameter step drops below 1e-9.
    """
    if not trace.uv_on:
        raise UntriggeredTraceError(
            "trace was recorded without UV; there is no reaction to fit"
        )
    if trace.time_s.size < MIN_FIT_SAMPLES:
        raise DomainError(f"fitting needs at least {MIN_FIT_SAMPLES} samples")
    if baseline is None:
        baseline = estimate_baseline(trace)

    t = trace.time_s - trace.time_s[0]
    q = trace.heat_flow_w - baseline

    k, dh = _initial_guess(trace, baseline)
    params = np.array([k, dh])

    def residuals(p):
        decay = np.exp(-p[0] * t)
        return q - p[0] * p[1] * decay

    def jacobian(p):
        decay = np.exp(-p[0] * t)
        dk = p[1] * decay * (1.0 - p[0] * t)
        ddh = p[0] * decay
        return np.column_stack([dk, ddh])

    r = residuals(params)
    sse = float(r @ r)
    history = [sse]
    damping = 1e-3
    converged = False
    iterations = 0

    for iterations in range(1, MAX_FIT_ITERATIONS + 1):
        jac = jacobian(params)
        jtj = jac.T @ jac
        jtr = jac.T @ r
        scale = np.diag(np.maximum(np.diag(jtj), 1e-300))
        try:
            step = np.linalg.solve(jtj + damping * scale, jtr)
        except np.linalg.LinAlgError:
            damping = min(damping * 10.0, DAMPING_MAX)
            continue
        candidate = params + step
        if candidate[0] <= 0.0 or candidate[1] <= 0.0:
            damping = min(damping * 10.0, DAMPING_MAX)
            continue
        r_new = residuals(candidate)
        sse_new = float(r_new @ r_new)
        if sse_new <= sse:
            rel_step = float(np.max(np.abs(step) / np.maximum(np.abs(candidate), 1e-300)))
            params, r, sse = candidate, r_new, sse_new
            history.append(sse)
            damping = max(damping * 0.1, DAMPING_MIN)
            if rel_step < STEP_TOLERANCE:
                converged = True
                break
        else:
            damping = min(damping * 10.0, DAMPING_MAX)

    residual_rms = math.sqrt(sse / t.size)
    return FitResult(
        k=float(params[0]),
        total_enthalpy=float(params[1]),
        residual_rms=residual_rms,
        iterations=iterations,
        converged=converged,
        objective_history=tuple(history) if keep_history else (),
    )


def fit_arrhenius(points) -> ArrheniusFit:
    """Ordinary least squares of ln k on 1/T.

    The slope is -Ea/R and the intercept ln A. Needs at least two points
    at distinct temperatures, all with k > 0.
    """
    pts = tuple((float(T), float(k)) for T, k in points)
    if len(pts) < 2:
        raise DomainError("Arrhenius regression needs at least 2 points")
    temps = np.array([p[0] for p in pts])
    ks = np.array([p[1] for p in pts])
    if np.any(temps <= 0):
        raise DomainError("temperatures must be > 0 K")
    if np.any(ks <= 0):
        raise DomainError("all rate constants must be > 0")
    if np.unique(temps).size < 2:
        raise DomainError("Arrhenius regression needs >= 2 distinct temperatures")

    x = 1.0 / temps
    y = np.log(ks)
    x_mean = x.mean()
    y_mean = y.mean()
    sxx = float(np.sum((x - x_mean) ** 2))
    sxy = float(np.sum((x - x_mean) * (y - y_mean)))
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean

    fitted = intercept + slope * x
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y_mean) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))

    params = ArrheniusParams(
        pre_exponential=math.exp(intercept),
        activation_energy=-slope * GAS_CONSTANT,
    )
    return ArrheniusFit(params=params, r_squared=r_squared, points=pts)


def synthesize_trace(
    k: float,
    total_enthalpy: float,
    sampling: tuple[float, float],
    noise_fraction: float = 0.0,
    seed: int | None = None,
    temperature_k: float = 298.15,
    uv_on: bool = True,
    label: str = "",
) -> DscTrace:
    """Generate a model trace with optional seeded Gaussian noise.

    Noise is scaled by the peak amplitude k * dH (the t = 0 heat flow)
    and is reproducible for a fixed seed.
    """
    dt, t_end = sampling
    if k <= 0:
        raise DomainError("k must be > 0")
    if total_enthalpy <= 0:
        raise DomainError("total_enthalpy must be > 0")
    if dt <= 0:
        raise DomainError("dt must be > 0")
    if t_end < 10 * dt:
        raise DomainError("t_end must be at least 10 * dt")
    n = int(math.floor(t_end / dt)) + 1
    t = np.arange(n) * dt
    q = k * total_enthalpy * np.exp(-k * t)
    if noise_fraction:
        rng = np.random.default_rng(seed)
        q = q + noise_fraction * k * total_enthalpy * rng.standard_normal(n)
    return DscTrace(
        time_s=t,
        heat_flow_w=q,
        temperature_k=temperature_k,
        uv_on=uv_on,
        label=label,
    )


def write_trace_csv(trace: DscTrace, path: str | Path) -> None:
    """Write a trace in the ingestion format (UTF-8, LF, '.' decimals)."""
    buf = io.StringIO()
    buf.write(f"# temperature_K={trace.temperature_k!r}\n")
    buf.write(f"# uv_on={'true' if trace.uv_on else 'false'}\n")
    if trace.label:
        buf.write(f"# label={trace.label}\n")
    buf.write(TRACE_HEADER + "\n")
    for t, q in zip(trace.time_s, trace.heat_flow_w):
        buf.write(f"{float(t)!r},{float(q)!r}\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="\n")


_TRUE_WORDS = {"true", "1", "yes", "on"}
_FALSE_WORDS = {"false", "0", "no", "off"}


def _parse_bool(raw: str, line_number: int) -> bool:
    word = raw.strip().lower()
    if word in _TRUE_WORDS:
        return True
    if word in _FALSE_WORDS:
        return False
    raise TraceParseError(f"expected a boolean, got {raw!r}", line_number)


def read_trace_csv(path: str | Path) -> DscTrace:
    """Parse a trace CSV; parse failures report the offending line number."""
    text = Path(path).read_text(encoding="utf-8")
    meta: dict[str, str] = {}
    times: list[float] = []
    heats: list[float] = []
    header_seen = False
    line_number = 0
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                meta[key.strip()] = value.strip()
            continue
        if not header_seen:
            if line.replace(" ", "") != TRACE_HEADER:
                raise TraceParseError(
                    f"expected header {TRACE_HEADER!r}, got {line!r}", line_number
                )
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise TraceParseError(f"expected 2 columns, got {len(parts)}", line_number)
        try:
            times.append(float(parts[0]))
            heats.append(float(parts[1]))
        except ValueError:
            raise TraceParseError(f"non-numeric row {line!r}", line_number) from None
    if not header_seen:
        raise TraceParseError("file contains no header row", max(line_number, 1))
    if len(times) < 2:
        raise TraceParseError("trace needs at least 2 data rows", max(line_number, 1))

    if "temperature_K" not in meta:
        raise TraceParseError("missing '# temperature_K=' metadata", 1)
    try:
        temperature_k = float(meta["temperature_K"])
    except ValueError:
        raise TraceParseError(
            f"bad temperature_K value {meta['temperature_K']!r}", 1
        ) from None
    uv_on = _parse_bool(meta.get("uv_on", "false"), 1)
    label = meta.get("label", "")
    try:
        return DscTrace(
            time_s=np.array(times),
            heat_flow_w=np.array(heats),
            temperature_k=temperature_k,
            uv_on=uv_on,
            label=label,
        )
    except DomainError as exc:
        raise TraceParseError(str(exc), max(line_number, 1)) from None
