"""Trace ingestion, enthalpy integration, rate fitting, Arrhenius regression."""

import math

import numpy as np
import pytest

from transient_kinetics.dscfit import (
    DscTrace,
    conversion_profile,
    estimate_baseline,
    fit_arrhenius,
    fit_rate_constant,
    read_trace_csv,
    synthesize_trace,
    total_enthalpy,
    write_trace_csv,
)
from transient_kinetics.errors import (
    DomainError,
    TraceParseError,
    UntriggeredTraceError,
    ZeroEnthalpyError,
)
from transient_kinetics.kinetics import ArrheniusParams, arrhenius_rate

ECOFLEX = ArrheniusParams.from_kj_per_mol(0.1703, 18.09)


def make_trace(k, dh, n=1500, uv_on=True, noise=0.0, seed=None, temperature_k=298.15):
    t_end = 20.0 / k
    return synthesize_trace(
        k, dh, (t_end / n, t_end), noise_fraction=noise, seed=seed,
        temperature_k=temperature_k, uv_on=uv_on,
    )


class TestDscTrace:
    def test_needs_two_samples(self):
        with pytest.raises(DomainError):
            DscTrace(np.array([0.0]), np.array([1.0]), 300.0, True)

    def test_times_strictly_increasing(self):
        with pytest.raises(DomainError):
            DscTrace(np.array([0.0, 1.0, 1.0]), np.zeros(3), 300.0, True)

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            DscTrace(np.array([0.0, 1.0]), np.zeros(3), 300.0, True)


class TestTotalEnthalpy:
    def test_synthetic_closed_form(self):
        trace = make_trace(1e-3, 10.0, n=2000)
        assert total_enthalpy(trace) == pytest.approx(10.0, rel=1e-3)

    def test_flat_zero_raises(self):
        trace = DscTrace(np.linspace(0, 10, 16), np.zeros(16), 300.0, True)
        with pytest.raises(ZeroEnthalpyError):
            total_enthalpy(trace)

    def test_two_point_rectangle(self):
        trace = DscTrace(np.array([0.0, 10.0]), np.array([1.0, 1.0]), 300.0, True)
        assert total_enthalpy(trace) == 10.0

    def test_baseline_offset_shifts_by_offset_times_duration(self):
        trace = make_trace(1e-3, 10.0, n=500)
        offset = 1e-4  # small enough that the corrected integral stays positive
        shifted = total_enthalpy(trace, baseline=0.0) - total_enthalpy(trace, baseline=offset)
        assert shifted == pytest.approx(offset * trace.duration, rel=1e-12)

    def test_estimate_baseline_tail_median(self):
        t = np.linspace(0, 100, 101)
        q = np.full(101, 0.25)
        q[:80] += 1.0
        trace = DscTrace(t, q, 300.0, True)
        assert estimate_baseline(trace, tail_fraction=0.05) == 0.25


class TestConversionProfile:
    def test_matches_analytic_everywhere(self):
        k = 1e-3
        trace = make_trace(k, 10.0, n=3000)
        t, alpha = conversion_profile(trace)
        expected = 1.0 - np.exp(-k * t)
        assert np.max(np.abs(alpha - expected)) < 1e-3

    def test_endpoints(self):
        trace = make_trace(5e-4, 4.0)
        _, alpha = conversion_profile(trace)
        assert alpha[0] == 0.0
        assert alpha[-1] == 1.0

    def test_nondecreasing_even_with_noise(self):
        trace = make_trace(1e-3, 10.0, noise=0.05, seed=3)
        _, alpha = conversion_profile(trace)
        assert np.all(np.diff(alpha) >= 0.0)
        assert alpha[-1] == 1.0

    def test_propagates_zero_enthalpy(self):
        trace = DscTrace(np.linspace(0, 10, 16), np.zeros(16), 300.0, True)
        with pytest.raises(ZeroEnthalpyError):
            conversion_profile(trace)


class TestFitRateConstant:
    def test_noiseless_round_trip(self):
        k_true = 6.73e-4
        result = fit_rate_constant(make_trace(k_true, 12.0))
        assert result.converged
        assert result.k == pytest.approx(k_true, rel=1e-6)
        assert result.total_enthalpy == pytest.approx(12.0, rel=1e-4)

    def test_seeded_noisy_round_trip(self):
        rng = np.random.default_rng(20240601)
        hits = 0
        for _ in range(12):
            k_true = 10.0 ** rng.uniform(-5, -2)
            trace = make_trace(k_true, 8.0, noise=0.02, seed=int(rng.integers(2**31)))
            result = fit_rate_constant(trace)
            if result.converged and abs(result.k - k_true) / k_true < 0.05:
                hits += 1
        assert hits >= 11

    def test_flat_zero_trace(self):
        t = np.linspace(0, 10, 32)
        trace = DscTrace(t, np.zeros(32), 300.0, True)
        with pytest.raises(ZeroEnthalpyError):
            fit_rate_constant(trace)

    def test_untriggered_trace_rejected(self):
        trace = make_trace(1e-3, 10.0, uv_on=False)
        with pytest.raises(UntriggeredTraceError):
            fit_rate_constant(trace)

    def test_too_few_samples(self):
        trace = DscTrace(np.linspace(0, 10, 4), np.ones(4), 300.0, True)
        with pytest.raises(DomainError):
            fit_rate_constant(trace)

    def test_objective_nonincreasing_over_accepted_steps(self):
        trace = make_trace(2e-4, 6.0, noise=0.03, seed=11)
        result = fit_rate_constant(trace, keep_history=True)
        history = result.objective_history
        assert len(history) >= 2
        assert all(b <= a for a, b in zip(history, history[1:]))

    def test_log_uniform_noiseless_property(self):
        rng = np.random.default_rng(77)
        for _ in range(10):
            k_true = 10.0 ** rng.uniform(-5, -2)
            result = fit_rate_constant(make_trace(k_true, 10.0))
            assert result.converged
            assert result.k == pytest.approx(k_true, rel=1e-6)

    def test_constant_offset_removed_by_default_baseline(self):
        # instrument drift shows up as a constant plateau; the default
        # tail-median baseline recovers the underlying rate
        k_true = 6.73e-4
        clean = make_trace(k_true, 12.0)
        offset = DscTrace(
            clean.time_s, clean.heat_flow_w + 0.004, clean.temperature_k, True
        )
        result = fit_rate_constant(offset)
        assert result.converged
        assert result.k == pytest.approx(k_true, rel=0.01)
        explicit = fit_rate_constant(offset, baseline=0.004)
        assert explicit.k == pytest.approx(k_true, rel=1e-6)


class TestFitArrhenius:
    def test_exact_four_point_recovery(self):
        temps = (353.15, 373.15, 393.15, 413.15)
        points = [(T, arrhenius_rate(ECOFLEX, T)) for T in temps]
        fit = fit_arrhenius(points)
        assert fit.params.pre_exponential == pytest.approx(0.1703, rel=1e-9)
        assert fit.params.activation_energy == pytest.approx(18090.0, rel=1e-9)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_two_points_exact_line(self):
        points = [(300.0, arrhenius_rate(ECOFLEX, 300.0)), (400.0, arrhenius_rate(ECOFLEX, 400.0))]
        fit = fit_arrhenius(points)
        assert fit.params.activation_energy == pytest.approx(18090.0, rel=1e-9)
        assert fit.r_squared == 1.0

    def test_noisy_recovery_within_ten_percent(self):
        rng = np.random.default_rng(42)
        temps = (353.15, 373.15, 393.15, 413.15)
        points = [
            (T, arrhenius_rate(ECOFLEX, T) * (1.0 + 0.05 * rng.standard_normal()))
            for T in temps
        ]
        fit = fit_arrhenius(points)
        assert fit.params.activation_energy == pytest.approx(18090.0, rel=0.10)

    def test_scale_equivariance(self):
        temps = (330.0, 360.0, 390.0, 420.0)
        points = [(T, arrhenius_rate(ECOFLEX, T)) for T in temps]
        scaled = [(T, 7.5 * k) for T, k in points]
        base = fit_arrhenius(points)
        shifted = fit_arrhenius(scaled)
        assert shifted.params.activation_energy == pytest.approx(
            base.params.activation_energy, rel=1e-12
        )
        assert shifted.params.pre_exponential == pytest.approx(
            7.5 * base.params.pre_exponential, rel=1e-12
        )

    def test_duplicate_temperatures_rejected(self):
        with pytest.raises(DomainError):
            fit_arrhenius([(300.0, 1e-3), (300.0, 2e-3)])

    def test_nonpositive_rate_rejected(self):
        with pytest.raises(DomainError):
            fit_arrhenius([(300.0, 1e-3), (350.0, 0.0)])

    def test_single_point_rejected(self):
        with pytest.raises(DomainError):
            fit_arrhenius([(300.0, 1e-3)])


class TestSynthesizeTrace:
    def test_noiseless_equals_closed_form(self):
        k, dh = 1e-3, 10.0
        trace = synthesize_trace(k, dh, (10.0, 20000.0))
        expected = k * dh * np.exp(-k * trace.time_s)
        assert np.array_equal(trace.heat_flow_w, expected)

    def test_same_seed_identical(self):
        a = synthesize_trace(1e-3, 10.0, (10.0, 20000.0), noise_fraction=0.02, seed=5)
        b = synthesize_trace(1e-3, 10.0, (10.0, 20000.0), noise_fraction=0.02, seed=5)
        assert np.array_equal(a.heat_flow_w, b.heat_flow_w)
        assert np.array_equal(a.time_s, b.time_s)

    def test_noise_amplitude_statistics(self):
        k, dh, noise = 1e-3, 10.0, 0.02
        trace = synthesize_trace(k, dh, (10.0, 20000.0), noise_fraction=noise, seed=9)
        clean = k * dh * np.exp(-k * trace.time_s)
        residual_rms = float(np.sqrt(np.mean((trace.heat_flow_w - clean) ** 2)))
        assert residual_rms == pytest.approx(noise * k * dh, rel=0.3)

    def test_sampling_validation(self):
        with pytest.raises(DomainError):
            synthesize_trace(1e-3, 10.0, (10.0, 50.0))
        with pytest.raises(DomainError):
            synthesize_trace(0.0, 10.0, (10.0, 20000.0))


class TestTraceCsv:
    def test_round_trip(self, tmp_path):
        trace = synthesize_trace(
            1e-3, 10.0, (10.0, 20000.0), noise_fraction=0.02, seed=5,
            temperature_k=393.15, uv_on=True, label="hot-hold",
        )
        path = tmp_path / "trace.csv"
        write_trace_csv(trace, path)
        back = read_trace_csv(path)
        assert np.array_equal(back.time_s, trace.time_s)
        assert np.array_equal(back.heat_flow_w, trace.heat_flow_w)
        assert back.temperature_k == trace.temperature_k
        assert back.uv_on is True
        assert back.label == "hot-hold"

    def test_missing_header_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("# temperature_K=300\n1.0,2.0\n")
        with pytest.raises(TraceParseError) as err:
            read_trace_csv(path)
        assert "line 2" in str(err.value)

    def test_non_numeric_row_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("# temperature_K=300\n# uv_on=true\ntime_s,heat_flow_W\n0,1\nfoo,bar\n")
        with pytest.raises(TraceParseError) as err:
            read_trace_csv(path)
        assert err.value.line_number == 5

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(TraceParseError):
            read_trace_csv(path)

    def test_missing_temperature_metadata(self, tmp_path):
        path = tmp_path / "nometa.csv"
        path.write_text("time_s,heat_flow_W\n0,1\n1,0.5\n")
        with pytest.raises(TraceParseError):
            read_trace_csv(path)
