"""Composite stress response, actuator calibration, gait kinematics."""

import numpy as np
import pytest

from transient_kinetics.errors import ActuationError, DomainError, FractureError
from transient_kinetics.mechanics import (
    DEFAULT_ACTUATOR,
    MATERIAL_PRESETS,
    ActuatorSpec,
    GaitState,
    MaterialSpec,
    PostElasticWarning,
    bend_angle,
    fracture_check,
    gait_advance,
    max_channel_strain,
    stress_at_strain,
    validate_actuator_wall,
)


class TestStressAtStrain:
    def test_zero_strain(self):
        assert stress_at_strain(MATERIAL_PRESETS["ecoflex-0wt"], 0.0) == 0.0

    def test_elastic_limit_point(self):
        sigma = stress_at_strain(MATERIAL_PRESETS["ecoflex-0wt"], 4.0)
        assert sigma == pytest.approx(40.02e3 * 4.0, rel=1e-12)
        assert sigma == pytest.approx(160.1e3, rel=1e-3)

    def test_post_elastic_extrapolation_near_fracture_stress(self):
        spec = MATERIAL_PRESETS["ecoflex-20wt"]
        with pytest.warns(PostElasticWarning):
            sigma = stress_at_strain(spec, 4.9334)
        assert sigma == pytest.approx(40020.0 * 4.9334, rel=1e-12)
        # linear extrapolation lands within 5% of the measured fracture stress
        assert abs(sigma - spec.fracture_stress) / spec.fracture_stress < 0.05

    def test_beyond_fracture_raises_with_label(self):
        spec = MATERIAL_PRESETS["ecoflex-10wt"]
        with pytest.raises(FractureError) as err:
            stress_at_strain(spec, 5.8)
        assert err.value.material_name == "ecoflex-10wt"

    def test_continuous_and_nondecreasing(self):
        spec = MATERIAL_PRESETS["ecoflex-0wt"]
        strains = np.linspace(0.0, spec.fracture_strain, 400)
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PostElasticWarning)
            stresses = [stress_at_strain(spec, e) for e in strains]
        assert all(b >= a for a, b in zip(stresses, stresses[1:]))


class TestFractureCheck:
    @pytest.mark.parametrize(
        "name,fracture_strain",
        [("ecoflex-0wt", 6.8372), ("ecoflex-10wt", 5.7167), ("ecoflex-20wt", 4.9334)],
    )
    def test_flips_exactly_at_fracture_strain(self, name, fracture_strain):
        spec = MATERIAL_PRESETS[name]
        assert spec.fracture_strain == fracture_strain
        assert not fracture_check(spec, fracture_strain - 1e-9)
        assert not fracture_check(spec, fracture_strain)
        assert fracture_check(spec, fracture_strain + 1e-9)

    def test_zero_strain_safe(self):
        assert not fracture_check(MATERIAL_PRESETS["ecoflex-0wt"], 0.0)

    def test_material_validation(self):
        with pytest.raises(DomainError):
            MaterialSpec("bad", -1.0, 4.0, 6.0, 1e5, 0.43, 1070.0, 0.0)
        with pytest.raises(DomainError):
            MaterialSpec("bad", 1e4, 6.0, 4.0, 1e5, 0.43, 1070.0, 0.0)
        with pytest.raises(DomainError):
            MaterialSpec("bad", 1e4, 4.0, 6.0, 1e5, 0.5, 1070.0, 0.0)


class TestBendAngle:
    def test_zero_pressure(self):
        assert bend_angle(DEFAULT_ACTUATOR, 0.0) == 0.0

    def test_full_pressure_anchor(self):
        assert bend_angle(DEFAULT_ACTUATOR, 12.0) == pytest.approx(35.0, rel=1e-12)

    def test_odd_in_pressure(self):
        for p in (0.5, 3.0, 7.25, 12.0):
            assert bend_angle(DEFAULT_ACTUATOR, -p) == -bend_angle(DEFAULT_ACTUATOR, p)

    def test_overpressure(self):
        with pytest.raises(ActuationError):
            bend_angle(DEFAULT_ACTUATOR, 12.5)

    def test_piecewise_table_override(self):
        actuator = ActuatorSpec(
            angle_per_pressure=35.0 / 12.0,
            max_pressure=12.0,
            strain_per_pressure=0.8356 / 12.0,
            stride_per_cycle=0.025,
            cycle_period=1.0,
            angle_table=((0.0, 0.0), (6.0, 25.0), (12.0, 35.0)),
        )
        assert bend_angle(actuator, 6.0) == 25.0
        assert bend_angle(actuator, 3.0) == pytest.approx(12.5, rel=1e-12)
        assert bend_angle(actuator, -6.0) == -25.0

    def test_bad_table_rejected(self):
        with pytest.raises(DomainError):
            ActuatorSpec(1.0, 12.0, 0.07, 0.025, 1.0, angle_table=((1.0, 5.0), (12.0, 35.0)))


class TestMaxChannelStrain:
    def test_full_pressure_anchor(self):
        assert max_channel_strain(DEFAULT_ACTUATOR, 12.0) == pytest.approx(0.8356, rel=1e-12)

    def test_zero(self):
        assert max_channel_strain(DEFAULT_ACTUATOR, 0.0) == 0.0

    def test_half_pressure(self):
        assert max_channel_strain(DEFAULT_ACTUATOR, 6.0) == pytest.approx(0.4178, rel=1e-12)

    def test_sign_insensitive(self):
        assert max_channel_strain(DEFAULT_ACTUATOR, -12.0) == pytest.approx(0.8356, rel=1e-12)

    def test_overpressure(self):
        with pytest.raises(ActuationError):
            max_channel_strain(DEFAULT_ACTUATOR, -12.01)

    def test_wall_material_check(self):
        validate_actuator_wall(DEFAULT_ACTUATOR, MATERIAL_PRESETS["ecoflex-20wt"])
        weak = MaterialSpec("weak", 4e4, 0.2, 0.5, 1e5, 0.43, 1070.0, 0.0)
        with pytest.raises(DomainError):
            validate_actuator_wall(DEFAULT_ACTUATOR, weak)


class TestGaitAdvance:
    def test_immobilized_robot_stays(self):
        state = GaitState(position=1.5)
        out = gait_advance(state, DEFAULT_ACTUATOR, 25.0, mobility=0.0)
        assert out.position == 1.5

    def test_full_mobility_speed_anchor(self):
        state = GaitState()
        out = gait_advance(state, DEFAULT_ACTUATOR, 10.0, mobility=1.0)
        assert out.position == pytest.approx(0.25, rel=1e-12)

    def test_half_mobility(self):
        out = gait_advance(GaitState(), DEFAULT_ACTUATOR, 10.0, mobility=0.5)
        assert out.position == pytest.approx(0.125, rel=1e-12)

    def test_additive_over_concatenated_intervals(self):
        one = gait_advance(GaitState(), DEFAULT_ACTUATOR, 7.7, mobility=0.8)
        two = gait_advance(one, DEFAULT_ACTUATOR, 2.3, mobility=0.8)
        direct = gait_advance(GaitState(), DEFAULT_ACTUATOR, 10.0, mobility=0.8)
        assert abs(two.position - direct.position) < 1e-12

    def test_cycle_bookkeeping(self):
        out = gait_advance(GaitState(), DEFAULT_ACTUATOR, 2.25, mobility=1.0)
        assert out.cycle_count == 2
        assert out.cycle_progress == pytest.approx(0.25, abs=1e-12)
        assert out.phase == "flexed"
        assert out.current_angle == pytest.approx(35.0, rel=1e-12)
        out2 = gait_advance(out, DEFAULT_ACTUATOR, 0.5, mobility=1.0)
        assert out2.phase == "extended"
        assert out2.current_angle == 0.0

    def test_validation(self):
        with pytest.raises(DomainError):
            gait_advance(GaitState(), DEFAULT_ACTUATOR, -1.0, 1.0)
        with pytest.raises(DomainError):
            gait_advance(GaitState(), DEFAULT_ACTUATOR, 1.0, 1.5)


class TestPresets:
    def test_fracture_table(self):
        table = {
            "ecoflex-0wt": (0.4251e6, 6.8372),
            "ecoflex-10wt": (0.1453e6, 5.7167),
            "ecoflex-20wt": (0.1897e6, 4.9334),
        }
        for name, (stress, strain) in table.items():
            spec = MATERIAL_PRESETS[name]
            assert spec.fracture_stress == pytest.approx(stress, rel=1e-12)
            assert spec.fracture_strain == pytest.approx(strain, rel=1e-12)
            assert spec.modulus == pytest.approx(40.02e3, rel=1e-12)
            assert spec.elastic_limit_strain == 4.0
            assert spec.poisson == 0.43
            assert spec.density == 1070.0

    def test_default_actuator_speed(self):
        assert DEFAULT_ACTUATOR.speed == 0.025
