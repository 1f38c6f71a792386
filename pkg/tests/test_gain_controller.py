"""Gain sigmoid, lag controller, intent, lane switching, line crossing."""

import math

import pytest

from coopsteer.shared_control import (
    AssistState,
    CooperativeStatus,
    GainParams,
    das_gain,
    das_torque,
    detect_intent,
    raw_gain,
    switch_lane,
    time_to_line_crossing,
)

GP = GainParams()
RAW = GainParams(smoothing_time=0.0)
II = CooperativeStatus.DRIVER_LED_UNCOOPERATIVE
I = CooperativeStatus.DRIVER_LED_COOPERATIVE


def sigmoid_reference(w_das):
    return 0.5 / (1.0 + math.exp(-10.0 * w_das + 0.4))


class TestGainFunction:
    def test_constant_outside_state_ii(self):
        for status in CooperativeStatus:
            if status is II:
                continue
            assert das_gain(-5.0, status, RAW, 0.5, 0.01) == 0.5

    @pytest.mark.parametrize(
        "w_das,expected",
        [(-0.1, 0.09891), (-1.0, 1.52e-5), (-1e-12, 0.2007)],
    )
    def test_point_checks(self, w_das, expected):
        got = das_gain(w_das, II, RAW, 0.5, 0.01)
        assert got == pytest.approx(sigmoid_reference(w_das), rel=1e-12)
        assert got == pytest.approx(expected, abs=1e-4)

    def test_monotone_increasing_in_state_ii(self):
        previous = None
        for k in range(1000):
            w = -2.0 + 1.9 * k / 999.0  # sweep up to -0.1
            value = raw_gain(w, II, GP)
            assert 0.0 < value < GP.k0
            if previous is not None:
                assert value > previous
            previous = value

    def test_smoothing_lag_settles_to_raw(self):
        gain = GP.k0
        target = sigmoid_reference(-0.5)
        for _ in range(400):  # 4 s >> 20 * 0.2 s
            gain = das_gain(-0.5, II, GP, gain, 0.01)
        assert gain == pytest.approx(target, rel=1e-3)

    def test_smoothed_gain_stays_in_bounds(self):
        gain = GP.k0
        for k in range(500):
            status = II if k % 7 else I
            gain = das_gain(-0.3 - 0.001 * k, status, GP, gain, 0.01)
            assert 0.0 < gain <= GP.k0

    def test_validation(self):
        with pytest.raises(ValueError):
            GainParams(k0=0.0)
        with pytest.raises(ValueError):
            GainParams(intent_fraction=1.0)
        with pytest.raises(ValueError):
            das_gain(math.nan, II, GP, 0.5, 0.01)


class TestTorqueController:
    def test_zero_input_decays_with_time_constant(self):
        assist = AssistState(controller_lag_state=1.0)
        torque = das_torque(assist, 0.0, 0.0, 0.5, 0.15)
        assert torque == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_dc_gain_one(self):
        # constant input u = L*phi + e = 0.4 at gain 0.5 -> torque -> 0.2
        assist = AssistState()
        torque = 0.0
        for _ in range(400):  # 4 s >> 20 * 0.15 s
            assist.controller_lag_state = torque
            torque = das_torque(assist, 0.0, 0.4, 0.5, 0.01)
        assert torque == pytest.approx(0.2, rel=1e-3)

    def test_preview_distance_default(self):
        # 60 km/h for 1.3 s of preview
        assert AssistState().preview_distance == pytest.approx((60.0 / 3.6) * 1.3)

    def test_no_system_always_zero(self):
        assist = AssistState(condition="no_system", controller_lag_state=1.0)
        assert das_torque(assist, 0.5, 2.0, 0.5, 0.01) == 0.0

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            das_torque(AssistState(), 0.0, 0.0, 0.5, 0.0)


class TestIntent:
    def test_below_threshold(self):
        assert detect_intent(0.14, GP) is True

    def test_above_threshold(self):
        assert detect_intent(0.16, GP) is False

    def test_boundary_inclusive(self):
        assert detect_intent(0.15, GP) is True


class TestSwitchLane:
    def test_moving_right(self):
        assert switch_lane(0.0, 0.8, 3.0) == 3.0

    def test_moving_left(self):
        assert switch_lane(3.0, -0.8, 3.0) == 0.0

    def test_no_motion_no_switch(self):
        assert switch_lane(0.0, 0.0, 3.0) == 0.0

    def test_clamped_to_valid_centers(self):
        assert switch_lane(3.0, 0.8, 3.0) == 3.0
        assert switch_lane(0.0, -0.8, 3.0) == 0.0


class TestTimeToLineCrossing:
    def test_direct_evaluation(self):
        assert time_to_line_crossing(0.5, 1.0, 0.0) == pytest.approx(1.0)

    def test_zero_velocity_no_crossing(self):
        assert time_to_line_crossing(0.5, 0.0, 0.0) == math.inf

    def test_slow_drift_above_switch_threshold(self):
        tlc = time_to_line_crossing(1.4, 0.05, 0.0)
        assert tlc == pytest.approx(2.0)
        assert tlc >= 1.5  # no switch yet at the 1.5 s threshold

    def test_motion_away_from_shared_marker(self):
        # left-lane target, drifting toward the left road edge
        assert time_to_line_crossing(0.2, -0.5, 0.0) == math.inf
        # right-lane target, drifting toward the right road edge
        assert time_to_line_crossing(2.8, 0.5, 3.0) == math.inf

    def test_right_lane_target_moving_left(self):
        assert time_to_line_crossing(2.5, -1.0, 3.0) == pytest.approx(1.0)
