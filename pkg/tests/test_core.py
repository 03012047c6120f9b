import uuid

import numpy as np
import pytest

from ble_proximity_sim.core.errors import ConfigParseError, LogFormatError
from ble_proximity_sim.core.types import (
    AppState, ContactInterval, Detection, MacAddress, PlatformKind, SocialGraph, StateSchedule,
    canonical_pair, format_seconds, parse_duration, parse_uuid, stable_id_from_name,
)

from conftest import S, make_device

A = stable_id_from_name('a')
B = stable_id_from_name('b')
LOW, HIGH = sorted([A, B])


class TestDurations:
    @pytest.mark.parametrize('text, expected', [
        ('10s', 10 * S),
        ('250ms', 250_000),
        ('1.5m', 90 * S),
        ('2h', 7200 * S),
        ('3us', 3),
        (2, 2 * S),
        (0.5, S // 2),
    ])
    def test_parse(self, text, expected):
        assert parse_duration(text) == expected

    @pytest.mark.parametrize('bad', ['-1s', 'ten seconds', '0.5us', '5 days', True, None])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            parse_duration(bad)

    def test_format_is_exact(self):
        assert format_seconds(12_500_000) == '12.500000'
        assert format_seconds(1) == '0.000001'
        assert format_seconds(0) == '0.000000'


class TestMacAddress:
    def test_render_and_parse(self):
        mac = MacAddress.parse('02:1A:00:00:00:ff')
        assert mac.value == 0x021A000000FF
        assert str(mac) == '02:1a:00:00:00:ff'

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            MacAddress(1 << 48)
        with pytest.raises(ValueError):
            MacAddress.parse('02-1a-00-00-00-ff')

    def test_random_is_local_unicast(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            mac = MacAddress.random(rng)
            assert mac.is_locally_administered
            assert not (mac.value >> 40) & 0x01


class TestStateSchedule:
    def test_boundary_belongs_to_new_segment(self):
        schedule = StateSchedule(((0, AppState.FOREGROUND), (10 * S, AppState.LOCKED)))
        assert schedule.state_at(10 * S - 1) is AppState.FOREGROUND
        assert schedule.state_at(10 * S) is AppState.LOCKED
        assert schedule.state_at(10_000 * S) is AppState.LOCKED

    def test_invalid_segments(self):
        with pytest.raises(ValueError):
            StateSchedule(((5, AppState.FOREGROUND),))
        with pytest.raises(ValueError):
            StateSchedule(((0, AppState.FOREGROUND), (0, AppState.LOCKED)))
        with pytest.raises(ValueError):
            StateSchedule(())

    def test_negative_time(self):
        with pytest.raises(ValueError):
            StateSchedule.constant(AppState.LOCKED).state_at(-1)


def test_app_state_parse_accepts_labels():
    assert AppState.parse('L') is AppState.LOCKED
    assert AppState.parse('background') is AppState.BACKGROUND
    assert AppState.parse('fg') is AppState.FOREGROUND
    with pytest.raises(ValueError):
        AppState.parse('asleep')


def test_platform_labels():
    assert PlatformKind('ios').label == 'iOS'
    assert PlatformKind('android').label == 'Android'


class TestDeviceConfig:
    def test_scan_window_must_fit_interval(self):
        with pytest.raises(ValueError):
            make_device('x', scan_interval=2 * S, scan_window=3 * S)
        with pytest.raises(ValueError):
            make_device('x', adv_interval=0)

    def test_scan_window_is_half_open(self):
        dev = make_device('x')
        assert dev.scan_window_open(0)
        assert dev.scan_window_open(2 * S - 1)
        assert not dev.scan_window_open(2 * S)
        assert dev.scan_window_open(5 * S)


def test_detection_requires_confirmation_to_resolve():
    with pytest.raises(ValueError):
        Detection(0, A, MacAddress(1), service_confirmed=False, resolved_id=B)


def test_canonical_pair():
    assert canonical_pair(HIGH, LOW) == (LOW, HIGH)
    assert canonical_pair(LOW, HIGH) == (LOW, HIGH)
    with pytest.raises(ValueError):
        canonical_pair(A, A)


def test_contact_interval_validation():
    assert ContactInterval(LOW, HIGH, 0, 5).duration == 5
    with pytest.raises(ValueError):
        ContactInterval(HIGH, LOW, 0, 5)
    with pytest.raises(ValueError):
        ContactInterval(LOW, HIGH, 5, 5)


class TestSocialGraph:
    def test_rejects_bad_edges(self):
        with pytest.raises(ValueError):
            SocialGraph(frozenset({A, B}), {(HIGH, LOW): 1})
        with pytest.raises(ValueError):
            SocialGraph(frozenset({A}), {(LOW, HIGH): 1})
        with pytest.raises(ValueError):
            SocialGraph(frozenset({A, B}), {(LOW, HIGH): 0})

    def test_networkx_view(self):
        c = stable_id_from_name('c')
        edges = {canonical_pair(A, B): 30 * S, canonical_pair(B, c): 5 * S}
        graph = SocialGraph(frozenset({A, B, c}), edges)
        assert graph.degree() == {A: 1, B: 2, c: 1}
        assert graph.total_weight == 35 * S
        assert graph.to_networkx()[A][B]['weight'] == 30.0


def test_stable_ids():
    assert stable_id_from_name('alice') == stable_id_from_name('alice')
    assert stable_id_from_name('alice') != stable_id_from_name('bob')
    text = str(uuid.uuid4())
    assert parse_uuid(text) == uuid.UUID(text)
    with pytest.raises(ValueError):
        parse_uuid('not-a-uuid')
    with pytest.raises(ValueError):
        parse_uuid(text.replace('-', ''))


def test_error_messages_carry_location():
    err = ConfigParseError('bad value', field='scenario.duration', line=3, column=5)
    assert str(err) == "line 3, column 5, field 'scenario.duration': bad value"
    assert err.field == 'scenario.duration'
    assert str(LogFormatError('short row', line=7)) == 'line 7: short row'
