from dataclasses import replace

import numpy as np
import pytest

from ble_proximity_sim.contacts.aggregate import aggregate_contacts, resolved_sightings
from ble_proximity_sim.contacts.graph import build_graph
from ble_proximity_sim.core.errors import ScenarioValidationError
from ble_proximity_sim.core.types import (
    AppState, Detection, MacAddress, MacPolicy, PlatformKind, stable_id_from_name,
)
from ble_proximity_sim.simengine.engine import SimulationEngine, run
from ble_proximity_sim.simengine.matrix import (
    MEASURED_REFERENCE, MatrixResult, config_label, handset_matrix, pairwise_matrix, parse_config_label,
)
from ble_proximity_sim.simengine.replay import verify_log
from ble_proximity_sim.simengine.scenario import DetectionLog, ProximityInterval, Scenario

from conftest import S, all_in_range, make_device, random_scenario

IOS = PlatformKind.IOS_LIKE
IOS_LOCKED = (IOS, AppState.LOCKED)


def pair_scenario(first, second, duration=30 * S, seed=0, **kwargs):
    return Scenario(duration, (first, second), (all_in_range((first, second), 0, duration),),
                    seed=seed, **kwargs)


class TestScenario:
    def test_unknown_device(self):
        a = make_device('a')
        stranger = stable_id_from_name('stranger')
        with pytest.raises(ScenarioValidationError):
            Scenario(10 * S, (a,), (ProximityInterval(0, S, frozenset({(a.device_id, stranger)})),))

    def test_duplicate_ids(self):
        with pytest.raises(ScenarioValidationError):
            Scenario(10 * S, (make_device('a'), make_device('a')))

    def test_interval_bounds(self):
        a, b = make_device('a'), make_device('b')
        with pytest.raises(ScenarioValidationError):
            ProximityInterval(5, 5, frozenset({(a.device_id, b.device_id)}))
        with pytest.raises(ScenarioValidationError):
            ProximityInterval(0, 5, frozenset({(a.device_id, a.device_id)}))
        with pytest.raises(ScenarioValidationError):
            Scenario(10 * S, (a, b), (all_in_range((a, b), 0, 11 * S),))

    def test_overlapping_intervals_merge(self):
        a, b = make_device('a'), make_device('b')
        scenario = Scenario(30 * S, (a, b), (all_in_range((a, b), 0, 10 * S), all_in_range((a, b), 5 * S, 20 * S)))
        assert scenario.co_presence(a.device_id, b.device_id) == 20 * S
        assert scenario.contact_window(b.device_id, a.device_id, 3 * S) == 17 * S
        assert scenario.in_range(a.device_id, b.device_id, 20 * S - 1)
        assert not scenario.in_range(a.device_id, b.device_id, 20 * S)
        assert scenario.contact_window(a.device_id, b.device_id, 25 * S) == 0

    def test_devices_sorted_by_id(self):
        devices = [make_device(name) for name in 'dcba']
        scenario = Scenario(S, tuple(devices))
        assert [d.device_id for d in scenario.devices] == sorted(d.device_id for d in devices)


class TestEngine:
    def test_two_android_devices(self, table):
        a, b = make_device('a'), make_device('b')
        log = run(pair_scenario(a, b), table)
        assert len(log) > 0
        assert all(d.service_confirmed for d in log)
        assert {d.resolved_id for d in log if d.scanner == a.device_id} == {b.device_id}
        assert all(a.scan_window_open(d.timestamp) for d in log)
        keys = [d.sort_key for d in log]
        assert keys == sorted(keys)

    def test_no_proximity_no_detections(self, table):
        log = run(Scenario(30 * S, (make_device('a'), make_device('b'))), table)
        assert len(log) == 0

    def test_locked_ios_pair_never_detects(self, table):
        a = make_device('a', IOS, AppState.LOCKED)
        b = make_device('b', IOS, AppState.LOCKED)
        assert len(run(pair_scenario(a, b, duration=60 * S), table)) == 0

    def test_unconfirmed_sightings_when_enabled(self, table):
        a = make_device('a', IOS, AppState.LOCKED)
        b = make_device('b', IOS, AppState.LOCKED)
        log = run(pair_scenario(a, b, duration=60 * S, log_unconfirmed=True), table)
        assert len(log) > 0
        assert not any(d.service_confirmed for d in log)
        assert not log.resolved

    def test_advertisement_count(self, table):
        a, b = make_device('a'), make_device('b')
        engine = SimulationEngine(pair_scenario(a, b, duration=10 * S), table)
        engine.run()
        assert engine.adv_counts == {a.device_id: 10, b.device_id: 10}

    def test_short_contact_is_not_resolved(self, table):
        a, b = make_device('a'), make_device('b')
        scenario = Scenario(10 * S, (a, b), (all_in_range((a, b), 0, S),))
        log = run(scenario, table)
        assert len(log) > 0
        assert not log.resolved

    def test_full_loss(self, table):
        a, b = make_device('a'), make_device('b')
        log = run(pair_scenario(a, b, loss_probability=1.0), table)
        assert len(log) > 0
        assert not log.resolved

    def test_rotating_mac_resolves_to_one_peer(self, table):
        a = make_device('a')
        b = make_device('b', IOS, AppState.FOREGROUND, mac_policy=MacPolicy.rotating(S))
        log = run(pair_scenario(a, b, duration=60 * S), table)
        seen = [d for d in log if d.scanner == a.device_id]
        assert len({d.observed_mac for d in seen}) > 1
        assert {d.resolved_id for d in seen} == {b.device_id}

    def test_fixed_initial_mac_is_used(self, table):
        a = make_device('a')
        b = make_device('b')
        b = replace(b, initial_mac=MacAddress(0x020000000042))
        log = run(pair_scenario(a, b), table)
        assert {d.observed_mac for d in log if d.scanner == a.device_id} == {MacAddress(0x020000000042)}

    def test_deterministic_over_random_scenarios(self, table):
        rng = np.random.default_rng(2024)
        for _ in range(100):
            scenario = random_scenario(rng)
            assert run(scenario, table) == run(scenario, table)

    def test_seed_changes_timing(self, table):
        a, b = make_device('a'), make_device('b')
        first = run(pair_scenario(a, b, seed=1), table)
        second = run(pair_scenario(a, b, seed=2), table)
        assert [d.timestamp for d in first] != [d.timestamp for d in second]


def test_mac_rotation_does_not_change_the_graph(table):
    rng = np.random.default_rng(9)
    fixed_macs = rotating_macs = edges = 0
    for _ in range(8):
        scenario = random_scenario(rng, device_count=5, platform=PlatformKind.ANDROID_LIKE)

        def run_with(policy):
            devices = tuple(replace(dev, mac_policy=policy) for dev in scenario.devices)
            log = run(replace(scenario, devices=devices), table)
            return build_graph(aggregate_contacts(resolved_sightings(log))), log

        fixed_graph, fixed_log = run_with(MacPolicy.fixed())
        rotating_graph, rotating_log = run_with(MacPolicy.rotating(S))
        assert fixed_graph.nodes == rotating_graph.nodes
        assert dict(fixed_graph.edges) == dict(rotating_graph.edges)
        fixed_macs += len({d.observed_mac for d in fixed_log})
        rotating_macs += len({d.observed_mac for d in rotating_log})
        edges += len(fixed_graph.edges)

    assert edges > 0
    assert rotating_macs > fixed_macs


class TestReplay:
    def test_engine_output_replays_cleanly(self, table):
        rng = np.random.default_rng(77)
        for _ in range(50):
            scenario = random_scenario(rng)
            assert verify_log(scenario, table, run(scenario, table)) == []

    def test_detects_tampering(self, table):
        a, b = make_device('a'), make_device('b')
        scenario = pair_scenario(a, b)
        forged = DetectionLog((
            Detection(3 * S, a.device_id, MacAddress(1), True, b.device_id),
            Detection(40 * S, a.device_id, MacAddress(1), True, b.device_id),
        ))
        reasons = [v.reason for v in verify_log(scenario, table, forged)]
        assert reasons == ['outside a scan window', 'outside the scenario timeline']

    def test_undecodable_claim(self, table):
        a = make_device('a', IOS, AppState.LOCKED)
        b = make_device('b', IOS, AppState.LOCKED)
        forged = DetectionLog((Detection(0, a.device_id, MacAddress(1), True, None),))
        violations = verify_log(pair_scenario(a, b), table, forged)
        assert [v.reason for v in violations] == ['no in-range advertiser is decodable']


class TestMatrix:
    def test_reproduces_reference_across_seeds(self, table):
        for seed in range(20):
            result = pairwise_matrix(None, None, table, seed=seed)
            assert result.pass_count == 35
            assert result.fail_count == 1
            assert not result.passed(IOS_LOCKED, IOS_LOCKED)
            assert result.matches()

    def test_counterfactual_locked_overflow_decoding(self, table):
        unlocked = table.with_overrides({'ios': {'locked': {'decodes_overflow': True}}})
        result = pairwise_matrix(None, None, unlocked)
        assert result.pass_count == 36
        assert result.differences() == [(IOS_LOCKED, IOS_LOCKED)]

    def test_ios_background_without_advertising(self, table):
        silent = table.with_overrides({'ios': {'background': {'advertise': 'none'}}})
        result = pairwise_matrix(None, None, silent)
        ios_bg = (IOS, AppState.BACKGROUND)
        # a silent background iPhone still detects the others
        assert result.passed(ios_bg, (PlatformKind.ANDROID_LIKE, AppState.FOREGROUND))
        assert result.passed(ios_bg, IOS_LOCKED)
        assert not result.passed(ios_bg, ios_bg)
        assert result.fail_count == 2

    def test_rows_parse_back(self, table):
        result = pairwise_matrix(None, None, table)
        assert MatrixResult.from_rows(result.to_rows()) == result
        assert '35 Pass / 1 Fail' in result.to_text()

    def test_labels(self):
        assert config_label(IOS_LOCKED) == 'iOS-L'
        assert parse_config_label('Android-BG') == (PlatformKind.ANDROID_LIKE, AppState.BACKGROUND)
        with pytest.raises(ValueError):
            parse_config_label('Windows-FG')
        assert len(MEASURED_REFERENCE) == 36

    def test_rows_must_be_complete(self, table):
        rows = pairwise_matrix(None, None, table).to_rows()[:-1]
        with pytest.raises(ValueError):
            MatrixResult.from_rows(rows)

    def test_handset_pairs_agree_with_platform_matrix(self, table):
        result = handset_matrix(table)
        assert len(result.cells) == 6 * 9
        assert result.inconsistencies() == []

    @pytest.mark.parametrize('test_duration', [0, -S])
    def test_non_positive_duration(self, table, test_duration):
        with pytest.raises(ScenarioValidationError):
            pairwise_matrix(None, None, table, test_duration=test_duration)
        with pytest.raises(ScenarioValidationError):
            handset_matrix(table, test_duration=test_duration)
