"""
Scenario configuration management

Scenario files are TOML with a ``[scenario]`` table, ``[[device]]`` and
``[[proximity]]`` arrays and an optional ``[behavior]`` table of overrides.
"""

import itertools
import os
import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from ble_proximity_sim.analysis.availability import DEFAULT_SESSIONS, UsageModel, usage_schedule
from ble_proximity_sim.core.errors import ConfigParseError, ModelValidationError, ScenarioValidationError
from ble_proximity_sim.core.types import (
    AppState, DEFAULT_APP_SERVICE, DeviceConfig, MacAddress, MacMode, MacPolicy, Micros,
    PlatformKind, ServiceId, StableId, StateSchedule, US_PER_SECOND, parse_duration, parse_uuid,
    stable_id_from_name,
)
from ble_proximity_sim.platform.behavior import (
    BehaviorTable, DEFAULT_CONNECT_LATENCY, default_behavior_table,
)
from ble_proximity_sim.platform.handsets import DEFAULT_ROTATION_PERIOD, get_handset
from ble_proximity_sim.simengine.scenario import ProximityInterval, Scenario
from ble_proximity_sim.utils.logging import LoggerMixin

SEED_ENV_VAR = 'BLE_SIM_SEED'

DEFAULT_TIMING: Dict[str, Micros] = {
    'adv_interval': 1 * US_PER_SECOND,
    'scan_interval': 5 * US_PER_SECOND,
    'scan_window': 2 * US_PER_SECOND,
}

_SECTIONS = {'scenario', 'device', 'proximity', 'behavior'}
# Only meaningful with schedule = "usage"
_USAGE_KEYS = {'usage_hours', 'days', 'sleep_hours', 'sessions'}
_SCENARIO_KEYS = {
    'duration', 'seed', 'app_service', 'connect_latency', 'loss_probability',
    'log_unconfirmed', 'mac_rotation', *DEFAULT_TIMING,
}
_DEVICE_KEYS = {
    'name', 'id', 'platform', 'handset', 'mac_policy', 'mac_rotation', 'mac',
    'state', 'schedule', *_USAGE_KEYS, *DEFAULT_TIMING,
}
_PROXIMITY_KEYS = {'start', 'end', 'pairs'}
_BEHAVIOR_KEYS = {'advertise', 'degraded', 'can_scan', 'decodes_primary', 'decodes_overflow', 'can_connect'}
_TOML_POSITION_RE = re.compile(r'\(at line (\d+), column (\d+)\)')


def default_seed() -> int:
    """Seed used when neither the command line nor the config names one"""
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigParseError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None


class ScenarioConfigManager(LoggerMixin):
    """Loads a scenario file and turns its sections into domain objects"""

    def __init__(self, config_file: Optional[Union[str, Path]] = None):
        self.config_file = Path(config_file) if config_file else None
        self.config: Dict[str, Any] = {}
        if self.config_file is not None:
            self.load_config()

    def load_config(self) -> Dict[str, Any]:
        """
        Raises:
            ConfigParseError: on TOML syntax errors or unknown sections
            OSError: if the file cannot be read
        """
        try:
            with open(self.config_file, 'rb') as f:
                self.config = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            match = _TOML_POSITION_RE.search(str(e))
            line, column = (int(match.group(1)), int(match.group(2))) if match else (None, None)
            raise ConfigParseError(_TOML_POSITION_RE.sub('', str(e)).strip(), line=line, column=column) from e

        unknown = set(self.config) - _SECTIONS
        if unknown:
            raise ConfigParseError(f"unknown section(s): {', '.join(sorted(unknown))}")
        self.logger.info(f"Configuration loaded from {self.config_file}")
        return self.config

    def get(self, key: str, default: Any = None) -> Any:
        return self.config.get(key, default)

    # ------------------------------------------------------------------ helpers

    @staticmethod
    def _table(value: Any, field: str, allowed: set) -> Mapping[str, Any]:
        if not isinstance(value, dict):
            raise ConfigParseError("expected a table", field=field)
        unknown = set(value) - allowed
        if unknown:
            raise ConfigParseError(f"unknown key(s): {', '.join(sorted(unknown))}", field=field)
        return value

    @staticmethod
    def _duration(value: Any, field: str) -> Micros:
        try:
            return parse_duration(value)
        except ValueError as e:
            raise ConfigParseError(str(e), field=field) from e

    @staticmethod
    def _typed(value: Any, expected: type, field: str) -> Any:
        if expected is int and isinstance(value, bool) or not isinstance(value, expected):
            raise ConfigParseError(f"expected {expected.__name__}, got {value!r}", field=field)
        return value

    def get_scenario_section(self) -> Mapping[str, Any]:
        return self._table(self.config.get('scenario', {}), 'scenario', _SCENARIO_KEYS)

    def get_timing_defaults(self) -> Dict[str, Micros]:
        section = self.get_scenario_section()
        return {
            key: self._duration(section[key], f"scenario.{key}") if key in section else default
            for key, default in DEFAULT_TIMING.items()
        }

    def get_duration(self, default: Optional[Micros] = None) -> Micros:
        section = self.get_scenario_section()
        if 'duration' not in section:
            if default is None:
                raise ConfigParseError("missing required key", field='scenario.duration')
            return default
        return self._duration(section['duration'], 'scenario.duration')

    def get_seed(self, seed_override: Optional[int] = None) -> int:
        if seed_override is not None:
            return seed_override
        section = self.get_scenario_section()
        if 'seed' in section:
            return self._typed(section['seed'], int, 'scenario.seed')
        return default_seed()

    def get_app_service(self) -> ServiceId:
        section = self.get_scenario_section()
        if 'app_service' not in section:
            return DEFAULT_APP_SERVICE
        try:
            return parse_uuid(self._typed(section['app_service'], str, 'scenario.app_service'))
        except ValueError as e:
            raise ConfigParseError(str(e), field='scenario.app_service') from e

    def get_connect_latency(self) -> Micros:
        section = self.get_scenario_section()
        if 'connect_latency' not in section:
            return DEFAULT_CONNECT_LATENCY
        return self._duration(section['connect_latency'], 'scenario.connect_latency')

    # ------------------------------------------------------------------ devices

    def _usage_schedule(self, raw: Mapping[str, Any], field: str, entropy: Tuple[int, int]) -> StateSchedule:
        """A waking day of phone sessions drawn from the monthly usage model"""
        numbers = {}
        for key, default in (('usage_hours', 37.0), ('days', 30.0), ('sleep_hours', 8.0)):
            value = raw.get(key, default)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigParseError(f"expected a number, got {value!r}", field=f"{field}.{key}")
            numbers[key] = float(value)
        sessions = self._typed(raw.get('sessions', DEFAULT_SESSIONS), int, f"{field}.sessions")
        if sessions < 1:
            raise ScenarioValidationError(f"{field}: sessions must be >= 1")
        try:
            model = UsageModel(numbers['usage_hours'], numbers['days'], numbers['sleep_hours'])
        except ModelValidationError as e:
            raise ScenarioValidationError(f"{field}: {e}") from e
        try:
            rng = np.random.default_rng(np.random.SeedSequence(entropy))
        except ValueError as e:
            raise ScenarioValidationError(f"{field}: seed must be a non-negative integer") from e
        schedule = usage_schedule(model, rng, sessions=sessions)
        self.logger.debug(f"{field}: usage schedule with {len(schedule.segments)} segments")
        return schedule

    def _schedule(self, raw: Mapping[str, Any], field: str, entropy: Tuple[int, int] = (0, 0)) -> StateSchedule:
        if 'state' in raw and 'schedule' in raw:
            raise ConfigParseError("give either 'state' or 'schedule', not both", field=field)
        if raw.get('schedule') == 'usage':
            return self._usage_schedule(raw, field, entropy)
        usage_keys = sorted(_USAGE_KEYS & set(raw))
        if usage_keys:
            raise ConfigParseError(f"{', '.join(usage_keys)} need schedule = \"usage\"", field=field)
        try:
            if 'schedule' not in raw:
                return StateSchedule.constant(AppState.parse(self._typed(raw.get('state', 'foreground'), str,
                                                                         f"{field}.state")))
            entries = self._typed(raw['schedule'], list, f"{field}.schedule")
            segments = []
            for i, entry in enumerate(entries):
                entry_field = f"{field}.schedule[{i}]"
                entry = self._table(entry, entry_field, {'at', 'state'})
                if 'at' not in entry or 'state' not in entry:
                    raise ConfigParseError("schedule entries need 'at' and 'state'", field=entry_field)
                segments.append((self._duration(entry['at'], f"{entry_field}.at"),
                                 AppState.parse(self._typed(entry['state'], str, f"{entry_field}.state"))))
        except ConfigParseError:
            raise
        except ValueError as e:
            raise ConfigParseError(str(e), field=field) from e
        try:
            return StateSchedule(tuple(segments))
        except ValueError as e:
            raise ScenarioValidationError(f"{field}: {e}") from e

    def _device(self, index: int, raw: Any, timing: Mapping[str, Micros],
                default_rotation: Micros, seed: int = 0) -> DeviceConfig:
        field = f"device[{index}]"
        raw = self._table(raw, field, _DEVICE_KEYS)

        preset = None
        if 'handset' in raw:
            try:
                preset = get_handset(self._typed(raw['handset'], str, f"{field}.handset"))
            except ValueError as e:
                raise ConfigParseError(str(e), field=f"{field}.handset") from e

        name = self._typed(raw.get('name', preset.name if preset else ''), str, f"{field}.name")
        if 'id' in raw:
            try:
                device_id = parse_uuid(self._typed(raw['id'], str, f"{field}.id"))
            except ValueError as e:
                raise ConfigParseError(str(e), field=f"{field}.id") from e
        elif name:
            device_id = stable_id_from_name(name)
        else:
            raise ConfigParseError("a device needs a 'name' or an 'id'", field=field)

        if 'platform' in raw:
            try:
                platform = PlatformKind(self._typed(raw['platform'], str, f"{field}.platform"))
            except ValueError as e:
                raise ConfigParseError(str(e), field=f"{field}.platform") from e
        elif preset is not None:
            platform = preset.platform
        else:
            raise ConfigParseError("missing required key", field=f"{field}.platform")

        rotation = (self._duration(raw['mac_rotation'], f"{field}.mac_rotation")
                    if 'mac_rotation' in raw else default_rotation)
        if rotation <= 0:
            raise ScenarioValidationError(f"{field}: mac_rotation must be > 0")
        if 'mac_policy' in raw:
            try:
                mode = MacMode(self._typed(raw['mac_policy'], str, f"{field}.mac_policy"))
            except ValueError as e:
                raise ConfigParseError(str(e), field=f"{field}.mac_policy") from e
        else:
            mode = preset.mac_policy.mode if preset else MacMode.FIXED
        mac_policy = MacPolicy.rotating(rotation) if mode is MacMode.ROTATING_RANDOM else MacPolicy.fixed()

        mac = None
        if 'mac' in raw:
            try:
                mac = MacAddress.parse(self._typed(raw['mac'], str, f"{field}.mac"))
            except ValueError as e:
                raise ConfigParseError(str(e), field=f"{field}.mac") from e

        device_timing = {
            key: self._duration(raw[key], f"{field}.{key}") if key in raw else default
            for key, default in timing.items()
        }
        schedule = self._schedule(raw, field, (seed, index))
        try:
            return DeviceConfig(
                device_id=device_id,
                platform=platform,
                mac_policy=mac_policy,
                schedule=schedule,
                name=name,
                initial_mac=mac,
                **device_timing,
            )
        except ValueError as e:
            raise ScenarioValidationError(f"{field}: {e}") from e

    def get_devices(self, seed: int = 0) -> List[DeviceConfig]:
        """Usage schedules are drawn from a stream keyed by ``seed`` and the device's position"""
        section = self.get_scenario_section()
        rotation = (self._duration(section['mac_rotation'], 'scenario.mac_rotation')
                    if 'mac_rotation' in section else DEFAULT_ROTATION_PERIOD)
        raw_devices = self._typed(self.config.get('device', []), list, 'device')
        timing = self.get_timing_defaults()
        return [self._device(i, raw, timing, rotation, seed) for i, raw in enumerate(raw_devices)]

    # ---------------------------------------------------------------- proximity

    @staticmethod
    def _resolve_device(ref: Any, lookup: Mapping[str, StableId], field: str) -> StableId:
        if not isinstance(ref, str):
            raise ConfigParseError(f"device references are strings, got {ref!r}", field=field)
        if ref not in lookup:
            raise ScenarioValidationError(f"{field}: unknown device '{ref}'")
        return lookup[ref]

    def get_proximity(self, devices: List[DeviceConfig], duration: Micros) -> List[ProximityInterval]:
        lookup: Dict[str, StableId] = {}
        for dev in devices:
            lookup[str(dev.device_id)] = dev.device_id
            if dev.name:
                lookup[dev.name] = dev.device_id

        intervals = []
        for i, raw in enumerate(self._typed(self.config.get('proximity', []), list, 'proximity')):
            field = f"proximity[{i}]"
            raw = self._table(raw, field, _PROXIMITY_KEYS)
            start = self._duration(raw.get('start', 0), f"{field}.start")
            end = self._duration(raw['end'], f"{field}.end") if 'end' in raw else duration
            if 'pairs' not in raw:
                raise ConfigParseError("missing required key", field=f"{field}.pairs")

            pairs: List[Tuple[StableId, StableId]] = []
            if raw['pairs'] == 'all':
                ids = sorted(dev.device_id for dev in devices)
                pairs = list(itertools.combinations(ids, 2))
            else:
                for j, pair in enumerate(self._typed(raw['pairs'], list, f"{field}.pairs")):
                    pair_field = f"{field}.pairs[{j}]"
                    if not isinstance(pair, list) or len(pair) != 2:
                        raise ConfigParseError("a pair is a list of two device references", field=pair_field)
                    pairs.append((self._resolve_device(pair[0], lookup, pair_field),
                                  self._resolve_device(pair[1], lookup, pair_field)))
            intervals.append(ProximityInterval(start, end, frozenset(pairs)))
        return intervals

    # ----------------------------------------------------------------- behavior

    def get_behavior_table(self, base: Optional[BehaviorTable] = None) -> BehaviorTable:
        base = base or default_behavior_table()
        overrides = self.config.get('behavior')
        if not overrides:
            return base
        overrides = self._table(overrides, 'behavior', {p.value for p in PlatformKind})
        for platform_name, states in overrides.items():
            states = self._table(states, f"behavior.{platform_name}",
                                 {s.value for s in AppState} | {s.label for s in AppState})
            for state_name, values in states.items():
                state_field = f"behavior.{platform_name}.{state_name}"
                values = self._table(values, state_field, _BEHAVIOR_KEYS)
                for key, value in values.items():
                    expected = str if key == 'advertise' else bool
                    self._typed(value, expected, f"{state_field}.{key}")
                if values.get('advertise') not in (None, 'primary', 'overflow', 'none'):
                    raise ConfigParseError("expected primary, overflow or none", field=f"{state_field}.advertise")
        try:
            table = base.with_overrides(overrides)
        except ValueError as e:
            raise ScenarioValidationError(f"behavior: {e}") from e
        self.logger.info(f"Behavior table overridden (calibration {table.calibration_hash()[:12]})")
        return table

    # ----------------------------------------------------------------- scenario

    def build_scenario(self, seed_override: Optional[int] = None) -> Scenario:
        """
        Raises:
            ConfigParseError: on missing keys, wrong types or bad durations
            ScenarioValidationError: on semantic violations
        """
        section = self.get_scenario_section()
        duration = self.get_duration()
        seed = self.get_seed(seed_override)
        devices = self.get_devices(seed)

        loss = section.get('loss_probability', 0.0)
        if isinstance(loss, bool) or not isinstance(loss, (int, float)):
            raise ConfigParseError(f"expected a number, got {loss!r}", field='scenario.loss_probability')

        return Scenario(
            duration=duration,
            devices=tuple(devices),
            proximity=tuple(self.get_proximity(devices, duration)),
            app_service=self.get_app_service(),
            seed=seed,
            connect_latency=self.get_connect_latency(),
            loss_probability=float(loss),
            log_unconfirmed=self._typed(section.get('log_unconfirmed', False), bool, 'scenario.log_unconfirmed'),
        )
