"""
Pairwise detection matrix harness

Every (platform, state) configuration is paired with every other in a
two-device test with both handsets in range for the whole test. A cell
passes when at least one identified detection happens in either direction.
"""

import itertools
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ble_proximity_sim.core.errors import ScenarioValidationError
from ble_proximity_sim.core.types import (
    AppState, DEFAULT_APP_SERVICE, DeviceConfig, MacPolicy, Micros, PlatformKind,
    ServiceId, StateSchedule, US_PER_SECOND, stable_id_from_name,
)
from ble_proximity_sim.platform.behavior import (
    ALL_CONFIGS, BehaviorTable, ConfigKey, DEFAULT_CONNECT_LATENCY,
)
from ble_proximity_sim.platform.handsets import HANDSETS, Handset
from ble_proximity_sim.simengine.engine import run
from ble_proximity_sim.simengine.scenario import ProximityInterval, Scenario
from ble_proximity_sim.utils.logging import LoggerMixin

Cell = Tuple[ConfigKey, ConfigKey]

DEFAULT_TEST_DURATION: Micros = 60 * US_PER_SECOND

# Measured on handsets: only two locked iOS devices failed to see each other
MEASURED_REFERENCE: Dict[Cell, bool] = {
    (row, col): not (row == col == (PlatformKind.IOS_LIKE, AppState.LOCKED))
    for row in ALL_CONFIGS for col in ALL_CONFIGS
}


def config_label(key: ConfigKey) -> str:
    platform, state = key
    return f"{platform.label}-{state.label}"


def parse_config_label(label: str) -> ConfigKey:
    for key in ALL_CONFIGS:
        if config_label(key) == label:
            return key
    raise ValueError(f"unknown configuration label: {label!r}")


def default_template(name: str) -> DeviceConfig:
    return DeviceConfig(
        device_id=stable_id_from_name(name),
        platform=PlatformKind.ANDROID_LIKE,
        mac_policy=MacPolicy.fixed(),
        schedule=StateSchedule.constant(AppState.FOREGROUND),
        name=name,
    )


def _cell_seed(seed: int, *indices: int) -> int:
    return int(np.random.SeedSequence([seed, *indices]).generate_state(1, dtype=np.uint64)[0])


def _pair_passes(first: DeviceConfig, second: DeviceConfig, table: BehaviorTable,
                 test_duration: Micros, seed: int, app_service: ServiceId,
                 connect_latency: Micros) -> bool:
    scenario = Scenario(
        duration=test_duration,
        devices=(first, second),
        proximity=(ProximityInterval(0, test_duration, frozenset({(first.device_id, second.device_id)})),),
        app_service=app_service,
        seed=seed,
        connect_latency=connect_latency,
    )
    return any(d.resolved_id is not None for d in run(scenario, table))


@dataclass(frozen=True)
class MatrixResult:
    cells: Mapping[Cell, bool]

    def passed(self, row: ConfigKey, col: ConfigKey) -> bool:
        return self.cells[(row, col)]

    @property
    def pass_count(self) -> int:
        return sum(self.cells.values())

    @property
    def fail_count(self) -> int:
        return len(self.cells) - self.pass_count

    def differences(self, reference: Mapping[Cell, bool] = MEASURED_REFERENCE) -> List[Cell]:
        return [cell for cell in reference if self.cells.get(cell) != reference[cell]]

    def matches(self, reference: Mapping[Cell, bool] = MEASURED_REFERENCE) -> bool:
        return not self.differences(reference)

    def to_text(self) -> str:
        labels = [config_label(key) for key in ALL_CONFIGS]
        width = max(len(label) for label in labels) + 2
        lines = [' ' * width + ''.join(label.rjust(width) for label in labels)]
        for row in ALL_CONFIGS:
            cells = ''.join(('Pass' if self.cells[(row, col)] else 'Fail').rjust(width) for col in ALL_CONFIGS)
            lines.append(config_label(row).ljust(width) + cells)
        lines.append(f"{self.pass_count} Pass / {self.fail_count} Fail")
        return '\n'.join(lines)

    def to_rows(self) -> List[Tuple[str, str, str]]:
        return [
            (config_label(row), config_label(col), 'Pass' if self.cells[(row, col)] else 'Fail')
            for row in ALL_CONFIGS for col in ALL_CONFIGS
        ]

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[str]]) -> 'MatrixResult':
        cells = {}
        for row_label, col_label, outcome in rows:
            if outcome not in ('Pass', 'Fail'):
                raise ValueError(f"matrix cell must be Pass or Fail, got {outcome!r}")
            cells[(parse_config_label(row_label), parse_config_label(col_label))] = outcome == 'Pass'
        if set(cells) != set(MEASURED_REFERENCE):
            raise ValueError("matrix rows must cover all 36 configuration pairs exactly once")
        return cls(cells)


class MatrixHarness(LoggerMixin):
    """Runs the 6x6 configuration grid for a pair of device templates"""

    def __init__(self, table: BehaviorTable,
                 cfg_a: Optional[DeviceConfig] = None,
                 cfg_b: Optional[DeviceConfig] = None,
                 test_duration: Micros = DEFAULT_TEST_DURATION,
                 seed: int = 0,
                 app_service: ServiceId = DEFAULT_APP_SERVICE,
                 connect_latency: Micros = DEFAULT_CONNECT_LATENCY):
        if test_duration <= 0:
            raise ScenarioValidationError(f"matrix test duration must be > 0, got {test_duration} us")
        self.table = table
        self.cfg_a = cfg_a or default_template('matrix-row')
        self.cfg_b = cfg_b or default_template('matrix-col')
        self.test_duration = test_duration
        self.seed = seed
        self.app_service = app_service
        self.connect_latency = connect_latency

    def _device(self, template: DeviceConfig, key: ConfigKey, name: str) -> DeviceConfig:
        platform, state = key
        return replace(template, device_id=stable_id_from_name(name), platform=platform,
                       schedule=StateSchedule.constant(state), name=name)

    def run_cell(self, row: ConfigKey, col: ConfigKey) -> bool:
        i, j = ALL_CONFIGS.index(row), ALL_CONFIGS.index(col)
        return _pair_passes(
            self._device(self.cfg_a, row, f"matrix-row-{config_label(row)}"),
            self._device(self.cfg_b, col, f"matrix-col-{config_label(col)}"),
            self.table, self.test_duration, _cell_seed(self.seed, i, j),
            self.app_service, self.connect_latency,
        )

    def run(self) -> MatrixResult:
        cells = {(row, col): self.run_cell(row, col) for row in ALL_CONFIGS for col in ALL_CONFIGS}
        result = MatrixResult(cells)
        self.logger.info(f"Matrix (seed {self.seed}): {result.pass_count} Pass / {result.fail_count} Fail")
        return result


def pairwise_matrix(cfg_a: Optional[DeviceConfig], cfg_b: Optional[DeviceConfig], table: BehaviorTable,
                    test_duration: Micros = DEFAULT_TEST_DURATION, seed: int = 0,
                    app_service: ServiceId = DEFAULT_APP_SERVICE,
                    connect_latency: Micros = DEFAULT_CONNECT_LATENCY) -> MatrixResult:
    """
    Pass/Fail for every (platform, state) pairing.

    ``cfg_a`` supplies timing and MAC policy for the row device and ``cfg_b``
    for the column device; platform and state are set per cell.
    """
    return MatrixHarness(table, cfg_a, cfg_b, test_duration, seed, app_service, connect_latency).run()


HandsetCell = Tuple[str, AppState, str, AppState]


@dataclass(frozen=True)
class HandsetMatrixResult:
    cells: Mapping[HandsetCell, bool]

    def inconsistencies(self, reference: Mapping[Cell, bool] = MEASURED_REFERENCE) -> List[HandsetCell]:
        """Handset cells whose outcome differs from their platform-level cell"""
        out = []
        for (name_a, state_a, name_b, state_b), passed in self.cells.items():
            expected = reference[((HANDSETS[name_a].platform, state_a), (HANDSETS[name_b].platform, state_b))]
            if passed != expected:
                out.append((name_a, state_a, name_b, state_b))
        return out

    def to_rows(self) -> List[Tuple[str, str, str, str, str]]:
        return [
            (name_a, state_a.label, name_b, state_b.label, 'Pass' if passed else 'Fail')
            for (name_a, state_a, name_b, state_b), passed in self.cells.items()
        ]


def handset_matrix(table: BehaviorTable, test_duration: Micros = DEFAULT_TEST_DURATION, seed: int = 0,
                   handsets: Optional[Sequence[Handset]] = None,
                   app_service: ServiceId = DEFAULT_APP_SERVICE,
                   connect_latency: Micros = DEFAULT_CONNECT_LATENCY) -> HandsetMatrixResult:
    """Repeat the state grid for every combination of two distinct physical handsets"""
    if test_duration <= 0:
        raise ScenarioValidationError(f"matrix test duration must be > 0, got {test_duration} us")
    handsets = list(handsets or HANDSETS.values())
    cells: Dict[HandsetCell, bool] = {}
    for (i, first), (j, second) in itertools.combinations(enumerate(handsets), 2):
        for (si, state_a), (sj, state_b) in itertools.product(enumerate(AppState), repeat=2):
            cells[(first.name, state_a, second.name, state_b)] = _pair_passes(
                first.device(state_a), second.device(state_b), table, test_duration,
                _cell_seed(seed, i, j, si, sj), app_service, connect_latency,
            )
    return HandsetMatrixResult(cells)
