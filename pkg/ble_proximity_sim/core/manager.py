"""
Proximity study coordinator
"""

from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from ble_proximity_sim.analysis.availability import (
    AvailabilityReport, DEFAULT_SESSIONS, DEFAULT_TRIALS, UsageModel, availability_report,
)
from ble_proximity_sim.contacts.aggregate import (
    DEFAULT_ATOM_LENGTH, DEFAULT_GAP_TOLERANCE, IdentityFragmentation, aggregate_contacts,
    identity_fragmentation, log_horizon, resolved_sightings, scenario_horizon,
)
from ble_proximity_sim.contacts.graph import build_graph
from ble_proximity_sim.core.config import ScenarioConfigManager, default_seed
from ble_proximity_sim.core.errors import ScenarioValidationError
from ble_proximity_sim.core.types import Micros, SocialGraph, StableId
from ble_proximity_sim.formats import read_log, write_graph, write_log, write_matrix
from ble_proximity_sim.platform.behavior import BehaviorTable
from ble_proximity_sim.simengine.engine import SimulationEngine
from ble_proximity_sim.simengine.matrix import (
    DEFAULT_TEST_DURATION, HandsetMatrixResult, MatrixResult, default_template, handset_matrix,
    pairwise_matrix,
)
from ble_proximity_sim.simengine.replay import ReplayViolation, verify_log
from ble_proximity_sim.simengine.scenario import DetectionLog, Scenario
from ble_proximity_sim.utils.logging import LoggerMixin


class ProximityStudyManager(LoggerMixin):
    """Coordinates config loading, simulation, matrix runs, graph export and analysis"""

    def __init__(self, config_file: Optional[Union[str, Path]] = None):
        self.config_manager = ScenarioConfigManager(config_file)
        self.logger.debug("Proximity study manager initialized")

    def behavior_table(self) -> BehaviorTable:
        return self.config_manager.get_behavior_table()

    def load_scenario(self, seed_override: Optional[int] = None) -> Scenario:
        scenario = self.config_manager.build_scenario(seed_override)
        self.logger.info(f"Scenario loaded: {len(scenario.devices)} devices, seed {scenario.seed}")
        return scenario

    def simulate(self, out_path: Union[str, Path], seed_override: Optional[int] = None,
                 verify: bool = False) -> Tuple[DetectionLog, List[ReplayViolation]]:
        """Run the configured scenario, write its log and optionally replay-check it"""
        scenario = self.load_scenario(seed_override)
        table = self.behavior_table()
        log = SimulationEngine(scenario, table).run()
        write_log(log, Path(out_path))
        violations = verify_log(scenario, table, log) if verify else []
        for violation in violations:
            self.logger.error(f"Replay violation at {violation.detection.timestamp} us: {violation.reason}")
        return log, violations

    def _matrix_settings(self, seed_override: Optional[int], duration_override: Optional[Micros]) -> Dict:
        cfg = self.config_manager
        return {
            'table': self.behavior_table(),
            'test_duration': (duration_override if duration_override is not None
                              else cfg.get_duration(default=DEFAULT_TEST_DURATION)),
            'seed': cfg.get_seed(seed_override),
            'app_service': cfg.get_app_service(),
            'connect_latency': cfg.get_connect_latency(),
            'timing': cfg.get_timing_defaults(),
        }

    def matrix(self, out_path: Union[str, Path], seed_override: Optional[int] = None,
               duration_override: Optional[Micros] = None) -> MatrixResult:
        settings = self._matrix_settings(seed_override, duration_override)
        timing = settings.pop('timing')
        try:
            cfg_a = replace(default_template('matrix-row'), **timing)
            cfg_b = replace(default_template('matrix-col'), **timing)
        except ValueError as e:
            raise ScenarioValidationError(f"scenario: {e}") from e
        result = pairwise_matrix(cfg_a, cfg_b, **settings)
        write_matrix(result, Path(out_path))
        return result

    def handset_matrix(self, seed_override: Optional[int] = None,
                       duration_override: Optional[Micros] = None) -> HandsetMatrixResult:
        settings = self._matrix_settings(seed_override, duration_override)
        settings.pop('timing')
        result = handset_matrix(**settings)
        inconsistent = result.inconsistencies()
        if inconsistent:
            self.logger.warning(f"{len(inconsistent)} handset cells disagree with the platform matrix")
        return result

    def graph(self, log_path: Union[str, Path], out_path: Union[str, Path],
              gap_tolerance: Micros = DEFAULT_GAP_TOLERANCE, min_duration: Micros = 0,
              atom_length: Micros = DEFAULT_ATOM_LENGTH
              ) -> Tuple[SocialGraph, Dict[StableId, IdentityFragmentation]]:
        """
        Aggregate a detection log into a weighted contact graph.

        With a scenario file loaded, lone sightings are clipped to the pair's
        proximity span; otherwise to the duration recorded in the log.
        """
        log = read_log(Path(log_path))
        if self.config_manager.config_file is not None:
            horizon = scenario_horizon(self.config_manager.build_scenario(log.seed))
        else:
            horizon = log_horizon(log)
        intervals = aggregate_contacts(resolved_sightings(log), gap_tolerance, min_duration, atom_length,
                                       horizon)
        graph = build_graph(intervals)
        write_graph(graph, Path(out_path))
        self.logger.info(f"Graph built from {len(log)} detections: "
                         f"{len(intervals)} contacts, {len(graph.edges)} edges")
        return graph, identity_fragmentation(log)

    def analyze(self, model: UsageModel, trials: int = DEFAULT_TRIALS,
                seed: Optional[int] = None, sessions: int = DEFAULT_SESSIONS) -> AvailabilityReport:
        return availability_report(model, trials, default_seed() if seed is None else seed, sessions)
