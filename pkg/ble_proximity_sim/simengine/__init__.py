from ble_proximity_sim.simengine.engine import AdvEvent, MAX_ADV_JITTER, SimulationEngine, run
from ble_proximity_sim.simengine.matrix import (
    DEFAULT_TEST_DURATION, HandsetMatrixResult, MatrixHarness, MatrixResult, MEASURED_REFERENCE,
    config_label, handset_matrix, pairwise_matrix,
)
from ble_proximity_sim.simengine.replay import ReplayViolation, verify_log
from ble_proximity_sim.simengine.scenario import DetectionLog, ProximityInterval, Scenario, state_at

__all__ = [
    'AdvEvent', 'MAX_ADV_JITTER', 'SimulationEngine', 'run',
    'DEFAULT_TEST_DURATION', 'HandsetMatrixResult', 'MatrixHarness', 'MatrixResult', 'MEASURED_REFERENCE',
    'config_label', 'handset_matrix', 'pairwise_matrix',
    'ReplayViolation', 'verify_log',
    'DetectionLog', 'ProximityInterval', 'Scenario', 'state_at',
]
