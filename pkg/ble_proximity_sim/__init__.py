"""
BLE Proximity Simulator

Deterministic discrete-event simulation of app-level BLE proximity detection
between Android-like and iOS-like handsets, with contact-graph export and
lock-state availability analysis.
"""

__version__ = "1.0.0"
__author__ = "Proximity Team"
__description__ = "Cross-platform BLE proximity detection simulator"

from ble_proximity_sim.core.config import ScenarioConfigManager
from ble_proximity_sim.core.manager import ProximityStudyManager
from ble_proximity_sim.utils.logging import get_logger, setup_logging

__all__ = [
    'ProximityStudyManager',
    'ScenarioConfigManager',
    'setup_logging',
    'get_logger',
]
