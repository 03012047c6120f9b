#!/usr/bin/env python3
"""
Main entry point for the BLE proximity simulator
"""

import sys
from pathlib import Path

# Add the package to Python path
sys.path.insert(0, str(Path(__file__).parent))

from ble_proximity_sim.cli import main


if __name__ == '__main__':
    main()
