"""
MAC address rotation
"""

import numpy as np

from ble_proximity_sim.core.types import MacAddress, MacMode, MacPolicy, Micros


def next_mac(policy: MacPolicy, current: MacAddress, elapsed_since_rotation: Micros,
             rng: np.random.Generator) -> MacAddress:
    """
    Address to use now, given the time since the last rotation.

    Fixed policies never change. Rotating policies keep ``current`` until a
    full period has elapsed, then draw a fresh random address from ``rng``.
    """
    if policy.mode is MacMode.FIXED:
        return current
    if elapsed_since_rotation < policy.rotation_period:
        return current
    return MacAddress.random(rng)
