"""
Presets for the handsets the app was tested on
"""

from dataclasses import dataclass
from typing import Dict, Optional

from ble_proximity_sim.core.types import (
    AppState, DeviceConfig, MacAddress, MacPolicy, Micros, PlatformKind,
    StateSchedule, StableId, US_PER_SECOND, stable_id_from_name,
)

DEFAULT_ROTATION_PERIOD: Micros = 900 * US_PER_SECOND


@dataclass(frozen=True)
class Handset:
    name: str
    platform: PlatformKind
    mac_policy: MacPolicy
    description: str = ''

    def device(self, state: AppState = AppState.FOREGROUND,
               device_id: Optional[StableId] = None,
               initial_mac: Optional[MacAddress] = None, **timing: Micros) -> DeviceConfig:
        """A device config for this handset held in one app state"""
        return DeviceConfig(
            device_id=device_id or stable_id_from_name(self.name),
            platform=self.platform,
            mac_policy=self.mac_policy,
            schedule=StateSchedule.constant(state),
            name=self.name,
            initial_mac=initial_mac,
            **timing,
        )


# Android exposes the hardware address; iOS rotates a random one
HANDSETS: Dict[str, Handset] = {
    handset.name: handset
    for handset in (
        Handset('galaxy-s4-mini', PlatformKind.ANDROID_LIKE, MacPolicy.fixed(), 'Samsung Galaxy S4 mini'),
        Handset('galaxy-s5', PlatformKind.ANDROID_LIKE, MacPolicy.fixed(), 'Samsung Galaxy S5'),
        Handset('iphone-5s', PlatformKind.IOS_LIKE, MacPolicy.rotating(DEFAULT_ROTATION_PERIOD), 'iPhone 5s'),
        Handset('ipad-mini', PlatformKind.IOS_LIKE, MacPolicy.rotating(DEFAULT_ROTATION_PERIOD), 'iPad mini'),
    )
}


def get_handset(name: str) -> Handset:
    try:
        return HANDSETS[name]
    except KeyError:
        raise ValueError(f"unknown handset '{name}' (known: {', '.join(sorted(HANDSETS))})") from None
