from ble_proximity_sim.contacts.aggregate import (
    DEFAULT_ATOM_LENGTH, DEFAULT_GAP_TOLERANCE, Horizon, IdentityFragmentation, Sighting,
    aggregate_contacts, identity_fragmentation, log_horizon, resolved_sightings, scenario_horizon,
)
from ble_proximity_sim.contacts.graph import build_graph

__all__ = [
    'DEFAULT_ATOM_LENGTH', 'DEFAULT_GAP_TOLERANCE', 'Horizon', 'IdentityFragmentation', 'Sighting',
    'aggregate_contacts', 'identity_fragmentation', 'log_horizon', 'resolved_sightings',
    'scenario_horizon', 'build_graph',
]
