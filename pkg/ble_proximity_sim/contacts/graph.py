"""
Social graph from contact intervals
"""

from collections import defaultdict
from typing import Dict, Iterable, Tuple

from ble_proximity_sim.core.types import ContactInterval, Micros, SocialGraph, StableId


def build_graph(intervals: Iterable[ContactInterval]) -> SocialGraph:
    """Nodes are every endpoint; an edge weighs the summed contact time of its pair"""
    nodes = set()
    weights: Dict[Tuple[StableId, StableId], Micros] = defaultdict(int)
    for interval in intervals:
        nodes.update(interval.pair)
        weights[interval.pair] += interval.duration
    return SocialGraph(frozenset(nodes), {pair: w for pair, w in weights.items() if w > 0})
