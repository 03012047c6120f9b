"""
Text formats written and read by the command line

Detection log: optional ``# seed=... duration_us=...`` comment, mandatory
header ``t_us,scanner_id,observed_mac,service_confirmed,resolved_id``, one
row per detection, empty ``resolved_id`` when absent.

Graph: header ``id_a,id_b,weight_seconds``, canonical pairs sorted
lexicographically, weights with exactly six decimals.

Matrix: header ``row,column,result`` followed by the 36 cells.
"""

import csv
import re
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import List, Optional

from ble_proximity_sim.core.errors import LogFormatError
from ble_proximity_sim.core.types import (
    Detection, MacAddress, SocialGraph, US_PER_SECOND, canonical_pair, format_seconds,
    parse_uuid,
)
from ble_proximity_sim.simengine.matrix import MatrixResult
from ble_proximity_sim.simengine.scenario import DetectionLog

LOG_HEADER = ['t_us', 'scanner_id', 'observed_mac', 'service_confirmed', 'resolved_id']
GRAPH_HEADER = ['id_a', 'id_b', 'weight_seconds']
MATRIX_HEADER = ['row', 'column', 'result']

_META_RE = re.compile(r'^#\s*seed=(\d+)\s+duration_us=(\d+)\s*$')


def _rows(path: Path):
    """(line number, row) pairs, skipping blank lines"""
    with open(path, newline='') as f:
        for number, row in enumerate(csv.reader(f), start=1):
            if row:
                yield number, row


def write_log(log: DetectionLog, path: Path) -> None:
    with open(path, 'w', newline='') as f:
        if log.seed is not None and log.duration is not None:
            f.write(f"# seed={log.seed} duration_us={log.duration}\n")
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(LOG_HEADER)
        for d in log:
            writer.writerow([
                d.timestamp, d.scanner, d.observed_mac,
                'true' if d.service_confirmed else 'false',
                d.resolved_id if d.resolved_id is not None else '',
            ])


def read_log(path: Path) -> DetectionLog:
    """
    Raises:
        LogFormatError: on a missing header, malformed row or bad ordering
    """
    seed: Optional[int] = None
    duration: Optional[int] = None
    detections: List[Detection] = []
    header_seen = False

    for number, row in _rows(path):
        if row[0].startswith('#'):
            match = _META_RE.match(','.join(row))
            if match and not header_seen:
                seed, duration = int(match.group(1)), int(match.group(2))
            continue
        if not header_seen:
            if row != LOG_HEADER:
                raise LogFormatError(f"expected header {','.join(LOG_HEADER)}", number)
            header_seen = True
            continue
        if len(row) != len(LOG_HEADER):
            raise LogFormatError(f"expected {len(LOG_HEADER)} fields, got {len(row)}", number)
        t_us, scanner, mac, confirmed, resolved = row
        if confirmed not in ('true', 'false'):
            raise LogFormatError(f"service_confirmed must be true or false, got {confirmed!r}", number)
        try:
            if not t_us.isdigit():
                raise ValueError(f"t_us must be a non-negative integer, got {t_us!r}")
            detections.append(Detection(
                timestamp=int(t_us),
                scanner=parse_uuid(scanner),
                observed_mac=MacAddress.parse(mac),
                service_confirmed=confirmed == 'true',
                resolved_id=parse_uuid(resolved) if resolved else None,
            ))
        except ValueError as e:
            raise LogFormatError(str(e), number) from e

    if not header_seen:
        raise LogFormatError("detection log has no header row")
    try:
        return DetectionLog(tuple(detections), seed=seed, duration=duration)
    except ValueError as e:
        raise LogFormatError(str(e)) from e


def write_graph(graph: SocialGraph, path: Path) -> None:
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(GRAPH_HEADER)
        for (a, b), weight in sorted(graph.edges.items(), key=lambda e: (str(e[0][0]), str(e[0][1]))):
            writer.writerow([a, b, format_seconds(weight)])


def read_graph(path: Path) -> SocialGraph:
    edges = {}
    nodes = set()
    header_seen = False
    for number, row in _rows(path):
        if not header_seen:
            if row != GRAPH_HEADER:
                raise LogFormatError(f"expected header {','.join(GRAPH_HEADER)}", number)
            header_seen = True
            continue
        if len(row) != len(GRAPH_HEADER):
            raise LogFormatError(f"expected {len(GRAPH_HEADER)} fields, got {len(row)}", number)
        try:
            a, b = parse_uuid(row[0]), parse_uuid(row[1])
            if (a, b) != canonical_pair(a, b):
                raise ValueError("edge endpoints are not in canonical order")
            weight = Decimal(row[2]) * US_PER_SECOND
            if weight != weight.to_integral_value():
                raise ValueError(f"weight finer than one microsecond: {row[2]!r}")
        except (ValueError, InvalidOperation) as e:
            raise LogFormatError(str(e), number) from e
        edges[(a, b)] = int(weight)
        nodes.update((a, b))
    if not header_seen:
        raise LogFormatError("graph file has no header row")
    try:
        return SocialGraph(frozenset(nodes), edges)
    except ValueError as e:
        raise LogFormatError(str(e)) from e


def write_matrix(result: MatrixResult, path: Path) -> None:
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(MATRIX_HEADER)
        writer.writerows(result.to_rows())


def read_matrix(path: Path) -> MatrixResult:
    rows = list(_rows(path))
    if not rows or rows[0][1] != MATRIX_HEADER:
        raise LogFormatError(f"expected header {','.join(MATRIX_HEADER)}", 1)
    try:
        return MatrixResult.from_rows(row for _, row in rows[1:])
    except ValueError as e:
        raise LogFormatError(str(e)) from e
