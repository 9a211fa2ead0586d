"""Map ingestion: regions, adjacencies, weight tables and square side lengths.

Reads a GeoJSON FeatureCollection into an adjacency graph (regions touch when
their polygons share a boundary segment of positive length), reads weight CSV
tables, and scales weights into square side lengths so that the largest value
maps to a quarter of the map's bounding-box diagonal.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

Point = tuple[float, float]
Ring = list[Point]

# Snapping tolerance for shared-boundary detection, relative to the map diagonal.
ADJACENCY_SNAP = 1e-9


class MapDataError(ValueError):
    """Raised for malformed map or weight inputs."""


class WeightKind(Enum):
    TIME_SERIES = "time_series"
    WEIGHT_VECTORS = "weight_vectors"


@dataclass(frozen=True)
class Region:
    """A map region: polygon rings, centroid, and the displacement anchor.

    ``origin`` is an alias of the centroid; it is the point displacement
    objectives and metrics measure against.
    """

    id: str
    polygon: list[Ring]
    centroid: Point

    @property
    def origin(self) -> Point:
        return self.centroid

    def bbox(self) -> tuple[float, float, float, float]:
        xs = [p[0] for ring in self.polygon for p in ring]
        ys = [p[1] for ring in self.polygon for p in ring]
        return min(xs), min(ys), max(xs), max(ys)


@dataclass(frozen=True)
class AdjacencyGraph:
    """Regions plus the set of unordered adjacent region-id pairs."""

    regions: list[Region]
    edges: frozenset[frozenset[str]]

    def __post_init__(self) -> None:
        ids = [r.id for r in self.regions]
        if len(set(ids)) != len(ids):
            raise MapDataError("duplicate region id")
        known = set(ids)
        for e in self.edges:
            if len(e) != 2:
                raise MapDataError(f"bad edge {set(e)}: self-loop or arity")
            if not e <= known:
                raise MapDataError(f"edge references unknown id: {set(e)}")

    @property
    def region_ids(self) -> list[str]:
        return [r.id for r in self.regions]

    def region(self, rid: str) -> Region:
        for r in self.regions:
            if r.id == rid:
                return r
        raise KeyError(rid)

    def adjacent(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self.edges

    def edge_list(self) -> list[tuple[str, str]]:
        """Edges as sorted ordered pairs, in deterministic order."""
        return sorted(tuple(sorted(e)) for e in self.edges)

    def bbox(self) -> tuple[float, float, float, float]:
        boxes = [r.bbox() for r in self.regions]
        return (
            min(b[0] for b in boxes),
            min(b[1] for b in boxes),
            max(b[2] for b in boxes),
            max(b[3] for b in boxes),
        )

    def diagonal(self) -> float:
        x0, y0, x1, y1 = self.bbox()
        return math.hypot(x1 - x0, y1 - y0)


@dataclass(frozen=True)
class WeightSet:
    """Ordered weight functions, each assigning a positive value per region."""

    functions: list[tuple[str, dict[str, float]]]
    kind: WeightKind

    @property
    def k(self) -> int:
        return len(self.functions)

    def names(self) -> list[str]:
        return [name for name, _ in self.functions]


@dataclass(frozen=True)
class SideLengthTable:
    """Square side length per (function index, region id), in map units."""

    sides: dict[tuple[int, str], float]
    diagonal: float
    function_names: list[str] = field(default_factory=list)

    @property
    def k(self) -> int:
        return 1 + max(i for i, _ in self.sides)

    def side(self, i: int, rid: str) -> float:
        return self.sides[(i, rid)]

    def function_sides(self, i: int) -> dict[str, float]:
        return {rid: s for (j, rid), s in self.sides.items() if j == i}

    def min_side(self) -> float:
        return min(self.sides.values())


# ---------------------------------------------------------------------------
# polygon geometry


def ring_area(ring: Ring) -> float:
    """Signed shoelace area (positive for counterclockwise rings)."""
    n = len(ring)
    if n < 3:
        return 0.0
    acc = 0.0
    for i in range(n):
        x0, y0 = ring[i]
        x1, y1 = ring[(i + 1) % n]
        acc += x0 * y1 - x1 * y0
    return acc / 2.0


def ring_centroid(ring: Ring) -> tuple[Point, float]:
    """Area centroid of a ring and its absolute area."""
    a = ring_area(ring)
    if a == 0.0:
        raise MapDataError("degenerate polygon (zero area)")
    cx = cy = 0.0
    n = len(ring)
    for i in range(n):
        x0, y0 = ring[i]
        x1, y1 = ring[(i + 1) % n]
        cross = x0 * y1 - x1 * y0
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
    return (cx / (6.0 * a), cy / (6.0 * a)), abs(a)


def polygon_centroid(rings: list[Ring]) -> tuple[Point, float]:
    """Centroid of a polygon with holes: first ring exterior, rest holes."""
    (cx, cy), outer = ring_centroid(rings[0])
    if len(rings) == 1:
        return (cx, cy), outer
    num_x, num_y, denom = cx * outer, cy * outer, outer
    for hole in rings[1:]:
        (hx, hy), ha = ring_centroid(hole)
        num_x -= hx * ha
        num_y -= hy * ha
        denom -= ha
    if denom <= 0:
        raise MapDataError("degenerate polygon (holes cover exterior)")
    return (num_x / denom, num_y / denom), denom


def _close_ring(ring: Ring) -> Ring:
    if len(ring) > 1 and ring[0] == ring[-1]:
        return ring[:-1]
    return ring


def _segments(rings: list[Ring]) -> list[tuple[Point, Point]]:
    segs = []
    for ring in rings:
        n = len(ring)
        for i in range(n):
            segs.append((ring[i], ring[(i + 1) % n]))
    return segs


def shared_boundary_length(a: list[Ring], b: list[Ring], tol: float) -> float:
    """Total length of collinear overlap between the two polygons' edges.

    Point contact contributes no length; overlaps shorter than ``tol`` are
    treated as snapping noise.
    """
    total = 0.0
    for p0, p1 in _segments(a):
        ux, uy = p1[0] - p0[0], p1[1] - p0[1]
        ulen = math.hypot(ux, uy)
        if ulen <= tol:
            continue
        ux, uy = ux / ulen, uy / ulen
        for q0, q1 in _segments(b):
            # both endpoints of the other edge must lie on the carrier line
            d0 = abs((q0[0] - p0[0]) * uy - (q0[1] - p0[1]) * ux)
            d1 = abs((q1[0] - p0[0]) * uy - (q1[1] - p0[1]) * ux)
            if d0 > tol or d1 > tol:
                continue
            t0 = (q0[0] - p0[0]) * ux + (q0[1] - p0[1]) * uy
            t1 = (q1[0] - p0[0]) * ux + (q1[1] - p0[1]) * uy
            lo, hi = min(t0, t1), max(t0, t1)
            overlap = min(hi, ulen) - max(lo, 0.0)
            if overlap > tol:
                total += overlap
    return total


# ---------------------------------------------------------------------------
# operations


def load_map(geojson_path: str | Path) -> AdjacencyGraph:
    """Read a GeoJSON FeatureCollection into regions plus derived adjacencies.

    Each Polygon/MultiPolygon feature needs a unique string id (feature ``id``
    or an ``id`` property). Adjacent means the polygons share a boundary
    segment of positive length; touching at a point does not count.
    """
    path = Path(geojson_path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MapDataError(f"cannot parse GeoJSON {path}: {exc}") from exc
    if doc.get("type") != "FeatureCollection":
        raise MapDataError("expected a GeoJSON FeatureCollection")

    regions: list[Region] = []
    seen: set[str] = set()
    for feat in doc.get("features", []):
        rid = feat.get("id") or feat.get("properties", {}).get("id")
        if rid is None:
            raise MapDataError("feature without id")
        rid = str(rid)
        if rid in seen:
            raise MapDataError(f"duplicate region id {rid!r}")
        seen.add(rid)
        geom = feat.get("geometry", {})
        gtype = geom.get("type")
        if gtype == "Polygon":
            parts = [geom["coordinates"]]
        elif gtype == "MultiPolygon":
            parts = geom["coordinates"]
        else:
            raise MapDataError(f"feature {rid!r}: unsupported geometry {gtype!r}")
        part_rings = [
            [[_to_point(pt) for pt in _close_ring(ring)] for ring in part]
            for part in parts
        ]
        # centroid of the largest part stands in for multi-part regions
        best = max(part_rings, key=lambda rr: polygon_centroid(rr)[1])
        centroid, _ = polygon_centroid(best)
        all_rings = [ring for part in part_rings for ring in part]
        regions.append(Region(id=rid, polygon=all_rings, centroid=centroid))

    if not regions:
        raise MapDataError("empty FeatureCollection")

    diag = _diag_of(regions)
    tol = ADJACENCY_SNAP * diag if diag > 0 else ADJACENCY_SNAP
    edges = set()
    boxes = {r.id: r.bbox() for r in regions}
    for i, ra in enumerate(regions):
        for rb in regions[i + 1 :]:
            if not _boxes_near(boxes[ra.id], boxes[rb.id], tol):
                continue
            if shared_boundary_length(ra.polygon, rb.polygon, tol) > 0:
                edges.add(frozenset((ra.id, rb.id)))
    return AdjacencyGraph(regions=regions, edges=frozenset(edges))


def _to_point(pt) -> Point:
    return (float(pt[0]), float(pt[1]))


def _diag_of(regions: list[Region]) -> float:
    boxes = [r.bbox() for r in regions]
    return math.hypot(
        max(b[2] for b in boxes) - min(b[0] for b in boxes),
        max(b[3] for b in boxes) - min(b[1] for b in boxes),
    )


def _boxes_near(a, b, tol: float) -> bool:
    return not (
        a[2] < b[0] - tol or b[2] < a[0] - tol or a[3] < b[1] - tol or b[3] < a[1] - tol
    )


def load_weights(
    csv_path: str | Path, map: AdjacencyGraph, kind: WeightKind
) -> WeightSet:
    """Read a ``region_id, function_name, value`` CSV into a WeightSet.

    Functions are ordered by first appearance; every region must be covered
    by every function and all values must be strictly positive.
    """
    path = Path(csv_path)
    known = set(map.region_ids)
    order: list[str] = []
    values: dict[str, dict[str, float]] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"region_id", "function_name", "value"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise MapDataError(f"weights CSV needs columns {sorted(required)}")
        for row in reader:
            rid = row["region_id"].strip()
            fname = row["function_name"].strip()
            if rid not in known:
                raise MapDataError(f"unknown region id {rid!r}")
            try:
                val = float(row["value"])
            except ValueError as exc:
                raise MapDataError(f"bad value {row['value']!r} for {rid!r}") from exc
            if not val > 0 or not math.isfinite(val):
                raise MapDataError(f"nonpositive value for ({rid!r}, {fname!r})")
            if fname not in values:
                order.append(fname)
                values[fname] = {}
            values[fname][rid] = val
    if not order:
        raise MapDataError("weights CSV has no rows")
    for fname in order:
        missing = known - set(values[fname])
        if missing:
            raise MapDataError(
                f"function {fname!r} missing values for {sorted(missing)}"
            )
    return WeightSet(functions=[(f, values[f]) for f in order], kind=kind)


def scale_weights(
    weights: WeightSet, map: AdjacencyGraph, area_proportional: bool = False
) -> SideLengthTable:
    """Scale weight values into side lengths with the largest mapped to D/4.

    Time series share one global factor across all functions; weight vectors
    are scaled per function. With ``area_proportional`` the value drives the
    square's area instead of its side (side = sqrt of value, then scaled).
    """
    diag = map.diagonal()
    if diag <= 0:
        raise MapDataError("map bounding box has zero diagonal")
    target = diag / 4.0

    def raw(v: float) -> float:
        return math.sqrt(v) if area_proportional else v

    sides: dict[tuple[int, str], float] = {}
    if weights.kind is WeightKind.TIME_SERIES:
        peak = max(raw(v) for _, vals in weights.functions for v in vals.values())
        factor = target / peak
        for i, (_, vals) in enumerate(weights.functions):
            for rid, v in vals.items():
                sides[(i, rid)] = raw(v) * factor
    else:
        for i, (_, vals) in enumerate(weights.functions):
            peak = max(raw(v) for v in vals.values())
            factor = target / peak
            for rid, v in vals.items():
                sides[(i, rid)] = raw(v) * factor
    return SideLengthTable(
        sides=sides, diagonal=diag, function_names=weights.names()
    )


def compute_epsilon(table: SideLengthTable, map: AdjacencyGraph) -> float:
    """Minimum visual gap: smallest square side, capped at 5% of the diagonal."""
    return min(table.min_side(), 0.05 * map.diagonal())
