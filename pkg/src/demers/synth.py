"""Seeded synthetic benchmark instances: grid maps with log-normal weights.

Grid maps stand in for real region maps in tests and experiments. Cell
widths and heights can be jittered (seeded) to break the perfect regularity
of a unit grid; weights can drift multiplicatively across functions to
mimic time series, or be drawn independently to mimic unrelated indicators.
"""

from __future__ import annotations

import json

import numpy as np

from .mapdata import AdjacencyGraph, Region, WeightKind, WeightSet


def grid_region_id(col: int, row: int) -> str:
    return f"r{col}x{row}"


def _grid_lines(cols: int, rows: int, jitter: float, seed: int):
    if jitter < 0 or jitter >= 1:
        raise ValueError("jitter must be in [0, 1)")
    if jitter == 0:
        xs = [float(c) for c in range(cols + 1)]
        ys = [float(r) for r in range(rows + 1)]
        return xs, ys
    rng = np.random.default_rng(seed + 987_654_321)
    xs = np.concatenate([[0.0], np.cumsum(rng.uniform(1 - jitter, 1 + jitter, cols))])
    ys = np.concatenate([[0.0], np.cumsum(rng.uniform(1 - jitter, 1 + jitter, rows))])
    return [float(v) for v in xs], [float(v) for v in ys]


def grid_map(
    cols: int, rows: int | None = None, jitter: float = 0.0, seed: int = 0
) -> AdjacencyGraph:
    """A cols x rows map of rectangular cells with shared-edge adjacencies."""
    rows = cols if rows is None else rows
    if cols < 1 or rows < 1:
        raise ValueError("grid needs at least one cell")
    xs, ys = _grid_lines(cols, rows, jitter, seed)
    regions = []
    edges = set()
    for c in range(cols):
        for r in range(rows):
            ring = [
                (xs[c], ys[r]),
                (xs[c + 1], ys[r]),
                (xs[c + 1], ys[r + 1]),
                (xs[c], ys[r + 1]),
            ]
            centroid = ((xs[c] + xs[c + 1]) / 2, (ys[r] + ys[r + 1]) / 2)
            regions.append(
                Region(id=grid_region_id(c, r), polygon=[ring], centroid=centroid)
            )
            if c + 1 < cols:
                edges.add(frozenset((grid_region_id(c, r), grid_region_id(c + 1, r))))
            if r + 1 < rows:
                edges.add(frozenset((grid_region_id(c, r), grid_region_id(c, r + 1))))
    return AdjacencyGraph(regions=regions, edges=frozenset(edges))


def grid_geojson(
    cols: int, rows: int | None = None, jitter: float = 0.0, seed: int = 0
) -> dict:
    rows = cols if rows is None else rows
    xs, ys = _grid_lines(cols, rows, jitter, seed)
    features = []
    for c in range(cols):
        for r in range(rows):
            ring = [
                [xs[c], ys[r]],
                [xs[c + 1], ys[r]],
                [xs[c + 1], ys[r + 1]],
                [xs[c], ys[r + 1]],
                [xs[c], ys[r]],
            ]
            features.append(
                {
                    "type": "Feature",
                    "properties": {"id": grid_region_id(c, r)},
                    "geometry": {"type": "Polygon", "coordinates": [ring]},
                }
            )
    return {"type": "FeatureCollection", "features": features}


def lognormal_weights(
    map: AdjacencyGraph,
    k: int = 2,
    seed: int = 0,
    sigma: float = 1.0,
    drift: float = 0.25,
    kind: WeightKind = WeightKind.TIME_SERIES,
) -> WeightSet:
    """k weight functions per region, log-normal, drifting across functions.

    ``sigma`` controls spread between regions, ``drift`` the multiplicative
    step between consecutive functions (time-series style correlation).
    """
    if k < 1:
        raise ValueError("need at least one weight function")
    rng = np.random.default_rng(seed)
    ids = sorted(map.region_ids)
    base = np.exp(rng.normal(0.0, sigma, size=len(ids)))
    functions = []
    values = base
    for i in range(k):
        if i > 0:
            values = values * np.exp(rng.normal(0.0, drift, size=len(ids)))
        functions.append((f"w{i}", {rid: float(v) for rid, v in zip(ids, values)}))
    return WeightSet(functions=functions, kind=kind)


def weights_csv(weights: WeightSet) -> str:
    lines = ["region_id,function_name,value"]
    for name, vals in weights.functions:
        for rid in sorted(vals):
            lines.append(f"{rid},{name},{vals[rid]!r}")
    return "\n".join(lines) + "\n"


def write_instance(
    out_dir,
    cols: int,
    seed: int,
    k: int = 2,
    sigma: float = 1.0,
    drift: float = 0.25,
    rows: int | None = None,
    jitter: float = 0.0,
) -> tuple[str, str]:
    """Write one grid instance's GeoJSON map and weights CSV; returns paths."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = cols if rows is None else rows
    gm = grid_map(cols, rows, jitter=jitter, seed=seed)
    stem = f"grid{cols}x{rows}_s{seed}"
    map_path = out / f"{stem}.geojson"
    csv_path = out / f"{stem}.csv"
    map_path.write_text(
        json.dumps(grid_geojson(cols, rows, jitter=jitter, seed=seed), indent=1),
        encoding="utf-8",
    )
    csv_path.write_text(
        weights_csv(lognormal_weights(gm, k=k, seed=seed, sigma=sigma, drift=drift)),
        encoding="utf-8",
    )
    return str(map_path), str(csv_path)
