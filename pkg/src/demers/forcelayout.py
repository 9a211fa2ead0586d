"""Force-directed square placement baseline.

Squares repel pairwise while overlapping (quadratic in the normalized
Chebyshev penetration) and are attracted either to their map origins or to
their topological neighbors. Forces are rescaled globally each step so no
square can jump over another, then applied synchronously. Separation
constraints play no role here, so the result may keep slight overlaps.
"""

from __future__ import annotations

import math
import warnings
import zlib
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .layout import SquareLayout, overlap_area, total_square_area
from .mapdata import AdjacencyGraph

Point = tuple[float, float]


class QualityForce(Enum):
    ORIGIN = "origin"
    TOPOLOGY = "topology"


class InitMode(Enum):
    MAP_ORIGINS = "map_origins"
    PREVIOUS_LAYOUT = "previous_layout"


@dataclass(frozen=True)
class ForceConfig:
    """Force-law constants and iteration policy.

    ``damped_steps`` keeps the forces untouched but sizes each applied
    displacement per region and axis from a local stiffness estimate
    (contact penalty slope plus quality-force slope). The raw update rule
    overshoots around contact equilibria because the disjointness penalty
    is extremely stiff, which leaves the iteration bouncing instead of
    settling; stiffness-sized steps restore convergence to the stated
    force threshold.
    """

    quality_variant: QualityForce = QualityForce.ORIGIN
    init: InitMode = InitMode.MAP_ORIGINS
    epsilon: float = 0.0
    disjointness_scale: float = 50_000.0
    convergence_threshold: float = 1e-5
    max_iterations: int = 100_000
    damped_steps: bool = True
    over_relax: float = 1.7

    def __post_init__(self) -> None:
        if self.convergence_threshold <= 0:
            raise ValueError("convergence threshold must be positive")
        if self.max_iterations < 1:
            raise ValueError("max iterations must be at least 1")


@dataclass
class FrcResult:
    layout: SquareLayout
    converged: bool
    iterations: int
    max_force: float
    residual_overlap_area: float


def _pair_jitter(a: str, b: str) -> tuple[float, float]:
    """Deterministic unit vector for coincident centers, antisymmetric in the pair."""
    lo, hi = sorted((a, b))
    angle = 2.0 * math.pi * (zlib.crc32(f"{lo}|{hi}".encode()) / 2**32)
    ux, uy = math.cos(angle), math.sin(angle)
    if (a, b) != (lo, hi):
        ux, uy = -ux, -uy
    return ux, uy


class _ForceField:
    """Vectorized force evaluation over all region pairs."""

    def __init__(
        self,
        map: AdjacencyGraph,
        sides: dict[str, float],
        cfg: ForceConfig,
    ) -> None:
        self.ids = sorted(map.region_ids)
        self.cfg = cfg
        n = len(self.ids)
        idx = {rid: i for i, rid in enumerate(self.ids)}
        s = np.array([sides[r] for r in self.ids])
        self.sides = s
        self.min_side = float(np.min(s))
        gap = np.full((n, n), cfg.epsilon)
        adj = np.zeros((n, n), dtype=bool)
        for a, b in map.edge_list():
            i, j = idx[a], idx[b]
            adj[i, j] = adj[j, i] = True
            gap[i, j] = gap[j, i] = 0.0
        np.fill_diagonal(gap, 0.0)
        self.adj = adj
        self.m = (s[:, None] + s[None, :]) / 2.0 + gap
        self.origins = np.array([map.region(r).centroid for r in self.ids])
        ox0, oy0 = self.origins.min(axis=0)
        ox1, oy1 = self.origins.max(axis=0)
        self.origin_diag = math.hypot(ox1 - ox0, oy1 - oy0)
        self.jitter = np.zeros((n, n, 2))
        for i, a in enumerate(self.ids):
            for j, b in enumerate(self.ids):
                if i != j:
                    self.jitter[i, j] = _pair_jitter(a, b)

    def forces(self, pos: np.ndarray) -> np.ndarray:
        n = pos.shape[0]
        d = pos[:, None, :] - pos[None, :, :]  # d[i,j] = r_i - r_j
        dist = np.hypot(d[..., 0], d[..., 1])
        cheb = np.maximum(np.abs(d[..., 0]), np.abs(d[..., 1]))
        np.fill_diagonal(cheb, np.inf)

        unit = np.zeros_like(d)
        nz = dist > 0
        unit[nz] = d[nz] / dist[nz][:, None]
        coincident = ~nz
        np.fill_diagonal(coincident, False)
        unit[coincident] = self.jitter[coincident]

        overlap = cheb < self.m
        mag_d = np.zeros((n, n))
        mag_d[overlap] = ((self.m[overlap] - cheb[overlap]) / self.m[overlap]) ** 2
        f = self.cfg.disjointness_scale * (unit * mag_d[..., None]).sum(axis=1)

        if self.cfg.quality_variant is QualityForce.ORIGIN:
            if self.origin_diag > 0:
                # unit direction times |o - r| / diag collapses to (o - r) / diag
                f += (self.origins - pos) / self.origin_diag
        else:
            mag_q = np.zeros((n, n))
            apart = self.adj & ~overlap & np.isfinite(cheb)
            mag_q[apart] = (cheb[apart] - self.m[apart]) / self.m[apart]
            pull = (-unit * mag_q[..., None]).sum(axis=1)
            deg = np.maximum(self.adj.sum(axis=1), 1)
            f += pull / deg[:, None]
        return f

    def rescale(self, f: np.ndarray) -> np.ndarray:
        norms = np.hypot(f[:, 0], f[:, 1])
        peak = float(norms.max()) if norms.size else 0.0
        if peak > self.min_side:
            return f * (self.min_side / peak)
        return f

    def damped_displacement(
        self, pos: np.ndarray, raw: np.ndarray, clamped: np.ndarray, omega: float
    ) -> np.ndarray:
        """Per-axis displacement bounded by a local stiffness (Newton) step.

        Contact stiffness acts along each overlapping pair's dominant axis;
        the quality force contributes its own slope. The applied step per
        axis is the smaller of the paper's clamped force and the stiffness-
        sized step, so soft modes move at full speed while contacts relax
        instead of bouncing.
        """
        d = pos[:, None, :] - pos[None, :, :]
        adx = np.abs(d[..., 0])
        ady = np.abs(d[..., 1])
        cheb = np.maximum(adx, ady)
        np.fill_diagonal(cheb, np.inf)
        pen = np.maximum(self.m - cheb, 0.0)
        kc = 4.0 * self.cfg.disjointness_scale * pen / (self.m * self.m)
        kx = np.where(adx >= ady, kc, 0.0).sum(axis=1)
        ky = np.where(ady > adx, kc, 0.0).sum(axis=1)
        if self.cfg.quality_variant is QualityForce.ORIGIN:
            kq = 1.0 / self.origin_diag if self.origin_diag > 0 else 0.0
        else:
            deg = np.maximum(self.adj.sum(axis=1), 1)
            kq = 2.0 * (self.adj / self.m).sum(axis=1) / deg
        kx = kx + kq
        ky = ky + kq
        sx = np.sign(clamped[:, 0]) * np.minimum(
            np.abs(clamped[:, 0]), omega * np.abs(raw[:, 0]) / np.maximum(kx, 1e-12)
        )
        sy = np.sign(clamped[:, 1]) * np.minimum(
            np.abs(clamped[:, 1]), omega * np.abs(raw[:, 1]) / np.maximum(ky, 1e-12)
        )
        return np.stack([sx, sy], axis=1)


def force_step(
    centers: dict[str, Point],
    sides: dict[str, float],
    map: AdjacencyGraph,
    cfg: ForceConfig,
) -> dict[str, Point]:
    """One synchronous update of all square centers."""
    field = _ForceField(map, sides, cfg)
    pos = np.array([centers[r] for r in field.ids])
    f = field.rescale(field.forces(pos))
    new = pos + f
    return {r: (float(new[i, 0]), float(new[i, 1])) for i, r in enumerate(field.ids)}


def run_frc(
    map: AdjacencyGraph,
    sides: dict[str, float],
    cfg: ForceConfig,
    previous: SquareLayout | None = None,
) -> FrcResult:
    """Iterate force steps until the largest force falls under the threshold.

    Initialization is either the map origins or the previous layout's centers
    (for stability across weight functions). Non-convergence within the
    iteration cap returns the last state flagged, never raises.
    """
    if cfg.init is InitMode.PREVIOUS_LAYOUT and previous is None:
        raise ValueError("previous layout required for stable initialization")
    field = _ForceField(map, sides, cfg)
    if cfg.init is InitMode.PREVIOUS_LAYOUT:
        pos = np.array([previous.centers[r] for r in field.ids])
    else:
        pos = field.origins.copy()

    limit = cfg.convergence_threshold * field.min_side
    converged = False
    max_force = 0.0
    iterations = 0
    if len(field.ids) == 1:
        converged = True
    else:
        for iterations in range(1, cfg.max_iterations + 1):
            raw = field.forces(pos)
            f = field.rescale(raw)
            max_force = float(np.hypot(f[:, 0], f[:, 1]).max())
            if max_force < limit:
                converged = True
                break
            if cfg.damped_steps:
                pos = pos + field.damped_displacement(pos, raw, f, cfg.over_relax)
            else:
                pos = pos + f

    layout = SquareLayout(
        centers={r: (float(pos[i, 0]), float(pos[i, 1])) for i, r in enumerate(field.ids)},
        sides={r: float(s) for r, s in zip(field.ids, field.sides)},
        function_index=0,
        constraint_ref=None,
        diagonal=map.diagonal(),
        method="frc",
    )
    residual = overlap_area(layout)
    total = total_square_area(layout)
    if total > 0 and residual > 1e-3 * total:
        warnings.warn(
            f"force layout kept {residual / total:.2%} residual overlap area",
            stacklevel=2,
        )
    return FrcResult(
        layout=layout,
        converged=converged,
        iterations=iterations,
        max_force=max_force,
        residual_overlap_area=residual,
    )
