"""Square layouts decoded from solver output, plus layout-level geometry.

A layout is one center point and one side length per region. Validity means
every separation constraint of the referenced set holds, which in turn makes
all squares pairwise interior-disjoint; both are checked explicitly so a
violation pinpoints the offending pair.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .lpmodel import CartogramModel
from .sepconstraints import SeparationConstraintSet
from .simplexsolver import Solution

Point = tuple[float, float]

SCHEMA_VERSION = 1

# solver round-off allowance, relative to the map diagonal
VALIDITY_TOL = 1e-6


class LayoutError(ValueError):
    pass


@dataclass
class SquareLayout:
    """One Demers cartogram: a center and side length per region."""

    centers: dict[str, Point]
    sides: dict[str, float]
    function_index: int = 0
    constraint_ref: SeparationConstraintSet | None = None
    diagonal: float = 0.0
    method: str = "lp"

    def region_ids(self) -> list[str]:
        return sorted(self.centers)

    def rect(self, rid: str) -> tuple[float, float, float, float]:
        """Axis-aligned square as (xmin, ymin, xmax, ymax)."""
        cx, cy = self.centers[rid]
        h = self.sides[rid] / 2.0
        return (cx - h, cy - h, cx + h, cy + h)

    def bbox(self) -> tuple[float, float, float, float]:
        rects = [self.rect(r) for r in self.centers]
        return (
            min(r[0] for r in rects),
            min(r[1] for r in rects),
            max(r[2] for r in rects),
            max(r[3] for r in rects),
        )

    def translated(self, dx: float, dy: float) -> "SquareLayout":
        return SquareLayout(
            centers={r: (x + dx, y + dy) for r, (x, y) in self.centers.items()},
            sides=dict(self.sides),
            function_index=self.function_index,
            constraint_ref=self.constraint_ref,
            diagonal=self.diagonal,
            method=self.method,
        )

    def to_json_dict(self, leaders: list | None = None) -> dict:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "function": self.function_index,
            "method": self.method,
            "constraint_ref": constraint_set_id(self.constraint_ref),
            "regions": [
                {
                    "id": rid,
                    "cx": self.centers[rid][0],
                    "cy": self.centers[rid][1],
                    "side": self.sides[rid],
                }
                for rid in self.region_ids()
            ],
        }
        if leaders is not None:
            doc["leaders"] = [ld.to_json_dict() for ld in leaders]
        return doc

    def to_json(self, leaders: list | None = None) -> str:
        return json.dumps(self.to_json_dict(leaders), indent=2, sort_keys=True)


def layout_from_json(doc: dict) -> SquareLayout:
    return SquareLayout(
        centers={r["id"]: (r["cx"], r["cy"]) for r in doc["regions"]},
        sides={r["id"]: r["side"] for r in doc["regions"]},
        function_index=doc.get("function", 0),
        method=doc.get("method", "lp"),
    )


def constraint_set_id(cs: SeparationConstraintSet | None) -> str | None:
    """Short content hash identifying a constraint set in serialized output."""
    if cs is None:
        return None
    payload = json.dumps(
        {
            "H": sorted(cs.H),
            "V": sorted(cs.V),
            "secondary": sorted(cs.secondary),
            "epsilon": cs.epsilon,
            "setting": cs.setting.value,
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# validity


@dataclass(frozen=True)
class Violation:
    kind: str
    pair: tuple[str, str]
    amount: float

    def __str__(self) -> str:
        return f"{self.kind} violated by {self.amount:.3g} for pair {self.pair}"


def validity_violations(layout: SquareLayout) -> list[Violation]:
    """All constraint/disjointness violations beyond the solver tolerance."""
    cs = layout.constraint_ref
    if cs is None:
        raise LayoutError("layout has no constraint set to validate against")
    tol = VALIDITY_TOL * (layout.diagonal or 1.0)
    out: list[Violation] = []
    centers, sides = layout.centers, layout.sides

    def w(a: str, b: str) -> float:
        return (sides[a] + sides[b]) / 2.0

    for axis, pairs, coord in (("H", cs.sorted_h(), 0), ("V", cs.sorted_v(), 1)):
        for a, b in pairs:
            need = w(a, b) + cs.gap(axis, (a, b))
            got = centers[b][coord] - centers[a][coord]
            if got < need - tol:
                out.append(Violation(f"separation[{axis}]", (a, b), need - got))
    ids = layout.region_ids()
    for i, a in enumerate(ids):
        for b in ids[i + 1 :]:
            dx = abs(centers[a][0] - centers[b][0])
            dy = abs(centers[a][1] - centers[b][1])
            if max(dx, dy) < w(a, b) - tol:
                out.append(Violation("interior-disjoint", (a, b), w(a, b) - max(dx, dy)))
    return out


def is_valid(layout: SquareLayout) -> bool:
    return not validity_violations(layout)


# ---------------------------------------------------------------------------
# operations


def decode(sol: Solution, model: CartogramModel) -> list[SquareLayout]:
    """Turn a solver solution into one layout per weight-function block.

    Raises when the solution is not usable or any decoded layout breaks the
    constraint set it was built from (which would mean a solver/model bug).
    """
    if not sol.values:
        raise LayoutError(f"cannot decode a solution with status {sol.status.value}")
    layouts = []
    for block in model.blocks:
        centers = {
            rid: (sol.values[block.x[rid]], sol.values[block.y[rid]])
            for rid in model.region_ids
        }
        layout = SquareLayout(
            centers=centers,
            sides=dict(block.sides),
            function_index=block.function_index,
            constraint_ref=model.cs,
            diagonal=model.diagonal,
        )
        bad = validity_violations(layout)
        if bad:
            detail = "; ".join(str(v) for v in bad[:5])
            raise LayoutError(
                f"decoded layout for function {block.function_index} is invalid: {detail}"
            )
        layouts.append(layout)
    return layouts


def interpolate(a: SquareLayout, b: SquareLayout, t: float) -> SquareLayout:
    """Linear blend of two layouts sharing a constraint set.

    Both centers and sides interpolate, so every separation constraint keeps
    holding along the way and no intermediate frame can overlap.
    """
    if a.constraint_ref != b.constraint_ref:
        raise LayoutError("layouts do not share a separation constraint set")
    if set(a.centers) != set(b.centers):
        raise LayoutError("layouts cover different region sets")
    s = 1.0 - t
    return SquareLayout(
        centers={
            r: (s * a.centers[r][0] + t * b.centers[r][0],
                s * a.centers[r][1] + t * b.centers[r][1])
            for r in a.centers
        },
        sides={r: s * a.sides[r] + t * b.sides[r] for r in a.sides},
        function_index=a.function_index if t < 0.5 else b.function_index,
        constraint_ref=a.constraint_ref,
        diagonal=max(a.diagonal, b.diagonal),
        method=a.method,
    )


def l1_gap(layout: SquareLayout, r1: str, r2: str) -> float:
    """Minimal L1 distance between the two squares as point sets."""
    w = (layout.sides[r1] + layout.sides[r2]) / 2.0
    dx = abs(layout.centers[r1][0] - layout.centers[r2][0])
    dy = abs(layout.centers[r1][1] - layout.centers[r2][1])
    return max(0.0, dx - w) + max(0.0, dy - w)


def anchor_to_origins(
    layouts: list[SquareLayout], origins: dict[str, Point]
) -> list[SquareLayout]:
    """Translate all layouts jointly to minimize total L1 origin displacement.

    Constraints only involve coordinate differences, so a joint translation
    keeps every layout valid and every inter-layout relation intact; the
    L1-optimal shift per axis is the median of the per-region displacements.
    """
    dxs = sorted(
        origins[r][0] - lay.centers[r][0] for lay in layouts for r in lay.centers
    )
    dys = sorted(
        origins[r][1] - lay.centers[r][1] for lay in layouts for r in lay.centers
    )
    if not dxs:
        return layouts
    mid = len(dxs) // 2
    return [lay.translated(dxs[mid], dys[mid]) for lay in layouts]


def overlap_area(layout: SquareLayout) -> float:
    """Total pairwise overlap area between squares (0 for valid layouts)."""
    ids = layout.region_ids()
    total = 0.0
    for i, a in enumerate(ids):
        ra = layout.rect(a)
        for b in ids[i + 1 :]:
            rb = layout.rect(b)
            ox = min(ra[2], rb[2]) - max(ra[0], rb[0])
            oy = min(ra[3], rb[3]) - max(ra[1], rb[1])
            if ox > 0 and oy > 0:
                total += ox * oy
    return total


def total_square_area(layout: SquareLayout) -> float:
    return sum(s * s for s in layout.sides.values())
