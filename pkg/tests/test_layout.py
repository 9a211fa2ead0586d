import json
import random

import pytest

from conftest import overlapping_pairs, square_map
from demers.layout import (
    LayoutError,
    SquareLayout,
    anchor_to_origins,
    decode,
    interpolate,
    l1_gap,
    layout_from_json,
    validity_violations,
)
from demers.lpmodel import ModelSpec, build_single_lp
from demers.sepconstraints import Setting, derive_constraints
from demers.simplexsolver import solve_lp


def layout_of(squares, cs=None, diagonal=20.0):
    return SquareLayout(
        centers={rid: (x, y) for rid, (x, y, _) in squares.items()},
        sides={rid: s for rid, (_, _, s) in squares.items()},
        constraint_ref=cs,
        diagonal=diagonal,
    )


class TestL1Gap:
    def test_touching_is_zero(self):
        lay = layout_of({"a": (0, 0, 2.0), "b": (2, 0, 2.0)})
        assert l1_gap(lay, "a", "b") == 0.0

    def test_single_axis_gap(self):
        lay = layout_of({"a": (0, 0, 4.0), "b": (8, 0, 2.0)})
        assert l1_gap(lay, "a", "b") == pytest.approx(5.0)

    def test_both_axis_gap(self):
        lay = layout_of({"a": (0, 0, 2.0), "b": (5, 5, 2.0)})
        assert l1_gap(lay, "a", "b") == pytest.approx(6.0)

    @pytest.mark.parametrize("seed", range(30))
    def test_zero_iff_rects_touch_or_overlap(self, seed):
        rng = random.Random(seed)
        lay = layout_of({
            "a": (rng.uniform(0, 6), rng.uniform(0, 6), rng.uniform(0.5, 3)),
            "b": (rng.uniform(0, 6), rng.uniform(0, 6), rng.uniform(0.5, 3)),
        })
        gap = l1_gap(lay, "a", "b")
        ra, rb = lay.rect("a"), lay.rect("b")
        touches = (
            ra[0] <= rb[2] and rb[0] <= ra[2] and ra[1] <= rb[3] and rb[1] <= ra[3]
        )
        assert (gap == 0.0) == touches


def solved_pair(seed, k_sides=2):
    """Two layouts for the same constraint set with different side tables."""
    rng = random.Random(seed)
    squares = {
        f"r{i}": (rng.uniform(0, 15), rng.uniform(0, 15), rng.uniform(0.8, 3))
        for i in range(6)
    }
    ids = sorted(squares)
    edges = {(ids[i], ids[i + 1]) for i in range(0, len(ids) - 1, 2)}
    g = square_map(squares, edges)
    cs = derive_constraints(g, 0.2, Setting.WEAK)
    lays = []
    for j in range(k_sides):
        sides = {rid: squares[rid][2] * rng.uniform(0.6, 1.6) for rid in ids}
        model = build_single_lp(g, sides, cs, ModelSpec())
        lays.append(decode(solve_lp(model.problem), model)[0])
    return lays


class TestInterpolate:
    def test_endpoints(self):
        a, b = solved_pair(1)
        assert interpolate(a, b, 0.0).centers == a.centers
        assert interpolate(a, b, 1.0).centers == b.centers

    def test_symmetry(self):
        a, b = solved_pair(2)
        lhs = interpolate(a, b, 0.3)
        rhs = interpolate(b, a, 0.7)
        for rid in lhs.centers:
            assert lhs.centers[rid] == pytest.approx(rhs.centers[rid])
            assert lhs.sides[rid] == pytest.approx(rhs.sides[rid])

    @pytest.mark.parametrize("seed", range(10))
    def test_frames_stay_valid_and_overlap_free(self, seed):
        a, b = solved_pair(seed)
        for t in [i / 10 for i in range(1, 10)]:
            frame = interpolate(a, b, t)
            assert not validity_violations(frame)
            assert overlapping_pairs(frame) == []

    def test_constraint_inequalities_hold_along_the_blend(self):
        a, b = solved_pair(4)
        cs = a.constraint_ref
        for t in (0.25, 0.5, 0.75):
            frame = interpolate(a, b, t)
            for axis, pairs, coord in (("H", cs.sorted_h(), 0), ("V", cs.sorted_v(), 1)):
                for u, v in pairs:
                    w = (frame.sides[u] + frame.sides[v]) / 2
                    need = w + cs.gap(axis, (u, v))
                    got = frame.centers[v][coord] - frame.centers[u][coord]
                    assert got >= need - 1e-7

    def test_mismatched_constraint_sets_rejected(self):
        a, _ = solved_pair(5)
        c, _ = solved_pair(6)
        with pytest.raises(LayoutError, match="constraint"):
            interpolate(a, c, 0.5)


class TestDecode:
    def test_invalid_solution_rejected(self):
        squares = {"a": (0, 0, 2.0), "b": (5, 0, 2.0)}
        g = square_map(squares, set())
        cs = derive_constraints(g, 0.5, Setting.WEAK)
        model = build_single_lp(g, {"a": 2.0, "b": 2.0}, cs, ModelSpec())
        sol = solve_lp(model.problem)
        sol.values[model.blocks[0].x["b"]] = sol.values[model.blocks[0].x["a"]]
        with pytest.raises(LayoutError, match="invalid"):
            decode(sol, model)

    def test_no_values_rejected(self):
        from demers.simplexsolver import Solution, SolveStatus

        squares = {"a": (0, 0, 2.0)}
        g = square_map(squares, set())
        cs = derive_constraints(g, 0.5, Setting.WEAK)
        model = build_single_lp(g, {"a": 2.0}, cs, ModelSpec())
        with pytest.raises(LayoutError, match="status"):
            decode(Solution(SolveStatus.INFEASIBLE), model)


class TestAnchoring:
    def test_anchor_reduces_displacement_and_keeps_validity(self):
        lays = solved_pair(7)
        origins = {rid: (0.0, 0.0) for rid in lays[0].centers}
        # pick the solved instance's own centroids as origins
        anchored = anchor_to_origins(lays, {r: lays[0].centers[r] for r in lays[0].centers})
        for lay in anchored:
            assert not validity_violations(lay)

    def test_translation_is_joint(self):
        lays = solved_pair(8)
        origins = {r: (100.0, -50.0) for r in lays[0].centers}
        anchored = anchor_to_origins(lays, origins)
        dx0 = anchored[0].centers[next(iter(origins))][0] - lays[0].centers[next(iter(origins))][0]
        for old, new in zip(lays, anchored):
            for rid in old.centers:
                assert new.centers[rid][0] - old.centers[rid][0] == pytest.approx(dx0)


class TestSerialization:
    def test_json_round_trip(self):
        lay, _ = solved_pair(9)
        doc = json.loads(lay.to_json())
        assert doc["schema_version"] == 1
        back = layout_from_json(doc)
        for rid in lay.centers:
            assert back.centers[rid] == pytest.approx(lay.centers[rid])
            assert back.sides[rid] == pytest.approx(lay.sides[rid])

    def test_json_is_sorted_and_deterministic(self):
        lay, _ = solved_pair(10)
        assert lay.to_json() == lay.to_json()
        ids = [r["id"] for r in json.loads(lay.to_json())["regions"]]
        assert ids == sorted(ids)
