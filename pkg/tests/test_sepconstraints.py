import random

import pytest

from conftest import square_map
from demers.lpmodel import ModelSpec, ObjectiveKind, build_single_lp
from demers.sepconstraints import (
    ConstraintError,
    SeparationConstraintSet,
    Setting,
    derive_constraints,
    reduce_transitive,
    validate_dag,
)
from demers.simplexsolver import solve_lp


def cs_of(squares, edges=(), setting=Setting.WEAK, epsilon=0.25):
    return derive_constraints(square_map(squares, set(edges)), epsilon, setting)


class TestDerive:
    def test_horizontal_dominance_goes_to_h(self):
        cs = cs_of({"a": (0, 0, 1), "b": (10, 3, 1)}, edges={("a", "b")})
        assert ("a", "b") in cs.H
        assert not cs.V

    def test_vertical_dominance_goes_to_v(self):
        cs = cs_of({"a": (0, 0, 1), "b": (1, 9, 1)}, edges={("a", "b")})
        assert ("a", "b") in cs.V
        assert not cs.H

    def test_tie_goes_to_h(self):
        cs = cs_of({"a": (0, 0, 1), "b": (5, 5, 1)})
        assert ("a", "b") in cs.H
        assert not cs.V

    def test_orientation_follows_coordinates(self):
        cs = cs_of({"a": (10, 0, 1), "b": (0, 3, 1)})
        assert ("b", "a") in cs.H

    def test_strong_adds_secondary_for_doubly_separated_pair(self):
        cs = cs_of(
            {"a": (0, 0, 1), "b": (10, 10, 1)}, setting=Setting.STRONG
        )
        assert ("a", "b") in cs.H  # tie rule: primary in H
        assert ("a", "b") in cs.V
        assert cs.is_secondary("V", ("a", "b"))
        assert not cs.is_secondary("H", ("a", "b"))

    def test_strong_skips_adjacent_pairs(self):
        cs = cs_of(
            {"a": (0, 0, 1), "b": (10, 10, 1)},
            edges={("a", "b")},
            setting=Setting.STRONG,
        )
        assert not cs.secondary

    def test_strong_skips_pairs_without_both_separators(self):
        # boxes overlap in y, so only a vertical separating line exists
        cs = cs_of({"a": (0, 0, 2), "b": (10, 1, 2)}, setting=Setting.STRONG)
        assert not cs.secondary

    def test_coincident_centroids_error(self):
        with pytest.raises(ConstraintError, match="coincident"):
            cs_of({"a": (0, 0, 1), "b": (0, 0, 2)})

    def test_secondary_gap_is_zero(self):
        cs = cs_of({"a": (0, 0, 1), "b": (10, 10, 1)}, setting=Setting.STRONG)
        assert cs.gap("V", ("a", "b")) == 0.0
        assert cs.gap("H", ("a", "b")) == 0.25

    def test_adjacent_gap_is_zero(self):
        cs = cs_of({"a": (0, 0, 1), "b": (10, 3, 1)}, edges={("a", "b")})
        assert cs.gap("H", ("a", "b")) == 0.0


def random_squares(rng, n):
    squares = {}
    for i in range(n):
        squares[f"r{i}"] = (rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(0.5, 4))
    return squares


class TestInvariants:
    @pytest.mark.parametrize("seed", range(25))
    @pytest.mark.parametrize("setting", [Setting.WEAK, Setting.STRONG])
    def test_derived_sets_are_acyclic(self, seed, setting):
        rng = random.Random(seed)
        cs = cs_of(random_squares(rng, 12), setting=setting)
        assert validate_dag(cs) is None

    @pytest.mark.parametrize("seed", range(10))
    def test_every_pair_covered(self, seed):
        rng = random.Random(seed)
        squares = random_squares(rng, 10)
        cs = cs_of(squares)
        ids = sorted(squares)
        for i, a in enumerate(ids):
            for b in ids[i + 1 :]:
                covered = any(
                    p in pairs
                    for pairs in (cs.H, cs.V)
                    for p in ((a, b), (b, a))
                )
                assert covered, (a, b)

    def test_mirror_swaps_h_orientation_keeps_v(self):
        rng = random.Random(3)
        squares = random_squares(rng, 8)
        mirrored = {rid: (-x, y, s) for rid, (x, y, s) in squares.items()}
        cs = cs_of(squares)
        cs_m = cs_of(mirrored)
        assert cs_m.H == frozenset((b, a) for a, b in cs.H)
        assert cs_m.V == cs.V

    @pytest.mark.parametrize("seed", range(8))
    def test_strong_contains_weak(self, seed):
        rng = random.Random(seed)
        squares = random_squares(rng, 9)
        weak = cs_of(squares)
        strong = cs_of(squares, setting=Setting.STRONG)
        assert weak.H <= strong.H
        assert weak.V <= strong.V


class TestValidateDag:
    def test_two_cycle_detected(self):
        base = cs_of({"a": (0, 0, 1), "b": (5, 0, 1)})
        broken = SeparationConstraintSet(
            H=frozenset({("a", "b"), ("b", "a")}),
            V=frozenset(),
            secondary=frozenset(),
            epsilon=base.epsilon,
            setting=base.setting,
            adjacencies=base.adjacencies,
        )
        cycle = validate_dag(broken)
        assert cycle is not None
        assert set(cycle) == {"a", "b"}

    def test_single_region_ok(self):
        cs = cs_of({"a": (0, 0, 1)})
        assert validate_dag(cs) is None

    def test_longer_cycle_detected(self):
        base = cs_of({"a": (0, 0, 1), "b": (5, 0, 1), "c": (10, 0, 1)})
        broken = SeparationConstraintSet(
            H=frozenset({("a", "b"), ("b", "c"), ("c", "a")}),
            V=frozenset(),
            secondary=frozenset(),
            epsilon=base.epsilon,
            setting=base.setting,
            adjacencies=base.adjacencies,
        )
        cycle = validate_dag(broken)
        assert cycle is not None
        assert len(cycle) == 3


class TestReduceTransitive:
    def make(self, H, adjacent=frozenset(), ids=("a", "b", "c")):
        return SeparationConstraintSet(
            H=frozenset(H),
            V=frozenset(),
            secondary=frozenset(),
            epsilon=0.1,
            setting=Setting.WEAK,
            adjacencies=frozenset(frozenset(e) for e in adjacent),
        )

    def test_transitive_triple_reduced(self):
        cs = self.make({("a", "b"), ("b", "c"), ("a", "c")})
        red = reduce_transitive(cs)
        assert red.H == frozenset({("a", "b"), ("b", "c")})

    def test_adjacent_pair_kept(self):
        cs = self.make({("a", "b"), ("b", "c"), ("a", "c")}, adjacent={("a", "c")})
        red = reduce_transitive(cs)
        assert ("a", "c") in red.H

    def test_collinear_chain_leaves_n_minus_one(self):
        n = 6
        squares = {f"r{i}": (3.0 * i, 0.0, 1.0) for i in range(n)}
        cs = cs_of(squares)
        red = reduce_transitive(cs)
        assert len(red.H) == n - 1
        assert not red.V

    @pytest.mark.parametrize("seed", range(6))
    def test_reduction_preserves_lp_optimum(self, seed):
        rng = random.Random(seed)
        squares = random_squares(rng, 7)
        ids = sorted(squares)
        edges = set()
        for i in range(len(ids) - 1):
            if rng.random() < 0.6:
                edges.add((ids[i], ids[i + 1]))
        g = square_map(squares, edges)
        cs = derive_constraints(g, 0.3, Setting.WEAK)
        sides = {rid: squares[rid][2] for rid in ids}
        spec = ModelSpec(objective_kind=ObjectiveKind.TOP)
        full = solve_lp(build_single_lp(g, sides, cs, spec).problem)
        red = solve_lp(build_single_lp(g, sides, reduce_transitive(cs), spec).problem)
        assert full.objective == pytest.approx(red.objective, abs=1e-6)
