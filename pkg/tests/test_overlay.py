import json
import math
from fractions import Fraction

import numpy as np
import pytest

from awgnauth.overlay import (
    LevelSet,
    OverlayCode,
    OverlayError,
    construct_overlay,
    default_level_message_counts,
    from_json_dict,
    order_preserving_map,
    overlay_rate_asymptotic,
    overlay_rate_finite,
    to_json_dict,
    verify_overlay,
)

# Frozen: asymptotic rate at |K~|=8, gamma=3/4.
ASYMPTOTIC_8_075 = 0.2472460116410684


def brute_force_witness(code, m, mp):
    """Independent re-check of the ordered-pair property: the lowest level
    k in K with overlap <= max_overlap and empty intersection against
    every strictly lower level of the second message."""
    for kidx in range(len(code.level_set)):
        mine = code.assignment[m][kidx]
        if len(mine & code.assignment[mp][kidx]) > code.max_overlap:
            continue
        if any(mine & code.assignment[mp][j] for j in range(kidx)):
            continue
        return kidx
    return None


class TestLevelSet:
    def test_basic(self):
        ls = LevelSet((0.0, 0.5))
        assert ls.extended == (0.0, 0.5, 1.0)
        assert len(ls) == 2

    def test_uniform(self):
        assert LevelSet.uniform(4).levels == (0.0, 0.25, 0.5, 0.75)
        with pytest.raises(OverlayError):
            LevelSet.uniform(1)

    def test_next_above(self):
        ls = LevelSet((0.0, 0.25, 0.5))
        assert ls.next_above(0.0) == 0.25
        assert ls.next_above(0.5) == 1.0
        assert ls.next_above(0.7) == 1.0

    def test_rejects_out_of_range(self):
        with pytest.raises(OverlayError, match=r"levels must lie in \[0,1\)"):
            LevelSet((0.0, 1.0))
        with pytest.raises(OverlayError, match=r"levels must lie in \[0,1\)"):
            LevelSet((-0.1,))

    def test_rejects_non_increasing(self):
        with pytest.raises(OverlayError, match="strictly increasing"):
            LevelSet((0.5, 0.5))
        with pytest.raises(OverlayError, match="strictly increasing"):
            LevelSet((0.5, 0.25))

    def test_rejects_empty(self):
        with pytest.raises(OverlayError):
            LevelSet(())


class TestOrderPreservingMap:
    def test_worked_example(self):
        assert order_preserving_map(range(1, 7), [1, 3, 4, 5, 7, 8],
                                    {3, 4, 6}) == frozenset({4, 5, 8})

    def test_identity(self):
        src = {2, 5, 9}
        assert order_preserving_map(src, src, {5, 9}) == frozenset({5, 9})

    def test_singleton(self):
        assert order_preserving_map({2}, {20}, {2}) == frozenset({20})

    def test_empty_subset(self):
        assert order_preserving_map({1, 2}, {5, 6}, set()) == frozenset()

    def test_size_mismatch(self):
        with pytest.raises(OverlayError, match="equal size"):
            order_preserving_map({1, 2}, {1}, {1})

    def test_subset_outside_source(self):
        with pytest.raises(OverlayError, match="not in source"):
            order_preserving_map({1, 2}, {3, 4}, {5})

    def test_duplicates(self):
        with pytest.raises(OverlayError, match="duplicates"):
            order_preserving_map([1, 1, 2], [3, 4, 5], {1})


class TestGammaHandling:
    def test_gamma_bounds(self):
        for bad in (0.5, 1.0, 0.0, 1.5):
            with pytest.raises(OverlayError,
                               match="gamma must lie strictly between"):
                construct_overlay(8, LevelSet((0.0,)), bad,
                                  counts_per_level=[2])

    def test_exact_threshold_where_float_would_round_down(self):
        # gamma*ell = (29/50)*100 = 58 exactly; float 0.58*100 floors to 57.
        code = construct_overlay(200, LevelSet((0.0,)), Fraction(29, 50),
                                 counts_per_level=[2], seed=3)
        assert code.ell == 100
        assert code.max_overlap == 58
        assert math.floor(0.58 * 100) == 57  # the trap this guards against

    def test_fraction_preserved(self):
        code = construct_overlay(12, LevelSet((0.0,)), Fraction(3, 5),
                                 counts_per_level=[2], seed=0)
        assert code.gamma_exact == Fraction(3, 5)
        assert code.gamma == pytest.approx(0.6)


class TestConstruction:
    def test_shape_and_counts(self, small_overlay):
        code = small_overlay
        assert code.n == 60
        assert code.ell == 20
        assert code.message_count == 6
        assert code.radices == (3, 2)
        for row in code.assignment:
            disjoint = set()
            for coords in row:
                assert len(coords) == code.ell
                assert not disjoint & coords
                disjoint |= coords
            # remainder sits at level 1
            assert len(set(range(1, 61)) - disjoint) == 60 - 2 * code.ell

    def test_determinism(self):
        a = construct_overlay(60, LevelSet((0.0, 0.5)), 0.75,
                              counts_per_level=[3, 2], seed=11)
        b = construct_overlay(60, LevelSet((0.0, 0.5)), 0.75,
                              counts_per_level=[3, 2], seed=11)
        c = construct_overlay(60, LevelSet((0.0, 0.5)), 0.75,
                              counts_per_level=[3, 2], seed=12)
        assert a.assignment == b.assignment
        assert a.assignment != c.assignment

    def test_shared_prefix_between_messages(self, small_overlay):
        code = small_overlay
        for m in range(code.message_count):
            for mp in range(code.message_count):
                dm, dmp = code.decompose(m), code.decompose(mp)
                if dm[0] == dmp[0]:
                    assert code.assignment[m][0] == code.assignment[mp][0]

    def test_decompose_mixed_radix(self, small_overlay):
        # radices (3, 2): id = d0*2 + d1, level-0 digit most significant.
        assert small_overlay.decompose(0) == (0, 0)
        assert small_overlay.decompose(1) == (0, 1)
        assert small_overlay.decompose(2) == (1, 0)
        assert small_overlay.decompose(5) == (2, 1)
        with pytest.raises(OverlayError, match="out of range"):
            small_overlay.decompose(6)

    def test_single_message_vacuous(self):
        code = construct_overlay(8, LevelSet((0.0,)), 0.75,
                                 counts_per_level=[1], seed=0)
        assert code.message_count == 1
        assert verify_overlay(code).passed

    def test_pairwise_property_matches_brute_force(self, small_overlay):
        report = verify_overlay(small_overlay)
        assert report.passed
        M = small_overlay.message_count
        for m in range(M):
            for mp in range(M):
                if m == mp:
                    assert report.witness(m, mp) is None
                    continue
                expect = brute_force_witness(small_overlay, m, mp)
                assert expect is not None
                got = report.witness(m, mp)
                assert got is not None
                kidx, overlap = got
                assert kidx == expect
                assert overlap <= report.max_overlap_allowed
                assert overlap == len(small_overlay.assignment[m][kidx]
                                      & small_overlay.assignment[mp][kidx])

    def test_three_level_medium_block(self):
        code = construct_overlay(300, LevelSet((0.0, 1 / 3, 2 / 3)),
                                 Fraction(3, 4), seed=2,
                                 max_messages_per_level=6)
        assert code.ell == 75
        assert code.message_count == 216
        assert verify_overlay(code).passed

    def test_levels_vector_and_matrix(self, small_overlay):
        f = small_overlay.levels_vector(0)
        assert f.shape == (60,)
        vals, counts = np.unique(f, return_counts=True)
        assert list(vals) == [0.0, 0.5, 1.0]
        assert list(counts) == [20, 20, 20]
        F = small_overlay.level_matrix()
        assert F.shape == (6, 60)
        assert np.array_equal(F[0], f)

    def test_level_coords_including_top(self, small_overlay):
        m = 3
        union = set()
        for j, k in enumerate(small_overlay.level_set.levels):
            coords = small_overlay.level_coords(m, k)
            assert coords == small_overlay.assignment[m][j]
            union |= coords
        top = small_overlay.level_coords(m, 1.0)
        assert top == frozenset(range(1, 61)) - union

    def test_retry_counter(self, small_overlay):
        assert small_overlay.attempts >= 1


class TestConstructionErrors:
    def test_rates_and_counts_mutually_exclusive(self):
        with pytest.raises(OverlayError, match="not both"):
            construct_overlay(60, LevelSet((0.0,)), 0.75,
                              rates_per_level=[0.01],
                              counts_per_level=[2])

    def test_counts_exceed_available_subsets(self):
        # C(4,2)=6 subsets at level 0 of n=8.
        with pytest.raises(OverlayError, match="exceed"):
            construct_overlay(4, LevelSet((0.0,)), 0.75,
                              counts_per_level=[7])

    def test_materialization_guard(self):
        with pytest.raises(OverlayError, match="materialization guard"):
            construct_overlay(4096, LevelSet((0.0, 0.5)), 0.75,
                              counts_per_level=[2048, 2048])

    def test_count_arity(self):
        with pytest.raises(OverlayError, match="one message count per level"):
            construct_overlay(60, LevelSet((0.0, 0.5)), 0.75,
                              counts_per_level=[2])

    def test_n_too_small(self):
        with pytest.raises(OverlayError):
            construct_overlay(2, LevelSet((0.0, 0.5)), 0.75,
                              counts_per_level=[1, 1])

    def test_bad_explicit_tables(self):
        # Both messages share the single level-0 subset: overlap ell > gamma*ell.
        with pytest.raises(OverlayError, match="fail verification"):
            construct_overlay(8, LevelSet((0.0,)), 0.75,
                              subset_tables=[[{1, 2, 3, 4}, {1, 2, 3, 4}]])


class TestVerifyFailures:
    def test_planted_cardinality_violation(self, small_overlay):
        rows = list(small_overlay.assignment)
        short = frozenset(list(rows[0][0])[:-1])
        rows[0] = (short, rows[0][1])
        broken = OverlayCode(60, small_overlay.level_set, 0.75,
                             Fraction(3, 4), tuple(rows))
        report = verify_overlay(broken)
        assert not report.passed
        assert any("expected 20" in v for v in report.violations)

    def test_planted_pairwise_violation(self):
        row = (frozenset({1, 2, 3, 4}),)
        code = OverlayCode(8, LevelSet((0.0,)), 0.75, Fraction(3, 4),
                           (row, row))
        report = verify_overlay(code)
        assert not report.passed
        assert any("no witness level" in v for v in report.violations)
        assert report.witness(0, 1) is None


class TestRates:
    def test_finite_rate_zero_at_tiny_block(self):
        # Additive defects swallow the information term at n=9.
        assert overlay_rate_finite(9, LevelSet((0.0, 0.5)), 2 / 3) == 0.0

    def test_finite_rate_dominates_asymptotic_guarantee(self):
        # The asymptotic threshold is a one-sided guarantee: any rate below
        # it is achievable for large n, so the finite-n guaranteed rate must
        # sit above it (up to the vanishing defect terms) once n is large.
        r = overlay_rate_finite(10 ** 6, LevelSet.uniform(8), 0.75)
        assert r > 0.0
        assert r >= ASYMPTOTIC_8_075 - 0.01

    def test_construction_defect_no_smaller(self):
        n = 10 ** 5
        ls = LevelSet.uniform(4)
        loose = overlay_rate_finite(n, ls, 0.75, defect="construction")
        tight = overlay_rate_finite(n, ls, 0.75, defect="theorem")
        assert loose >= tight

    def test_asymptotic_values(self):
        assert overlay_rate_asymptotic(8, 0.75) == pytest.approx(
            ASYMPTOTIC_8_075, rel=1e-12)
        # gamma*ln(4) < gamma + h2(gamma) at gamma=0.75: clamped to zero.
        assert overlay_rate_asymptotic(4, 0.75) == 0.0

    def test_asymptotic_binary_levels_always_zero(self):
        # gamma*ln 2 - gamma - h2(gamma) < 0 on all of (1/2, 1).
        for g in (0.51, 0.6, 0.75, 0.9, 0.99):
            assert overlay_rate_asymptotic(2, g) == 0.0

    def test_default_counts_guard_interplay(self):
        # Large blocks make the default counts exceed the guard...
        with pytest.raises(OverlayError, match="materialization guard"):
            construct_overlay(300, LevelSet((0.0, 1 / 3, 2 / 3)), 0.75, seed=0)
        # ...and a per-level cap restores constructability.
        counts = default_level_message_counts(300, LevelSet((0.0, 1 / 3, 2 / 3)),
                                              0.75)
        assert all(c >= 1 for c in counts)
        assert math.prod(counts) > (1 << 20)


class TestFirstAttemptSuccessRate:
    def test_capped_default_rates_usually_verify_first_try(self):
        # 100 seeds at n=300, four extended levels, gamma=3/4: the retry
        # counter shows how often the first sampled table already passes.
        failures = 0
        for seed in range(100):
            code = construct_overlay(300, LevelSet((0.0, 1 / 3, 2 / 3)),
                                     Fraction(3, 4), seed=seed,
                                     max_messages_per_level=6)
            failures += code.attempts > 1
        assert failures < 50


class TestJsonRoundTrip:
    def test_round_trip(self, small_overlay):
        blob = json.dumps(to_json_dict(small_overlay))
        back = from_json_dict(json.loads(blob))
        assert back.n == small_overlay.n
        assert back.level_set.levels == small_overlay.level_set.levels
        assert back.gamma_exact == small_overlay.gamma_exact
        assert back.assignment == small_overlay.assignment
        assert back.radices == small_overlay.radices
        assert verify_overlay(back).passed

    def test_round_trip_preserves_exact_gamma(self):
        code = construct_overlay(20, LevelSet((0.0,)), Fraction(7, 10),
                                 counts_per_level=[2], seed=3)
        back = from_json_dict(json.loads(json.dumps(to_json_dict(code))))
        assert back.gamma_exact == Fraction(7, 10)
        assert back.max_overlap == 7
