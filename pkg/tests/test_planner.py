import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from palmforge.errors import ConfigError
from palmforge.planner import (Combination, IdentityPlan, IdentitySubset,
                               PlannerConfig, candidate_stream, duplicates,
                               greedy_clique, greedy_clique_lex, plan,
                               read_plan_jsonl, rotations, verify_plan,
                               write_plan_jsonl)


def brute_force_greedy(n, m, k):
    """Reference first-fit scan, no masks, no pruning."""
    accepted = []
    for tup in itertools.combinations(range(n), m):
        s = set(tup)
        if all(len(s & set(a)) <= k for a in accepted):
            accepted.append(tup)
    return accepted


class TestConfig:
    def test_m_pinned_to_grid(self):
        with pytest.raises(ConfigError):
            PlannerConfig(n_identities=12, combination_length=8)

    def test_k_range(self):
        with pytest.raises(ConfigError):
            PlannerConfig(n_identities=12, max_shared=9)

    def test_n_at_least_m(self):
        with pytest.raises(ConfigError):
            PlannerConfig(n_identities=8)


class TestCandidateStream:
    def test_n9_single_subset(self):
        subs = list(candidate_stream(9, 9))
        assert subs == [IdentitySubset(tuple(range(9)))]

    def test_n10_order_and_count(self):
        subs = list(candidate_stream(10, 9))
        assert len(subs) == 10
        assert subs[0].indices == tuple(range(9))
        assert subs[-1].indices == tuple(range(1, 10))

    def test_counts_match_binomial(self):
        for n, m in ((12, 9), (14, 9), (9, 9)):
            assert sum(1 for _ in candidate_stream(n, m)) == math.comb(n, m)

    def test_n30_candidate_count_constant(self):
        # the N=30 scan covers C(30,9) candidates; the count itself is cheap
        # to pin (the stream is verified against math.comb at smaller N)
        assert math.comb(30, 9) == 14_307_150

    def test_lexicographic(self):
        subs = [s.indices for s in candidate_stream(12, 9)]
        assert subs == sorted(subs)

    def test_n_less_than_m_rejected(self):
        with pytest.raises(ConfigError):
            list(candidate_stream(8, 9))


class TestDuplicates:
    def test_self_is_m(self):
        a = IdentitySubset(tuple(range(9)))
        assert duplicates(a, a) == 9

    def test_disjoint_zero(self):
        a = IdentitySubset(tuple(range(9)))
        b = IdentitySubset(tuple(range(9, 18)))
        assert duplicates(a, b) == 0

    def test_eight_shared(self):
        a = IdentitySubset(tuple(range(9)))
        b = IdentitySubset(tuple(range(8)) + (9,))
        assert duplicates(a, b) == 8

    def test_mask_round_trip(self):
        s = IdentitySubset((1, 4, 7, 9, 13, 20, 40, 63, 64))
        assert IdentitySubset.from_mask(s.mask) == s


class TestGreedyClique:
    def test_n9_single(self):
        out = greedy_clique(candidate_stream(9, 9), 5)
        assert [s.indices for s in out] == [tuple(range(9))]

    def test_n10_only_first_survives(self):
        # exhaustive: every pair of distinct 9-subsets of a 10-set shares 8
        for a, b in itertools.combinations(itertools.combinations(range(10), 9), 2):
            assert len(set(a) & set(b)) == 8
        out = greedy_clique(candidate_stream(10, 9), 5)
        assert len(out) == 1

    @pytest.mark.parametrize("n,k", [(11, 5), (12, 5), (13, 5), (13, 4), (12, 7), (14, 5)])
    def test_matches_brute_force(self, n, k):
        expected = brute_force_greedy(n, 9, k)
        got = [s.indices for s in greedy_clique(candidate_stream(n, 9), k)]
        assert got == expected

    @pytest.mark.parametrize("n,k", [(11, 5), (13, 5), (13, 4), (14, 5), (16, 5), (12, 0)])
    def test_lex_fast_path_identical(self, n, k):
        slow = [s.indices for s in greedy_clique(candidate_stream(n, 9), k)]
        fast = [s.indices for s in greedy_clique_lex(n, 9, k)]
        assert fast == slow

    def test_lex_fast_path_identical_n20(self):
        slow = [s.indices for s in greedy_clique(candidate_stream(20, 9), 5)]
        fast = [s.indices for s in greedy_clique_lex(20, 9, 5)]
        assert fast == slow
        assert len(fast) == len(set(fast))

    def test_n13_admits_second_subset(self):
        # min intersection of two 9-subsets of 13 elements is 9+9-13 = 5 <= K
        out = greedy_clique_lex(13, 9, 5)
        assert len(out) >= 2


class TestRotations:
    def test_rotation_zero_is_sorted_order(self):
        subset = IdentitySubset((10, 11, 12, 13, 14, 15, 16, 17, 18))
        combos = rotations(subset)
        assert combos[0].identities == subset.indices

    def test_rotation_one_shifts(self):
        subset = IdentitySubset(tuple(range(9)))
        combos = rotations(subset)
        # position 1 gets the second identity, position 9 wraps to the first
        assert combos[1].identities == (1, 2, 3, 4, 5, 6, 7, 8, 0)

    def test_rotations_disagree_everywhere(self):
        subset = IdentitySubset((2, 3, 5, 7, 11, 13, 17, 19, 23))
        combos = rotations(subset)
        for a, b in itertools.combinations(combos, 2):
            assert all(x != y for x, y in zip(a.identities, b.identities))

    @settings(max_examples=50, deadline=None)
    @given(st.sets(st.integers(0, 63), min_size=9, max_size=9))
    def test_every_rotation_is_permutation_of_subset(self, ids):
        subset = IdentitySubset(tuple(sorted(ids)))
        for c in rotations(subset):
            assert sorted(c.identities) == list(subset.indices)
            assert c.subset == subset.indices


class TestPlan:
    def test_n9_nine_new_identities(self):
        p = plan(PlannerConfig(n_identities=9))
        assert len(p) == 9
        assert p.clique_size == 1

    def test_n10_nine(self):
        p = plan(PlannerConfig(n_identities=10))
        assert len(p) == 9

    def test_n13_at_least_eighteen(self):
        p = plan(PlannerConfig(n_identities=13))
        assert len(p) >= 18

    def test_deterministic(self):
        a = plan(PlannerConfig(n_identities=13))
        b = plan(PlannerConfig(n_identities=13))
        assert a == b

    def test_provenance_recorded(self):
        p = plan(PlannerConfig(n_identities=12))
        for i, c in enumerate(p.combinations):
            assert c.rotation == i % 9
            assert len(c.subset) == 9


class TestVerifyPlan:
    def test_valid_plan_passes(self):
        report = verify_plan(plan(PlannerConfig(n_identities=13)))
        assert report.ok, report.message

    def test_duplicate_combination_fails(self):
        p = plan(PlannerConfig(n_identities=10))
        tampered = IdentityPlan(
            combinations=p.combinations + (p.combinations[0],),
            n_identities=p.n_identities, max_shared=p.max_shared,
            clique_size=p.clique_size,
        )
        report = verify_plan(tampered)
        assert not report.ok
        assert report.first_violation == (0, 9)

    def test_oversharing_subsets_fail(self):
        # two subsets sharing 6 identities, rotation 0 each: sorted order
        # aligns the 6 shared identities onto the same positions
        a = Combination(identities=tuple(range(9)), subset=tuple(range(9)), rotation=0)
        b_ids = (0, 1, 2, 3, 4, 5, 9, 10, 11)
        b = Combination(identities=b_ids, subset=b_ids, rotation=0)
        bad = IdentityPlan(combinations=(a, b), n_identities=12, max_shared=5, clique_size=2)
        report = verify_plan(bad)
        assert not report.ok

    def test_min_difference_property(self):
        # brute-force re-derivation of the >=4 rule over a real plan
        p = plan(PlannerConfig(n_identities=13))
        for a, b in itertools.combinations(p.combinations, 2):
            differ = sum(x != y for x, y in zip(a.identities, b.identities))
            assert differ >= 4


class TestSerialization:
    def test_round_trip(self, tmp_path):
        p = plan(PlannerConfig(n_identities=13))
        path = tmp_path / "plan.jsonl"
        write_plan_jsonl(p, path)
        q = read_plan_jsonl(path, p.n_identities, p.max_shared)
        assert q.combinations == p.combinations
        assert q.clique_size == p.clique_size

    def test_record_schema(self, tmp_path):
        import json
        p = plan(PlannerConfig(n_identities=9))
        path = tmp_path / "plan.jsonl"
        write_plan_jsonl(p, path)
        rec = json.loads(path.read_text().splitlines()[3])
        assert set(rec) == {"plan_index", "subset", "rotation", "assignment"}
        assert rec["plan_index"] == 3
        assert [pos for pos, _ in rec["assignment"]] == list(range(1, 10))
