from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from pluralis import (
    ConfigError,
    CoverageSet,
    GuardError,
    convex_coverage_set,
    coverage_from_json,
    coverage_to_json,
    enumerate_policies,
    load_coverage,
    make_momdp,
    pareto_dominates,
    pareto_front,
    pareto_set_bruteforce,
    policy_value,
    random_momdp,
    save_coverage,
    simplex_grid,
    solve_scalarized,
    solver_calls,
)


def value_in_set(v, values, tol=1e-9):
    v = np.asarray(v, dtype=np.float64)
    return any(np.max(np.abs(v - np.asarray(u))) <= tol for u in values)


def random_deterministic_momdp(seed, num_states=4, num_actions=2, d=2, horizon=4):
    """One-hot transitions with continuous random rewards."""
    rng = np.random.default_rng(seed)
    transitions = []
    for _ in range(num_states):
        rows = []
        for _ in range(num_actions):
            nxt = int(rng.integers(num_states))
            reward = rng.uniform(-1.0, 1.0, size=d).tolist()
            rows.append([(nxt, 1.0, reward)])
        transitions.append(rows)
    return make_momdp(transitions, gamma=0.9, horizon=horizon)


class TestDominance:
    def test_definition_case(self):
        assert pareto_dominates((2, 3), (1, 3))

    def test_reflexivity_excluded(self):
        assert not pareto_dominates((2, 3), (2, 3))

    def test_incomparable_pair(self):
        assert not pareto_dominates((2, 1), (1, 2))
        assert not pareto_dominates((1, 2), (2, 1))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            pareto_dominates((1, 2), (1, 2, 3))

    def test_no_tolerance(self):
        # a hair above in one coordinate is already strict
        assert pareto_dominates((1.0 + 1e-15, 2.0), (1.0, 2.0))


class TestFront:
    def test_dominated_point_dropped(self):
        assert pareto_front([(1, 2), (2, 1), (0, 0)]) == [0, 1]

    def test_duplicates_all_kept(self):
        assert pareto_front([(1, 1), (1, 1)]) == [0, 1]

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            pareto_front([])

    def test_single_point(self):
        assert pareto_front([(5, -3)]) == [0]

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(
            st.tuples(
                st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3)
            ),
            min_size=1,
            max_size=100,
        )
    )
    def test_matches_quadratic_scan(self, points):
        assert pareto_front(points) == oracles.pareto_front_scan(points)


class TestSolveScalarized:
    def test_first_objective_weight(self, make_bandit):
        m = make_bandit([(3.0, 0.0), (0.0, 5.0)])
        policy, value = solve_scalarized(m, (1.0, 0.0))
        assert policy.action_map == (0, -1)
        assert value.tolist() == [3.0, 0.0]

    def test_second_objective_weight(self, make_bandit):
        m = make_bandit([(3.0, 0.0), (0.0, 5.0)])
        policy, value = solve_scalarized(m, (0.0, 1.0))
        assert policy.action_map == (1, -1)
        assert value.tolist() == [0.0, 5.0]

    def test_tie_broken_to_lowest_action(self, make_bandit):
        m = make_bandit([(1.0, 0.0), (0.0, 1.0)])
        policy, _ = solve_scalarized(m, (0.5, 0.5))
        assert policy.action_map == (0, -1)

    def test_vector_value_comes_from_policy_value(self, make_bandit):
        m = make_bandit([(3.0, 0.0), (0.0, 5.0)])
        policy, value = solve_scalarized(m, (0.25, 0.75))
        assert np.array_equal(value, policy_value(m, policy))

    def test_counter_bumps(self, make_bandit):
        m = make_bandit([(3.0, 0.0), (0.0, 5.0)])
        solver_calls.reset()
        solve_scalarized(m, (1.0, 0.0))
        assert solver_calls.count >= 1

    def test_matches_enumeration_on_oracle_scale(self):
        rng = np.random.default_rng(42)
        for seed in rng.integers(0, 10_000, size=6):
            m = random_momdp(int(seed), (5, 2, 2, 4))
            values = np.array([policy_value(m, p) for p in enumerate_policies(m)])
            for w in simplex_grid(4, 2):
                _, value = solve_scalarized(m, w)
                assert float(w @ value) >= float(np.max(values @ w)) - 1e-9


class TestConvexCoverageSet:
    def test_interior_arm_excluded(self, make_bandit):
        m = make_bandit([(3.0, 0.0), (0.0, 5.0), (1.0, 1.0)])
        cs = convex_coverage_set(m, resolution=10)
        got = sorted(tuple(v) for v in cs.values())
        assert got == [(0.0, 5.0), (3.0, 0.0)]

    def test_middle_arm_kept_when_supported(self, make_bandit):
        # (2,2) is optimal for weights near (0.65, 0.35)
        m = make_bandit([(3.0, 0.0), (0.0, 5.0), (2.0, 2.0)])
        cs = convex_coverage_set(m, resolution=20)
        got = sorted(tuple(v) for v in cs.values())
        assert got == [(0.0, 5.0), (2.0, 2.0), (3.0, 0.0)]

    def test_scalar_case_single_entry(self, make_bandit):
        m = make_bandit([(1.0,), (4.0,), (2.0,)])
        cs = convex_coverage_set(m, resolution=5)
        assert len(cs) == 1
        assert cs.entries[0].value.tolist() == [4.0]

    def test_kind_and_fingerprint(self, make_bandit):
        m = make_bandit([(1.0, 0.0), (0.0, 1.0)])
        cs = convex_coverage_set(m, resolution=4)
        assert cs.kind == "ccs"
        assert cs.momdp_fingerprint == m.fingerprint

    def test_every_entry_has_witnesses(self, make_bandit):
        m = make_bandit([(3.0, 0.0), (0.0, 5.0), (2.0, 2.0)])
        cs = convex_coverage_set(m, resolution=20)
        for entry in cs.entries:
            assert len(entry.witness_weights) >= 1

    def test_witness_optimality(self):
        for seed in (11, 12, 13):
            m = random_momdp(seed, (5, 3, 2, 4))
            cs = convex_coverage_set(m, resolution=8)
            for entry in cs.entries:
                for w in entry.witness_weights:
                    w = np.asarray(w)
                    mine = float(w @ entry.value)
                    for other in cs.entries:
                        assert mine >= float(w @ other.value) - 1e-9

    def test_internal_non_dominance(self):
        for seed in (21, 22, 23):
            m = random_momdp(seed, (6, 3, 3, 4))
            cs = convex_coverage_set(m, resolution=6)
            for a in cs.entries:
                for b in cs.entries:
                    if a is not b:
                        assert not pareto_dominates(a.value, b.value)

    def test_determinism_including_ids_and_order(self):
        m = random_momdp(31, (6, 3, 3, 5))
        first = convex_coverage_set(m, resolution=10)
        second = convex_coverage_set(m, resolution=10)
        assert [e.policy.id for e in first.entries] == [e.policy.id for e in second.entries]
        assert all(
            np.array_equal(a.value, b.value)
            for a, b in zip(first.entries, second.entries)
        )
        assert [e.witness_weights for e in first.entries] == [
            e.witness_weights for e in second.entries
        ]

    def test_monotone_resolution_on_deterministic_instances(self):
        for seed in range(5):
            m = random_deterministic_momdp(seed)
            coarse = convex_coverage_set(m, resolution=5).values()
            fine = convex_coverage_set(m, resolution=10).values()
            for v in coarse:
                assert value_in_set(v, fine)

    def test_grid_guard_raises(self, make_bandit):
        arms = [tuple(float(i == j) for j in range(4)) for i in range(4)]
        m = make_bandit(arms)
        with pytest.raises(GuardError):
            convex_coverage_set(m, resolution=1000)

    def test_contained_in_bruteforce_front(self):
        rng = np.random.default_rng(99)
        for seed in rng.integers(0, 10_000, size=5):
            m = random_momdp(int(seed), (5, 3, 3, 4))
            ccs = convex_coverage_set(m, resolution=8)
            front = pareto_set_bruteforce(m)
            front_values = list(front.values())
            for v in ccs.values():
                assert value_in_set(v, front_values)


class TestBruteforce:
    def test_incomparable_arms_retained(self, make_bandit):
        m = make_bandit([(1.0, 0.0), (0.0, 1.0)])
        cs = pareto_set_bruteforce(m)
        assert len(cs) == 2
        assert cs.kind == "pareto"

    def test_dominated_arm_removed(self, make_bandit):
        m = make_bandit([(1.0, 1.0), (0.0, 0.0)])
        cs = pareto_set_bruteforce(m)
        assert len(cs) == 1
        assert cs.entries[0].value.tolist() == [1.0, 1.0]

    def test_witnesses_empty(self, make_bandit):
        cs = pareto_set_bruteforce(make_bandit([(1.0, 0.0), (0.0, 1.0)]))
        assert all(e.witness_weights == () for e in cs.entries)

    def test_superset_of_ccs_on_seed_seven(self):
        m = random_momdp(7, (4, 2, 2, 5))
        front_values = list(pareto_set_bruteforce(m).values())
        for v in convex_coverage_set(m, resolution=10).values():
            assert value_in_set(v, front_values)

    def test_guard_respected(self):
        m = random_momdp(3, (7, 3, 2, 3))
        # 3^7 = 2187 policies is fine
        cs = pareto_set_bruteforce(m)
        assert len(cs) >= 1


class TestCoverageSetValidation:
    def test_dominated_entries_rejected(self, make_bandit):
        m = make_bandit([(1.0, 0.0), (0.0, 1.0)])
        cs = pareto_set_bruteforce(m)
        bad = list(cs.entries) + [
            type(cs.entries[0])(
                policy=type(cs.entries[0].policy)(action_map=(0,), id=5),
                value=np.array([-1.0, -1.0]),
                witness_weights=(),
            )
        ]
        with pytest.raises(ValueError, match="dominance"):
            CoverageSet(kind="pareto", momdp_fingerprint="x", entries=tuple(bad))

    def test_entry_lookup(self, make_bandit):
        m = make_bandit([(1.0, 0.0), (0.0, 1.0)])
        cs = pareto_set_bruteforce(m)
        assert cs.entry_by_id(0).value.tolist() == [1.0, 0.0]
        with pytest.raises(KeyError):
            cs.entry_by_id(999)

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="no entries"):
            CoverageSet(kind="ccs", momdp_fingerprint="x", entries=())


class TestJsonRoundTrip:
    def test_bitwise_round_trip(self, tmp_path):
        m = random_momdp(55, (5, 3, 3, 4))
        cs = convex_coverage_set(m, resolution=6)
        path = tmp_path / "cs.json"
        save_coverage(cs, path)
        loaded = load_coverage(path)
        assert loaded.kind == cs.kind
        assert loaded.momdp_fingerprint == cs.momdp_fingerprint
        assert len(loaded) == len(cs)
        for a, b in zip(cs.entries, loaded.entries):
            assert a.policy.id == b.policy.id
            assert a.policy.action_map == b.policy.action_map
            assert np.array_equal(a.value, b.value)
            assert a.witness_weights == b.witness_weights

    def test_missing_key_reports_path(self):
        with pytest.raises(ConfigError, match="entries"):
            coverage_from_json({"kind": "ccs", "momdp_fingerprint": "x"})

    def test_unknown_kind_rejected(self):
        with pytest.raises(ConfigError) as info:
            coverage_from_json(
                {"kind": "hull", "momdp_fingerprint": "x", "entries": [{}]}
            )
        assert info.value.path == "$.kind"

    def test_malformed_entry_reports_index(self, make_bandit):
        cs = pareto_set_bruteforce(make_bandit([(1.0, 0.0), (0.0, 1.0)]))
        doc = coverage_to_json(cs)
        del doc["entries"][1]["value"]
        with pytest.raises(ConfigError) as info:
            coverage_from_json(doc)
        assert info.value.path == "$.entries[1]"

    def test_dominated_json_rejected(self, make_bandit):
        cs = pareto_set_bruteforce(make_bandit([(1.0, 0.0), (0.0, 1.0)]))
        doc = coverage_to_json(cs)
        doc["entries"].append(
            {
                "policy_id": 7,
                "action_map": [0],
                "value": [-5.0, -5.0],
                "witness_weights": [],
            }
        )
        with pytest.raises(ConfigError) as info:
            coverage_from_json(doc)
        assert info.value.path == "$.entries"
