import random
from itertools import combinations

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import random_space
from monokit import TopologyError, TopologySizeError, Verdict
from monokit.backend.groupoid import (
    cyclic_group, normal_closure, pair_groupoid, quotient, trivial_bundle,
)
from monokit.backend.topology import (
    FiniteTopology, check_continuity, check_topological_groupoid, check_topological_morphism,
    discrete_topology, generate_from_base, indiscrete_topology, is_topology, product_topology,
    pullback_space, sierpinski, subspace_topology,
)

POINTS = ["a", "b", "c", "d"]


def powerset(points):
    return [frozenset(c) for r in range(len(points) + 1) for c in combinations(points, r)]


def brute_force_continuous(mapping, T_dom, T_cod) -> bool:
    opens = set(T_dom.opens())
    for V in T_cod.opens():
        if frozenset(p for p in T_dom.points if mapping[p] in V) not in opens:
            return False
    return True


# ----------------------------------------------------------------------
# Axioms
# ----------------------------------------------------------------------
def test_is_topology_names_a_missing_union():
    verdict = is_topology("abc", [(), ("a",), ("b",), ("a", "b", "c")])
    assert not verdict.ok
    assert verdict.witness == ("union", frozenset("a"), frozenset("b"))


def test_is_topology_needs_empty_and_full_sets():
    assert is_topology("ab", [("a",), ("a", "b")]).witness[0] == "empty set"
    assert is_topology("ab", [(), ("a",)]).witness[0] == "full set"
    assert is_topology("ab", [(), ("a",), ("a", "b")]).ok
    with pytest.raises(TopologyError):
        is_topology("ab", [(), ("z",)])


def test_from_opens_round_trip():
    family = [(), ("a",), ("a", "b"), ("c",), ("a", "c"), ("a", "b", "c")]
    T = FiniteTopology.from_opens("abc", family)
    assert set(T.opens()) == {frozenset(U) for U in family}
    assert T.neighborhood("b") == {"a", "b"}
    assert T.verify()
    with pytest.raises(TopologyError):
        FiniteTopology.from_opens("abc", [(), ("a",), ("b",), ("a", "b", "c")])


@pytest.mark.parametrize("n", range(1, 6))
def test_open_set_counts(n):
    points = POINTS[:n] if n <= 4 else POINTS + ["e"]
    assert len(discrete_topology(points).opens()) == 2 ** n
    assert len(indiscrete_topology(points).opens()) == 2


def test_sierpinski_space():
    S = sierpinski()
    assert S.opens() == (frozenset(), frozenset({"0"}), frozenset({"0", "1"}))
    assert S.is_open({"0"}) and not S.is_open({"1"})
    assert S.interior({"1"}) == frozenset()


def test_explicit_opens_are_capped():
    with pytest.raises(TopologySizeError):
        discrete_topology(range(17)).open_masks()


def test_neighbourhood_tables_are_checked():
    with pytest.raises(TopologyError):
        FiniteTopology.from_neighborhoods("ab", {"a": ["b"], "b": ["b"]})
    with pytest.raises(TopologyError):
        FiniteTopology.from_neighborhoods("abc", {"a": "ab", "b": "bc", "c": "c"})
    assert FiniteTopology.from_neighborhoods("ab", {"a": "ab", "b": "b"}) == sierpinski("b", "a")


# ----------------------------------------------------------------------
# Generation
# ----------------------------------------------------------------------
def test_subbase_is_flagged_with_witness():
    generated = generate_from_base("abc", [("a", "b"), ("b", "c")])
    assert not generated.is_base
    assert generated.witness == (frozenset("ab"), frozenset("bc"), "b")
    assert generated.topology.neighborhood("b") == {"b"}


def test_base_is_recognised():
    generated = generate_from_base("abc", [("a",), ("b",), ("a", "b", "c")])
    assert generated.is_base and generated.witness is None
    with pytest.raises(TopologyError):
        generate_from_base("abc", [("a", "b")])


def test_generated_topologies_satisfy_the_axioms(rng):
    for _ in range(40):
        T = random_space(POINTS, rng)
        assert T.verify()
        assert is_topology(T.points, T.opens()).ok


def test_subspace_and_product():
    S = sierpinski()
    P = product_topology(S, S)
    assert len(P) == 4
    assert len(P.opens()) == 6
    assert P.neighborhood(("1", "1")) == {(u, v) for u in "01" for v in "01"}
    sub = subspace_topology(P, [("0", "1"), ("1", "1")])
    assert len(sub.opens()) == 3


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32), st.sets(st.sampled_from(POINTS), min_size=1),
       st.sets(st.sampled_from(POINTS), min_size=1))
def test_subspace_of_a_subspace(seed, A, B):
    assume(A & B)
    T = random_space(POINTS, random.Random(seed))
    assert subspace_topology(subspace_topology(T, A), A & B) == subspace_topology(T, A & B)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(1, 4))
def test_open_families_and_neighbourhoods_determine_each_other(seed, n):
    T = random_space(POINTS[:n], random.Random(seed))
    family = T.opens()
    rebuilt = FiniteTopology.from_opens(T.points, family)
    assert rebuilt == T
    assert set(rebuilt.opens()) == set(family)


# ----------------------------------------------------------------------
# Continuity
# ----------------------------------------------------------------------
def test_continuity_witnesses():
    S = sierpinski()
    swap = {"0": "1", "1": "0"}
    cert = check_continuity(swap, S, S, "swap")
    assert not cert.continuous
    assert cert.verdict == Verdict.REFUTED
    assert cert.witness == {"0"}
    assert cert.witness_point == "1"
    assert not cert.replay()
    assert check_continuity({"0": "0", "1": "1"}, S, S).replay()
    with pytest.raises(TopologyError):
        check_continuity({"0": "0"}, S, S)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(1, 4), st.integers(1, 4))
def test_continuity_agrees_with_brute_force(seed, m, n):
    rng = random.Random(seed)
    T_dom = random_space(POINTS[:m], rng)
    T_cod = random_space(POINTS[:n], rng)
    mapping = {p: rng.choice(T_cod.points) for p in T_dom.points}
    cert = check_continuity(mapping, T_dom, T_cod)
    assert cert.continuous == brute_force_continuous(mapping, T_dom, T_cod)
    assert cert.replay() == cert.continuous


# ----------------------------------------------------------------------
# Topological groupoids
# ----------------------------------------------------------------------
def test_pullback_sizes():
    for n in (2, 3):
        G = pair_groupoid(POINTS[:n])
        T = discrete_topology(G.morphism_ids)
        assert len(pullback_space(G, T, "composable")) == n ** 3
        assert len(pullback_space(G, T, "source")) == n ** 3
    with pytest.raises(TopologyError):
        pullback_space(G, T, "target")


def test_discrete_groupoid_is_topological():
    G = trivial_bundle("ab", cyclic_group(2))
    report = check_topological_groupoid(G, discrete_topology(G.morphism_ids), discrete_topology(G.objects))
    assert report.ok
    assert report.difference_equivalence and report.endpoint_remark
    assert report.translations_homeomorphic
    assert all(c.replay() for c in report.certificates.values())


def test_indiscrete_morphisms_over_discrete_objects():
    G = pair_groupoid("ab")
    report = check_topological_groupoid(G, indiscrete_topology(G.morphism_ids), discrete_topology(G.objects))
    assert report.status == Verdict.REFUTED
    assert {c.name for c in report.failures()} == {"source", "target"}
    assert report.difference_equivalence


def test_every_topology_on_pair_two_is_consistent():
    G = pair_groupoid("ab")
    T_X = sierpinski("a", "b")
    candidates = powerset(G.morphism_ids)
    rng = random.Random(2)
    for _ in range(30):
        T_G = generate_from_base(G.morphism_ids, rng.sample(candidates, 3) + [frozenset(G.morphism_ids)])
        report = check_topological_groupoid(G, T_G.topology, T_X)
        assert report.difference_equivalence
        assert report.endpoint_remark
        for cert in report.certificates.values():
            assert cert.replay() == cert.continuous


def test_point_mismatch_is_rejected():
    G = pair_groupoid("ab")
    with pytest.raises(TopologyError):
        check_topological_groupoid(G, discrete_topology("xyz"), discrete_topology(G.objects))


def test_topological_morphisms():
    G = trivial_bundle("ab", cyclic_group(2))
    Q, proj = quotient(G, normal_closure(G, G.endomorphisms()))
    on_morphisms, on_objects = check_topological_morphism(
        proj, discrete_topology(G.morphism_ids), discrete_topology(G.objects),
        indiscrete_topology(Q.morphism_ids), indiscrete_topology(Q.objects))
    assert on_morphisms.continuous and on_objects.continuous

    on_morphisms, on_objects = check_topological_morphism(
        proj, indiscrete_topology(G.morphism_ids), indiscrete_topology(G.objects),
        discrete_topology(Q.morphism_ids), discrete_topology(Q.objects))
    assert not on_morphisms.continuous and not on_objects.continuous
    assert on_morphisms.name == "morphism map"
    assert on_objects.witness is not None
    assert not on_morphisms.replay() and not on_objects.replay()
