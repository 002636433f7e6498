import random

import networkx as nx
import pytest

from conftest import SMALL_GROUPS, random_connected_graph, random_tree
from monokit import EngineKind, GlobalizationError, GroupoidError, MonokitError, Verdict
from monokit.backend.groupoid import cyclic_group, pair_groupoid, star
from monokit.backend.monodromy import (
    CanonicalMorphism, FreeGroupTarget, MonodromyElement, PregroupoidSubset, build_monodromy,
    canonical_morphism, free_rank, globalize, monodromy_window, pi1_graph, star_covering_report,
    subdivide_triangles,
)

BUDGET = 10_000


def cyclic_monodromy(n: int, W=None):
    G = cyclic_group(n)
    W = W if W is not None else ["0", "1", str(n - 1)]
    return G, build_monodromy(G, PregroupoidSubset.of(G, W), BUDGET)


# ----------------------------------------------------------------------
# Pregroupoids
# ----------------------------------------------------------------------
def test_pregroupoid_preconditions(z5):
    with pytest.raises(GroupoidError):
        PregroupoidSubset.of(z5, ["1", "4"])
    with pytest.raises(GroupoidError):
        PregroupoidSubset.of(z5, ["0", "1"])
    with pytest.raises(GroupoidError):
        PregroupoidSubset.of(z5, ["0", "7"])


def test_products_only_stay_inside_w(z5):
    W = PregroupoidSubset.of(z5, ["0", "1", "4"])
    assert ("1", "4", "0") in W.products
    assert all(ab in W for _, _, ab in W.products)
    assert ("1", "1", "2") not in W.products
    assert W.generates()


# ----------------------------------------------------------------------
# Vertex groups
# ----------------------------------------------------------------------
@pytest.mark.parametrize("n", range(4, 8))
def test_cyclic_group_with_unit_steps_is_free_of_rank_one(n):
    _, M = cyclic_monodromy(n)
    engine = M.engine_at("*")
    assert engine.kind == EngineKind.FREE
    assert engine.describe() == "free rank 1"
    assert free_rank(M, "*") == 1
    assert M.certified and not M.is_finite


def test_unit_steps_cover_z3():
    # {0, 1, 2} is all of Z/3, so the relator [1][1][2]^-1 survives
    _, M = cyclic_monodromy(3)
    engine = M.engine_at("*")
    assert engine.kind == EngineKind.ENUMERATED
    assert engine.order == 3
    assert free_rank(M, "*") is None


def test_full_generation_recovers_the_group(small_group):
    G = small_group
    M = build_monodromy(G, PregroupoidSubset.of(G, G.morphism_ids), BUDGET)
    engine = M.engine_at("*")
    assert engine.certified
    assert engine.order == len(G)
    p = canonical_morphism(M)
    H, names = M.materialize()
    assert len(H) == len(G)
    assert sorted(p(e) for e in names) == sorted(G.morphism_ids)


def test_inclusion_and_canonical_morphism_agree(z5):
    _, M = cyclic_monodromy(5)
    p = canonical_morphism(M)
    for a in ["0", "1", "4"]:
        assert p(M.include(a)) == a
    t = M.include("1")
    assert M.compose(t, M.inverse(t)) == M.identity("*")
    five = M.identity("*")
    for _ in range(5):
        five = M.compose(five, t)
    assert p(five) == "0"
    assert five != M.identity("*")
    with pytest.raises(GroupoidError):
        M.include("2")


def test_materialize_refuses_infinite_groupoids():
    _, M = cyclic_monodromy(4)
    with pytest.raises(MonokitError):
        M.materialize()


def test_warns_but_builds_when_w_does_not_generate():
    G = cyclic_group(6)
    W = PregroupoidSubset.of(G, ["0", "2", "4"])
    assert not W.generates()
    M = build_monodromy(G, W, BUDGET)
    assert M.engine_at("*").order == 3


# ----------------------------------------------------------------------
# Star coverings
# ----------------------------------------------------------------------
@pytest.mark.parametrize("n", range(4, 8))
def test_star_covering_on_cyclic_groups(n):
    G, M = cyclic_monodromy(n)
    depth = 3 * n
    report = star_covering_report(M, canonical_morphism(M), "*", depth)
    assert report.surjective == Verdict.PASSED
    assert report.equinumerous == Verdict.PASSED
    assert report.local_injectivity == Verdict.PASSED
    assert report.inclusion_injective == Verdict.PASSED
    assert report.universal
    assert not report.closed
    assert report.uniform_fiber_bound == 5
    assert f"fiber counts windowed at depth {depth}" in report.undecided
    # walks on the integer line of length <= depth, read mod n
    line = [k % n for k in range(-depth, depth + 1)]
    assert dict(report.fibers) == {str(g): line.count(g) for g in range(n)}


def test_star_covering_needs_enough_depth():
    _, M = cyclic_monodromy(10)
    report = star_covering_report(M, canonical_morphism(M), "*", 2)
    assert report.surjective == Verdict.UNDECIDED
    assert report.status == Verdict.UNDECIDED
    assert "surjectivity not reached within depth 2" in report.undecided
    assert star_covering_report(M, canonical_morphism(M), "*", 5).surjective == Verdict.PASSED
    with pytest.raises(MonokitError):
        star_covering_report(M, canonical_morphism(M), "*", 0)


def test_star_covering_refutes_surjectivity_on_closed_windows():
    G = cyclic_group(6)
    M = build_monodromy(G, PregroupoidSubset.of(G, ["0", "2", "4"]), BUDGET)
    report = star_covering_report(M, canonical_morphism(M), "*", 8)
    assert report.closed
    assert report.surjective == Verdict.REFUTED
    assert set(report.witnesses["unreached"]) == {"1", "3", "5"}


def test_full_generation_is_an_exact_covering(small_group):
    G = small_group
    M = build_monodromy(G, PregroupoidSubset.of(G, G.morphism_ids), BUDGET)
    report = star_covering_report(M, canonical_morphism(M), "*", 8)
    assert report.closed and report.fibers_exact
    assert set(report.fibers.values()) == {1}
    assert report.status == Verdict.PASSED


class _CollapsingMorphism(CanonicalMorphism):
    def __call__(self, e):
        return self.monodromy.ambient.identity(e.src)


def test_star_covering_refutes_a_morphism_that_disagrees_with_the_window():
    _, M = cyclic_monodromy(5)
    report = star_covering_report(M, _CollapsingMorphism(M), "*", 10)
    assert report.local_injectivity == Verdict.REFUTED
    assert report.witnesses["local_injectivity"][1] != "0"
    assert report.equinumerous == Verdict.REFUTED
    assert report.witnesses["translate_failure"] == "1"
    assert report.status == Verdict.REFUTED


def test_windows_record_word_lengths():
    _, M = cyclic_monodromy(7)
    window = monodromy_window(M, "*", 3)
    assert len(window) == 7
    assert sorted(window.lengths.values()) == [0, 1, 1, 2, 2, 3, 3]
    assert not window.inconsistencies


# ----------------------------------------------------------------------
# Graphs
# ----------------------------------------------------------------------
def test_subdivision_removes_triangles():
    Y = subdivide_triangles(nx.complete_graph(4))
    assert sum(nx.triangles(Y).values()) == 0
    assert Y.number_of_nodes() == 4 + 6


def test_subdivision_midpoints_avoid_existing_vertices():
    X = nx.complete_graph(3)
    X.add_edge(0, "0~1")
    Y = subdivide_triangles(X)
    assert Y.number_of_nodes() == 4 + 3
    assert sum(nx.triangles(Y).values()) == 0
    assert Y.degree("0~1") == 1
    _, _, M = pi1_graph(X)
    (comp,) = M.forest.components
    assert free_rank(M, comp.base) == 1


def test_separators_in_vertex_names():
    X = nx.cycle_graph(["a", "a,a", "(a)", "b"])
    G, _, M = pi1_graph(X)
    assert len(G) == 16
    (comp,) = M.forest.components
    assert free_rank(M, comp.base) == 1


def test_rank_law_on_random_graphs():
    rng = random.Random(11)
    for _ in range(30):
        n = rng.randrange(1, 9)
        X = random_connected_graph(n, rng.randrange(0, 5), rng)
        expected = X.number_of_edges() - X.number_of_nodes() + 1
        for reverse in (False, True):
            _, _, M = pi1_graph(X, BUDGET, reverse_forest=reverse)
            (comp,) = M.forest.components
            assert free_rank(M, comp.base) == expected


def test_rank_law_counts_components():
    X = nx.disjoint_union(nx.cycle_graph(4), nx.path_graph(3))
    _, _, M = pi1_graph(X)
    ranks = sorted(free_rank(M, c.base) for c in M.forest.components)
    assert ranks == [0, 1]


def test_trees_collapse_to_trivial_vertex_groups():
    rng = random.Random(5)
    for _ in range(10):
        n = rng.randrange(2, 7)
        T = random_tree(n, rng)
        G, _, M = pi1_graph(T)
        assert all(e.order == 1 for e in M.engines.values())
        p = canonical_morphism(M)
        for x in G.objects:
            window = monodromy_window(M, x, 2 * n)
            assert window.closed
            assert sorted(p(e) for e in window) == sorted(star(G, x))


# ----------------------------------------------------------------------
# Globalisation
# ----------------------------------------------------------------------
def test_globalize_into_the_integers():
    G, M = cyclic_monodromy(5)
    Z = FreeGroupTarget(1)
    (t,) = Z.generators
    f = {"0": Z.group.identity, "1": t, "4": t ** -1}
    result = globalize(M, f, Z)
    assert result.ok
    g = result.morphism
    for a, value in f.items():
        assert g(M.include(a)) == value
    assert g(M.compose(M.include("1"), M.include("1"))) == t ** 2
    assert g.check_window("*", 6) == ()


def test_globalize_reports_first_obstruction():
    G = cyclic_group(6)
    W = ["0", "1", "2", "4", "5"]
    M = build_monodromy(G, PregroupoidSubset.of(G, W), BUDGET)
    Z = FreeGroupTarget(1)
    (t,) = Z.generators
    f = {"0": Z.group.identity, "1": t, "5": t ** -1, "2": t, "4": t ** -1}
    result = globalize(M, f, Z)
    assert not result.ok
    expected = next((a, b) for a, b, ab in M.defining_relators if f[a] * f[b] != f[ab])
    assert result.obstruction == expected


def test_globalize_into_a_finite_groupoid():
    G = pair_groupoid("abc")
    W = [G.identity(x) for x in G.objects] + ["(a,b)", "(b,a)", "(b,c)", "(c,b)"]
    M = build_monodromy(G, PregroupoidSubset.of(G, W), BUDGET)
    result = globalize(M, {a: a for a in W}, G)
    assert result.ok
    p = canonical_morphism(M)
    for x in G.objects:
        for e in monodromy_window(M, x, 4):
            assert result.morphism(e) == p(e)


def _finite_targets():
    targets = list(SMALL_GROUPS.values()) + [cyclic_group(n) for n in range(9, 13)]
    return [H for H in targets if len(H) > 1]


@pytest.mark.parametrize("n", range(3, 8))
def test_globalize_cyclic_unit_steps_into_small_groups(n):
    rng = random.Random(n)
    G, M = cyclic_monodromy(n)
    M_rev = build_monodromy(G, M.subset, BUDGET, reverse_forest=True)
    for _ in range(20):
        H = rng.choice(_finite_targets())
        h = rng.choice(H.morphism_ids)
        f = {"0": H.identity("*"), "1": h, str(n - 1): H.inverse(h)}
        # over Z/3 the unit steps satisfy h^3 = 1; above that nothing is forced
        compatible = n > 3 or H.multiply([h, h, h]) == H.identity("*")
        result = globalize(M, f, H)
        assert result.ok == compatible
        if not result.ok:
            assert result.obstruction is not None
            continue
        g = result.morphism
        for a, value in f.items():
            assert g(M.include(a)) == value
        assert g.check_window("*", 8) == ()
        g_rev = globalize(M_rev, f, H).morphism
        for e in monodromy_window(M, "*", 8):
            assert g_rev(M_rev.element(M.representative(e))) == g(e)


def test_globalize_rejects_non_morphisms(z5):
    _, M = cyclic_monodromy(5)
    Z = FreeGroupTarget(1)
    (t,) = Z.generators
    with pytest.raises(GlobalizationError):
        globalize(M, {"0": Z.group.identity, "1": t}, Z)
    with pytest.raises(GlobalizationError):
        globalize(M, {"0": t, "1": t, "4": t ** -1}, Z)
    with pytest.raises(GlobalizationError):
        globalize(M, {"0": Z.group.identity, "1": t, "4": t}, Z)


def test_elements_order_and_print():
    e = MonodromyElement("a", "b", ())
    assert str(e) == "a->b#()"
    assert MonodromyElement("a", "a", ()) < e
