import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monokit import PresentationError, WordError, WordVerdict
from monokit.backend.cosets import word_problem
from monokit.backend.groupoid import cyclic_group, hom_set, pair_groupoid, trivial_bundle
from monokit.backend.words import (
    GeneratingGraph, GroupoidPresentation, Word, check_word, collapse_presentation,
    cyclic_reduce, format_letter, free_reduce, invert_group_word, make_word, parse_letter,
    reduce_word, spanning_forest,
)

group_words = st.lists(st.tuples(st.integers(0, 2), st.sampled_from([1, -1])), max_size=24)


@pytest.fixture
def triangle() -> GeneratingGraph:
    return GeneratingGraph(["a", "b", "c"], {"e1": ("a", "b"), "e2": ("b", "c"), "e3": ("c", "a")})


def test_letters_parse_and_format():
    assert parse_letter("e1^-1") == ("e1", -1)
    assert parse_letter(" e2 ") == ("e2", 1)
    assert format_letter(("e1", -1)) == "e1^-1"


def test_graph_rejects_bad_edges():
    with pytest.raises(PresentationError):
        GeneratingGraph(["a"], {"e": ("a", "b")})
    with pytest.raises(PresentationError):
        GeneratingGraph(["a", "b"], {"e": ("a", "b")}, degenerate={"e"})


def test_words_compose_and_invert(triangle):
    w = make_word(triangle, [("e1", 1), ("e2", 1)])
    assert (w.src, w.tgt) == ("a", "c")
    assert str(w) == "e1 e2"
    back = w.inverse()
    assert back.letters == (("e2", -1), ("e1", -1))
    assert reduce_word(triangle, w.then(back)) == Word("a", "a")
    assert str(Word("a", "a")) == "1_a"
    with pytest.raises(WordError):
        w.then(w)


def test_ill_formed_words_are_rejected(triangle):
    with pytest.raises(WordError):
        make_word(triangle, [("e1", 1), ("e3", 1)])
    with pytest.raises(WordError):
        make_word(triangle, [])
    with pytest.raises(WordError):
        check_word(triangle, Word("a", "c", (("e1", 1),)))
    with pytest.raises(WordError):
        make_word(triangle, [("nope", 1)])


def test_relators_must_be_closed(triangle):
    with pytest.raises(PresentationError):
        GroupoidPresentation(triangle, (make_word(triangle, [("e1", 1)]),))


def test_spanning_forest_of_triangle(triangle):
    forest = spanning_forest(triangle)
    (comp,) = forest.components
    assert comp.base == "a"
    assert comp.tree_edges == {"e1", "e3"}
    assert comp.paths["c"].letters == (("e3", -1),)


def test_spanning_forest_components_and_reverse_order():
    graph = GeneratingGraph(["a", "b", "c", "d"], {"x": ("a", "b"), "y": ("a", "b"), "z": ("c", "d")})
    forest = spanning_forest(graph)
    assert [c.base for c in forest.components] == ["a", "c"]
    assert forest.tree_edges == {"x", "z"}
    assert spanning_forest(graph, reverse=True).tree_edges == {"y", "z"}
    with pytest.raises(WordError):
        forest.component_of("q")


def test_collapse_of_triangle(triangle):
    relator = make_word(triangle, [("e1", 1), ("e2", 1), ("e3", 1)])
    forest = spanning_forest(triangle)
    free = collapse_presentation(GroupoidPresentation(triangle), forest)["a"]
    assert free.generators == ("e2",)
    assert free.is_free and free.free_rank == 1
    cyclic = collapse_presentation(GroupoidPresentation(triangle, (relator,)), forest)["a"]
    assert cyclic.relations == (((0, 1),),)
    assert cyclic.free_rank is None


def test_generator_count_is_cycle_rank():
    graph = GeneratingGraph(
        ["a", "b", "c", "d"],
        {"ab": ("a", "b"), "bc": ("b", "c"), "cd": ("c", "d"), "da": ("d", "a"), "ac": ("a", "c"),
         "loop": ("b", "b")},
    )
    P = collapse_presentation(GroupoidPresentation(graph), spanning_forest(graph))["a"]
    assert P.rank == len(graph.edges) - len(graph.vertices) + 1


def test_degenerate_edges_never_generate():
    graph = GeneratingGraph(["a"], {"1a": ("a", "a")}, degenerate={"1a"})
    assert graph.proper_edges == ()
    P = collapse_presentation(GroupoidPresentation(graph), spanning_forest(graph))["a"]
    assert P.rank == 0


@given(group_words)
def test_free_reduce_is_idempotent(word):
    once = free_reduce(word)
    assert free_reduce(once) == once
    assert all(once[i] != (once[i + 1][0], -once[i + 1][1]) for i in range(len(once) - 1))


@given(group_words)
def test_word_times_inverse_reduces_to_empty(word):
    assert free_reduce(list(word) + list(invert_group_word(word))) == ()
    assert invert_group_word(invert_group_word(word)) == tuple(word)


@given(group_words)
@settings(max_examples=200)
def test_cyclic_reduce_is_cyclically_reduced(word):
    reduced = cyclic_reduce(word)
    assert len(reduced) <= len(free_reduce(word))
    if len(reduced) >= 2:
        assert reduced[0] != (reduced[-1][0], -reduced[-1][1])


def table_presentation(G) -> GroupoidPresentation:
    """Every morphism an edge, every composite a relator a b (ab)^-1."""
    graph = GeneratingGraph(list(G.objects), {m: G.morphisms[m] for m in G.morphism_ids})
    relators = tuple(make_word(graph, [(a, 1), (b, 1), (ab, -1)])
                     for (a, b), ab in sorted(G.composites.items()))
    return GroupoidPresentation(graph, relators)


TABLES = [pair_groupoid("abc"), trivial_bundle("ab", cyclic_group(2)), cyclic_group(4)]
PRESENTED = [(G, table_presentation(G)) for G in TABLES]


def random_closed_word(G, graph, rng: random.Random, length: int) -> Word:
    x = rng.choice(G.objects)
    letters, at = [], x
    for _ in range(length):
        letter = rng.choice(graph.letters_by_src[at])
        letters.append(letter)
        at = graph.letter_tgt(letter)
    letters.append((rng.choice(sorted(hom_set(G, at, x))), 1))
    return make_word(graph, letters)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(0, len(TABLES) - 1), st.integers(0, 8))
def test_collapse_keeps_the_word_problem_of_a_table(seed, which, length):
    G, P = PRESENTED[which]
    w = random_closed_word(G, P.graph, random.Random(seed), length)
    value = G.multiply([e if s > 0 else G.inverse(e) for e, s in w.letters], at=w.src)
    verdict = word_problem(P, w, budget=2_000).verdict
    expected = WordVerdict.TRIVIAL if G.is_identity(value) else WordVerdict.NON_TRIVIAL
    assert verdict == expected
