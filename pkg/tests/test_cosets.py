import pytest

from monokit import EngineKind, WordError, WordVerdict
from monokit.backend.cosets import (
    CosetTable, Exhausted, NormalFormEngine, build_engine, coset_enumeration, word_problem,
)
from monokit.backend.words import (
    GeneratingGraph, GroupoidPresentation, VertexGroupPresentation, make_word,
)

COMMUTATOR = ((0, 1), (1, 1), (0, -1), (1, -1))


def cyclic_presentation(n: int) -> VertexGroupPresentation:
    return VertexGroupPresentation("*", ("g",), (((0, 1),) * n,))


def loop_presentation(*relators) -> GroupoidPresentation:
    graph = GeneratingGraph(["*"], {"g": ("*", "*"), "h": ("*", "*")})
    return GroupoidPresentation(graph, tuple(make_word(graph, r) for r in relators))


@pytest.mark.parametrize("n", range(1, 9))
def test_cyclic_groups_enumerate(n):
    table = coset_enumeration(cyclic_presentation(n), budget=100)
    assert isinstance(table, CosetTable)
    assert table.order == n
    assert table.verify(cyclic_presentation(n))
    assert table.act(0, ((0, 1),) * n) == 0


def test_symmetric_group_presentation():
    # <s, t | s^2, t^3, (st)^2>
    P = VertexGroupPresentation("*", ("s", "t"), (
        ((0, 1), (0, 1)),
        ((1, 1), (1, 1), (1, 1)),
        ((0, 1), (1, 1), (0, 1), (1, 1)),
    ))
    engine = build_engine(P, budget=200)
    assert engine.kind == EngineKind.ENUMERATED
    assert engine.order == 6
    assert engine.describe() == "finite of order 6"
    forms = range(engine.order)
    for a in forms:
        assert engine.multiply(a, engine.invert(a)) == engine.identity
        for b in forms:
            for c in forms:
                assert engine.multiply(engine.multiply(a, b), c) == engine.multiply(a, engine.multiply(b, c))


def test_representatives_reach_their_cosets():
    table = coset_enumeration(cyclic_presentation(5), budget=50)
    for c, word in enumerate(table.representatives):
        assert table.act(0, word) == c
    assert max(len(w) for w in table.representatives) == 2


def test_rank_zero_and_budget_validation():
    assert coset_enumeration(VertexGroupPresentation("*", ()), budget=1).order == 1
    with pytest.raises(ValueError):
        coset_enumeration(cyclic_presentation(3), budget=0)


def test_infinite_group_exhausts_budget():
    P = VertexGroupPresentation("*", ("a", "b"), (COMMUTATOR,))
    result = coset_enumeration(P, budget=50)
    assert isinstance(result, Exhausted)
    assert result.budget == 50
    engine = build_engine(P, budget=50)
    assert not engine.certified
    assert engine.order is None
    assert engine.describe() == "undecided (budget 50 exhausted)"


def test_free_engine_uses_reduced_words():
    engine = build_engine(VertexGroupPresentation("*", ("a",)), budget=10)
    assert engine.kind == EngineKind.FREE
    assert engine.describe() == "free rank 1"
    assert engine.normal_form(((0, 1), (0, -1), (0, 1))) == ((0, 1),)
    assert engine.invert(((0, 1),)) == ((0, -1),)
    assert engine.order is None
    assert NormalFormEngine(VertexGroupPresentation("*", ()), EngineKind.FREE, 10).order == 1


def test_word_problem_verdicts():
    P = loop_presentation([("g", 1)] * 3, [("h", 1)])
    trivial = word_problem(P, make_word(P.graph, [("g", 1)] * 6), budget=100)
    assert trivial.verdict == WordVerdict.TRIVIAL
    nontrivial = word_problem(P, make_word(P.graph, [("g", 1), ("h", 1)]), budget=100)
    assert nontrivial.verdict == WordVerdict.NON_TRIVIAL


def test_word_problem_in_free_groupoid():
    P = loop_presentation()
    w = make_word(P.graph, [("g", 1), ("h", 1), ("h", -1), ("g", -1)])
    assert word_problem(P, w, budget=10).verdict == WordVerdict.TRIVIAL
    w = make_word(P.graph, [("g", 1), ("h", 1), ("g", -1), ("h", -1)])
    verdict = word_problem(P, w, budget=10)
    assert verdict.verdict == WordVerdict.NON_TRIVIAL
    assert verdict.normal_form == ((0, 1), (1, 1), (0, -1), (1, -1))


def test_word_problem_undecided_carries_budget():
    P = loop_presentation([("g", 1), ("h", 1), ("g", -1), ("h", -1)])
    verdict = word_problem(P, make_word(P.graph, [("g", 1)]), budget=30)
    assert verdict.verdict == WordVerdict.UNDECIDED
    assert verdict.budget == 30


def test_word_problem_needs_closed_words():
    graph = GeneratingGraph(["a", "b"], {"e": ("a", "b")})
    with pytest.raises(WordError):
        word_problem(GroupoidPresentation(graph), make_word(graph, [("e", 1)]), budget=10)
