from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property, reduce
from operator import mul
from typing import Any, Dict, Hashable, Optional, Sequence, Tuple, Union

from sympy.combinatorics.coset_table import coset_enumeration_r
from sympy.combinatorics.fp_groups import FpGroup
from sympy.combinatorics.free_groups import free_group

from monokit import EngineKind, WordError, WordVerdict, get_logger
from monokit.backend.words import (GroupWord, GroupoidPresentation, SpanningForest,
                                   VertexGroupPresentation, Word, check_word,
                                   collapse_presentation, free_reduce,
                                   invert_group_word, spanning_forest)

logger = get_logger(__name__)

# =============================================================================
#  Coset tables
# =============================================================================

def column(letter: Tuple[int, int]) -> int:
    """Columns follow [g0, g0^-1, g1, g1^-1, ...]."""
    g, s = letter
    return 2 * g + (0 if s > 0 else 1)


@dataclass(frozen=True, eq=False)
class CosetTable:
    """Complete coset table of the trivial subgroup: the regular action."""

    rank: int
    rows: Tuple[Tuple[int, ...], ...]

    @property
    def order(self) -> int:
        return len(self.rows)

    def act(self, coset: int, word: Sequence[Tuple[int, int]]) -> int:
        for letter in word:
            coset = self.rows[coset][column(letter)]
        return coset

    @cached_property
    def representatives(self) -> Tuple[GroupWord, ...]:
        """Shortest word reaching each coset from coset 0."""
        reps: Dict[int, GroupWord] = {0: ()}
        queue = deque([0])
        while queue:
            c = queue.popleft()
            for g in range(self.rank):
                for s in (1, -1):
                    d = self.rows[c][column((g, s))]
                    if d not in reps:
                        reps[d] = reps[c] + ((g, s),)
                        queue.append(d)
        return tuple(reps[c] for c in range(self.order))

    def multiply(self, a: int, b: int) -> int:
        return self.act(a, self.representatives[b])

    def invert(self, a: int) -> int:
        return self.act(0, invert_group_word(self.representatives[a]))

    def verify(self, presentation: VertexGroupPresentation) -> bool:
        """Replay: a transitive permutation action satisfying every relation."""
        n = self.order
        if n == 0 or any(len(row) != 2 * self.rank for row in self.rows):
            return False
        for c, row in enumerate(self.rows):
            for g in range(self.rank):
                fwd, back = row[2 * g], row[2 * g + 1]
                if not (0 <= fwd < n and 0 <= back < n):
                    return False
                if self.rows[fwd][2 * g + 1] != c or self.rows[back][2 * g] != c:
                    return False
        for c in range(n):
            for rel in presentation.relations:
                if self.act(c, rel) != c:
                    return False
        return len(self.representatives) == n


@dataclass(frozen=True)
class Exhausted:
    budget: int
    reason: str = "row budget exhausted"


def to_fp_group(presentation: VertexGroupPresentation):
    """sympy FpGroup for a presentation of positive rank."""
    F, *gens = free_group(", ".join(f"g{i}" for i in range(presentation.rank)))
    relators = [as_element(F, gens, rel) for rel in presentation.relations]
    return FpGroup(F, [r for r in relators if r != F.identity]), F, gens


def as_element(F, gens, word: Sequence[Tuple[int, int]]):
    return reduce(mul, (gens[g] ** s for g, s in word), F.identity)


def coset_enumeration(presentation: VertexGroupPresentation,
                      budget: int) -> Union[CosetTable, Exhausted]:
    """HLT coset enumeration of the trivial subgroup, at most ``budget`` rows."""
    if budget < 1:
        raise ValueError("Coset enumeration budget must be at least 1.")
    if presentation.rank == 0:
        return CosetTable(0, ((),))
    fp, _, _ = to_fp_group(presentation)
    try:
        C = coset_enumeration_r(fp, [], max_cosets=budget)
    except ValueError as e:
        logger.debug(f"Coset enumeration at '{presentation.base}' stopped: {e}")
        return Exhausted(budget)
    C.compress()
    table = CosetTable(presentation.rank, tuple(tuple(row) for row in C.table))
    if not table.verify(presentation):
        logger.warning(f"Coset table at '{presentation.base}' failed its replay check.")
        return Exhausted(budget, "table failed replay")
    logger.info(f"Vertex group at '{presentation.base}' enumerated: order {table.order}.")
    return table

# =============================================================================
#  Normal-form engines
# =============================================================================

@dataclass(frozen=True, eq=False)
class NormalFormEngine:
    """Normal forms in a vertex group.

    FREE: reduced words (no relations survive). ENUMERATED: coset indices
    of a complete table. UNDECIDED: reduced words of the free cover, which
    may split one group element into several forms.
    """

    presentation: VertexGroupPresentation
    kind: EngineKind
    budget: int
    table: Optional[CosetTable] = None

    @property
    def certified(self) -> bool:
        return self.kind != EngineKind.UNDECIDED

    @property
    def order(self) -> Optional[int]:
        if self.kind == EngineKind.ENUMERATED:
            return self.table.order
        if self.kind == EngineKind.FREE and self.presentation.rank == 0:
            return 1
        return None

    @property
    def identity(self) -> Hashable:
        return 0 if self.table is not None else ()

    def normal_form(self, word: Sequence[Tuple[int, int]]) -> Hashable:
        if self.table is not None:
            return self.table.act(0, word)
        return free_reduce(word)

    def word_of(self, form: Hashable) -> GroupWord:
        if self.table is not None:
            return self.table.representatives[form]
        return form

    def multiply(self, a: Hashable, b: Hashable) -> Hashable:
        if self.table is not None:
            return self.table.multiply(a, b)
        return free_reduce(a + b)

    def invert(self, a: Hashable) -> Hashable:
        if self.table is not None:
            return self.table.invert(a)
        return invert_group_word(a)

    def describe(self) -> str:
        if self.kind == EngineKind.FREE:
            return f"free rank {self.presentation.rank}"
        if self.kind == EngineKind.ENUMERATED:
            return f"finite of order {self.table.order}"
        return f"undecided (budget {self.budget} exhausted)"


def build_engine(presentation: VertexGroupPresentation, budget: int) -> NormalFormEngine:
    if presentation.is_free:
        return NormalFormEngine(presentation, EngineKind.FREE, budget)
    result = coset_enumeration(presentation, budget)
    if isinstance(result, CosetTable):
        return NormalFormEngine(presentation, EngineKind.ENUMERATED, budget, result)
    return NormalFormEngine(presentation, EngineKind.UNDECIDED, budget)

# =============================================================================
#  Word problem
# =============================================================================

@dataclass(frozen=True)
class WordProblemVerdict:
    verdict: WordVerdict
    certificate: str
    normal_form: Any = None
    budget: Optional[int] = None


def word_problem(P: GroupoidPresentation, w: Word, budget: int,
                 forest: Optional[SpanningForest] = None) -> WordProblemVerdict:
    """Decide whether a closed word is an identity of the presented groupoid."""
    if not w.closed:
        raise WordError(f"Word '{w}' is not closed.")
    check_word(P.graph, w)
    forest = forest or spanning_forest(P.graph)
    comp = forest.component_of(w.src)
    presentation = collapse_presentation(P, forest)[comp.base]
    # conjugating to the base only adds tree letters, which collapse away
    image = presentation.collapse(w)

    if presentation.is_free:
        if not image:
            return WordProblemVerdict(WordVerdict.TRIVIAL, "free reduction to the empty word", ())
        return WordProblemVerdict(WordVerdict.NON_TRIVIAL, "nonempty free normal form", image)

    result = coset_enumeration(presentation, budget)
    if isinstance(result, CosetTable):
        end = result.act(0, image)
        if end == 0:
            return WordProblemVerdict(WordVerdict.TRIVIAL,
                                      f"coset table of order {result.order} fixes coset 0", end)
        return WordProblemVerdict(WordVerdict.NON_TRIVIAL,
                                  f"coset table of order {result.order} sends coset 0 to {end}", end)
    if not image:
        return WordProblemVerdict(WordVerdict.TRIVIAL, "free reduction to the empty word", ())
    return WordProblemVerdict(WordVerdict.UNDECIDED, result.reason, image, budget)
