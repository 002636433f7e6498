from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from monokit import PresentationError, WordError, get_logger

logger = get_logger(__name__)

Letter = Tuple[str, int]                # (edge id, +1 | -1)
GroupLetter = Tuple[int, int]           # (generator index, +1 | -1)
GroupWord = Tuple[GroupLetter, ...]

# =============================================================================
#  Generating graphs and words
# =============================================================================

def inverse_letter(letter: Letter) -> Letter:
    return (letter[0], -letter[1])


def format_letter(letter: Letter) -> str:
    edge, sign = letter
    return edge if sign > 0 else f"{edge}^-1"


def parse_letter(text: str) -> Letter:
    text = text.strip()
    if text.endswith("^-1"):
        return (text[:-3], -1)
    return (text, 1)


@dataclass(frozen=True, eq=False)
class GeneratingGraph:
    """Vertices and edges; every edge e carries a formal inverse letter e^-1.

    Degenerate edges are loops standing for identities; they are erased
    before presentations are collapsed.
    """

    vertices: Tuple[str, ...]
    edges: Mapping[str, Tuple[str, str]]
    degenerate: FrozenSet[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(sorted(set(self.vertices))))
        object.__setattr__(self, "edges", MappingProxyType(dict(self.edges)))
        object.__setattr__(self, "degenerate", frozenset(self.degenerate))
        known = set(self.vertices)
        for e, (s, t) in self.edges.items():
            if s not in known or t not in known:
                raise PresentationError(f"Edge '{e}' has an endpoint outside the vertex set.")
        for e in self.degenerate:
            if e not in self.edges:
                raise PresentationError(f"Degenerate edge '{e}' is not an edge.")
            s, t = self.edges[e]
            if s != t:
                raise PresentationError(f"Degenerate edge '{e}' is not a loop.")

    def letter_src(self, letter: Letter) -> str:
        s, t = self._edge(letter[0])
        return s if letter[1] > 0 else t

    def letter_tgt(self, letter: Letter) -> str:
        s, t = self._edge(letter[0])
        return t if letter[1] > 0 else s

    def _edge(self, e: str) -> Tuple[str, str]:
        try:
            return self.edges[e]
        except KeyError:
            raise WordError(f"Unknown edge '{e}'.") from None

    @cached_property
    def letters_by_src(self) -> Mapping[str, Tuple[Letter, ...]]:
        out: Dict[str, List[Letter]] = {v: [] for v in self.vertices}
        for e in sorted(self.edges):
            for sign in (1, -1):
                out[self.letter_src((e, sign))].append((e, sign))
        return MappingProxyType({v: tuple(ls) for v, ls in out.items()})

    @cached_property
    def nx_graph(self) -> nx.MultiGraph:
        g = nx.MultiGraph()
        g.add_nodes_from(self.vertices)
        for e, (s, t) in self.edges.items():
            g.add_edge(s, t, key=e)
        return g

    @property
    def proper_edges(self) -> Tuple[str, ...]:
        return tuple(sorted(e for e in self.edges if e not in self.degenerate))


@dataclass(frozen=True)
class Word:
    src: str
    tgt: str
    letters: Tuple[Letter, ...] = ()

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def closed(self) -> bool:
        return self.src == self.tgt

    def inverse(self) -> "Word":
        return Word(self.tgt, self.src, tuple(inverse_letter(l) for l in reversed(self.letters)))

    def then(self, other: "Word") -> "Word":
        if self.tgt != other.src:
            raise WordError(f"Cannot concatenate a word ending at '{self.tgt}' "
                            f"with one starting at '{other.src}'.")
        return Word(self.src, other.tgt, self.letters + other.letters)

    def __str__(self) -> str:
        if not self.letters:
            return f"1_{self.src}"
        return " ".join(format_letter(l) for l in self.letters)


def check_word(graph: GeneratingGraph, w: Word) -> None:
    """Raise WordError unless w is a composable word with consistent endpoints."""
    if w.src not in graph.letters_by_src or w.tgt not in graph.letters_by_src:
        raise WordError(f"Word endpoints '{w.src}', '{w.tgt}' are not vertices.")
    at = w.src
    for letter in w.letters:
        if graph.letter_src(letter) != at:
            raise WordError(f"Letter {format_letter(letter)} does not start at '{at}'.")
        at = graph.letter_tgt(letter)
    if at != w.tgt:
        raise WordError(f"Word ends at '{at}', not at the declared target '{w.tgt}'.")


def make_word(graph: GeneratingGraph, letters: Iterable[Letter], at: Optional[str] = None) -> Word:
    letters = tuple((e, 1 if s > 0 else -1) for e, s in letters)
    if not letters:
        if at is None:
            raise WordError("The empty word needs a base vertex.")
        w = Word(at, at)
    else:
        w = Word(graph.letter_src(letters[0]), graph.letter_tgt(letters[-1]), letters)
    check_word(graph, w)
    return w


def reduce_word(graph: GeneratingGraph, w: Word) -> Word:
    """Free normal form: cancel every adjacent letter/inverse pair."""
    check_word(graph, w)
    stack: List[Letter] = []
    for letter in w.letters:
        if stack and stack[-1] == inverse_letter(letter):
            stack.pop()
        else:
            stack.append(letter)
    return Word(w.src, w.tgt, tuple(stack))

# =============================================================================
#  Group words
# =============================================================================

def free_reduce(word: Sequence[GroupLetter]) -> GroupWord:
    stack: List[GroupLetter] = []
    for g, s in word:
        if stack and stack[-1] == (g, -s):
            stack.pop()
        else:
            stack.append((g, s))
    return tuple(stack)


def cyclic_reduce(word: Sequence[GroupLetter]) -> GroupWord:
    w = list(free_reduce(word))
    while len(w) >= 2 and w[0] == (w[-1][0], -w[-1][1]):
        w = w[1:-1]
    return tuple(w)


def invert_group_word(word: Sequence[GroupLetter]) -> GroupWord:
    return tuple((g, -s) for g, s in reversed(word))

# =============================================================================
#  Presentations
# =============================================================================

@dataclass(frozen=True, eq=False)
class GroupoidPresentation:
    graph: GeneratingGraph
    relators: Tuple[Word, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "relators", tuple(self.relators))
        for r in self.relators:
            if not r.closed:
                raise PresentationError(f"Relator '{r}' is not closed.")
            try:
                check_word(self.graph, r)
            except WordError as e:
                raise PresentationError(f"Relator '{r}' is not composable: {e}") from None


@dataclass(frozen=True, eq=False)
class ForestComponent:
    base: str
    vertices: FrozenSet[str]
    tree_edges: FrozenSet[str]
    paths: Mapping[str, Word]


@dataclass(frozen=True, eq=False)
class SpanningForest:
    components: Tuple[ForestComponent, ...]

    @cached_property
    def _owner(self) -> Mapping[str, ForestComponent]:
        return MappingProxyType({v: c for c in self.components for v in c.vertices})

    def component_of(self, v: str) -> ForestComponent:
        try:
            return self._owner[v]
        except KeyError:
            raise WordError(f"Vertex '{v}' is not in the forest.") from None

    @property
    def tree_edges(self) -> FrozenSet[str]:
        return frozenset().union(*(c.tree_edges for c in self.components))


def spanning_forest(graph: GeneratingGraph, reverse: bool = False) -> SpanningForest:
    """Breadth-first spanning forest, one tree per connected component.

    Each component is rooted at its smallest vertex. Letters leaving a
    vertex are tried in lexicographic edge-id order (descending when
    ``reverse``), positive orientation first.
    """
    components = []
    for verts in sorted(nx.connected_components(graph.nx_graph), key=min):
        base = min(verts)
        paths = {base: Word(base, base)}
        tree = set()
        queue = deque([base])
        while queue:
            v = queue.popleft()
            letters = graph.letters_by_src[v]
            if reverse:
                letters = sorted(letters, key=lambda l: (l[0], -l[1]), reverse=True)
            for letter in letters:
                if letter[0] in graph.degenerate:
                    continue
                w = graph.letter_tgt(letter)
                if w in paths:
                    continue
                paths[w] = Word(base, w, paths[v].letters + (letter,))
                tree.add(letter[0])
                queue.append(w)
        components.append(ForestComponent(base, frozenset(verts), frozenset(tree),
                                          MappingProxyType(paths)))
    return SpanningForest(tuple(components))


@dataclass(frozen=True, eq=False)
class VertexGroupPresentation:
    """One-object presentation of the vertex group at a component base.

    Generator i is the loop T(u) e T(v)^-1 for the i-th non-tree edge
    e: u -> v, where T is the tree path from the base.
    """

    base: str
    generators: Tuple[str, ...]
    relations: Tuple[GroupWord, ...] = ()

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def is_free(self) -> bool:
        return not self.relations

    @property
    def free_rank(self) -> Optional[int]:
        return self.rank if self.is_free else None

    @cached_property
    def _index(self) -> Mapping[str, int]:
        return MappingProxyType({e: i for i, e in enumerate(self.generators)})

    def collapse(self, w: Word) -> GroupWord:
        """Image of a word of this component in the vertex group, freely reduced."""
        idx = self._index
        return free_reduce([(idx[e], s) for e, s in w.letters if e in idx])


def collapse_presentation(P: GroupoidPresentation,
                          forest: SpanningForest) -> Dict[str, VertexGroupPresentation]:
    """Vertex-group presentation per component, keyed by base vertex."""
    out: Dict[str, VertexGroupPresentation] = {}
    for comp in forest.components:
        gens = tuple(
            e for e in P.graph.proper_edges
            if e not in comp.tree_edges and P.graph.edges[e][0] in comp.vertices
        )
        gp = VertexGroupPresentation(comp.base, gens)
        relations = []
        for r in P.relators:
            if r.src not in comp.vertices:
                continue
            rel = cyclic_reduce(gp.collapse(r))
            if rel and rel not in relations:
                relations.append(rel)
        out[comp.base] = VertexGroupPresentation(comp.base, gens, tuple(relations))
        logger.debug(f"Component at '{comp.base}': {len(gens)} generators, {len(relations)} relations.")
    return out
