from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

import networkx as nx
from sympy.combinatorics.free_groups import free_group

from monokit import (EngineKind, GlobalizationError, GroupoidError, MonokitError,
                     Verdict, WordError, combine_verdicts, get_logger)
from monokit.backend.cosets import NormalFormEngine, build_engine
from monokit.backend.groupoid import (FiniteGroupoid, GroupoidLike, closure,
                                      pair_groupoid, star, tuple_id)
from monokit.backend.words import (GeneratingGraph, GroupWord, GroupoidPresentation,
                                   Letter, SpanningForest, VertexGroupPresentation,
                                   Word, check_word, collapse_presentation,
                                   inverse_letter, reduce_word, spanning_forest)

logger = get_logger(__name__)

# =============================================================================
#  Pregroupoids
# =============================================================================

@dataclass(frozen=True, eq=False)
class PregroupoidSubset:
    """W inside G with O_G contained in W and W = W^-1."""

    ambient: FiniteGroupoid
    carrier: FrozenSet[str]

    @classmethod
    def of(cls, G: FiniteGroupoid, W: Iterable[str]) -> "PregroupoidSubset":
        W = frozenset(W)
        unknown = sorted(a for a in W if a not in G.morphisms)
        if unknown:
            raise GroupoidError(f"W contains unknown morphisms {unknown}.")
        missing = [x for x in G.objects if G.identity(x) not in W]
        if missing:
            raise GroupoidError(f"W is missing the identities at {missing}.")
        open_inverse = sorted(a for a in W if G.inverse(a) not in W)
        if open_inverse:
            raise GroupoidError(f"W is not closed under inversion: {open_inverse}.")
        return cls(G, W)

    def __contains__(self, a: object) -> bool:
        return a in self.carrier

    @cached_property
    def products(self) -> Tuple[Tuple[str, str, str], ...]:
        """All (a, b, ab) with a, b in W composable and ab in W, sorted."""
        G = self.ambient
        out = []
        for a in sorted(self.carrier):
            for b in sorted(self.carrier):
                ab = G.compose(a, b)
                if ab is not None and ab in self.carrier:
                    out.append((a, b, ab))
        return tuple(out)

    def generates(self) -> bool:
        return closure(self.ambient, self.carrier) == frozenset(self.ambient.morphisms)

# =============================================================================
#  Monodromy groupoid
# =============================================================================

@dataclass(frozen=True, order=True)
class MonodromyElement:
    """Class of a word x -> y, kept as its vertex-group normal form at the base."""

    src: str
    tgt: str
    form: Any

    def __str__(self) -> str:
        return f"{self.src}->{self.tgt}#{self.form}"


@dataclass(frozen=True, eq=False)
class MonodromyGroupoid:
    ambient: FiniteGroupoid
    subset: PregroupoidSubset
    graph: GeneratingGraph
    presentation: GroupoidPresentation
    defining_relators: Tuple[Tuple[str, str, str], ...]
    forest: SpanningForest
    vertex_groups: Mapping[str, VertexGroupPresentation]
    engines: Mapping[str, NormalFormEngine]
    letters: Mapping[str, Letter]
    budget: int

    @property
    def objects(self) -> Tuple[str, ...]:
        return self.ambient.objects

    def __contains__(self, e: object) -> bool:
        if not isinstance(e, MonodromyElement):
            return False
        try:
            return self.forest.component_of(e.src) is self.forest.component_of(e.tgt)
        except WordError:
            return False

    def engine_at(self, x: str) -> NormalFormEngine:
        return self.engines[self.forest.component_of(x).base]

    def vertex_group_at(self, x: str) -> VertexGroupPresentation:
        return self.vertex_groups[self.forest.component_of(x).base]

    @property
    def certified(self) -> bool:
        return all(e.certified for e in self.engines.values())

    @property
    def is_finite(self) -> bool:
        return all(e.order is not None for e in self.engines.values())

    # -------------------------------------------------------------------------
    def word(self, elements: Iterable[str], at: Optional[str] = None) -> Word:
        """The word [a1][a2]... of F(W) for a composable sequence in W."""
        letters = tuple(self.letters[a] for a in elements)
        if not letters:
            return Word(at, at)
        w = Word(self.graph.letter_src(letters[0]), self.graph.letter_tgt(letters[-1]), letters)
        check_word(self.graph, w)
        return w

    def element(self, w: Word) -> MonodromyElement:
        check_word(self.graph, w)
        engine = self.engine_at(w.src)
        return MonodromyElement(w.src, w.tgt,
                                engine.normal_form(self.vertex_group_at(w.src).collapse(w)))

    def include(self, a: str) -> MonodromyElement:
        """The universal pregroupoid morphism W -> M(G, W)."""
        if a not in self.subset:
            raise GroupoidError(f"'{a}' is not in W.")
        s, t = self.ambient.morphisms[a]
        return self.element(Word(s, t, (self.letters[a],)))

    # groupoid structure on elements ------------------------------------------
    def src(self, e: MonodromyElement) -> str:
        return e.src

    def tgt(self, e: MonodromyElement) -> str:
        return e.tgt

    def identity(self, x: str) -> MonodromyElement:
        return MonodromyElement(x, x, self.engine_at(x).identity)

    def inverse(self, e: MonodromyElement) -> MonodromyElement:
        return MonodromyElement(e.tgt, e.src, self.engine_at(e.src).invert(e.form))

    def compose(self, a: MonodromyElement, b: MonodromyElement) -> Optional[MonodromyElement]:
        if a.tgt != b.src:
            return None
        return MonodromyElement(a.src, b.tgt, self.engine_at(a.src).multiply(a.form, b.form))

    # -------------------------------------------------------------------------
    def expand(self, base: str, gw: GroupWord) -> Word:
        """Loop at the component base spelling a vertex-group word."""
        comp = self.forest.component_of(base)
        vgp = self.vertex_groups[comp.base]
        result = Word(comp.base, comp.base)
        for i, s in gw:
            edge = vgp.generators[i]
            u, v = self.graph.edges[edge]
            piece = comp.paths[u].then(Word(u, v, ((edge, 1),))).then(comp.paths[v].inverse())
            result = result.then(piece if s > 0 else piece.inverse())
        return result

    def representative(self, e: MonodromyElement) -> Word:
        comp = self.forest.component_of(e.src)
        gw = self.engine_at(e.src).word_of(e.form)
        w = comp.paths[e.src].inverse().then(self.expand(comp.base, gw)).then(comp.paths[e.tgt])
        return reduce_word(self.graph, w)

    def materialize(self) -> Tuple[FiniteGroupoid, Dict[MonodromyElement, str]]:
        """Explicit tables for M(G, W) when every vertex group is certified finite."""
        if not self.is_finite:
            raise MonokitError("M(G, W) has a vertex group that is not certified finite.")
        elements: List[MonodromyElement] = []
        for comp in self.forest.components:
            engine = self.engines[comp.base]
            forms = range(engine.order) if engine.table is not None else [()]
            for x in sorted(comp.vertices):
                for y in sorted(comp.vertices):
                    elements.extend(MonodromyElement(x, y, f) for f in forms)
        name = {e: str(e) for e in elements}
        by_src: Dict[str, List[MonodromyElement]] = {}
        for e in elements:
            by_src.setdefault(e.src, []).append(e)
        H = FiniteGroupoid(
            objects=self.objects,
            morphisms={name[e]: (e.src, e.tgt) for e in elements},
            identities={x: name[self.identity(x)] for x in self.objects},
            inverses={name[e]: name[self.inverse(e)] for e in elements},
            composites={(name[a], name[b]): name[self.compose(a, b)]
                        for a in elements for b in by_src[a.tgt]},
        )
        return H, name


def _letters_for(subset: PregroupoidSubset) -> Tuple[Dict[str, Tuple[str, str]], FrozenSet[str], Dict[str, Letter]]:
    """One edge per inverse pair of W; identities become degenerate edges."""
    G = subset.ambient
    edges, degenerate, letters = {}, set(), {}
    for a in sorted(subset.carrier):
        if G.is_identity(a):
            edges[a] = G.morphisms[a]
            degenerate.add(a)
            letters[a] = (a, 1)
            continue
        rep = min(a, G.inverse(a))
        edges[rep] = G.morphisms[rep]
        letters[a] = (rep, 1) if a == rep else (rep, -1)
    return edges, frozenset(degenerate), letters


def monodromy_presentation(W: PregroupoidSubset) -> Tuple[GroupoidPresentation, Dict[str, Letter]]:
    """Presentation of F(W)/N with one relator word per nontrivial [a][b][ab]^-1."""
    G = W.ambient
    edges, degenerate, letters = _letters_for(W)
    graph = GeneratingGraph(G.objects, edges, degenerate)
    relators = []
    for a, b, ab in W.products:
        raw = (letters[a], letters[b], inverse_letter(letters[ab]))
        kept = tuple(l for l in raw if l[0] not in degenerate)
        word = reduce_word(graph, Word(G.src(a), G.src(a), kept))
        if word.letters and word not in relators:
            relators.append(word)
    return GroupoidPresentation(graph, tuple(relators)), letters


def build_monodromy(G: FiniteGroupoid, W: PregroupoidSubset, budget: int,
                    reverse_forest: bool = False) -> MonodromyGroupoid:
    """M(G, W) = F(W)/N, N normally generated by [a][b][ab]^-1."""
    if W.ambient is not G:
        W = PregroupoidSubset.of(G, W.carrier)
    if not W.generates():
        logger.warning("W does not generate G; M(G, W) is still defined.")
    presentation, letters = monodromy_presentation(W)
    forest = spanning_forest(presentation.graph, reverse=reverse_forest)
    vertex_groups = collapse_presentation(presentation, forest)
    engines = {base: build_engine(vgp, budget) for base, vgp in vertex_groups.items()}
    for base, engine in engines.items():
        logger.info(f"M(G, W) vertex group at '{base}': {engine.describe()}.")
    return MonodromyGroupoid(
        ambient=G,
        subset=W,
        graph=presentation.graph,
        presentation=presentation,
        defining_relators=W.products,
        forest=forest,
        vertex_groups=MappingProxyType(vertex_groups),
        engines=MappingProxyType(engines),
        letters=MappingProxyType(letters),
        budget=budget,
    )

# =============================================================================
#  Canonical morphism
# =============================================================================

@dataclass(frozen=True, eq=False)
class CanonicalMorphism:
    """p: M(G, W) -> G, evaluation of words in G."""

    monodromy: MonodromyGroupoid

    def letter_value(self, letter: Letter) -> str:
        G = self.monodromy.ambient
        return letter[0] if letter[1] > 0 else G.inverse(letter[0])

    def evaluate(self, w: Word) -> str:
        G = self.monodromy.ambient
        return G.multiply((self.letter_value(l) for l in w.letters), at=w.src)

    def __call__(self, e: MonodromyElement) -> str:
        return self.evaluate(self.monodromy.representative(e))


def canonical_morphism(M: MonodromyGroupoid) -> CanonicalMorphism:
    G = M.ambient
    for a, b, ab in M.defining_relators:
        if G.compose(G.compose(a, b), G.inverse(ab)) != G.identity(G.src(a)):
            raise GroupoidError(
                f"Relator [{a}][{b}][{ab}]^-1 does not evaluate to an identity; "
                "the composition table of W is inconsistent."
            )
    p = CanonicalMorphism(M)
    for r in M.presentation.relators:
        if not G.is_identity(p.evaluate(r)):
            raise GroupoidError(f"Relator '{r}' does not evaluate to an identity.")
    return p

# =============================================================================
#  Windows
# =============================================================================

@dataclass(frozen=True, eq=False)
class MonodromyWindow:
    """Elements of the star at ``base`` reachable by at most ``depth`` letters."""

    base: str
    depth: int
    lengths: Mapping[MonodromyElement, int]
    values: Mapping[MonodromyElement, str]
    closed: bool
    inconsistencies: Tuple[Tuple[MonodromyElement, str, str], ...] = ()

    def __iter__(self):
        return iter(self.lengths)

    def __len__(self) -> int:
        return len(self.lengths)


def _generators_from(M: MonodromyGroupoid) -> Dict[str, List[Tuple[str, MonodromyElement]]]:
    out: Dict[str, List[Tuple[str, MonodromyElement]]] = {}
    for a in sorted(M.subset.carrier):
        out.setdefault(M.ambient.src(a), []).append((a, M.include(a)))
    return out


def monodromy_window(M: MonodromyGroupoid, x: str, depth: int) -> MonodromyWindow:
    """Breadth-first layers of M(G, W)_x with their images under p."""
    G = M.ambient
    gens = _generators_from(M)
    start = M.identity(x)
    lengths = {start: 0}
    values = {start: G.identity(x)}
    bad = []
    frontier = [start]
    closed = False
    for level in range(1, depth + 2):
        nxt = []
        for e in frontier:
            for a, step in gens.get(e.tgt, ()):
                f = M.compose(e, step)
                value = G.compose(values[e], a)
                if f in lengths:
                    if values[f] != value:
                        bad.append((f, values[f], value))
                    continue
                if level > depth:
                    nxt.append(f)
                    continue
                lengths[f] = level
                values[f] = value
                nxt.append(f)
        if not nxt:
            closed = True
            break
        if level > depth:
            break
        frontier = nxt
    return MonodromyWindow(x, depth, MappingProxyType(lengths), MappingProxyType(values),
                           closed, tuple(bad))

# =============================================================================
#  Globalisation
# =============================================================================

class FreeGroupTarget:
    """One-object groupoid on a free group of finite rank (rank 1 is Z)."""

    obj = "*"

    def __init__(self, rank: int):
        self.group, *self.generators = free_group(", ".join(f"t{i}" for i in range(rank)))
        self.objects = (self.obj,)

    def src(self, a) -> str:
        return self.obj

    def tgt(self, a) -> str:
        return self.obj

    def identity(self, x: str):
        return self.group.identity

    def inverse(self, a):
        return a ** -1

    def compose(self, a, b):
        return a * b


@dataclass(frozen=True, eq=False)
class GlobalizedMorphism:
    """f': M(G, W) -> H with f' composed with the inclusion equal to f."""

    monodromy: MonodromyGroupoid
    target: Any
    assignment: Mapping[str, Any]
    obj_map: Mapping[str, str]

    def letter_value(self, letter: Letter):
        value = self.assignment[letter[0]]
        return value if letter[1] > 0 else self.target.inverse(value)

    def on_word(self, w: Word):
        H = self.target
        result = H.identity(self.obj_map[w.src])
        for letter in w.letters:
            result = H.compose(result, self.letter_value(letter))
        return result

    def __call__(self, e: MonodromyElement):
        return self.on_word(self.monodromy.representative(e))

    def check_window(self, x: str, depth: int) -> Tuple[Tuple[MonodromyElement, Any, Any], ...]:
        """Every BFS step e -> e[a] must satisfy f'(e[a]) = f'(e) f(a)."""
        M, H = self.monodromy, self.target
        gens = _generators_from(M)
        values = {M.identity(x): H.identity(self.obj_map[x])}
        frontier = list(values)
        bad = []
        for _ in range(depth):
            nxt = []
            for e in frontier:
                for a, step in gens.get(e.tgt, ()):
                    f = M.compose(e, step)
                    value = H.compose(values[e], self.letter_value(M.letters[a]))
                    if f in values:
                        if values[f] != value:
                            bad.append((f, values[f], value))
                        continue
                    values[f] = value
                    nxt.append(f)
            frontier = nxt
        for e, value in values.items():
            if self(e) != value:
                bad.append((e, self(e), value))
        return tuple(bad)


@dataclass(frozen=True, eq=False)
class GlobalizationResult:
    morphism: Optional[GlobalizedMorphism] = None
    obstruction: Optional[Tuple[str, str]] = None

    @property
    def ok(self) -> bool:
        return self.morphism is not None


def globalize(M: MonodromyGroupoid, f: Mapping[str, Any], H: GroupoidLike) -> GlobalizationResult:
    """Extend a pregroupoid morphism f: W -> H to M(G, W), or name the first obstruction."""
    G, W = M.ambient, M.subset
    missing = sorted(a for a in W.carrier if a not in f)
    if missing:
        raise GlobalizationError(f"f is undefined on {missing}.")
    obj_map = {}
    for x in G.objects:
        e = f[G.identity(x)]
        obj_map[x] = H.src(e)
        if e != H.identity(obj_map[x]):
            raise GlobalizationError(f"f does not send the identity at '{x}' to an identity.")
    for a in sorted(W.carrier):
        s, t = G.morphisms[a]
        if H.src(f[a]) != obj_map[s] or H.tgt(f[a]) != obj_map[t]:
            raise GlobalizationError(f"f does not preserve the endpoints of '{a}'.")
        if f[G.inverse(a)] != H.inverse(f[a]):
            raise GlobalizationError(f"f does not preserve the inverse of '{a}'.")
    for a, b, ab in M.defining_relators:
        if H.compose(f[a], f[b]) != f[ab]:
            logger.info(f"Globalisation obstructed at ({a}, {b}).")
            return GlobalizationResult(obstruction=(a, b))
    assignment = {M.letters[a][0]: f[a] for a in W.carrier if M.letters[a][1] > 0}
    return GlobalizationResult(GlobalizedMorphism(M, H, MappingProxyType(assignment),
                                                  MappingProxyType(obj_map)))

# =============================================================================
#  Star covering diagnostics
# =============================================================================

@dataclass(frozen=True, eq=False)
class StarCoveringReport:
    base: str
    depth: int
    budget: int
    star_size: int
    window_size: int
    closed: bool
    surjective: Verdict
    unreached: Tuple[str, ...]
    fibers: Mapping[str, int]
    fibers_exact: bool
    translate_radius: Optional[int]
    uniform_fiber_bound: Optional[int]
    equinumerous: Verdict
    local_injectivity: Verdict
    inclusion_injective: Verdict
    universal: bool
    witnesses: Mapping[str, Any] = field(default_factory=dict)
    undecided: Tuple[str, ...] = ()

    @property
    def status(self) -> Verdict:
        verdict = combine_verdicts(self.surjective, self.equinumerous,
                                   self.local_injectivity, self.inclusion_injective)
        if self.undecided and verdict == Verdict.PASSED:
            return Verdict.UNDECIDED
        return verdict


def star_covering_report(M: MonodromyGroupoid, p: CanonicalMorphism, x: str,
                         depth: int, budget: Optional[int] = None) -> StarCoveringReport:
    """Decidable shadow of 'p is a star universal covering' at x."""
    if depth < 1:
        raise MonokitError("star_covering_report needs depth >= 1.")
    G = M.ambient
    budget = M.budget if budget is None else budget
    engine = M.engine_at(x)
    window = monodromy_window(M, x, depth)
    witnesses: Dict[str, Any] = {}
    undecided: List[str] = []
    if window.inconsistencies:
        witnesses["p_inconsistent"] = [str(w[0]) for w in window.inconsistencies[:5]]

    target_star = sorted(star(G, x))
    reached = set(window.values.values())
    unreached = tuple(g for g in target_star if g not in reached)
    if not unreached:
        surjective = Verdict.PASSED
    elif window.closed:
        surjective = Verdict.REFUTED
        witnesses["unreached"] = list(unreached)
    else:
        surjective = Verdict.UNDECIDED
        undecided.append(f"surjectivity not reached within depth {depth}")

    fibers = Counter(window.values.values())
    fibers_exact = window.closed and engine.order is not None
    radius, bound = None, None
    if surjective == Verdict.REFUTED:
        equinumerous = Verdict.REFUTED
    elif fibers_exact:
        counts = {fibers[g] for g in target_star}
        equinumerous = Verdict.PASSED if len(counts) == 1 else Verdict.REFUTED
        if equinumerous == Verdict.REFUTED:
            witnesses["fibers"] = {g: fibers[g] for g in target_star}
    else:
        lifts: Dict[str, MonodromyElement] = {}
        for e in window:
            lifts.setdefault(window.values[e], e)
        kernel = [e for e in window if e.tgt == x and window.values[e] == G.identity(x)]
        reached_star = [g for g in target_star if g in lifts]
        longest = max(window.lengths[lifts[g]] for g in reached_star)
        radius = depth - longest
        small = [k for k in kernel if window.lengths[k] <= radius]
        bound = len(small)
        equinumerous = Verdict.PASSED
        for g in reached_star:
            translates = {M.compose(k, lifts[g]) for k in small}
            if len(translates) != bound or any(t not in window.lengths or p(t) != g
                                               for t in translates):
                equinumerous = Verdict.REFUTED
                witnesses["translate_failure"] = g
                break
        if equinumerous == Verdict.PASSED and surjective == Verdict.UNDECIDED:
            equinumerous = Verdict.UNDECIDED
        undecided.append(f"fiber counts windowed at depth {depth}")
    if not engine.certified:
        undecided.append(f"vertex group undecided within budget {M.budget}")
        if equinumerous == Verdict.PASSED:
            equinumerous = Verdict.UNDECIDED

    # p must agree with the walked values and send distinct steps out of e to distinct elements
    local = Verdict.REFUTED if window.inconsistencies else Verdict.PASSED
    gens = _generators_from(M)
    for e in window:
        if local == Verdict.REFUTED:
            break
        if p(e) != window.values[e]:
            local = Verdict.REFUTED
            witnesses["local_injectivity"] = (str(e), window.values[e], p(e))
            break
        images: Dict[MonodromyElement, str] = {}
        for a, step in gens.get(e.tgt, ()):
            f = M.compose(e, step)
            if f in images:
                local = Verdict.REFUTED
                witnesses["local_injectivity"] = (str(e), images[f], a)
                break
            images[f] = a

    included = {}
    inclusion = Verdict.PASSED
    for a in sorted(M.subset.carrier):
        e = M.include(a)
        if e in included:
            inclusion = Verdict.REFUTED
            witnesses["inclusion_collision"] = (included[e], a)
            break
        included[e] = a
        if p.letter_value(M.letters[a]) != a:
            inclusion = Verdict.REFUTED
            witnesses["inclusion_not_separated"] = a
            break

    universal = surjective == Verdict.PASSED and engine.certified
    return StarCoveringReport(
        base=x,
        depth=depth,
        budget=budget,
        star_size=len(target_star),
        window_size=len(window),
        closed=window.closed,
        surjective=surjective,
        unreached=unreached,
        fibers=MappingProxyType({g: fibers[g] for g in target_star}),
        fibers_exact=fibers_exact,
        translate_radius=radius,
        uniform_fiber_bound=bound,
        equinumerous=equinumerous,
        local_injectivity=local,
        inclusion_injective=inclusion,
        universal=universal,
        witnesses=MappingProxyType(witnesses),
        undecided=tuple(undecided),
    )

# =============================================================================
#  Fundamental groupoid of a graph
# =============================================================================

def subdivide_triangles(X: nx.Graph) -> nx.Graph:
    """Subdivide every edge lying on a triangle; the result is triangle-free."""
    X = nx.relabel_nodes(nx.Graph(X), str)
    Y = nx.Graph()
    Y.add_nodes_from(X.nodes)
    for u, v in X.edges:
        u, v = sorted((u, v))
        if u == v:
            logger.debug(f"Dropping loop at '{u}'.")
            continue
        if (set(X[u]) & set(X[v])) - {u, v}:
            mid = f"{u}~{v}"
            while mid in Y:
                mid += "~"
            Y.add_edge(u, mid)
            Y.add_edge(mid, v)
        else:
            Y.add_edge(u, v)
    return Y


def pi1_graph(X: nx.Graph, budget: int = 10_000,
              reverse_forest: bool = False) -> Tuple[FiniteGroupoid, PregroupoidSubset, MonodromyGroupoid]:
    """M(X x X, W) for W = adjacency plus identities, after triangle subdivision."""
    Y = subdivide_triangles(X)
    if Y.number_of_nodes() == 0:
        raise GroupoidError("pi1_graph needs at least one vertex.")
    G = pair_groupoid(Y.nodes)
    W = {G.identity(x) for x in G.objects}
    for u, v in Y.edges:
        W.add(tuple_id(u, v))
        W.add(tuple_id(v, u))
    subset = PregroupoidSubset.of(G, W)
    M = build_monodromy(G, subset, budget, reverse_forest=reverse_forest)
    logger.info(f"pi1 of a graph with {X.number_of_nodes()} vertices and "
                f"{X.number_of_edges()} edges built on {len(G.objects)} objects.")
    return G, subset, M


def free_rank(M: MonodromyGroupoid, x: str) -> Optional[int]:
    engine = M.engine_at(x)
    return engine.presentation.rank if engine.kind == EngineKind.FREE else None
