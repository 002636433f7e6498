from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from itertools import product
from types import MappingProxyType
from typing import (Any, Callable, Dict, FrozenSet, Hashable, Iterable, List,
                    Mapping, Optional, Protocol, Sequence, Tuple)

import networkx as nx
import numpy as np

from monokit import GroupoidError, ValidationReport, Violation, get_logger

logger = get_logger(__name__)

ObjectId = str
MorphismId = str

_SEPARATORS = re.compile(r"([\\,()])")

# =============================================================================
#  Enums and protocols
# =============================================================================

class GroupoidViolation(str, Enum):
    UNKNOWN_OBJECT = "unknown object"
    UNKNOWN_MORPHISM = "unknown morphism"
    MISSING_IDENTITY = "missing identity"
    IDENTITY_ENDPOINT = "identity endpoint"
    MISSING_INVERSE = "missing inverse"
    INVERSE_ENDPOINT = "inverse endpoint"
    INVERSE_INVOLUTION = "inverse involution"
    INVERSE_LAW = "inverse law"
    MISSING_COMPOSITE = "missing composite"
    UNDEFINED_COMPOSITE = "composite on non-composable pair"
    COMPOSITION_ENDPOINT = "composition endpoint"
    LEFT_IDENTITY = "left identity"
    RIGHT_IDENTITY = "right identity"
    ASSOCIATIVITY = "associativity"
    NOT_CLOSED_COMPOSITION = "not closed under composition"
    NOT_CLOSED_INVERSE = "not closed under inversion"
    NOT_ENDOMORPHISM = "not an endomorphism"
    NOT_CONJUGATION_CLOSED = "not closed under conjugation"
    NOT_PRESERVED = "structure not preserved"


class GroupoidLike(Protocol):
    """Anything that answers the groupoid structure maps.

    Composition is diagrammatic: ``compose(a, b)`` is defined when
    ``tgt(a) == src(b)`` and returns ``None`` otherwise.
    """

    def src(self, a: Any) -> ObjectId: ...
    def tgt(self, a: Any) -> ObjectId: ...
    def identity(self, x: ObjectId) -> Any: ...
    def inverse(self, a: Any) -> Any: ...
    def compose(self, a: Any, b: Any) -> Optional[Any]: ...

# =============================================================================
#  Finite groupoids
# =============================================================================

@dataclass(frozen=True, eq=False)
class FiniteGroupoid:
    """A candidate groupoid given by explicit tables.

    Nothing is validated on construction; ``validate_groupoid`` reports
    every axiom violation with a witness.
    """

    objects: Tuple[ObjectId, ...]
    morphisms: Mapping[MorphismId, Tuple[ObjectId, ObjectId]]
    identities: Mapping[ObjectId, MorphismId]
    inverses: Mapping[MorphismId, MorphismId]
    composites: Mapping[Tuple[MorphismId, MorphismId], MorphismId]

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(sorted(set(self.objects))))
        for name in ("morphisms", "identities", "inverses", "composites"):
            object.__setattr__(self, name, MappingProxyType(dict(getattr(self, name))))

    # -------------------------------------------------------------------------
    @cached_property
    def morphism_ids(self) -> Tuple[MorphismId, ...]:
        return tuple(sorted(self.morphisms))

    @cached_property
    def index(self) -> Dict[MorphismId, int]:
        return {m: i for i, m in enumerate(self.morphism_ids)}

    def __len__(self) -> int:
        return len(self.morphisms)

    def __contains__(self, a: object) -> bool:
        return a in self.morphisms

    # -------------------------------------------------------------------------
    def _require(self, a: MorphismId) -> Tuple[ObjectId, ObjectId]:
        try:
            return self.morphisms[a]
        except KeyError:
            raise GroupoidError(f"Unknown morphism '{a}'.") from None

    def src(self, a: MorphismId) -> ObjectId:
        return self._require(a)[0]

    def tgt(self, a: MorphismId) -> ObjectId:
        return self._require(a)[1]

    def identity(self, x: ObjectId) -> MorphismId:
        try:
            return self.identities[x]
        except KeyError:
            raise GroupoidError(f"Unknown object '{x}'.") from None

    def inverse(self, a: MorphismId) -> MorphismId:
        try:
            return self.inverses[a]
        except KeyError:
            raise GroupoidError(f"No inverse recorded for '{a}'.") from None

    def compose(self, a: MorphismId, b: MorphismId) -> Optional[MorphismId]:
        return self.composites.get((a, b))

    def composable(self, a: MorphismId, b: MorphismId) -> bool:
        return self.tgt(a) == self.src(b)

    def is_identity(self, a: MorphismId) -> bool:
        s, t = self._require(a)
        return s == t and self.identities.get(s) == a

    def multiply(self, seq: Iterable[MorphismId], at: Optional[ObjectId] = None) -> MorphismId:
        """Product of a composable sequence; the empty product needs ``at``."""
        result = None
        for a in seq:
            if result is None:
                result = a
                continue
            nxt = self.compose(result, a)
            if nxt is None:
                raise GroupoidError(f"'{result}' and '{a}' are not composable.")
            result = nxt
        if result is None:
            if at is None:
                raise GroupoidError("Empty product without a base object.")
            return self.identity(at)
        return result

    # -------------------------------------------------------------------------
    def _check_object(self, x: ObjectId):
        if x not in self.identities and x not in self.objects:
            raise GroupoidError(f"Unknown object '{x}'.")

    def hom(self, x: ObjectId, y: ObjectId) -> FrozenSet[MorphismId]:
        """G(x, y)."""
        self._check_object(x)
        self._check_object(y)
        return frozenset(m for m, (s, t) in self.morphisms.items() if s == x and t == y)

    def vertex_group(self, x: ObjectId) -> FrozenSet[MorphismId]:
        return self.hom(x, x)

    def endomorphisms(self) -> FrozenSet[MorphismId]:
        return frozenset(m for m, (s, t) in self.morphisms.items() if s == t)

    @cached_property
    def composition_matrix(self) -> np.ndarray:
        """Dense table of sound composites, -1 where absent or endpoint-wrong."""
        n = len(self.morphism_ids)
        table = np.full((n, n), -1, dtype=np.int64)
        for (a, b), ab in self.composites.items():
            if a not in self.morphisms or b not in self.morphisms or ab not in self.morphisms:
                continue
            (sa, ta), (sb, tb), (sab, tab) = self.morphisms[a], self.morphisms[b], self.morphisms[ab]
            if ta == sb and sab == sa and tab == tb:
                table[self.index[a], self.index[b]] = self.index[ab]
        return table


def star(G: FiniteGroupoid, x: ObjectId) -> FrozenSet[MorphismId]:
    """G_x: all morphisms with source x."""
    G._check_object(x)
    return frozenset(m for m, (s, _) in G.morphisms.items() if s == x)


def costar(G: FiniteGroupoid, x: ObjectId) -> FrozenSet[MorphismId]:
    """G^x: all morphisms with target x."""
    G._check_object(x)
    return frozenset(m for m, (_, t) in G.morphisms.items() if t == x)


def connected_components(G: FiniteGroupoid) -> Tuple[FrozenSet[ObjectId], ...]:
    graph = nx.Graph()
    graph.add_nodes_from(G.objects)
    graph.add_edges_from((s, t) for s, t in G.morphisms.values() if s in graph and t in graph)
    return tuple(sorted((frozenset(c) for c in nx.connected_components(graph)), key=min))

# =============================================================================
#  Validation
# =============================================================================

def validate_groupoid(G: FiniteGroupoid) -> ValidationReport:
    """Exhaustively check the groupoid axioms; every violation carries a witness."""
    V = GroupoidViolation
    found: List[Violation] = []
    objects = set(G.objects)
    mors = G.morphisms

    for m in G.morphism_ids:
        s, t = mors[m]
        for end in (s, t):
            if end not in objects:
                found.append(Violation(V.UNKNOWN_OBJECT, (m, end)))

    for x in G.objects:
        e = G.identities.get(x)
        if e is None:
            found.append(Violation(V.MISSING_IDENTITY, (x,)))
        elif e not in mors:
            found.append(Violation(V.UNKNOWN_MORPHISM, (x, e), "identity"))
        elif mors[e] != (x, x):
            found.append(Violation(V.IDENTITY_ENDPOINT, (x, e)))

    for m in G.morphism_ids:
        inv = G.inverses.get(m)
        if inv is None:
            found.append(Violation(V.MISSING_INVERSE, (m,)))
            continue
        if inv not in mors:
            found.append(Violation(V.UNKNOWN_MORPHISM, (m, inv), "inverse"))
            continue
        if mors[inv] != (mors[m][1], mors[m][0]):
            found.append(Violation(V.INVERSE_ENDPOINT, (m, inv)))
        if G.inverses.get(inv) != m:
            found.append(Violation(V.INVERSE_INVOLUTION, (m, inv)))

    for (a, b), ab in sorted(G.composites.items()):
        unknown = [z for z in (a, b, ab) if z not in mors]
        if unknown:
            found.append(Violation(V.UNKNOWN_MORPHISM, (a, b), f"composite refers to {unknown}"))
            continue
        if mors[a][1] != mors[b][0]:
            found.append(Violation(V.UNDEFINED_COMPOSITE, (a, b)))
        elif mors[ab] != (mors[a][0], mors[b][1]):
            found.append(Violation(V.COMPOSITION_ENDPOINT, (a, b),
                                   f"got '{ab}' : {mors[ab][0]} -> {mors[ab][1]}"))

    by_src: Dict[ObjectId, List[MorphismId]] = {}
    for m in G.morphism_ids:
        by_src.setdefault(mors[m][0], []).append(m)
    for a in G.morphism_ids:
        for b in by_src.get(mors[a][1], ()):
            if (a, b) not in G.composites:
                found.append(Violation(V.MISSING_COMPOSITE, (a, b)))

    for m in G.morphism_ids:
        s, t = mors[m]
        left = G.compose(G.identities.get(s), m)
        right = G.compose(m, G.identities.get(t))
        if left is not None and left != m:
            found.append(Violation(V.LEFT_IDENTITY, (G.identities[s], m)))
        if right is not None and right != m:
            found.append(Violation(V.RIGHT_IDENTITY, (m, G.identities[t])))
        inv = G.inverses.get(m)
        if inv in mors:
            forth = G.compose(m, inv)
            back = G.compose(inv, m)
            if forth is not None and forth != G.identities.get(s):
                found.append(Violation(V.INVERSE_LAW, (m, inv)))
            if back is not None and back != G.identities.get(t):
                found.append(Violation(V.INVERSE_LAW, (inv, m)))

    found.extend(_associativity_violations(G))
    return ValidationReport(tuple(found))


def _associativity_violations(G: FiniteGroupoid) -> List[Violation]:
    table = G.composition_matrix
    n = table.shape[0]
    if n == 0:
        return []
    defined = table >= 0
    ids = G.morphism_ids
    found: List[Violation] = []
    # one slab per middle morphism j: rows i with ij defined, columns k with jk defined
    for j in range(n):
        rows = np.flatnonzero(defined[:, j])
        cols = np.flatnonzero(defined[j, :])
        if not len(rows) or not len(cols):
            continue
        left = table[table[rows, j][:, None], cols[None, :]]
        right = table[rows[:, None], table[j, cols][None, :]]
        bad = (left >= 0) & (right >= 0) & (left != right)
        found.extend(
            Violation(GroupoidViolation.ASSOCIATIVITY, (ids[rows[r]], ids[j], ids[cols[c]]))
            for r, c in np.argwhere(bad)
        )
    found.sort(key=lambda v: v.witness)
    return found

# =============================================================================
#  Constructors
# =============================================================================

def tuple_id(*parts: Hashable) -> MorphismId:
    """Morphism id '(x,y)' with separators inside the parts backslash-escaped."""
    return "(" + ",".join(_SEPARATORS.sub(r"\\\1", str(p)) for p in parts) + ")"


def pair_groupoid(points: Iterable[Hashable]) -> FiniteGroupoid:
    """The groupoid X x X with (x,y)(y,z) = (x,z)."""
    xs = sorted({str(p) for p in points})
    if not xs:
        raise GroupoidError("pair_groupoid needs a nonempty point set.")
    pid = tuple_id
    morphisms = {pid(x, y): (x, y) for x in xs for y in xs}
    return FiniteGroupoid(
        objects=tuple(xs),
        morphisms=morphisms,
        identities={x: pid(x, x) for x in xs},
        inverses={pid(x, y): pid(y, x) for x in xs for y in xs},
        composites={(pid(x, y), pid(y, z)): pid(x, z) for x in xs for y in xs for z in xs},
    )


def group_groupoid(elements: Sequence[Hashable],
                   multiply: Callable[[Any, Any], Any],
                   obj: ObjectId = "*",
                   name: Callable[[Any], str] = str) -> FiniteGroupoid:
    """One-object groupoid from a finite group law."""
    elements = list(elements)
    ids = {e: name(e) for e in elements}
    if len(set(ids.values())) != len(elements):
        raise GroupoidError("Group element names are not unique.")
    table = {(ids[a], ids[b]): ids[multiply(a, b)] for a in elements for b in elements}
    unit = [e for e in elements if all(multiply(e, b) == b for b in elements)]
    if len(unit) != 1:
        raise GroupoidError("The group law has no unique identity element.")
    e = ids[unit[0]]
    inverses = {}
    for a in elements:
        inv = [b for b in elements if table[ids[a], ids[b]] == e]
        if not inv:
            raise GroupoidError(f"Element '{ids[a]}' has no inverse.")
        inverses[ids[a]] = ids[inv[0]]
    return FiniteGroupoid(
        objects=(obj,),
        morphisms={ids[a]: (obj, obj) for a in elements},
        identities={obj: e},
        inverses=inverses,
        composites=table,
    )


def cyclic_group(n: int, obj: ObjectId = "*") -> FiniteGroupoid:
    if n < 1:
        raise GroupoidError("Cyclic group order must be positive.")
    return group_groupoid(range(n), lambda a, b: (a + b) % n, obj=obj)


def disjoint_union(*parts: FiniteGroupoid) -> FiniteGroupoid:
    """Tags every object and morphism of part k with the prefix ``k:``."""
    objects, morphisms, identities, inverses, composites = [], {}, {}, {}, {}
    for k, G in enumerate(parts):
        def tag(z, k=k):
            return f"{k}:{z}"
        objects.extend(tag(x) for x in G.objects)
        morphisms.update({tag(m): (tag(s), tag(t)) for m, (s, t) in G.morphisms.items()})
        identities.update({tag(x): tag(e) for x, e in G.identities.items()})
        inverses.update({tag(m): tag(i) for m, i in G.inverses.items()})
        composites.update({(tag(a), tag(b)): tag(ab) for (a, b), ab in G.composites.items()})
    return FiniteGroupoid(tuple(objects), morphisms, identities, inverses, composites)


def trivial_bundle(points: Iterable[Hashable], K: FiniteGroupoid) -> FiniteGroupoid:
    """X x K x X for a one-object group K: morphisms (x, k, y)."""
    xs = sorted({str(p) for p in points})
    if not xs:
        raise GroupoidError("trivial_bundle needs a nonempty point set.")
    if len(K.objects) != 1:
        raise GroupoidError("trivial_bundle needs a one-object group.")
    e = K.identity(K.objects[0])
    ks = K.morphism_ids
    mid = tuple_id
    return FiniteGroupoid(
        objects=tuple(xs),
        morphisms={mid(x, k, y): (x, y) for x in xs for k in ks for y in xs},
        identities={x: mid(x, e, x) for x in xs},
        inverses={mid(x, k, y): mid(y, K.inverse(k), x) for x in xs for k in ks for y in xs},
        composites={
            (mid(x, k, y), mid(y, l, z)): mid(x, K.compose(k, l), z)
            for x in xs for y in xs for z in xs for k in ks for l in ks
        },
    )


def full_subgroupoid(G: FiniteGroupoid, objects: Iterable[ObjectId]) -> FiniteGroupoid:
    keep = set(objects)
    for x in keep:
        G._check_object(x)
    mors = {m: st for m, st in G.morphisms.items() if st[0] in keep and st[1] in keep}
    return FiniteGroupoid(
        objects=tuple(keep),
        morphisms=mors,
        identities={x: G.identity(x) for x in keep},
        inverses={m: G.inverses[m] for m in mors if m in G.inverses},
        composites={ab: c for ab, c in G.composites.items() if ab[0] in mors and ab[1] in mors},
    )

# =============================================================================
#  Generation and closures
# =============================================================================

def closure(G: FiniteGroupoid, W: Iterable[MorphismId]) -> FrozenSet[MorphismId]:
    """All finite products of elements of W and their inverses."""
    gens = set()
    for a in W:
        G._require(a)
        gens.add(a)
        gens.add(G.inverse(a))
    by_src: Dict[ObjectId, List[MorphismId]] = {}
    for g in sorted(gens):
        by_src.setdefault(G.src(g), []).append(g)
    reached = set(gens)
    queue = deque(sorted(gens))
    while queue:
        a = queue.popleft()
        for g in by_src.get(G.tgt(a), ()):
            ab = G.compose(a, g)
            if ab is not None and ab not in reached:
                reached.add(ab)
                queue.append(ab)
    return frozenset(reached)


def generated_by(G: FiniteGroupoid, W: Iterable[MorphismId]) -> bool:
    """True iff every morphism of G is a product of elements of W and inverses."""
    W = frozenset(W)
    missing = [x for x in G.objects if G.identity(x) not in W]
    if missing:
        raise GroupoidError(f"W is missing the identities at {missing}.")
    return closure(G, W) == frozenset(G.morphisms)

# =============================================================================
#  Subgroupoids
# =============================================================================

def validate_subgroupoid(G: FiniteGroupoid, carrier: Iterable[MorphismId]) -> ValidationReport:
    V = GroupoidViolation
    carrier = frozenset(carrier)
    found: List[Violation] = []
    unknown = sorted(m for m in carrier if m not in G.morphisms)
    if unknown:
        return ValidationReport(tuple(Violation(V.UNKNOWN_MORPHISM, (m,)) for m in unknown))
    touched = {x for m in carrier for x in G.morphisms[m]}
    for x in sorted(touched):
        if G.identity(x) not in carrier:
            found.append(Violation(V.MISSING_IDENTITY, (x,)))
    for m in sorted(carrier):
        if G.inverse(m) not in carrier:
            found.append(Violation(V.NOT_CLOSED_INVERSE, (m,)))
    for a, b in product(sorted(carrier), repeat=2):
        ab = G.compose(a, b)
        if ab is not None and ab not in carrier:
            found.append(Violation(V.NOT_CLOSED_COMPOSITION, (a, b)))
    return ValidationReport(tuple(found))


@dataclass(frozen=True, eq=False)
class WideSubgroupoid:
    ambient: FiniteGroupoid
    carrier: FrozenSet[MorphismId]

    @classmethod
    def of(cls, G: FiniteGroupoid, carrier: Iterable[MorphismId]) -> "WideSubgroupoid":
        carrier = frozenset(carrier)
        report = validate_subgroupoid(G, carrier)
        if not report.ok:
            v = report.violations[0]
            raise GroupoidError(f"Not a subgroupoid: {v.kind} at {v.witness}.")
        return cls(G, carrier)

    @property
    def objects(self) -> FrozenSet[ObjectId]:
        return frozenset(x for m in self.carrier for x in self.ambient.morphisms[m])

    def __contains__(self, a: object) -> bool:
        return a in self.carrier


def validate_normal(G: FiniteGroupoid, carrier: Iterable[MorphismId]) -> ValidationReport:
    """Subgroupoid axioms, all identities, total disconnectedness, conjugation closure."""
    V = GroupoidViolation
    carrier = frozenset(carrier)
    base = validate_subgroupoid(G, carrier)
    if base.of_kind(V.UNKNOWN_MORPHISM):
        return base
    found = list(base.violations)
    for x in G.objects:
        if G.identity(x) not in carrier and Violation(V.MISSING_IDENTITY, (x,)) not in found:
            found.append(Violation(V.MISSING_IDENTITY, (x,)))
    for n in sorted(carrier):
        s, t = G.morphisms[n]
        if s != t:
            found.append(Violation(V.NOT_ENDOMORPHISM, (n,)))
            continue
        for g in sorted(costar(G, s)):
            conj = G.compose(G.compose(g, n), G.inverse(g))
            if conj is not None and conj not in carrier:
                found.append(Violation(V.NOT_CONJUGATION_CLOSED, (g, n)))
    return ValidationReport(tuple(found))


@dataclass(frozen=True, eq=False)
class NormalSubgroupoid(WideSubgroupoid):
    """Totally disconnected, conjugation-closed, contains every identity."""

    @classmethod
    def of(cls, G: FiniteGroupoid, carrier: Iterable[MorphismId]) -> "NormalSubgroupoid":
        carrier = frozenset(carrier)
        report = validate_normal(G, carrier)
        if not report.ok:
            v = report.violations[0]
            raise GroupoidError(f"Not a normal subgroupoid: {v.kind} at {v.witness}.")
        return cls(G, carrier)

    def at(self, x: ObjectId) -> FrozenSet[MorphismId]:
        """N(x, x)."""
        return frozenset(n for n in self.carrier if self.ambient.morphisms[n][0] == x)


def normal_closure(G: FiniteGroupoid, S: Iterable[MorphismId]) -> NormalSubgroupoid:
    """Least normal subgroupoid containing S, computed as a fixpoint."""
    S = sorted(set(S))
    for s in S:
        a, b = G._require(s)
        if a != b:
            raise GroupoidError(f"'{s}' is not an endomorphism.")
    carrier = {G.identity(x) for x in G.objects}
    queue = deque()
    for s in S:
        if s not in carrier:
            carrier.add(s)
            queue.append(s)

    def add(m):
        if m is not None and m not in carrier:
            carrier.add(m)
            queue.append(m)

    while queue:
        n = queue.popleft()
        x = G.src(n)
        add(G.inverse(n))
        for m in [m for m in carrier if G.src(m) == x]:
            add(G.compose(n, m))
            add(G.compose(m, n))
        for g in costar(G, x):
            add(G.compose(G.compose(g, n), G.inverse(g)))
    logger.debug(f"Normal closure of {len(S)} elements has {len(carrier)} elements.")
    return NormalSubgroupoid(G, frozenset(carrier))

# =============================================================================
#  Morphisms and quotients
# =============================================================================

@dataclass(frozen=True, eq=False)
class GroupoidMorphism:
    obj_map: Mapping[ObjectId, ObjectId]
    mor_map: Mapping[MorphismId, MorphismId]

    def __post_init__(self):
        object.__setattr__(self, "obj_map", MappingProxyType(dict(self.obj_map)))
        object.__setattr__(self, "mor_map", MappingProxyType(dict(self.mor_map)))

    def __call__(self, a: MorphismId) -> MorphismId:
        return self.mor_map[a]


def validate_morphism(f: GroupoidMorphism, H: FiniteGroupoid, G: FiniteGroupoid) -> ValidationReport:
    """Check that f: H -> G preserves src, tgt, identities, composition, inverses."""
    V = GroupoidViolation
    found: List[Violation] = []
    for x in H.objects:
        if f.obj_map.get(x) not in G.identities:
            found.append(Violation(V.NOT_PRESERVED, (x,), "object map undefined or off target"))
    for m in H.morphism_ids:
        if f.mor_map.get(m) not in G.morphisms:
            found.append(Violation(V.NOT_PRESERVED, (m,), "morphism map undefined or off target"))
    if found:
        return ValidationReport(tuple(found))
    for m in H.morphism_ids:
        s, t = H.morphisms[m]
        if G.morphisms[f(m)] != (f.obj_map[s], f.obj_map[t]):
            found.append(Violation(V.NOT_PRESERVED, (m,), "endpoints"))
        if f(H.inverse(m)) != G.inverse(f(m)):
            found.append(Violation(V.NOT_PRESERVED, (m,), "inverse"))
    for x in H.objects:
        if f(H.identity(x)) != G.identity(f.obj_map[x]):
            found.append(Violation(V.NOT_PRESERVED, (x,), "identity"))
    for (a, b), ab in sorted(H.composites.items()):
        if G.compose(f(a), f(b)) != f(ab):
            found.append(Violation(V.NOT_PRESERVED, (a, b), "composition"))
    return ValidationReport(tuple(found))


def kernel(f: GroupoidMorphism, H: FiniteGroupoid, G: FiniteGroupoid) -> FrozenSet[MorphismId]:
    """Preimage of the identities of G."""
    return frozenset(m for m in H.morphism_ids if G.is_identity(f(m)))


def quotient(G: FiniteGroupoid, N: NormalSubgroupoid) -> Tuple[FiniteGroupoid, GroupoidMorphism]:
    """Object-preserving quotient G/N and its projection."""
    if N.ambient is not G and frozenset(N.ambient.morphisms) != frozenset(G.morphisms):
        raise GroupoidError("N is not a subgroupoid of this groupoid.")
    bad = [n for n in sorted(N.carrier) if G.src(n) != G.tgt(n)]
    if bad:
        raise GroupoidError(
            f"Object-identifying quotients are not supported; '{bad[0]}' is not an endomorphism."
        )
    by_object = {x: N.at(x) for x in G.objects}
    class_of: Dict[MorphismId, MorphismId] = {}
    for a in G.morphism_ids:
        if a in class_of:
            continue
        coset = frozenset(G.compose(n, a) for n in by_object[G.src(a)])
        name = f"[{min(coset)}]"
        for b in coset:
            class_of[b] = name
    morphisms = {class_of[a]: G.morphisms[a] for a in G.morphism_ids}
    Q = FiniteGroupoid(
        objects=G.objects,
        morphisms=morphisms,
        identities={x: class_of[G.identity(x)] for x in G.objects},
        inverses={class_of[a]: class_of[G.inverse(a)] for a in G.morphism_ids},
        composites={(class_of[a], class_of[b]): class_of[ab] for (a, b), ab in G.composites.items()},
    )
    logger.info(f"Quotient by {len(N.carrier)} elements: {len(G)} -> {len(Q)} morphisms.")
    return Q, GroupoidMorphism({x: x for x in G.objects}, class_of)

# =============================================================================
#  Translations
# =============================================================================

def left_translation(G: FiniteGroupoid, a: MorphismId) -> Dict[MorphismId, MorphismId]:
    """L_a: G_y -> G_x, b -> ab, for a in G(x, y)."""
    return {b: G.compose(a, b) for b in sorted(star(G, G.tgt(a)))}


def right_translation(G: FiniteGroupoid, a: MorphismId) -> Dict[MorphismId, MorphismId]:
    """R_a: G^x -> G^y, b -> ba, for a in G(x, y)."""
    return {b: G.compose(b, a) for b in sorted(costar(G, G.src(a)))}


def hom_set(G: FiniteGroupoid, x: ObjectId, y: ObjectId) -> FrozenSet[MorphismId]:
    return G.hom(x, y)


def vertex_group(G: FiniteGroupoid, x: ObjectId) -> FrozenSet[MorphismId]:
    return G.vertex_group(x)
