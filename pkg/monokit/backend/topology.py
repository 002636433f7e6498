from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import (Callable, Dict, FrozenSet, Hashable, Iterable, List, Mapping,
                    Optional, Tuple)

import numpy as np

from monokit import TopologyError, TopologySizeError, Verdict, combine_verdicts, get_logger
from monokit.backend.groupoid import FiniteGroupoid, GroupoidMorphism, left_translation, star
from monokit.frontend.constants import MAX_OPEN_SETS

logger = get_logger(__name__)

Point = Hashable


def point_key(p: Point) -> str:
    return repr(p)


def _bits(mask: int):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1

# =============================================================================
#  Finite spaces
# =============================================================================

@dataclass(frozen=True, eq=False)
class FiniteTopology:
    """A finite space given by the least open neighbourhood of every point.

    Every finite topology is determined by these neighbourhoods, non-T0
    spaces included; the open sets are exactly their unions. Subsets are
    handled internally as bitmasks over ``points``.
    """

    points: Tuple[Point, ...]
    neighborhoods: Tuple[int, ...]

    @cached_property
    def index(self) -> Mapping[Point, int]:
        return MappingProxyType({p: i for i, p in enumerate(self.points)})

    @property
    def full(self) -> int:
        return (1 << len(self.points)) - 1

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteTopology):
            return NotImplemented
        if set(self.points) != set(other.points):
            return False
        return all(self.neighborhood(p) == other.neighborhood(p) for p in self.points)

    __hash__ = None

    # -------------------------------------------------------------------------
    def mask(self, subset: Iterable[Point]) -> int:
        m = 0
        for p in subset:
            try:
                m |= 1 << self.index[p]
            except KeyError:
                raise TopologyError(f"{p!r} is not a point of the space.") from None
        return m

    def subset(self, mask: int) -> FrozenSet[Point]:
        return frozenset(self.points[i] for i in _bits(mask))

    def neighborhood(self, p: Point) -> FrozenSet[Point]:
        if p not in self.index:
            raise TopologyError(f"{p!r} is not a point of the space.")
        return self.subset(self.neighborhoods[self.index[p]])

    def _open_mask(self, m: int) -> Optional[int]:
        """First point of m whose neighbourhood leaves m, or None when m is open."""
        for i in _bits(m):
            if self.neighborhoods[i] & ~m:
                return i
        return None

    def is_open(self, subset: Iterable[Point]) -> bool:
        return self._open_mask(self.mask(subset)) is None

    def interior(self, subset: Iterable[Point]) -> FrozenSet[Point]:
        m = self.mask(subset)
        return self.subset(sum(1 << i for i in _bits(m) if not self.neighborhoods[i] & ~m))

    def open_masks(self, limit: int = MAX_OPEN_SETS) -> Tuple[int, ...]:
        """Every open set, as the union closure of the neighbourhoods."""
        opens = {0}
        for u in sorted(set(self.neighborhoods)):
            opens |= {o | u for o in opens}
            if len(opens) > limit:
                raise TopologySizeError(
                    f"Space on {len(self.points)} points has more than {limit} open sets."
                )
        return tuple(sorted(opens, key=lambda m: (bin(m).count("1"), m)))

    def opens(self, limit: int = MAX_OPEN_SETS) -> Tuple[FrozenSet[Point], ...]:
        return tuple(self.subset(m) for m in self.open_masks(limit))

    @cached_property
    def specialization_matrix(self) -> np.ndarray:
        """S[i, j] is True iff point j lies in every open set containing point i."""
        n = len(self.points)
        S = np.zeros((n, n), dtype=bool)
        for i, u in enumerate(self.neighborhoods):
            S[i, list(_bits(u))] = True
        return S

    def verify(self) -> bool:
        """The neighbourhood table is reflexive and transitive."""
        S = self.specialization_matrix
        if not np.all(np.diag(S)):
            return False
        return bool(np.all(~(S.astype(np.int64) @ S.astype(np.int64) > 0) | S))

    # -------------------------------------------------------------------------
    @classmethod
    def from_neighborhoods(cls, points: Iterable[Point],
                           neighborhoods: Mapping[Point, Iterable[Point]]) -> "FiniteTopology":
        pts = tuple(sorted(set(points), key=point_key))
        index = {p: i for i, p in enumerate(pts)}
        masks = []
        for p in pts:
            m = 0
            for q in neighborhoods[p]:
                if q not in index:
                    raise TopologyError(f"{q!r} is not a point of the space.")
                m |= 1 << index[q]
            masks.append(m)
        T = cls(pts, tuple(masks))
        if not T.verify():
            raise TopologyError("Neighbourhood table is not reflexive and transitive.")
        return T

    @classmethod
    def from_opens(cls, points: Iterable[Point], family: Iterable[Iterable[Point]]) -> "FiniteTopology":
        pts = tuple(sorted(set(points), key=point_key))
        family = [frozenset(U) for U in family]
        verdict = is_topology(pts, family)
        if not verdict.ok:
            kind, a, b = verdict.witness
            raise TopologyError(f"Not a topology: {kind} of {sorted(a, key=point_key)} "
                                f"and {sorted(b, key=point_key)} is missing.")
        return _from_family(pts, family)


def _from_family(points: Tuple[Point, ...], family: Iterable[FrozenSet[Point]]) -> FiniteTopology:
    """Least neighbourhoods of the topology generated by ``family`` as subbase."""
    index = {p: i for i, p in enumerate(points)}
    full = (1 << len(points)) - 1
    masks = [full] * len(points)
    for U in family:
        m = 0
        for q in U:
            m |= 1 << index[q]
        for i in _bits(m):
            masks[i] &= m
    return FiniteTopology(points, tuple(masks))


def discrete_topology(points: Iterable[Point]) -> FiniteTopology:
    pts = tuple(sorted(set(points), key=point_key))
    return FiniteTopology(pts, tuple(1 << i for i in range(len(pts))))


def indiscrete_topology(points: Iterable[Point]) -> FiniteTopology:
    pts = tuple(sorted(set(points), key=point_key))
    return FiniteTopology(pts, tuple((1 << len(pts)) - 1 for _ in pts))


def sierpinski(open_point: Point = "0", closed_point: Point = "1") -> FiniteTopology:
    return FiniteTopology.from_opens([open_point, closed_point],
                                     [(), (open_point,), (open_point, closed_point)])

# =============================================================================
#  Axiom check and generation
# =============================================================================

@dataclass(frozen=True)
class TopologyVerdict:
    ok: bool
    witness: Optional[Tuple[str, FrozenSet[Point], FrozenSet[Point]]] = None


def is_topology(points: Iterable[Point], family: Iterable[Iterable[Point]]) -> TopologyVerdict:
    """Closure of ``family`` under pairwise unions and intersections, plus the empty and full sets."""
    pts = frozenset(points)
    fam = {frozenset(U) for U in family}
    if len(fam) > MAX_OPEN_SETS:
        raise TopologySizeError(f"Family of {len(fam)} sets exceeds {MAX_OPEN_SETS}.")
    for U in fam:
        if not U <= pts:
            raise TopologyError(f"Family member {sorted(U, key=point_key)} is not a subset of the points.")
    ordered = sorted(fam, key=lambda U: (len(U), sorted(map(point_key, U))))
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            if a | b not in fam:
                return TopologyVerdict(False, ("union", a, b))
            if a & b not in fam:
                return TopologyVerdict(False, ("intersection", a, b))
    if frozenset() not in fam:
        return TopologyVerdict(False, ("empty set", frozenset(), frozenset()))
    if pts not in fam:
        return TopologyVerdict(False, ("full set", pts, pts))
    return TopologyVerdict(True)


@dataclass(frozen=True, eq=False)
class GeneratedTopology:
    topology: FiniteTopology
    is_base: bool
    witness: Optional[Tuple[FrozenSet[Point], FrozenSet[Point], Point]] = None


def generate_from_base(points: Iterable[Point], base: Iterable[Iterable[Point]]) -> GeneratedTopology:
    """Topology generated by ``base``, flagging when it is only a subbase.

    The family is a base iff every least neighbourhood is itself a member;
    otherwise a pair of members is reported whose intersection around a
    point contains no member.
    """
    pts = tuple(sorted(set(points), key=point_key))
    family = [frozenset(B) for B in base]
    covered = frozenset().union(*family) if family else frozenset()
    if not covered >= set(pts):
        missing = sorted(set(pts) - covered, key=point_key)
        raise TopologyError(f"Base does not cover {missing}.")
    extra = covered - set(pts)
    if extra:
        raise TopologyError(f"Base members contain non-points {sorted(extra, key=point_key)}.")
    T = _from_family(pts, family)
    members = {T.mask(B) for B in family}
    if all(u in members for u in T.neighborhoods):
        return GeneratedTopology(T, True)
    witness = _base_witness(T, sorted(members, key=lambda m: (bin(m).count("1"), m)))
    logger.debug(f"Family on {len(pts)} points is a subbase but not a base.")
    return GeneratedTopology(T, False, witness)


def _base_witness(T: FiniteTopology, members: List[int]):
    for i, a in enumerate(members):
        for b in members[i:]:
            meet = a & b
            for p in _bits(meet):
                if not any(c & (1 << p) and c & ~meet == 0 for c in members):
                    return T.subset(a), T.subset(b), T.points[p]
    return None

# =============================================================================
#  Constructions
# =============================================================================

def _restricted(points: List[Point], neighborhood: Callable[[Point], Iterable[Point]]) -> FiniteTopology:
    """Space on ``points`` whose least neighbourhoods are traces of ``neighborhood``."""
    pts = tuple(sorted(points, key=point_key))
    index = {p: i for i, p in enumerate(pts)}
    masks = []
    for p in pts:
        m = 0
        for q in neighborhood(p):
            if q in index:
                m |= 1 << index[q]
        masks.append(m)
    return FiniteTopology(pts, tuple(masks))


def subspace_topology(T: FiniteTopology, subset: Iterable[Point]) -> FiniteTopology:
    S = set(subset)
    T.mask(S)
    return _restricted([p for p in T.points if p in S], T.neighborhood)


def product_topology(T1: FiniteTopology, T2: FiniteTopology) -> FiniteTopology:
    """Generated by open rectangles; least neighbourhoods are products of least neighbourhoods."""
    return _restricted(
        [(p, q) for p in T1.points for q in T2.points],
        lambda pq: [(u, v) for u in T1.neighborhood(pq[0]) for v in T2.neighborhood(pq[1])],
    )


def pullback_space(G: FiniteGroupoid, T_G: FiniteTopology, kind: str = "composable") -> FiniteTopology:
    """Subspace of T_G x T_G on composable pairs, or on pairs with a common source."""
    _require_points(T_G, G.morphism_ids, "morphisms")
    if kind == "composable":
        keep = [(a, b) for a in G.morphism_ids for b in G.morphism_ids if G.tgt(a) == G.src(b)]
    elif kind == "source":
        keep = [(a, b) for a in G.morphism_ids for b in G.morphism_ids if G.src(a) == G.src(b)]
    else:
        raise TopologyError(f"Unknown pullback kind '{kind}'.")
    # traces of rectangles, without materialising the full product
    return _restricted(
        keep,
        lambda ab: [(u, v) for u in T_G.neighborhood(ab[0]) for v in T_G.neighborhood(ab[1])],
    )


def _require_points(T: FiniteTopology, expected: Iterable[Point], what: str):
    if set(T.points) != set(expected):
        raise TopologyError(f"Topology points do not match the {what} of the groupoid.")

# =============================================================================
#  Continuity
# =============================================================================

@dataclass(frozen=True, eq=False)
class ContinuityCertificate:
    """Outcome of the preimage check, replayable independently."""

    name: str
    mapping: Mapping[Point, Point]
    domain: FiniteTopology
    codomain: FiniteTopology
    continuous: bool
    witness: Optional[FrozenSet[Point]] = None
    witness_point: Optional[Point] = None

    @property
    def verdict(self) -> Verdict:
        return Verdict.PASSED if self.continuous else Verdict.REFUTED

    def replay(self) -> bool:
        """Re-decide continuity as monotonicity for the specialization preorders."""
        f = np.array([self.codomain.index[self.mapping[p]] for p in self.domain.points], dtype=np.int64)
        D = self.domain.specialization_matrix
        C = self.codomain.specialization_matrix
        if len(f) == 0:
            return True
        return bool(np.all(~D | C[np.ix_(f, f)]))


def check_continuity(mapping: Mapping[Point, Point], T_dom: FiniteTopology,
                     T_cod: FiniteTopology, name: str = "map") -> ContinuityCertificate:
    """Continuous iff the preimage of every least neighbourhood is open."""
    for p in T_dom.points:
        if p not in mapping:
            raise TopologyError(f"'{name}' is undefined at {p!r}.")
        if mapping[p] not in T_cod.index:
            raise TopologyError(f"'{name}' sends {p!r} outside the codomain.")
    mapping = MappingProxyType({p: mapping[p] for p in T_dom.points})
    for q in T_cod.points:
        U = T_cod.neighborhoods[T_cod.index[q]]
        pre = 0
        for p in T_dom.points:
            if U >> T_cod.index[mapping[p]] & 1:
                pre |= 1 << T_dom.index[p]
        bad = T_dom._open_mask(pre)
        if bad is not None:
            return ContinuityCertificate(name, mapping, T_dom, T_cod, False,
                                         T_cod.subset(U), T_dom.points[bad])
    return ContinuityCertificate(name, mapping, T_dom, T_cod, True)

# =============================================================================
#  Topological groupoids
# =============================================================================

STRUCTURE_MAPS = ("source", "target", "identity", "inverse", "composition", "difference")


@dataclass(frozen=True, eq=False)
class TopologicalGroupoidReport:
    certificates: Mapping[str, ContinuityCertificate]
    difference_equivalence: bool
    endpoint_remark: bool
    translations_homeomorphic: bool
    translation_witness: Optional[str] = None

    @property
    def status(self) -> Verdict:
        return combine_verdicts(*(c.verdict for c in self.certificates.values()))

    @property
    def ok(self) -> bool:
        return self.status == Verdict.PASSED

    def failures(self) -> Tuple[ContinuityCertificate, ...]:
        return tuple(c for c in self.certificates.values() if not c.continuous)


def check_topological_groupoid(G: FiniteGroupoid, T_G: FiniteTopology,
                               T_X: FiniteTopology) -> TopologicalGroupoidReport:
    """Continuity of the structure maps, the difference map checked independently."""
    _require_points(T_G, G.morphism_ids, "morphisms")
    _require_points(T_X, G.objects, "objects")
    composable = pullback_space(G, T_G, "composable")
    same_source = pullback_space(G, T_G, "source")
    mors = G.morphism_ids

    certs: Dict[str, ContinuityCertificate] = {}
    certs["source"] = check_continuity({a: G.src(a) for a in mors}, T_G, T_X, "source")
    certs["target"] = check_continuity({a: G.tgt(a) for a in mors}, T_G, T_X, "target")
    certs["identity"] = check_continuity({x: G.identity(x) for x in G.objects}, T_X, T_G, "identity")
    certs["inverse"] = check_continuity({a: G.inverse(a) for a in mors}, T_G, T_G, "inverse")
    certs["composition"] = check_continuity(
        {(a, b): G.compose(a, b) for a, b in composable.points}, composable, T_G, "composition")
    certs["difference"] = check_continuity(
        {(a, b): G.compose(G.inverse(a), b) for a, b in same_source.points}, same_source, T_G,
        "difference")

    structure = certs["composition"].continuous and certs["inverse"].continuous
    if certs["source"].continuous and certs["identity"].continuous:
        equivalence = structure == certs["difference"].continuous
    else:
        # without continuous source and identity only one direction is forced
        equivalence = certs["difference"].continuous or not structure
    if not equivalence:
        logger.error("Composition and inversion disagree with the difference map on continuity.")
    remark = not certs["inverse"].continuous or certs["source"].continuous == certs["target"].continuous

    homeomorphic, bad = True, None
    if structure:
        stars = {x: subspace_topology(T_G, star(G, x)) for x in G.objects}
        for a in mors:
            L = left_translation(G, a)
            cert = check_continuity(L, stars[G.tgt(a)], stars[G.src(a)], f"L_{a}")
            if not cert.continuous:
                homeomorphic, bad = False, a
                break
    else:
        homeomorphic = False
    return TopologicalGroupoidReport(MappingProxyType(certs), equivalence, remark, homeomorphic, bad)


def check_topological_morphism(f: GroupoidMorphism, T_dom: FiniteTopology, T_dom_obj: FiniteTopology,
                               T_cod: FiniteTopology, T_cod_obj: FiniteTopology
                               ) -> Tuple[ContinuityCertificate, ContinuityCertificate]:
    """Continuity of a morphism on morphisms and on objects."""
    return (check_continuity(f.mor_map, T_dom, T_cod, "morphism map"),
            check_continuity(f.obj_map, T_dom_obj, T_cod_obj, "object map"))
