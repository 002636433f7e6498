from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import (Any, Callable, Dict, FrozenSet, Hashable, Iterable, List,
                    Mapping, Optional, Tuple)

from monokit import (CompatibilityError, TrivializationError, ValidationReport,
                     Verdict, Violation, combine_verdicts, get_logger)
from monokit.backend.groupoid import FiniteGroupoid, GroupoidLike, WideSubgroupoid
from monokit.backend.monodromy import (MonodromyElement, MonodromyGroupoid,
                                       PregroupoidSubset, monodromy_window)
from monokit.backend.topology import (FiniteTopology, GeneratedTopology,
                                      TopologicalGroupoidReport, check_topological_groupoid,
                                      generate_from_base, point_key)

logger = get_logger(__name__)

Index = Hashable
Section = Mapping[str, Any]

# =============================================================================
#  Local trivializations
# =============================================================================

class CLTViolation(str, Enum):
    BASE_SPACE = "base space mismatch"
    COVER_NOT_OPEN = "cover member not open"
    COVER_NOT_BASE = "cover not a base"
    MISSING_SECTION = "missing section"
    SECTION_DOMAIN = "section domain"
    SECTION_VALUE = "section value not a morphism"
    SECTION_SOURCE = "section source"
    SECTION_TARGET = "section target"
    SECTION_BASE = "section not an identity at its point"
    COMP = "comp"


@dataclass(frozen=True, eq=False)
class LocalTrivialization:
    """Indexed open cover of the object space with sections s_{x,i}: U_i -> G_x."""

    base_space: FiniteTopology
    cover: Mapping[Index, FrozenSet[str]]
    sections: Mapping[Tuple[str, Index], Section]

    def __post_init__(self):
        object.__setattr__(self, "cover",
                           MappingProxyType({i: frozenset(U) for i, U in self.cover.items()}))
        object.__setattr__(self, "sections",
                           MappingProxyType({k: MappingProxyType(dict(s)) for k, s in self.sections.items()}))

    @property
    def indices(self) -> Tuple[Index, ...]:
        return tuple(sorted(self.cover, key=point_key))

    def indices_at(self, x: str) -> Tuple[Index, ...]:
        return tuple(i for i in self.indices if x in self.cover[i])

    def section(self, x: str, i: Index) -> Section:
        try:
            return self.sections[(x, i)]
        except KeyError:
            raise TrivializationError(f"No section s_({x},{i}).") from None

    def transported(self, f: Callable[[Any], Any]) -> "LocalTrivialization":
        """Same cover, sections composed with f."""
        return LocalTrivialization(
            self.base_space, self.cover,
            {k: {u: f(m) for u, m in s.items()} for k, s in self.sections.items()},
        )


def canonical_sections(G: FiniteGroupoid, base_space: FiniteTopology,
                       cover: Mapping[Index, Iterable[str]],
                       choose: Callable[[str, str], str]) -> LocalTrivialization:
    """s_{x,i}(u) = choose(x, u) for every x in U_i; choose(x, x) must be 1_x."""
    cover = {i: frozenset(U) for i, U in cover.items()}
    sections = {
        (x, i): {u: choose(x, u) for u in U}
        for i, U in cover.items() for x in U
    }
    return LocalTrivialization(base_space, cover, sections)


def compatible_index(LT: LocalTrivialization, x: str, i: Index, j: Index) -> Optional[Index]:
    """Smallest k with x in U_k inside U_i and U_j on which s_{x,i} and s_{x,j} agree."""
    meet = LT.cover[i] & LT.cover[j]
    si, sj = LT.section(x, i), LT.section(x, j)
    candidates = sorted(
        (k for k in LT.indices if x in LT.cover[k] and LT.cover[k] <= meet),
        key=lambda k: (point_key(k), sorted(map(point_key, LT.cover[k]))),
    )
    for k in candidates:
        if all(si[u] == sj[u] for u in LT.cover[k]):
            return k
    return None


def validate_clt(G: GroupoidLike, LT: LocalTrivialization) -> ValidationReport:
    """Base property, section laws and Comp, each failure with a witness."""
    V = CLTViolation
    found: List[Violation] = []
    T = LT.base_space
    if set(T.points) != set(G.objects):
        found.append(Violation(V.BASE_SPACE, tuple(sorted(set(T.points) ^ set(G.objects)))))
        return ValidationReport(tuple(found))

    for i in LT.indices:
        U = LT.cover[i]
        if not U <= set(T.points) or not T.is_open(U):
            found.append(Violation(V.COVER_NOT_OPEN, (i,)))
    members = {LT.cover[i] for i in LT.indices}
    for p in T.points:
        if T.neighborhood(p) not in members:
            found.append(Violation(V.COVER_NOT_BASE, (p,), "least neighbourhood is not a cover member"))

    sound = set()
    for i in LT.indices:
        U = LT.cover[i]
        for x in sorted(U):
            s = LT.sections.get((x, i))
            if s is None:
                found.append(Violation(V.MISSING_SECTION, (x, i)))
                continue
            if set(s) != U:
                found.append(Violation(V.SECTION_DOMAIN, (x, i)))
                continue
            ok = True
            for u in sorted(U):
                m = s[u]
                if m not in G:
                    found.append(Violation(V.SECTION_VALUE, (x, i, u)))
                    ok = False
                    continue
                if G.src(m) != x:
                    found.append(Violation(V.SECTION_SOURCE, (x, i, u)))
                    ok = False
                if G.tgt(m) != u:
                    found.append(Violation(V.SECTION_TARGET, (x, i, u)))
                    ok = False
            if x in s and s[x] in G and s[x] != G.identity(x):
                found.append(Violation(V.SECTION_BASE, (x, i)))
                ok = False
            if ok:
                sound.add((x, i))

    for x in sorted(T.points):
        at = [i for i in LT.indices_at(x) if (x, i) in sound]
        for a, i in enumerate(at):
            for j in at[a + 1:]:
                if compatible_index(LT, x, i, j) is None:
                    found.append(Violation(V.COMP, (x, i, j), "no compatible smaller cover member"))
    return ValidationReport(tuple(found))


def is_locally_trivial(G: FiniteGroupoid, base_space: FiniteTopology) -> Tuple[bool, Optional[str]]:
    """Every x has a section of the target map through 1_x over some open U containing x.

    In a finite space it suffices to test the least neighbourhood of x.
    """
    for x in G.objects:
        for u in sorted(base_space.neighborhood(x)):
            if not G.hom(x, u):
                return False, x
    return True, None

# =============================================================================
#  Basic neighbourhoods and the generated topology
# =============================================================================

def basic_neighborhood(G: GroupoidLike, LT: LocalTrivialization, a: Any,
                       i: Index, j: Index) -> FrozenSet[Any]:
    """{s_{x,i}(u)^-1 a s_{y,j}(v) : u in U_i, v in U_j} for a: x -> y."""
    x, y = G.src(a), G.tgt(a)
    if x not in LT.cover[i]:
        raise TrivializationError(f"Source '{x}' is not in U_{i}.")
    if y not in LT.cover[j]:
        raise TrivializationError(f"Target '{y}' is not in U_{j}.")
    s, t = LT.section(x, i), LT.section(y, j)
    return frozenset(
        G.compose(G.compose(G.inverse(s[u]), a), t[v])
        for u in LT.cover[i] for v in LT.cover[j]
    )


def neighborhood_family(G: FiniteGroupoid, LT: LocalTrivialization) -> Dict[Tuple[str, Index, Index], FrozenSet[str]]:
    return {
        (a, i, j): basic_neighborhood(G, LT, a, i, j)
        for a in G.morphism_ids
        for i in LT.indices_at(G.src(a))
        for j in LT.indices_at(G.tgt(a))
    }


@dataclass(frozen=True)
class RefinementFailure:
    center: str
    first: Tuple[Index, Index]
    second: Tuple[Index, Index]
    refined: Optional[Tuple[Index, Index]]


def refinement_law(G: GroupoidLike, LT: LocalTrivialization, a: Any,
                   first: Tuple[Index, Index], second: Tuple[Index, Index]
                   ) -> Tuple[Optional[Tuple[Index, Index]], bool]:
    """The Comp-provided (k, l) for two basic neighbourhoods of a, and whether
    the neighbourhood at (k, l) lies inside both."""
    x, y = G.src(a), G.tgt(a)
    k = compatible_index(LT, x, first[0], second[0])
    l = compatible_index(LT, y, first[1], second[1])
    if k is None or l is None:
        return None, False
    inner = basic_neighborhood(G, LT, a, k, l)
    outer = basic_neighborhood(G, LT, a, *first) & basic_neighborhood(G, LT, a, *second)
    return (k, l), inner <= outer


@dataclass(frozen=True, eq=False)
class GenerationReport:
    topology: FiniteTopology
    neighborhoods: int
    is_base: bool
    base_witness: Any
    refinement_failures: Tuple[RefinementFailure, ...]
    groupoid: TopologicalGroupoidReport

    @property
    def status(self) -> Verdict:
        extra = Verdict.PASSED if self.is_base and not self.refinement_failures else Verdict.REFUTED
        return combine_verdicts(self.groupoid.status, extra)


def _require_clt(G: GroupoidLike, LT: LocalTrivialization) -> None:
    report = validate_clt(G, LT)
    comp = report.of_kind(CLTViolation.COMP)
    if comp:
        raise CompatibilityError(f"Comp fails at {comp[0].witness}; refusing to generate.",
                                 comp[0].witness)
    if not report.ok:
        v = report.violations[0]
        raise TrivializationError(f"Not a local trivialization: {v.kind} at {v.witness}.")


def generate_groupoid_topology(G: FiniteGroupoid, LT: LocalTrivialization
                               ) -> Tuple[FiniteTopology, GenerationReport]:
    """Topology on the morphisms generated by all basic neighbourhoods."""
    _require_clt(G, LT)
    family = neighborhood_family(G, LT)
    generated: GeneratedTopology = generate_from_base(G.morphism_ids, family.values())
    if not generated.is_base:
        logger.error(f"Basic neighbourhoods fail to form a base at {generated.witness}.")

    failures = []
    for a in G.morphism_ids:
        pairs = [(i, j) for i in LT.indices_at(G.src(a)) for j in LT.indices_at(G.tgt(a))]
        for n, first in enumerate(pairs):
            for second in pairs[n + 1:]:
                refined, ok = refinement_law(G, LT, a, first, second)
                if not ok:
                    failures.append(RefinementFailure(a, first, second, refined))

    report = check_topological_groupoid(G, generated.topology, LT.base_space)
    logger.info(f"Generated topology from {len(family)} basic neighbourhoods on {len(G)} morphisms.")
    return generated.topology, GenerationReport(
        generated.topology, len(family), generated.is_base, generated.witness,
        tuple(failures), report,
    )

# =============================================================================
#  Openness of a subgroupoid
# =============================================================================

@dataclass(frozen=True)
class OpennessVerdict:
    verdict: Verdict
    witness: Optional[str] = None
    windowed: bool = False
    window: Optional[int] = None


def _check_sections_in(LT: LocalTrivialization, carrier) -> None:
    for (x, i), s in sorted(LT.sections.items(), key=lambda kv: point_key(kv[0])):
        for u, m in sorted(s.items()):
            if m not in carrier:
                raise TrivializationError(f"Section s_({x},{i}) sends '{u}' to '{m}', outside W.")


def check_w_open(G: FiniteGroupoid, LT: LocalTrivialization, W: WideSubgroupoid) -> OpennessVerdict:
    """W is open when every a in W has a basic neighbourhood inside W."""
    _check_sections_in(LT, W.carrier)
    for a in sorted(W.carrier):
        inside = any(
            basic_neighborhood(G, LT, a, i, j) <= W.carrier
            for i in LT.indices_at(G.src(a)) for j in LT.indices_at(G.tgt(a))
        )
        if not inside:
            logger.warning(f"No basic neighbourhood of '{a}' stays inside W.")
            return OpennessVerdict(Verdict.REFUTED, a)
    return OpennessVerdict(Verdict.PASSED)

# =============================================================================
#  Transport to the monodromy groupoid
# =============================================================================

def generate_windowed_topology(M: MonodromyGroupoid, LT_M: LocalTrivialization,
                               window: int) -> Tuple[FrozenSet[MonodromyElement], GeneratedTopology]:
    """Traces of basic neighbourhoods on all elements of word length <= window."""
    if window < 1:
        raise TrivializationError("The normal-form window must be at least 1.")
    elements = set()
    for x in M.objects:
        elements |= set(monodromy_window(M, x, window).lengths)
    traces = []
    for e in sorted(elements):
        for i in LT_M.indices_at(e.src):
            for j in LT_M.indices_at(e.tgt):
                traces.append(basic_neighborhood(M, LT_M, e, i, j) & elements)
    return frozenset(elements), generate_from_base(elements, traces)


@dataclass(frozen=True, eq=False)
class MonodromyCLT:
    transported: LocalTrivialization
    validation: ValidationReport
    topology: FiniteTopology
    inclusion_open: OpennessVerdict
    generation: Optional[GenerationReport] = None
    materialized: Optional[FiniteGroupoid] = None
    names: Mapping[MonodromyElement, str] = field(default_factory=dict)

    @property
    def windowed(self) -> bool:
        return self.inclusion_open.windowed

    @property
    def status(self) -> Verdict:
        verdicts = [Verdict.PASSED if self.validation.ok else Verdict.REFUTED,
                    self.inclusion_open.verdict]
        if self.generation is not None:
            verdicts.append(self.generation.status)
        verdict = combine_verdicts(*verdicts)
        if self.windowed and verdict == Verdict.PASSED:
            return Verdict.UNDECIDED
        return verdict


def clt_on_monodromy(G: FiniteGroupoid, W: PregroupoidSubset, M: MonodromyGroupoid,
                     LT: LocalTrivialization, window: int) -> MonodromyCLT:
    """Transport LT along the inclusion W -> M(G, W) and make the image of W open."""
    _check_sections_in(LT, W.carrier)
    _require_clt(G, LT)
    LT_M = LT.transported(M.include)
    validation = validate_clt(M, LT_M)
    images = frozenset(M.include(a) for a in W.carrier)

    if M.is_finite:
        H, names = M.materialize()
        LT_H = LT_M.transported(names.__getitem__)
        topology, generation = generate_groupoid_topology(H, LT_H)
        named = frozenset(names[e] for e in images)
        bad = next((names[e] for e in sorted(images)
                    if not topology.neighborhood(names[e]) <= named), None)
        verdict = OpennessVerdict(Verdict.PASSED if bad is None else Verdict.REFUTED, bad)
        return MonodromyCLT(LT_M, validation, topology, verdict, generation, H,
                            MappingProxyType(names))

    elements, generated = generate_windowed_topology(M, LT_M, window)
    topology = generated.topology
    bad = next((str(e) for e in sorted(images)
                if not topology.neighborhood(e) <= images), None)
    verdict = OpennessVerdict(Verdict.PASSED if bad is None else Verdict.REFUTED, bad,
                              windowed=True, window=window)
    logger.info(f"Windowed topology on {len(elements)} elements of M(G, W), window {window}.")
    return MonodromyCLT(LT_M, validation, topology, verdict)
