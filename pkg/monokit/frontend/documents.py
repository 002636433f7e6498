"""Interchange documents: JSON schemas, canonical serialization and builders."""

import json
from functools import reduce
from typing import Any, Dict, List, Optional, Tuple

import networkx as nx
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from monokit import DocumentError, get_logger
from monokit.backend.groupoid import FiniteGroupoid, WideSubgroupoid, validate_groupoid
from monokit.backend.local_triviality import LocalTrivialization
from monokit.backend.monodromy import FreeGroupTarget, PregroupoidSubset
from monokit.backend.topology import FiniteTopology
from monokit.backend.words import GeneratingGraph, GroupoidPresentation, make_word, parse_letter
from monokit.frontend.utils import sha256_text

logger = get_logger(__name__)

# =============================================================================
#  Schemas
# =============================================================================

class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MorphismSpec(Strict):
    id: str
    src: str
    tgt: str


class GroupoidDocument(Strict):
    objects: List[str]
    morphisms: List[MorphismSpec]
    identities: Dict[str, str]
    inverses: Dict[str, str]
    compose: List[Tuple[str, str, str]] = []


class EdgeSpec(Strict):
    id: str
    src: str
    tgt: str
    degenerate: bool = False


class RelatorSpec(Strict):
    at: Optional[str] = None
    letters: List[str] = []


class PresentationDocument(Strict):
    vertices: List[str]
    edges: List[EdgeSpec] = []
    relators: List[RelatorSpec] = []


class GraphDocument(Strict):
    vertices: List[str]
    edges: List[Tuple[str, str]] = []


class TopologyDocument(Strict):
    points: List[str]
    opens: List[List[str]]


class SectionSpec(Strict):
    point: str
    index: str
    values: List[Tuple[str, str]]


class TargetSpec(Strict):
    groupoid: Optional[GroupoidDocument] = None
    free_rank: Optional[int] = None

    @model_validator(mode="after")
    def exactly_one(self):
        if (self.groupoid is None) == (self.free_rank is None):
            raise ValueError("target needs exactly one of 'groupoid' or 'free_rank'")
        if self.free_rank is not None and self.free_rank < 1:
            raise ValueError("free_rank must be at least 1")
        return self


class ExpectedRun(Strict):
    """Corpus annotation: the command line to run and the exit status it must give."""

    command: str
    args: List[str] = []
    status: int


class InstanceDocument(Strict):
    groupoid: Optional[GroupoidDocument] = None
    generators: Optional[List[str]] = None
    object: Optional[str] = None
    target: Optional[TargetSpec] = None
    assignment: Optional[Dict[str, str]] = None
    graph: Optional[GraphDocument] = None
    presentation: Optional[PresentationDocument] = None
    morphism_topology: Optional[TopologyDocument] = None
    object_topology: Optional[TopologyDocument] = None
    base_space: Optional[TopologyDocument] = None
    cover: Optional[List[Tuple[str, List[str]]]] = None
    sections: Optional[List[SectionSpec]] = None
    subgroupoid: Optional[List[str]] = None
    expected: Optional[ExpectedRun] = None

# =============================================================================
#  Parsing and canonical form
# =============================================================================

def parse_text(text: str, source: str = "<input>") -> InstanceDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"{source}:{e.lineno}:{e.colno}: {e.msg}") from None
    if not isinstance(raw, dict):
        raise DocumentError(f"{source}: the document root must be an object")
    try:
        return InstanceDocument.model_validate(raw)
    except ValidationError as e:
        problems = [f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}"
                    for err in e.errors()]
        raise DocumentError(f"{source}: " + "; ".join(problems)) from None


def load_document(path: str) -> InstanceDocument:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise DocumentError(f"{path}: {e.strerror}") from None
    return parse_text(text, path)


def _sorted_topology(t: Optional[TopologyDocument]) -> Optional[TopologyDocument]:
    if t is None:
        return None
    return TopologyDocument(points=sorted(set(t.points)),
                            opens=sorted({tuple(sorted(set(U))) for U in t.opens}, key=lambda U: (len(U), U)))


def canonicalize(doc: InstanceDocument) -> InstanceDocument:
    """Same instance with every set-like list sorted; sequences keep their order."""
    data = doc.model_copy(deep=True)
    if data.groupoid is not None:
        data.groupoid = _sorted_groupoid(data.groupoid)
    if data.target is not None and data.target.groupoid is not None:
        data.target = TargetSpec(groupoid=_sorted_groupoid(data.target.groupoid))
    if data.generators is not None:
        data.generators = sorted(set(data.generators))
    if data.graph is not None:
        data.graph = GraphDocument(
            vertices=sorted(set(data.graph.vertices)),
            edges=sorted({tuple(sorted(e)) for e in data.graph.edges}),
        )
    if data.presentation is not None:
        p = data.presentation
        data.presentation = PresentationDocument(
            vertices=sorted(set(p.vertices)),
            edges=sorted(p.edges, key=lambda e: e.id),
            relators=sorted(p.relators, key=lambda r: (r.at or "", r.letters)),
        )
    data.morphism_topology = _sorted_topology(data.morphism_topology)
    data.object_topology = _sorted_topology(data.object_topology)
    data.base_space = _sorted_topology(data.base_space)
    if data.cover is not None:
        data.cover = sorted((i, sorted(set(U))) for i, U in data.cover)
    if data.sections is not None:
        data.sections = sorted(
            (SectionSpec(point=s.point, index=s.index, values=sorted(s.values)) for s in data.sections),
            key=lambda s: (s.point, s.index),
        )
    if data.subgroupoid is not None:
        data.subgroupoid = sorted(set(data.subgroupoid))
    return data


def _sorted_groupoid(g: GroupoidDocument) -> GroupoidDocument:
    return GroupoidDocument(
        objects=sorted(set(g.objects)),
        morphisms=sorted(g.morphisms, key=lambda m: m.id),
        identities=dict(sorted(g.identities.items())),
        inverses=dict(sorted(g.inverses.items())),
        compose=sorted(set(g.compose)),
    )


def canonical_text(doc: InstanceDocument) -> str:
    payload = canonicalize(doc).model_dump(mode="json", exclude_none=True)
    payload.pop("expected", None)
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def fingerprint(doc: InstanceDocument) -> str:
    return sha256_text(canonical_text(doc))

# =============================================================================
#  Builders
# =============================================================================

def _require(doc: InstanceDocument, *sections: str):
    missing = [s for s in sections if getattr(doc, s) is None]
    if missing:
        raise DocumentError(f"Document is missing the section(s) {missing}.")


def groupoid_from_document(g: GroupoidDocument) -> FiniteGroupoid:
    ids = [m.id for m in g.morphisms]
    if len(set(ids)) != len(ids):
        raise DocumentError("groupoid.morphisms: duplicate morphism id")
    composites = {}
    for n, (a, b, ab) in enumerate(g.compose):
        if (a, b) in composites and composites[(a, b)] != ab:
            raise DocumentError(f"groupoid.compose.{n}: conflicting entry for ({a}, {b})")
        composites[(a, b)] = ab
    return FiniteGroupoid(
        objects=tuple(g.objects),
        morphisms={m.id: (m.src, m.tgt) for m in g.morphisms},
        identities=g.identities,
        inverses=g.inverses,
        composites=composites,
    )


def groupoid_to_document(G: FiniteGroupoid) -> GroupoidDocument:
    return GroupoidDocument(
        objects=list(G.objects),
        morphisms=[MorphismSpec(id=m, src=s, tgt=t) for m, (s, t) in sorted(G.morphisms.items())],
        identities=dict(G.identities),
        inverses=dict(G.inverses),
        compose=sorted((a, b, ab) for (a, b), ab in G.composites.items()),
    )


def build_groupoid(doc: InstanceDocument) -> FiniteGroupoid:
    _require(doc, "groupoid")
    return groupoid_from_document(doc.groupoid)


def build_subset(doc: InstanceDocument, G: FiniteGroupoid) -> PregroupoidSubset:
    _require(doc, "generators")
    return PregroupoidSubset.of(G, doc.generators)


def build_graph(doc: InstanceDocument) -> nx.Graph:
    _require(doc, "graph")
    X = nx.Graph()
    X.add_nodes_from(doc.graph.vertices)
    for n, (u, v) in enumerate(doc.graph.edges):
        if u not in X or v not in X:
            raise DocumentError(f"graph.edges.{n}: endpoint is not a listed vertex")
        X.add_edge(u, v)
    return X


def build_presentation(doc: InstanceDocument) -> GroupoidPresentation:
    _require(doc, "presentation")
    p = doc.presentation
    graph = GeneratingGraph(
        p.vertices,
        {e.id: (e.src, e.tgt) for e in p.edges},
        frozenset(e.id for e in p.edges if e.degenerate),
    )
    relators = []
    for n, r in enumerate(p.relators):
        try:
            relators.append(make_word(graph, [parse_letter(l) for l in r.letters], at=r.at))
        except ValueError as e:
            raise DocumentError(f"presentation.relators.{n}: {e}") from None
    return GroupoidPresentation(graph, tuple(relators))


def build_topology(t: TopologyDocument, where: str) -> FiniteTopology:
    try:
        return FiniteTopology.from_opens(t.points, t.opens)
    except ValueError as e:
        raise DocumentError(f"{where}: {e}") from None


def build_trivialization(doc: InstanceDocument) -> LocalTrivialization:
    _require(doc, "base_space", "cover", "sections")
    sections: Dict[Tuple[str, str], Dict[str, str]] = {}
    for n, s in enumerate(doc.sections):
        if (s.point, s.index) in sections:
            raise DocumentError(f"sections.{n}: duplicate section ({s.point}, {s.index})")
        sections[(s.point, s.index)] = dict(s.values)
    cover = {}
    for n, (i, U) in enumerate(doc.cover):
        if i in cover:
            raise DocumentError(f"cover.{n}: duplicate index '{i}'")
        cover[i] = frozenset(U)
    return LocalTrivialization(build_topology(doc.base_space, "base_space"), cover, sections)


def build_subgroupoid(doc: InstanceDocument, G: FiniteGroupoid) -> WideSubgroupoid:
    _require(doc, "subgroupoid")
    try:
        return WideSubgroupoid.of(G, doc.subgroupoid)
    except ValueError as e:
        raise DocumentError(f"subgroupoid: {e}") from None


def build_target(doc: InstanceDocument) -> Tuple[Any, Dict[str, Any]]:
    """The target groupoid H and the assignment W -> H."""
    _require(doc, "target", "assignment")
    if doc.target.groupoid is not None:
        H = groupoid_from_document(doc.target.groupoid)
        report = validate_groupoid(H)
        if not report.ok:
            v = report.violations[0]
            raise DocumentError(f"target.groupoid: not a groupoid, {v.kind.value} at {v.witness}")
        for a, h in doc.assignment.items():
            if h not in H.morphisms:
                raise DocumentError(f"assignment.{a}: '{h}' is not a morphism of the target")
        return H, dict(doc.assignment)
    H = FreeGroupTarget(doc.target.free_rank)
    return H, {a: free_word(H, w, f"assignment.{a}") for a, w in doc.assignment.items()}


def free_word(H: FreeGroupTarget, text: str, where: str):
    """'t0 t1^-1 t0' in the free target; the empty string is the identity."""
    factors: List[Any] = []
    for token in text.split():
        name, sign = parse_letter(token)
        if not name.startswith("t") or not name[1:].isdigit() or int(name[1:]) >= len(H.generators):
            raise DocumentError(f"{where}: unknown free generator '{name}'")
        g = H.generators[int(name[1:])]
        factors.append(g if sign > 0 else g ** -1)
    return reduce(lambda a, b: a * b, factors, H.group.identity)
