from typing import Union

import pydot

from monokit import get_logger
from monokit.backend.groupoid import FiniteGroupoid
from monokit.backend.monodromy import MonodromyGroupoid, PregroupoidSubset, monodromy_presentation
from monokit.backend.words import GroupoidPresentation, spanning_forest
from monokit.frontend.constants import DOT_STYLE

logger = get_logger(__name__)


def _presentation_and_forest(source) -> tuple:
    if isinstance(source, MonodromyGroupoid):
        return source.presentation, source.forest
    if isinstance(source, FiniteGroupoid):
        W = PregroupoidSubset.of(source, source.morphisms)
        presentation, _ = monodromy_presentation(W)
        return presentation, spanning_forest(presentation.graph)
    if isinstance(source, GroupoidPresentation):
        return source, spanning_forest(source.graph)
    raise TypeError(f"Cannot export {type(source).__name__} to DOT.")


def build_dot(source: Union[GroupoidPresentation, FiniteGroupoid, MonodromyGroupoid],
              name: str = "presentation") -> pydot.Dot:
    """One cluster per component; tree edges dashed; relator count in the label."""
    presentation, forest = _presentation_and_forest(source)
    graph = presentation.graph
    dot = pydot.Dot(name, graph_type="digraph",
                    label=f"relators: {len(presentation.relators)}")
    node_id = {v: f"n{k}" for k, v in enumerate(graph.vertices)}
    tree = forest.tree_edges

    for k, comp in enumerate(forest.components):
        cluster = pydot.Cluster(f"component_{k}", label=f"base {comp.base}")
        for v in sorted(comp.vertices):
            cluster.add_node(pydot.Node(node_id[v], label=v, **DOT_STYLE["node"]))
        for e in graph.proper_edges:
            s, t = graph.edges[e]
            if s not in comp.vertices:
                continue
            style = DOT_STYLE["tree_edge"] if e in tree else DOT_STYLE["generator_edge"]
            cluster.add_edge(pydot.Edge(node_id[s], node_id[t], label=e, **style))
        dot.add_subgraph(cluster)
    logger.debug(f"DOT export: {len(graph.vertices)} nodes, {len(graph.proper_edges)} edges.")
    return dot


def export_dot(source: Union[GroupoidPresentation, FiniteGroupoid, MonodromyGroupoid],
               name: str = "presentation") -> str:
    return build_dot(source, name).to_string()
