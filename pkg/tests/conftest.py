import random
from itertools import product
from typing import Callable, Dict, List, Tuple

import networkx as nx
import pytest

from monokit.backend.groupoid import FiniteGroupoid, cyclic_group, group_groupoid, pair_groupoid
from monokit.backend.topology import FiniteTopology, generate_from_base


# ----------------------------------------------------------------------
# Small groups
# ----------------------------------------------------------------------
def _permutation_group(generators: List[Tuple[int, ...]]) -> List[Tuple[int, ...]]:
    identity = tuple(range(len(generators[0])))
    elements = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for p in frontier:
            for g in generators:
                q = tuple(p[i] for i in g)
                if q not in elements:
                    elements.add(q)
                    nxt.append(q)
        frontier = nxt
    return sorted(elements)


def _compose_perm(p, q):
    return tuple(p[i] for i in q)


def _quaternion(x, y):
    a1, b1, c1, d1 = x
    a2, b2, c2, d2 = y
    return (a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2)


def _product_group(*orders: int) -> FiniteGroupoid:
    elements = list(product(*(range(n) for n in orders)))
    return group_groupoid(
        elements,
        lambda a, b: tuple((x + y) % n for x, y, n in zip(a, b, orders)),
        name=_name,
    )


def _name(e) -> str:
    return "".join(map(str, e))


def small_groups() -> Dict[str, FiniteGroupoid]:
    """Every group of order at most 8, up to isomorphism, as a one-object groupoid."""
    groups = {f"Z{n}": cyclic_group(n) for n in range(1, 9)}
    groups["Z2xZ2"] = _product_group(2, 2)
    groups["Z2xZ4"] = _product_group(2, 4)
    groups["Z2xZ2xZ2"] = _product_group(2, 2, 2)
    groups["S3"] = group_groupoid(_permutation_group([(1, 0, 2), (1, 2, 0)]), _compose_perm, name=_name)
    groups["D4"] = group_groupoid(_permutation_group([(1, 2, 3, 0), (0, 3, 2, 1)]), _compose_perm,
                                  name=_name)
    units = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
    q8 = [u for u in units] + [tuple(-c for c in u) for u in units]
    groups["Q8"] = group_groupoid(q8, _quaternion, name=lambda e: ",".join(map(str, e)))
    return groups


SMALL_GROUPS = small_groups()


@pytest.fixture(params=sorted(SMALL_GROUPS))
def small_group(request) -> FiniteGroupoid:
    return SMALL_GROUPS[request.param]


@pytest.fixture
def pair3() -> FiniteGroupoid:
    return pair_groupoid("abc")


@pytest.fixture
def z5() -> FiniteGroupoid:
    return cyclic_group(5)


# ----------------------------------------------------------------------
# Random graphs and spaces
# ----------------------------------------------------------------------
def random_tree(n: int, rng: random.Random) -> nx.Graph:
    if n == 1:
        T = nx.Graph()
        T.add_node(0)
        return T
    if n == 2:
        return nx.path_graph(2)
    return nx.from_prufer_sequence([rng.randrange(n) for _ in range(n - 2)])


def random_connected_graph(n: int, extra: int, rng: random.Random) -> nx.Graph:
    X = random_tree(n, rng)
    candidates = [(u, v) for u in range(n) for v in range(u + 1, n) if not X.has_edge(u, v)]
    rng.shuffle(candidates)
    X.add_edges_from(candidates[:extra])
    return X


def random_space(points: List[str], rng: random.Random) -> FiniteTopology:
    family = [frozenset(p for p in points if rng.random() < 0.5) for _ in range(rng.randrange(4))]
    return generate_from_base(points, family + [frozenset(points)]).topology


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240611)


def section_choice(kind: str) -> Callable[[str, str], str]:
    if kind == "pair":
        return lambda x, u: f"({x},{u})"
    return lambda x, u: f"({x},0,{u})"
