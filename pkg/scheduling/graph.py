"""
Graph algorithms.
Contains Tarjan's strongly connected components and all-pairs longest paths.
"""

import itertools
from typing import Callable, Dict, Hashable, Iterable, Iterator, List, Sequence, Tuple

import numpy as np

NO_PATH = -np.inf


def tarjan(vertices: Iterable[Hashable],
           neighbours: Callable[[Hashable], Iterable[Hashable]]) -> Iterator[List[Hashable]]:
    """
    Strongly connected components, sinks first.

    Iterative form of Tarjan's algorithm: every component is yielded after
    all components reachable from it, so the output is a reverse
    topological order of the condensation.

    Args:
        vertices: Vertices of the graph, hashable
        neighbours: Function giving the successors of a vertex

    Yields:
        list: Members of one component in discovery order
    """
    indices = itertools.count()
    index: Dict[Hashable, int] = {}
    lowlink: Dict[Hashable, int] = {}
    stack: List[Hashable] = []
    on_stack = set()

    for root in vertices:
        if root in index:
            continue
        index[root] = lowlink[root] = next(indices)
        stack.append(root)
        on_stack.add(root)
        work = [(root, iter(neighbours(root)))]
        while work:
            v, successors = work[-1]
            for w in successors:
                if w not in index:
                    index[w] = lowlink[w] = next(indices)
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(neighbours(w))))
                    break
                if w in on_stack:
                    lowlink[v] = min(lowlink[v], index[w])
            else:
                work.pop()
                if work:
                    parent = work[-1][0]
                    lowlink[parent] = min(lowlink[parent], lowlink[v])
                if lowlink[v] == index[v]:
                    scc = []
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        scc.append(w)
                        if w == v:
                            break
                    scc.reverse()
                    yield scc


def longest_paths(n: int, edges: Sequence[Tuple[int, int, float]]) -> np.ndarray:
    """
    All-pairs longest path weights by Floyd-Warshall.

    Args:
        n: Number of vertices, labelled ``0..n-1``
        edges: ``(u, v, weight)`` triples; parallel edges keep the heaviest

    Returns:
        numpy.ndarray: ``n x n`` matrix with ``NO_PATH`` where ``v`` is not
        reachable from ``u``. A positive diagonal entry marks a positive cycle.
    """
    dist = np.full((n, n), NO_PATH)
    for u, v, w in edges:
        if w > dist[u, v]:
            dist[u, v] = w
    for k in range(n):
        dist = np.maximum(dist, dist[:, k, None] + dist[None, k, :])
    return dist


def has_positive_cycle(dist: np.ndarray) -> bool:
    return bool(dist.size) and bool(np.any(np.diag(dist) > 0))
