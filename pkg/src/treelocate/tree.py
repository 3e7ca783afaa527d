"""Undirected labeled trees: construction, path/leaf/diameter queries,
uniform random generation, and edge-list file ingestion.

Nodes are dense integers 0..n-1. Edges are canonicalized as (min, max)
pairs and stored once, sorted, so that edge ids are orientation-free.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CycleError,
    DisconnectedError,
    DuplicateEdgeError,
    MalformedNetworkFileError,
    NodeOutOfRangeError,
    SelfLoopError,
    TreeTooSmallError,
)


@dataclass(frozen=True)
class Tree:
    """Immutable undirected tree on nodes 0..n-1.

    Attributes:
        n: node count.
        edges: canonical edge list, each edge once as (min, max), sorted.
        adjacency: per-node sorted neighbor tuples.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...]
    _edge_index: dict = field(repr=False, compare=False)

    def edge_id(self, u: int, v: int) -> int:
        """Canonical index of edge {u, v}."""
        key = (u, v) if u < v else (v, u)
        try:
            return self._edge_index[key]
        except KeyError:
            raise KeyError(f"no edge {{{u}, {v}}} in tree") from None

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @property
    def n_edges(self) -> int:
        return self.n - 1


def _check_node(tree_or_n, v: int) -> None:
    n = tree_or_n.n if isinstance(tree_or_n, Tree) else tree_or_n
    if not (isinstance(v, (int, np.integer)) and 0 <= v < n):
        raise NodeOutOfRangeError(f"node {v!r} outside 0..{n - 1}")


def build_tree(n: int, edges: Iterable[tuple[int, int]]) -> Tree:
    """Validate an edge list and build a Tree.

    Args:
        n: node count, >= 2.
        edges: n-1 node pairs over ids < n.

    Raises:
        TreeTooSmallError, NodeOutOfRangeError, SelfLoopError,
        DuplicateEdgeError, CycleError, DisconnectedError.
    """
    if n < 2:
        raise TreeTooSmallError(f"need at least 2 nodes, got {n}")
    canonical: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for u, v in edges:
        _check_node(n, u)
        _check_node(n, v)
        u, v = int(u), int(v)
        if u == v:
            raise SelfLoopError(f"self loop at node {u}")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise DuplicateEdgeError(f"edge {key} listed twice")
        seen.add(key)
        canonical.append(key)
    # union-find before the edge-count check so a triangle reports the
    # cycle, not the count; any non-tree edge list trips one of the two
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in canonical:
        ru, rv = find(u), find(v)
        if ru == rv:
            raise CycleError(f"edge ({u}, {v}) closes a cycle")
        parent[ru] = rv
    roots = {find(x) for x in range(n)}
    if len(roots) > 1:
        raise DisconnectedError("edge list does not connect all nodes")
    if len(canonical) != n - 1:  # unreachable: connected + acyclic forces it
        raise DisconnectedError(f"tree on {n} nodes needs {n - 1} edges, got {len(canonical)}")

    canonical.sort()
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in canonical:
        adj[u].append(v)
        adj[v].append(u)
    return Tree(
        n=n,
        edges=tuple(canonical),
        adjacency=tuple(tuple(sorted(a)) for a in adj),
        _edge_index={e: i for i, e in enumerate(canonical)},
    )


def _bfs_parents(tree: Tree, root: int, stop: int | None = None) -> list[int]:
    """Parent pointers of the BFS tree rooted at ``root`` (-1 at root)."""
    parent = [-2] * tree.n
    parent[root] = -1
    queue = deque([root])
    while queue:
        x = queue.popleft()
        if x == stop:
            break
        for y in tree.adjacency[x]:
            if parent[y] == -2:
                parent[y] = x
                queue.append(y)
    return parent


def path_nodes(tree: Tree, u: int, v: int) -> list[int]:
    """Node sequence of the unique path from u to v, inclusive."""
    _check_node(tree, u)
    _check_node(tree, v)
    if u == v:
        return [u]
    parent = _bfs_parents(tree, u, stop=v)
    nodes = [v]
    while nodes[-1] != u:
        nodes.append(parent[nodes[-1]])
    nodes.reverse()
    return nodes


def path(tree: Tree, u: int, v: int) -> list[int]:
    """Ordered edge ids of the unique path from u to v; empty when u == v."""
    nodes = path_nodes(tree, u, v)
    return [tree.edge_id(a, b) for a, b in zip(nodes, nodes[1:])]


def leaves(tree: Tree) -> set[int]:
    """All nodes of degree 1."""
    return {v for v in range(tree.n) if tree.degree(v) == 1}


def _bfs_farthest(tree: Tree, root: int) -> tuple[int, int]:
    dist = [-1] * tree.n
    dist[root] = 0
    queue = deque([root])
    far, fdist = root, 0
    while queue:
        x = queue.popleft()
        for y in tree.adjacency[x]:
            if dist[y] < 0:
                dist[y] = dist[x] + 1
                if dist[y] > fdist:
                    far, fdist = y, dist[y]
                queue.append(y)
    return far, fdist


def diameter(tree: Tree) -> int:
    """Longest shortest path in edges (double BFS)."""
    a, _ = _bfs_farthest(tree, 0)
    _, d = _bfs_farthest(tree, a)
    return d


def edge_distance(tree: Tree, u: int, v: int) -> int:
    """Number of edges on the path from u to v."""
    return len(path(tree, u, v))


# ------------------------------------------------------------ Prüfer

def prufer_decode(sequence: Sequence[int], n: int) -> Tree:
    """Decode a length n-2 sequence over {0..n-1} into its labeled tree.

    Standard smallest-leaf-first bijection: the recorded neighbor of the
    smallest current leaf, repeated until two nodes remain.
    """
    if n < 2:
        raise TreeTooSmallError(f"need at least 2 nodes, got {n}")
    sequence = [int(x) for x in sequence]
    if len(sequence) != max(n - 2, 0):
        raise ValueError(f"sequence for n={n} must have length {n - 2}")
    for x in sequence:
        _check_node(n, x)
    degree = [1] * n
    for x in sequence:
        degree[x] += 1
    heap = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(heap)
    edges = []
    for x in sequence:
        leaf = heapq.heappop(heap)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(heap, x)
    a = heapq.heappop(heap)
    b = heapq.heappop(heap)
    edges.append((a, b))
    return build_tree(n, edges)


def prufer_encode(tree: Tree) -> tuple[int, ...]:
    """Inverse of prufer_decode (empty for n == 2)."""
    n = tree.n
    degree = [tree.degree(v) for v in range(n)]
    heap = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(heap)
    removed = [False] * n
    seq = []
    for _ in range(n - 2):
        leaf = heapq.heappop(heap)
        removed[leaf] = True
        neighbor = next(y for y in tree.adjacency[leaf] if not removed[y])
        seq.append(neighbor)
        degree[neighbor] -= 1
        if degree[neighbor] == 1:
            heapq.heappush(heap, neighbor)
    return tuple(seq)


def random_tree_prufer(n: int, rng: np.random.Generator) -> Tree:
    """Uniform random labeled tree on n >= 2 nodes."""
    if n < 2:
        raise TreeTooSmallError(f"need at least 2 nodes, got {n}")
    if n == 2:
        return build_tree(2, [(0, 1)])
    seq = rng.integers(0, n, size=n - 2)
    return prufer_decode(seq.tolist(), n)


# ------------------------------------------------------ file ingestion

@dataclass(frozen=True)
class EdgeListData:
    """A tree read from a text edge list, with its label table and any
    per-edge numeric columns (aligned with tree.edges)."""

    tree: Tree
    labels: tuple[str, ...]
    label_ids: dict
    edge_params: tuple | None

    def node_for_label(self, label: str) -> int:
        try:
            return self.label_ids[label]
        except KeyError:
            raise KeyError(f"unknown node label {label!r}") from None


def parse_edge_lines(lines: Iterable[str]) -> EdgeListData:
    """Parse ``u v [col3 col4 ...]`` lines; '#' starts a comment.

    Labels are arbitrary tokens. When every label is an integer and the
    set is exactly 0..n-1 they are used directly; otherwise labels map to
    dense ids in order of first appearance.
    """
    raw_edges: list[tuple[str, str, tuple[float, ...]]] = []
    order: list[str] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        tokens = text.split()
        if len(tokens) < 2:
            raise MalformedNetworkFileError(f"line {lineno}: expected 'u v [params...]'")
        u, v = tokens[0], tokens[1]
        try:
            params = tuple(float(tok) for tok in tokens[2:])
        except ValueError as exc:
            raise MalformedNetworkFileError(f"line {lineno}: bad numeric column: {exc}") from None
        raw_edges.append((u, v, params))
        for lab in (u, v):
            if lab not in seen:
                seen.add(lab)
                order.append(lab)
    if not raw_edges:
        raise MalformedNetworkFileError("no edges found")

    n = len(order)
    as_ints = None
    try:
        ints = [int(lab) for lab in order]
        if sorted(ints) == list(range(n)):
            as_ints = {lab: int(lab) for lab in order}
    except ValueError:
        pass
    label_ids = as_ints if as_ints is not None else {lab: i for i, lab in enumerate(order)}
    labels = tuple(sorted(label_ids, key=label_ids.get))

    widths = {len(p) for _, _, p in raw_edges}
    if len(widths) > 1:
        raise MalformedNetworkFileError("inconsistent number of per-edge columns")
    width = widths.pop()

    edges = [(label_ids[u], label_ids[v]) for u, v, _ in raw_edges]
    tree = build_tree(n, edges)
    edge_params = None
    if width > 0:
        by_edge: dict[tuple[int, int], tuple[float, ...]] = {}
        for (u, v, params) in raw_edges:
            a, b = label_ids[u], label_ids[v]
            by_edge[(min(a, b), max(a, b))] = params
        edge_params = tuple(by_edge[e] for e in tree.edges)
    return EdgeListData(tree=tree, labels=labels, label_ids=label_ids, edge_params=edge_params)


def read_edge_list(file_path: str | Path) -> EdgeListData:
    """Read a whitespace edge-list file (see parse_edge_lines)."""
    p = Path(file_path)
    with p.open("r", encoding="utf-8") as fh:
        return parse_edge_lines(fh)


def path_tree(n: int) -> Tree:
    """0-1-2-...-(n-1) path graph."""
    return build_tree(n, [(i, i + 1) for i in range(n - 1)])


def star_tree(n: int, center: int = 0) -> Tree:
    """Star with the given center."""
    return build_tree(n, [(center, v) for v in range(n) if v != center])
