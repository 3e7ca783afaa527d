"""Shared fixtures: small reference networks used throughout the suite."""

import numpy as np
import pytest

from treelocate import build_tree, path_tree


@pytest.fixture(scope="session")
def three_leaf_tree():
    """Six-node tree, observers 1,2,3 at the leaves of a 3-edge spine.

    Layout (node ids):       3
                             |
        1 -a- 0(u) -b- 4(v) -c- 5(w)
              |e            (d joins 4-3)
              2

    Canonical edge ids: a=(0,1)->0, e=(0,2)->1, b=(0,4)->2, d=(3,4)->3,
    c=(4,5)->4.
    """
    return build_tree(6, [(1, 0), (0, 4), (4, 5), (0, 2), (4, 3)])


THREE_LEAF_OBSERVERS = (1, 2, 3)
EDGE_A, EDGE_E, EDGE_B, EDGE_D, EDGE_C = 0, 1, 2, 3, 4


@pytest.fixture(scope="session")
def nine_observer_tree():
    """24-node tree with observers 1..9 and four non-observer components.

    Components (by construction): {10..15} with boundary {7,8,9};
    {0,16} with boundary {2,3,4,5}; {17,18,19} with boundary {2};
    {20,21,22,23} with boundary {1,2}.
    """
    edges = [
        (8, 10), (11, 10), (10, 13), (3, 16), (1, 21), (9, 12), (12, 13),
        (13, 7), (7, 6), (6, 5), (5, 0), (0, 16), (16, 2), (2, 20),
        (20, 21), (21, 22), (14, 12), (15, 13), (4, 0), (17, 2), (23, 21),
        (18, 17), (19, 17),
    ]
    return build_tree(24, edges)


NINE_OBSERVERS = frozenset(range(1, 10))


@pytest.fixture(scope="session")
def eleven_path():
    """Path 0-1-...-10; observer at 0 in the benchmark experiments."""
    return path_tree(11)


def star_center_tree(n: int):
    """Leaf observer chain used for the sufficiency demonstration.

    Observers 0..n+1; non-observers ell = n+2 and r = n+3. Node n+1
    hangs off ell; observers 1..n hang off r; 0 sits between ell and r.
    """
    ell, r = n + 2, n + 3
    edges = [(n + 1, ell), (ell, 0), (0, r)] + [(r, i) for i in range(1, n + 1)]
    return build_tree(n + 4, edges)


@pytest.fixture(scope="session")
def star3_tree():
    return star_center_tree(3)
