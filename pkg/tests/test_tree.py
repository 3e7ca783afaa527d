import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treelocate import (
    build_tree,
    diameter,
    leaves,
    path,
    path_nodes,
    path_tree,
    prufer_decode,
    prufer_encode,
    random_tree_prufer,
    read_edge_list,
    star_tree,
    trial_rng,
)
from treelocate.errors import (
    CycleError,
    DisconnectedError,
    DuplicateEdgeError,
    MalformedNetworkFileError,
    NodeOutOfRangeError,
    SelfLoopError,
    TreeTooSmallError,
)
from treelocate.tree import parse_edge_lines

from conftest import EDGE_A, EDGE_B, EDGE_C


class TestBuildTree:
    def test_smallest_tree(self):
        t = build_tree(2, [(0, 1)])
        assert t.edges == ((0, 1),)
        assert leaves(t) == {0, 1}

    def test_three_leaf_fixture(self, three_leaf_tree):
        assert three_leaf_tree.n == 6
        assert leaves(three_leaf_tree) >= {1, 2, 3}

    def test_triangle_is_not_a_tree(self):
        with pytest.raises(CycleError):
            build_tree(3, [(0, 1), (1, 2), (2, 0)])

    def test_self_loop(self):
        with pytest.raises(SelfLoopError):
            build_tree(2, [(1, 1)])

    def test_duplicate_edge(self):
        with pytest.raises(DuplicateEdgeError):
            build_tree(3, [(0, 1), (1, 0)])

    def test_node_out_of_range(self):
        with pytest.raises(NodeOutOfRangeError):
            build_tree(3, [(0, 1), (1, 3)])

    def test_wrong_edge_count(self):
        with pytest.raises(DisconnectedError):
            build_tree(4, [(0, 1), (2, 3)])

    def test_too_small(self):
        with pytest.raises(TreeTooSmallError):
            build_tree(1, [])


class TestPath:
    def test_fixture_path_w_to_1(self, three_leaf_tree):
        assert path(three_leaf_tree, 5, 1) == [EDGE_C, EDGE_B, EDGE_A]

    def test_identity(self, three_leaf_tree):
        assert path(three_leaf_tree, 4, 4) == []

    def test_full_path_graph(self):
        t = path_tree(11)
        assert path(t, 0, 10) == list(range(10))

    def test_reversal(self, three_leaf_tree):
        fwd = path(three_leaf_tree, 5, 2)
        assert path(three_leaf_tree, 2, 5) == fwd[::-1]

    def test_path_nodes_endpoints(self, three_leaf_tree):
        nodes = path_nodes(three_leaf_tree, 1, 3)
        assert nodes[0] == 1 and nodes[-1] == 3


class TestLeavesDiameter:
    def test_fixture_leaves(self, three_leaf_tree):
        assert leaves(three_leaf_tree) == {1, 2, 3, 5}

    def test_star(self):
        t = star_tree(5, center=0)
        assert leaves(t) == {1, 2, 3, 4}
        assert diameter(t) == 2

    def test_path_diameter(self):
        assert diameter(path_tree(11)) == 10

    def test_fixture_diameter_matches_enumeration(self, three_leaf_tree):
        # brute force over all node pairs
        brute = max(
            len(path(three_leaf_tree, u, v))
            for u in range(6)
            for v in range(6)
        )
        assert diameter(three_leaf_tree) == brute == 3


class TestPrufer:
    def test_n2_forced(self):
        t = prufer_decode([], 2)
        assert t.edges == ((0, 1),)

    def test_star_sequence(self):
        # decoding [0, 0] for n=4 by hand: leaves 1,2 attach to 0, then 0-3
        t = prufer_decode([0, 0], 4)
        assert t.edges == ((0, 1), (0, 2), (0, 3))

    @pytest.mark.parametrize("n", [5, 6])
    def test_exhaustive_roundtrip(self, n):
        for seq in itertools.product(range(n), repeat=n - 2):
            t = prufer_decode(list(seq), n)
            assert prufer_encode(t) == seq
            # degree of node i is 1 + multiplicity of i in the sequence
            for v in range(n):
                assert t.degree(v) == 1 + seq.count(v)

    def test_random_tree_valid_and_seeded(self):
        a = random_tree_prufer(30, trial_rng(11, 0))
        b = random_tree_prufer(30, trial_rng(11, 0))
        assert a == b
        assert a.n == 30 and len(a.edges) == 29

    def test_too_small(self):
        with pytest.raises(TreeTooSmallError):
            random_tree_prufer(1, trial_rng(0))


@settings(max_examples=40, deadline=None)
@given(data=st.data(), n=st.integers(min_value=3, max_value=12))
def test_path_triangle_equality(data, n):
    """|path(u,v)| splits exactly at any node on the path."""
    seq = data.draw(st.lists(st.integers(0, n - 1), min_size=n - 2, max_size=n - 2))
    t = prufer_decode(seq, n)
    u = data.draw(st.integers(0, n - 1))
    v = data.draw(st.integers(0, n - 1))
    nodes = path_nodes(t, u, v)
    mid = data.draw(st.sampled_from(nodes))
    assert len(path(t, u, mid)) + len(path(t, mid, v)) == len(path(t, u, v))


def test_diameter_equals_nm1_iff_path():
    assert diameter(path_tree(7)) == 6
    assert diameter(star_tree(7)) < 6


class TestEdgeListIO:
    def test_plain_integer_labels(self, tmp_path):
        p = tmp_path / "t.txt"
        p.write_text("0 1\n1 2\n# comment\n2 3\n")
        data = read_edge_list(p)
        assert data.tree.n == 4
        assert data.labels == ("0", "1", "2", "3")
        assert data.node_for_label("2") == 2
        assert data.edge_params is None

    def test_string_labels_and_params(self):
        lines = ["a b 1.5 0.375", "b c 0.5 0.125"]
        data = parse_edge_lines(lines)
        assert data.tree.n == 3
        assert data.labels == ("a", "b", "c")
        eid = data.tree.edge_id(data.node_for_label("b"), data.node_for_label("c"))
        assert data.edge_params[eid] == (0.5, 0.125)

    def test_malformed_token(self):
        with pytest.raises(MalformedNetworkFileError):
            parse_edge_lines(["a b oops"])

    def test_single_column(self):
        with pytest.raises(MalformedNetworkFileError):
            parse_edge_lines(["a"])

    def test_empty(self):
        with pytest.raises(MalformedNetworkFileError):
            parse_edge_lines(["# nothing"])

    def test_inconsistent_columns(self):
        with pytest.raises(MalformedNetworkFileError):
            parse_edge_lines(["a b 1.0", "b c"])

    def test_structure_errors_propagate(self):
        with pytest.raises(CycleError):
            parse_edge_lines(["a b", "b c", "c a"])
