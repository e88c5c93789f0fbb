import json

import numpy as np
import pytest
from hypothesis import given

from conftest import dyadic_spaces, node_groups, tree_spaces
from doobweights.errors import (
    CapacityError,
    InvalidMeasureError,
    MalformedDocumentError,
    RefinementError,
    ShapeError,
)
from doobweights.filtration import (
    MAX_LEAVES,
    FilteredSpace,
    all_leaves,
    build_dyadic,
    build_from_spec,
    build_uniform_tree,
    integrate,
    leafset,
    load_space,
    measure,
    serialize,
)


def test_depth_zero_is_single_leaf():
    s = build_dyadic(0)
    assert s.depth == 0 and s.n_leaves == 1
    assert s.total_mass == 1.0


def test_dyadic_depth_two():
    s = build_dyadic(2)
    assert np.all(s.leaf_measure == 0.25)
    assert [s.n_nodes(i) for i in range(3)] == [1, 2, 4]
    assert s.is_dyadic()


def test_masses_sum_at_parent():
    s = build_dyadic(1, [0.25, 0.75])
    assert s.node_mass(0).tolist() == [1.0]
    assert s.node_mass(1).tolist() == [0.25, 0.75]


def test_nonpositive_mass_rejected():
    with pytest.raises(InvalidMeasureError):
        build_dyadic(1, [0.5, 0.0])
    with pytest.raises(InvalidMeasureError):
        build_dyadic(1, [0.5, -1.0])
    with pytest.raises(InvalidMeasureError):
        build_dyadic(1, [0.5, np.nan])


def test_capacity():
    with pytest.raises(CapacityError):
        build_dyadic(int(np.log2(MAX_LEAVES)) + 1)


def test_straddling_node_rejected():
    # level 1 splits 2+2, level 2 has a node covering leaves 1..2
    doc = {"depth": 3, "leaf_measures": [1, 1, 1, 1], "levels": [[4], [2, 2], [1, 2, 1], [1, 1, 1, 1]]}
    with pytest.raises(RefinementError):
        build_from_spec(doc)


def test_ternary_tree():
    s = build_uniform_tree([3], [1, 1, 1])
    assert s.total_mass == 3.0
    assert s.n_nodes(1) == 3
    assert not s.is_dyadic()


@pytest.mark.parametrize(
    "doc",
    [
        "not json",
        "[1, 2]",
        '{"depth": 1, "leaf_measures": [1, 1]}',
        '{"depth": -1, "leaf_measures": [1], "levels": [[1]]}',
        '{"depth": 1, "leaf_measures": ["a", 1], "levels": [[2], [1, 1]]}',
        '{"depth": 1, "leaf_measures": [1, 1], "levels": [[2], [1.5, 0.5]]}',
        '{"depth": 2, "leaf_measures": [1, 1], "levels": [[2], [1, 1]]}',
    ],
)
def test_malformed_documents(doc):
    with pytest.raises(MalformedDocumentError):
        build_from_spec(doc)


def test_structural_errors_are_not_parse_errors():
    with pytest.raises(RefinementError):
        build_from_spec({"depth": 1, "leaf_measures": [1, 1], "levels": [[2], [2]]})
    with pytest.raises(RefinementError):
        build_from_spec({"depth": 1, "leaf_measures": [1, 1, 1], "levels": [[3], [1, 1]]})


def test_integrate_examples():
    s = build_dyadic(2)
    assert integrate(s, np.ones(4), all_leaves(s)) == 1.0
    assert integrate(s, [4, 0, 0, 0], all_leaves(s)) == 1.0
    assert integrate(s, [3, -1, 2, 7], leafset(s)) == 0.0


def test_integrate_shape_errors():
    s = build_dyadic(2)
    with pytest.raises(ShapeError):
        integrate(s, np.ones(3))
    with pytest.raises(ShapeError):
        integrate(s, np.ones(4), np.ones(4))
    with pytest.raises(ShapeError):
        leafset(s, [4])


def test_arrays_read_only():
    s = build_dyadic(2)
    with pytest.raises(ValueError):
        s.leaf_measure[0] = 1.0


def test_round_trip_file(tmp_path):
    s = build_uniform_tree([2, 3], np.arange(1, 7))
    path = tmp_path / "space.json"
    path.write_text(serialize(s))
    assert load_space(path) == s
    assert json.loads(serialize(s))["depth"] == 2


@given(tree_spaces())
def test_round_trip_random(space):
    back = build_from_spec(serialize(space))
    assert back == space and hash(back) == hash(space)


@given(tree_spaces())
def test_levels_refine(space):
    for i in range(space.depth):
        for node in range(space.n_nodes(i + 1)):
            child = space.node_mask(i + 1, node)
            parent = space.node_mask(i, space.parent(i + 1, node))
            assert np.all(parent[child])
    assert space.n_nodes(space.depth) == space.n_leaves


@given(dyadic_spaces())
def test_node_mass_matches_sum(space):
    for i in range(space.depth + 1):
        for node, idx in enumerate(node_groups(space, i)):
            assert space.node_mass(i)[node] == pytest.approx(space.leaf_measure[idx].sum(), rel=1e-14)
        assert measure(space, all_leaves(space)) == pytest.approx(space.total_mass, rel=1e-14)


@given(tree_spaces())
def test_measurability(space):
    for i in range(space.depth + 1):
        assert space.is_measurable(space.node_mask(i, 0), i)
        assert space.is_measurable(all_leaves(space), i)
    if space.n_nodes(0) < space.n_leaves and space.sizes(0)[0] > 1:
        single = leafset(space, [0])
        assert not space.is_measurable(single, 0)


def test_constructor_direct():
    s = FilteredSpace([1, 2, 3], [[3], [1, 2], [1, 1, 1]])
    assert s.sizes(1).tolist() == [1, 2]
    assert s.labels(1).tolist() == [0, 1, 1]
