import numpy as np
import pytest

from halognn import errors
from halognn.mesh import MeshConfig, block_factors, build_box_mesh, partition_mesh


@pytest.fixture
def mesh():
    return build_box_mesh(MeshConfig(elements_per_axis=4, poly_order=1))


@pytest.mark.parametrize(
    "R, E, expected",
    [
        (1, 4, (1, 1, 1)),
        (2, 4, (2, 1, 1)),
        (4, 4, (2, 2, 1)),
        (8, 4, (2, 2, 2)),
        (16, 4, (4, 2, 2)),
        (3, 3, (3, 1, 1)),
    ],
)
def test_block_factors(R, E, expected):
    assert block_factors(R, E) == expected


def test_block_factors_impossible():
    with pytest.raises(errors.PartitionError):
        block_factors(3, 2)


@pytest.mark.parametrize("strategy, R", [("slab", 1), ("slab", 2), ("slab", 4), ("block", 2), ("block", 8)])
def test_every_element_assigned_once(mesh, strategy, R):
    part = partition_mesh(mesh, R, strategy)
    assert part.element_to_rank.shape == (64,)
    assert part.counts().sum() == 64
    assert np.all(part.counts() == 64 // R)
    for r in range(R):
        assert np.all(part.element_to_rank[part.elements_of(r)] == r)


def test_slab_along_z(mesh):
    part = partition_mesh(mesh, 2, "slab")
    coords = mesh.element_coordinates()
    np.testing.assert_array_equal(part.element_to_rank, coords[:, 2] // 2)
    assert part.factors == (1, 1, 2)


def test_slab_other_axis(mesh):
    part = partition_mesh(mesh, 4, "slab", axis="x")
    np.testing.assert_array_equal(part.element_to_rank, mesh.element_coordinates()[:, 0])
    assert part.factors == (4, 1, 1)


def test_slab_uneven_layers():
    mesh = build_box_mesh(MeshConfig(elements_per_axis=5, poly_order=1))
    part = partition_mesh(mesh, 2, "slab")
    np.testing.assert_array_equal(part.counts(), [75, 50])


def test_block_sub_boxes(mesh):
    part = partition_mesh(mesh, 8, "block")
    coords = mesh.element_coordinates()
    for r in range(8):
        owned = coords[part.elements_of(r)]
        # each rank owns a contiguous 2x2x2 sub-box
        assert np.all(owned.max(axis=0) - owned.min(axis=0) == 1)


def test_explicit_factors(mesh):
    part = partition_mesh(mesh, 4, "block", factors=(1, 1, 4))
    np.testing.assert_array_equal(part.element_to_rank, partition_mesh(mesh, 4, "slab").element_to_rank)


@pytest.mark.parametrize(
    "R, strategy, factors",
    [
        (5, "slab", None),
        (0, "block", None),
        (3, "block", None),
        (4, "block", (2, 1, 1)),
        (3, "block", (3, 1, 1)),
    ],
)
def test_invalid_partition(mesh, R, strategy, factors):
    with pytest.raises(errors.PartitionError):
        partition_mesh(mesh, R, strategy, factors=factors)


def test_unknown_strategy(mesh):
    with pytest.raises(errors.PartitionError):
        partition_mesh(mesh, 2, "metis")  # type: ignore
