import json

import numpy as np
import pytest

from halognn import errors
from halognn.mesh import MeshConfig, build_box_mesh, load_mesh, save_mesh


@pytest.fixture
def mesh():
    return build_box_mesh(MeshConfig(2, 2, domain_max=(2.0, 1.0, 1.0)))


def test_save_and_load(tmp_path, mesh):
    path = tmp_path / "mesh.json"
    save_mesh(mesh, path)
    loaded = load_mesh(path)
    assert loaded.config == mesh.config
    np.testing.assert_array_equal(loaded.global_ids, mesh.global_ids)
    np.testing.assert_array_equal(loaded.node_positions, mesh.node_positions)


def test_embedded_positions(tmp_path, mesh):
    path = tmp_path / "mesh.json"
    save_mesh(mesh, path, embed_positions=True)
    data = json.loads(path.read_text())
    assert data["elements"][3]["positions"] == mesh.node_positions[3].tolist()


def test_inconsistent_ids(tmp_path, mesh):
    path = tmp_path / "mesh.json"
    save_mesh(mesh, path)
    data = json.loads(path.read_text())
    data["elements"][0]["global_ids"][0] = 1
    path.write_text(json.dumps(data))
    with pytest.raises(errors.MeshConfigError):
        load_mesh(path)


def test_unreadable_file(tmp_path):
    path = tmp_path / "mesh.json"
    path.write_text("{not json")
    with pytest.raises(errors.MeshConfigError):
        load_mesh(path)
    with pytest.raises(errors.MeshConfigError):
        load_mesh(tmp_path / "missing.json")
