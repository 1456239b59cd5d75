import json
import logging
import os

import numpy as np

from halognn import errors
from halognn.mesh.box import Mesh, MeshConfig, build_box_mesh

log = logging.getLogger(__name__)

FORMAT_VERSION = 1


def mesh_to_dict(mesh: Mesh, embed_positions: bool = False) -> dict:
    elements = []
    for e in range(mesh.num_elements):
        element = {"origin": mesh.element_origins[e].tolist(), "global_ids": mesh.global_ids[e].tolist()}
        if embed_positions:
            element["positions"] = mesh.node_positions[e].tolist()
        elements.append(element)
    return {
        "version": FORMAT_VERSION,
        "config": mesh.config.to_dict(),
        "gll_1d": mesh.gll_1d.tolist(),
        "elements": elements,
    }


def save_mesh(mesh: Mesh, path: str | os.PathLike, embed_positions: bool = False) -> None:
    """Dump the mesh as JSON; positions are recomputable from the config and are embedded only on request."""
    with open(path, "w") as f:
        json.dump(mesh_to_dict(mesh, embed_positions), f)
    log.info(f"Wrote mesh with {mesh.num_elements} elements to {path}")


def load_mesh(path: str | os.PathLike) -> Mesh:
    """Rebuild a mesh from its JSON dump, checking the stored global ids against the rebuilt lattice."""
    try:
        with open(path) as f:
            data = json.load(f)
        config = MeshConfig.from_kwargs(**data["config"])
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as e:
        raise errors.MeshConfigError(f"Cannot read mesh file {path}: {e}") from e

    mesh = build_box_mesh(config)
    stored = [element["global_ids"] for element in data.get("elements", [])]
    if stored and not np.array_equal(np.asarray(stored, dtype=np.int64), mesh.global_ids):
        raise errors.MeshConfigError(f"Mesh file {path} has global ids inconsistent with its config")
    return mesh
