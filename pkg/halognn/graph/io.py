"""Per-rank graph dumps.

Binary layout (little-endian): header `<4sHiiiiii` = (b"HGNG", version, rank, num_local, num_halo, N_e, F_x, F_e),
then global_ids i8[n], positions f8[n, 3], node features f8[n, F_x], edge features f8[N_e, F_e],
adjacency i8[N_e, 2], node_degree i8[num_local], edge_degree i8[N_e], and the halo map as
i4 neighbor count followed by (i4 rank, i4 count, i8 send[count], i8 recv[count]) per neighbor.
F_x = 0 / F_e = 0 mark absent features.
"""
import json
import logging
import os
import pathlib
import struct
import typing
from dataclasses import replace

import numpy as np

from halognn import errors
from halognn.graph.graph import HaloMap, ReducedGraph
from halognn.graph.halo import compute_sync_table

log = logging.getLogger(__name__)

GraphFormat = typing.Literal["json", "binary"]
_MAGIC = b"HGNG"
_VERSION = 1
_HEADER = struct.Struct("<4sHiiiiii")
_SUFFIX: dict[GraphFormat, str] = {"json": ".json", "binary": ".bin"}


def _width(array: np.ndarray | None) -> int:
    return 0 if array is None else array.shape[1]


def _encode_binary(g: ReducedGraph) -> bytes:
    n = g.num_nodes
    chunks = [
        _HEADER.pack(_MAGIC, _VERSION, g.rank, g.num_local, g.num_halo, g.num_edges, _width(g.node_features), _width(g.edge_features)),
        g.global_ids.astype("<i8").tobytes(),
        g.positions.reshape(n, 3).astype("<f8").tobytes(),
    ]
    for features in (g.node_features, g.edge_features):
        if features is not None:
            chunks.append(features.astype("<f8").tobytes())
    chunks += [
        g.adjacency.astype("<i8").tobytes(),
        g.node_degree.astype("<i8").tobytes(),
        g.edge_degree.astype("<i8").tobytes(),
    ]
    halo = g.halo or HaloMap(rank=g.rank, neighbors=(), send_masks=(), recv_masks=())
    chunks.append(struct.pack("<i", halo.num_neighbors))
    for s, send, recv in zip(halo.neighbors, halo.send_masks, halo.recv_masks):
        chunks += [struct.pack("<ii", s, len(send)), send.astype("<i8").tobytes(), recv.astype("<i8").tobytes()]
    return b"".join(chunks)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def unpack(self, fmt: str) -> tuple:
        values = struct.unpack_from(fmt, self.data, self.offset)
        self.offset += struct.calcsize(fmt)
        return values

    def array(self, dtype: str, count: int, shape: tuple[int, ...] | None = None) -> np.ndarray:
        if count == 0:
            return np.zeros(shape or 0, dtype=dtype[1:])
        array = np.frombuffer(self.data, dtype=dtype, count=count, offset=self.offset).astype(dtype[1:])
        self.offset += array.nbytes
        return array.reshape(shape) if shape is not None else array


def _decode_binary(data: bytes) -> ReducedGraph:
    reader = _Reader(data)
    magic, version, rank, num_local, num_halo, num_edges, f_x, f_e = reader.unpack(_HEADER.format)
    if magic != _MAGIC or version != _VERSION:
        raise errors.IntegrityError(f"Not a graph dump (magic {magic!r}, version {version})")
    n = num_local + num_halo
    global_ids = reader.array("<i8", n)
    positions = reader.array("<f8", 3 * n, (n, 3))
    node_features = reader.array("<f8", n * f_x, (n, f_x)) if f_x else None
    edge_features = reader.array("<f8", num_edges * f_e, (num_edges, f_e)) if f_e else None
    adjacency = reader.array("<i8", 2 * num_edges, (num_edges, 2))
    node_degree = reader.array("<i8", num_local)
    edge_degree = reader.array("<i8", num_edges)
    (num_neighbors,) = reader.unpack("<i")
    neighbors, send_masks, recv_masks = [], [], []
    for _ in range(num_neighbors):
        s, count = reader.unpack("<ii")
        neighbors.append(s)
        send_masks.append(reader.array("<i8", count))
        recv_masks.append(reader.array("<i8", count))
    return ReducedGraph(
        rank=rank,
        num_local=num_local,
        num_halo=num_halo,
        positions=positions,
        global_ids=global_ids,
        adjacency=adjacency,
        node_degree=node_degree,
        edge_degree=edge_degree,
        node_features=node_features,
        edge_features=edge_features,
        halo=HaloMap(rank, tuple(neighbors), tuple(send_masks), tuple(recv_masks)),
    )


def _encode_json(g: ReducedGraph) -> bytes:
    halo = g.halo or HaloMap(rank=g.rank, neighbors=(), send_masks=(), recv_masks=())
    data = {
        "rank": g.rank,
        "num_local": g.num_local,
        "num_halo": g.num_halo,
        "global_ids": g.global_ids.tolist(),
        "positions": g.positions.tolist(),
        "node_features": None if g.node_features is None else g.node_features.tolist(),
        "edge_features": None if g.edge_features is None else g.edge_features.tolist(),
        "adjacency": g.adjacency.tolist(),
        "node_degree": g.node_degree.tolist(),
        "edge_degree": g.edge_degree.tolist(),
        "halo": {
            "neighbors": list(halo.neighbors),
            "send_masks": [m.tolist() for m in halo.send_masks],
            "recv_masks": [m.tolist() for m in halo.recv_masks],
        },
    }
    return json.dumps(data).encode()


def _decode_json(data: bytes) -> ReducedGraph:
    d = json.loads(data)

    def optional(key: str) -> np.ndarray | None:
        return None if d[key] is None else np.asarray(d[key], dtype=np.float64)

    halo = d["halo"]
    return ReducedGraph(
        rank=d["rank"],
        num_local=d["num_local"],
        num_halo=d["num_halo"],
        positions=np.asarray(d["positions"], dtype=np.float64).reshape(-1, 3),
        global_ids=np.asarray(d["global_ids"], dtype=np.int64),
        adjacency=np.asarray(d["adjacency"], dtype=np.int64).reshape(-1, 2),
        node_degree=np.asarray(d["node_degree"], dtype=np.int64),
        edge_degree=np.asarray(d["edge_degree"], dtype=np.int64),
        node_features=optional("node_features"),
        edge_features=optional("edge_features"),
        halo=HaloMap(
            rank=d["rank"],
            neighbors=tuple(halo["neighbors"]),
            send_masks=tuple(np.asarray(m, dtype=np.int64) for m in halo["send_masks"]),
            recv_masks=tuple(np.asarray(m, dtype=np.int64) for m in halo["recv_masks"]),
        ),
    )


_CODECS: dict[GraphFormat, tuple[typing.Callable[[ReducedGraph], bytes], typing.Callable[[bytes], ReducedGraph]]] = {
    "json": (_encode_json, _decode_json),
    "binary": (_encode_binary, _decode_binary),
}


def save_graphs(
    graphs: typing.Sequence[ReducedGraph], directory: str | os.PathLike, fmt: GraphFormat = "binary"
) -> list[pathlib.Path]:
    """Write one file per rank (`rank_00000.bin` / `.json`) into directory."""
    directory = pathlib.Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    encode, _ = _CODECS[fmt]
    paths = []
    for g in graphs:
        path = directory / f"rank_{g.rank:05d}{_SUFFIX[fmt]}"
        path.write_bytes(encode(g))
        paths.append(path)
    log.info(f"Wrote {len(paths)} rank graphs to {directory}")
    return paths


def load_graph(path: str | os.PathLike) -> ReducedGraph:
    path = pathlib.Path(path)
    fmt: GraphFormat = "json" if path.suffix == ".json" else "binary"
    _, decode = _CODECS[fmt]
    try:
        graph = decode(path.read_bytes())
    except (OSError, ValueError, KeyError, struct.error) as e:
        raise errors.IntegrityError(f"Cannot read graph file {path}: {e}") from e
    return replace(graph, sync_table=compute_sync_table(graph))


def load_graphs(directory: str | os.PathLike) -> list[ReducedGraph]:
    """Load every rank file of a dump directory, ordered by rank."""
    paths = sorted(p for p in pathlib.Path(directory).iterdir() if p.name.startswith("rank_"))
    graphs = sorted((load_graph(p) for p in paths), key=lambda g: g.rank)
    if [g.rank for g in graphs] != list(range(len(graphs))):
        raise errors.IntegrityError(f"Graph dump {directory} does not hold ranks 0..{len(graphs) - 1}")
    return graphs
