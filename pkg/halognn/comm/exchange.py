"""Differentiable collectives over per-rank `Var`s recorded on a shared lockstep tape."""
import typing

import numpy as np

from halognn import errors
from halognn.comm.collectives import ExchangeMode, all_reduce_sum, all_to_all
from halognn.comm.runtime import RankRuntime
from halognn.graph.graph import HaloMap, ReducedGraph
from halognn.nn.tape import Tape, Var


def all_reduce_vars(runtime: RankRuntime, tape: Tape, xs: typing.Sequence[Var]) -> list[Var]:
    """AllReduce-sum whose adjoint is the AllReduce-sum of the output adjoints."""
    totals = all_reduce_sum(runtime, [x.value for x in xs])
    ys = [Var(t, requires_grad=any(x.requires_grad for x in xs)) for t in totals]

    def backward():
        if not any(y.grad is not None for y in ys):
            return
        for x, g in zip(xs, all_reduce_sum(runtime, [y.adjoint() for y in ys])):
            x.accumulate(g)

    tape.record(backward)
    return ys


def _halo_maps(graphs: typing.Sequence[ReducedGraph]) -> list[HaloMap]:
    if any(g.halo is None for g in graphs):
        raise errors.UninitializedError("Halo exchange requires halo structures on every rank")
    return [g.halo for g in graphs]  # type: ignore


def max_buffer_rows(graphs: typing.Sequence[ReducedGraph]) -> int:
    """Largest halo buffer over all (rank, neighbor) pairs; the AllToAll padding size."""
    return max((h.max_buffer_rows() for h in _halo_maps(graphs)), default=0)


def _swap(
    runtime: RankRuntime,
    mode: ExchangeMode,
    halos: list[HaloMap],
    masks: typing.Callable[[HaloMap, int], np.ndarray],
    values: list[np.ndarray],
    padding: int,
) -> list[list[np.ndarray]]:
    """Pack rows of `values` selected by `masks` per destination and exchange them."""
    R, width = len(halos), values[0].shape[1]
    send: list[list[np.ndarray]] = []
    for r, halo in enumerate(halos):
        buffers = []
        for s in range(R):
            rows = values[r][masks(halo, s)] if s != r else np.zeros((0, width))
            if mode == "a2a":
                # uniform buffers: dummy rows for short and non-neighbor buffers
                padded = np.zeros((padding, width))
                padded[: len(rows)] = rows
                rows = padded
            buffers.append(rows)
        send.append(buffers)
    expected = [[len(masks(halos[s], r)) if s != r else 0 for s in range(R)] for r in range(R)]
    return all_to_all(runtime, mode, send, expected_rows=expected)


def halo_exchange(
    runtime: RankRuntime, tape: Tape, mode: ExchangeMode, graphs: typing.Sequence[ReducedGraph], xs: typing.Sequence[Var]
) -> list[Var]:
    """Overwrite every rank's halo rows with the current values of their source coincident rows.

    Backward: halo-row adjoints travel back to their source ranks and accumulate onto the coincident rows.
    """
    if mode == "none":
        raise errors.ExchangeModeError("Halo exchange invoked with exchange mode 'none'")
    halos = _halo_maps(graphs)
    padding = max_buffer_rows(graphs)

    recv = _swap(runtime, mode, halos, HaloMap.send_mask, [x.value for x in xs], padding)
    ys = []
    for r, (x, halo) in enumerate(zip(xs, halos)):
        value = x.value.copy()
        for s, rows in zip(halo.neighbors, halo.recv_masks):
            value[rows] = recv[r][s][: len(rows)]
        ys.append(Var(value, requires_grad=x.requires_grad))

    def backward():
        if not any(y.grad is not None for y in ys):
            return
        adjoints = [y.adjoint() for y in ys]
        back = _swap(runtime, mode, halos, HaloMap.recv_mask, adjoints, padding)
        for r, (x, halo, g) in enumerate(zip(xs, halos, adjoints)):
            g = g.copy()
            for rows in halo.recv_masks:
                g[rows] = 0.0
            for s, rows in zip(halo.neighbors, halo.send_masks):
                np.add.at(g, rows, back[r][s][: len(rows)])
            x.accumulate(g)

    tape.record(backward)
    return ys
