import typing

import numpy as np

from halognn.nn.params import ModelParams


def gradient_check(
    fn: typing.Callable[[ModelParams], float],
    params: ModelParams,
    grads: ModelParams,
    k: int = 10,
    step: float = 1e-5,
    seed: int = 0,
    floor: float = 1e-3,
) -> float:
    """Max relative error of k random gradient entries against central finite differences.

    Errors are relative to max(|fd|, |grad|, floor); below `floor` the comparison is effectively absolute.
    """
    rng = np.random.default_rng(seed)
    names = params.names
    sizes = np.array([params[n].size for n in names])
    picks = rng.choice(sizes.sum(), size=min(k, int(sizes.sum())), replace=False)
    offsets = np.concatenate([[0], np.cumsum(sizes)])

    worst = 0.0
    for flat in np.sort(picks):
        i = int(np.searchsorted(offsets, flat, side="right")) - 1
        name, index = names[i], np.unravel_index(flat - offsets[i], params[names[i]].shape)
        plus, minus = params.copy(), params.copy()
        plus[name][index] += step
        minus[name][index] -= step
        fd = (fn(plus) - fn(minus)) / (2 * step)
        g = float(grads[name][index])
        worst = max(worst, abs(fd - g) / max(abs(fd), abs(g), floor))
    return worst
