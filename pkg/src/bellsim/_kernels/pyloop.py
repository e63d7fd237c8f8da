"""Vectorized fallback for the protocol loop.

Must stay draw-for-draw identical to the compiled loop: same counter-based
words, same cumulative-inversion comparisons, same last-positive-weight
fallback when rounding pushes a uniform past the final cumulative value.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_A = np.uint64(0xBF58476D1CE4E5B9)
_MIX_B = np.uint64(0x94D049BB133111EB)
_U53 = 2.0**-53

name = "python"


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX_A
    z = (z ^ (z >> np.uint64(27))) * _MIX_B
    return z ^ (z >> np.uint64(31))


def _last_positive(cum: np.ndarray) -> int:
    prev = 0.0
    last = -1
    for j in range(cum.shape[0]):
        if cum[j] > prev:
            last = j
        prev = cum[j]
    return last


def _invert(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(cum, u, side="right")
    if np.any(idx >= cum.shape[0]):
        idx[idx >= cum.shape[0]] = _last_positive(cum)
    return idx


def run_chunk(
    master_seed: int,
    start: int,
    count: int,
    has_state_draw: bool,
    init_cum: np.ndarray,
    lambda_cum: np.ndarray,
    a_cum: np.ndarray,
    b_cum: np.ndarray,
    step_cum: np.ndarray,
    branch_prod: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Runs [start, start+count): returns per-(a,b) counts and product sums."""
    with np.errstate(over="ignore"):
        run_idx = np.arange(start, start + count, dtype=np.uint64)
        seed_h = _mix64(np.uint64(master_seed & 0xFFFFFFFFFFFFFFFF))
        base = _mix64((seed_h + _GOLDEN) ^ _mix64(run_idx))

        counter = 0

        def draw() -> np.ndarray:
            nonlocal counter
            counter += 1
            word = _mix64(base + np.uint64(counter) * _GOLDEN)
            return (word >> np.uint64(11)).astype(np.float64) * _U53

        if has_state_draw:
            s = _invert(init_cum, draw())
        else:
            s = np.zeros(count, dtype=np.intp)
        lam = _invert(lambda_cum, draw())
        a = _invert(a_cum, draw())
        b = _invert(b_cum, draw())
        u_step = draw()

    sel = a * 2 + b
    rows = step_cum[sel, lam, s]
    nbr = rows.shape[1]
    j = np.sum(rows <= u_step[:, None], axis=1)
    over = np.nonzero(j >= nbr)[0]
    for k in over:
        j[k] = _last_positive(rows[k])

    prods = branch_prod[j]
    counts = np.bincount(sel, minlength=4).astype(np.int64)
    sums = np.zeros(4, dtype=np.int64)
    np.add.at(sums, sel, prods)
    return counts.reshape(2, 2), sums.reshape(2, 2)
