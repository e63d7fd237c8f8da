# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled protocol loop; must match pyloop draw for draw."""

import numpy as np

from libc.stdint cimport int64_t, uint64_t

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15
cdef uint64_t MIX_A = 0xBF58476D1CE4E5B9
cdef uint64_t MIX_B = 0x94D049BB133111EB
cdef double U53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * MIX_A
    z = (z ^ (z >> 27)) * MIX_B
    return z ^ (z >> 31)


cdef inline double u01(uint64_t word) nogil:
    return <double>(word >> 11) * U53


cdef inline Py_ssize_t last_positive(const double* cum, Py_ssize_t n) nogil:
    cdef double prev = 0.0
    cdef Py_ssize_t last = -1
    cdef Py_ssize_t j
    for j in range(n):
        if cum[j] > prev:
            last = j
        prev = cum[j]
    return last


cdef inline Py_ssize_t invert(const double* cum, Py_ssize_t n, double u) nogil:
    cdef Py_ssize_t j
    for j in range(n):
        if u < cum[j]:
            return j
    return last_positive(cum, n)


name = "cython"


def run_chunk(
    master_seed,
    start,
    count,
    has_state_draw,
    const double[::1] init_cum,
    const double[::1] lambda_cum,
    const double[::1] a_cum,
    const double[::1] b_cum,
    const double[:, :, :, ::1] step_cum,
    const int64_t[::1] branch_prod,
):
    """Runs [start, start+count): returns per-(a,b) counts and product sums."""
    cdef uint64_t seed = <uint64_t>(master_seed & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t first = <uint64_t>start
    cdef Py_ssize_t n_runs = <Py_ssize_t>count
    cdef bint draw_state = bool(has_state_draw)

    counts_arr = np.zeros(4, dtype=np.int64)
    sums_arr = np.zeros(4, dtype=np.int64)
    cdef int64_t[::1] counts = counts_arr
    cdef int64_t[::1] sums = sums_arr

    cdef Py_ssize_t ns = init_cum.shape[0]
    cdef Py_ssize_t nl = lambda_cum.shape[0]
    cdef Py_ssize_t nbr = step_cum.shape[3]
    cdef uint64_t seed_h = mix64(seed)

    cdef Py_ssize_t r, s, lam, a, b, sel, j
    cdef uint64_t base, counter
    cdef double u

    with nogil:
        for r in range(n_runs):
            base = mix64((seed_h + GOLDEN) ^ mix64(first + <uint64_t>r))
            counter = 0
            if draw_state:
                counter += 1
                u = u01(mix64(base + counter * GOLDEN))
                s = invert(&init_cum[0], ns, u)
            else:
                s = 0
            counter += 1
            u = u01(mix64(base + counter * GOLDEN))
            lam = invert(&lambda_cum[0], nl, u)
            counter += 1
            u = u01(mix64(base + counter * GOLDEN))
            a = invert(&a_cum[0], 2, u)
            counter += 1
            u = u01(mix64(base + counter * GOLDEN))
            b = invert(&b_cum[0], 2, u)
            counter += 1
            u = u01(mix64(base + counter * GOLDEN))
            sel = a * 2 + b
            j = invert(&step_cum[sel, lam, s, 0], nbr, u)
            counts[sel] += 1
            sums[sel] += branch_prod[j]

    return counts_arr.reshape(2, 2), sums_arr.reshape(2, 2)
