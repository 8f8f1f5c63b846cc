# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loop for the eigenstate-jump Monte Carlo sampler.

Draw-order contract (shared with the numpy fallback `_chain_py`): every
step of every run consumes exactly three counter-based uniforms, with draw
index 0 for the source sample, 1 for the target sample and 2 for the
accept test, whether or not a draw is logically needed. Any implementation
honoring this contract visits the identical random stream and therefore
produces identical chains.
"""

from libc.stdint cimport int64_t, uint64_t

cdef double _INV53 = 1.0 / 9007199254740992.0
cdef uint64_t _GOLDEN = 0x9E3779B97F4A7C15UL
cdef uint64_t _MULT1 = 0xBF58476D1CE4E5B9UL
cdef uint64_t _MULT2 = 0x94D049BB133111EBUL


cdef inline uint64_t _mix(uint64_t x) nogil:
    x = (x ^ (x >> 30)) * _MULT1
    x = (x ^ (x >> 27)) * _MULT2
    return x ^ (x >> 31)


cdef inline double _uniform(uint64_t seed, uint64_t run, uint64_t step, uint64_t draw) nogil:
    cdef uint64_t h = _mix(seed + _GOLDEN)
    h = _mix(h + _GOLDEN * (run + 1))
    h = _mix(h + _GOLDEN * (step + 1))
    h = _mix(h + _GOLDEN * (draw + 1))
    return <double> (h >> 11) * _INV53


cdef inline Py_ssize_t _categorical(const double[::1] cum, double u) nogil:
    # first k with u < cum[k]; clamp to the end, then walk zero-mass ties back
    cdef Py_ssize_t d = cum.shape[0]
    cdef Py_ssize_t k = 0
    while k < d - 1 and u >= cum[k]:
        k += 1
    while k > 0 and cum[k] == cum[k - 1]:
        k -= 1
    return k


def sample_chain(const double[::1] cum_init,
                 const double[:, ::1] accept_prob,
                 int64_t run_start,
                 int64_t run_count,
                 int64_t steps,
                 uint64_t seed,
                 int64_t[:, ::1] counts,
                 int64_t[:, ::1] reject_chain_counts):
    """Advance `run_count` independent chains for `steps` steps.

    cum_init is the cumulative initial source distribution (the diagonal of
    the start state); accept_prob[i, j] the precomputed acceptance
    probability of the jump i -> j. Accumulates, per step, the occupation
    count of each eigenstate into `counts` and, into `reject_chain_counts`,
    the number of runs that have rejected every step so far, bucketed by
    their first sampled source.
    """
    cdef Py_ssize_t d = cum_init.shape[0]
    cdef int64_t run, step
    cdef Py_ssize_t i, j, jx, x, first_source
    cdef double u
    cdef bint alive

    with nogil:
        for run in range(run_start, run_start + run_count):
            x = 0
            first_source = 0
            alive = False
            for step in range(1, steps + 1):
                u = _uniform(seed, run, step, 0)
                if step == 1:
                    i = _categorical(cum_init, u)
                else:
                    i = x  # point-mass diagonal; draw consumed regardless
                u = _uniform(seed, run, step, 1)
                jx = <Py_ssize_t> (u * (d - 1))
                if jx > d - 2:
                    jx = d - 2
                j = jx + 1 if jx >= i else jx
                u = _uniform(seed, run, step, 2)
                if u < accept_prob[i, j]:
                    x = j
                    alive = False
                else:
                    x = i
                    if step == 1:
                        alive = True
                        first_source = i
                counts[step - 1, x] += 1
                if alive:
                    reject_chain_counts[step - 1, first_source] += 1
