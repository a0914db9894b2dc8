#cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled rejection-kernel inner loops.

Consumes randomness through the C functions backing numpy.random.Generator,
in exactly the per-draw order used by subred._mrkpure, so both backends
produce bit-identical output streams from the same seeded Generator.
"""

from libc.math cimport exp, INFINITY

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid

import numpy as np

from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    random_standard_normal,
    random_standard_uniform,
)

cdef const char *CAPSULE_NAME = "BitGenerator"


cdef bitgen_t *_bitgen_from(object rng) except NULL:
    capsule = rng.bit_generator.capsule
    if not PyCapsule_IsValid(capsule, CAPSULE_NAME):
        raise ValueError("rng does not expose a numpy BitGenerator capsule")
    return <bitgen_t *> PyCapsule_GetPointer(capsule, CAPSULE_NAME)


def mrk_bernoulli_batch(object rng,
                        const unsigned char[::1] bits,
                        const double[:, ::1] llr_one,
                        const double[:, ::1] llr_zero,
                        const double[:, ::1] null_prob,
                        double p_src, double q_src,
                        double c_lo, double c_hi, int n_it):
    """Run one rejection kernel per block; Bernoulli targets.

    bits[b] is the source bit for block b; llr_one/llr_zero/null_prob hold the
    per-coordinate target parameters.  Returns a (blocks, ell) uint8 array.
    """
    cdef Py_ssize_t nb = bits.shape[0]
    cdef Py_ssize_t ell = null_prob.shape[1]
    out_arr = np.zeros((nb, ell), dtype=np.uint8)
    buf_arr = np.zeros(ell, dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    cdef unsigned char[::1] buf = buf_arr
    cdef bitgen_t *bg = _bitgen_from(rng)
    cdef double qp = q_src / p_src
    cdef double floor1 = q_src * (1.0 - p_src) / (p_src * (1.0 - q_src))
    cdef Py_ssize_t b, i
    cdef int it
    cdef int bad = 0
    cdef unsigned char z, bit
    cdef double lsum, a, u

    with rng.bit_generator.lock:
        for b in range(nb):
            bit = bits[b]
            for it in range(n_it):
                lsum = 0.0
                for i in range(ell):
                    u = random_standard_uniform(bg)
                    z = 1 if u < null_prob[b, i] else 0
                    buf[i] = z
                    lsum += llr_one[b, i] if z else llr_zero[b, i]
                if not (c_lo <= lsum <= c_hi):
                    continue
                if bit:
                    a = qp * exp(lsum) - floor1
                else:
                    a = 1.0 - qp * exp(lsum)
                if a < -1e-9 or a > 1.0 + 1e-9:
                    bad = 1
                    break
                if random_standard_uniform(bg) < a:
                    for i in range(ell):
                        out[b, i] = buf[i]
                    break
            if bad:
                break
    if bad:
        raise FloatingPointError(
            "windowed acceptance probability escaped [0, 1]")
    return out_arr


def mrk_gaussian_batch(object rng,
                       const unsigned char[::1] bits,
                       const double[:, ::1] mu,
                       double p_src, double q_src,
                       double c_lo, double c_hi, int n_it):
    """Run one rejection kernel per block; unit-variance Gaussian targets.

    Target i of block b shifts the null N(0, 1) by mu[b, i].  Returns a
    (blocks, ell) float array; unset blocks stay at the all-zero fallback.
    """
    cdef Py_ssize_t nb = bits.shape[0]
    cdef Py_ssize_t ell = mu.shape[1]
    out_arr = np.zeros((nb, ell), dtype=np.float64)
    buf_arr = np.zeros(ell, dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] buf = buf_arr
    cdef bitgen_t *bg = _bitgen_from(rng)
    cdef double qp = q_src / p_src
    cdef double floor1 = q_src * (1.0 - p_src) / (p_src * (1.0 - q_src))
    cdef Py_ssize_t b, i
    cdef int it
    cdef int bad = 0
    cdef unsigned char bit
    cdef double lsum, a, z, m

    with rng.bit_generator.lock:
        for b in range(nb):
            bit = bits[b]
            for it in range(n_it):
                lsum = 0.0
                for i in range(ell):
                    z = random_standard_normal(bg)
                    buf[i] = z
                    m = mu[b, i]
                    lsum += m * z - 0.5 * m * m
                if not (c_lo <= lsum <= c_hi):
                    continue
                if bit:
                    a = qp * exp(lsum) - floor1
                else:
                    a = 1.0 - qp * exp(lsum)
                if a < -1e-9 or a > 1.0 + 1e-9:
                    bad = 1
                    break
                if random_standard_uniform(bg) < a:
                    for i in range(ell):
                        out[b, i] = buf[i]
                    break
            if bad:
                break
    if bad:
        raise FloatingPointError(
            "windowed acceptance probability escaped [0, 1]")
    return out_arr
