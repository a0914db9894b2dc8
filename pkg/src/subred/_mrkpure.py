"""Pure-Python rejection-kernel inner loops.

Reference implementation and import-time fallback for the compiled core in
``subred._mrkcore``.  Draws are taken one scalar at a time from the caller's
Generator in the same order as the compiled loops, so both backends yield
bit-identical samples from the same seed.
"""

import math

import numpy as np


def mrk_bernoulli_batch(rng, bits, llr_one, llr_zero, null_prob,
                        p_src, q_src, c_lo, c_hi, n_it):
    nb, ell = null_prob.shape
    out = np.zeros((nb, ell), dtype=np.uint8)
    buf = np.zeros(ell, dtype=np.uint8)
    qp = q_src / p_src
    floor1 = q_src * (1.0 - p_src) / (p_src * (1.0 - q_src))
    for b in range(nb):
        bit = bits[b]
        for _ in range(n_it):
            lsum = 0.0
            for i in range(ell):
                z = 1 if rng.random() < null_prob[b, i] else 0
                buf[i] = z
                lsum += llr_one[b, i] if z else llr_zero[b, i]
            if not (c_lo <= lsum <= c_hi):
                continue
            if bit:
                a = qp * math.exp(lsum) - floor1
            else:
                a = 1.0 - qp * math.exp(lsum)
            if a < -1e-9 or a > 1.0 + 1e-9:
                raise FloatingPointError(
                    "windowed acceptance probability escaped [0, 1]")
            if rng.random() < a:
                out[b] = buf
                break
    return out


def mrk_gaussian_batch(rng, bits, mu, p_src, q_src, c_lo, c_hi, n_it):
    nb, ell = mu.shape
    out = np.zeros((nb, ell), dtype=np.float64)
    buf = np.zeros(ell, dtype=np.float64)
    qp = q_src / p_src
    floor1 = q_src * (1.0 - p_src) / (p_src * (1.0 - q_src))
    for b in range(nb):
        bit = bits[b]
        for _ in range(n_it):
            lsum = 0.0
            for i in range(ell):
                z = rng.standard_normal()
                buf[i] = z
                m = mu[b, i]
                lsum += m * z - 0.5 * m * m
            if not (c_lo <= lsum <= c_hi):
                continue
            if bit:
                a = qp * math.exp(lsum) - floor1
            else:
                a = 1.0 - qp * math.exp(lsum)
            if a < -1e-9 or a > 1.0 + 1e-9:
                raise FloatingPointError(
                    "windowed acceptance probability escaped [0, 1]")
            if rng.random() < a:
                out[b] = buf
                break
    return out
