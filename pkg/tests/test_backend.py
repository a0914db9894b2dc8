"""Compiled and pure rejection-kernel loops must be interchangeable."""

import math

import numpy as np
import pytest

from subred import _mrkpure, backend

compiled = pytest.importorskip("subred._mrkcore")


def _gaussian_case(seed, p_src, q_src, n_it, ell=3, blocks=7):
    rng_c = np.random.default_rng(seed)
    rng_p = np.random.default_rng(seed)
    bits = (np.arange(blocks) % 2).astype(np.uint8)
    mu = np.linspace(0.1, 0.6, blocks * ell).reshape(blocks, ell)
    c_hi = math.log(p_src / q_src)
    c_lo = -math.inf if p_src == 1.0 else math.log((1 - p_src) / (1 - q_src))
    a = compiled.mrk_gaussian_batch(rng_c, bits, mu, p_src, q_src,
                                    c_lo, c_hi, n_it)
    b = _mrkpure.mrk_gaussian_batch(rng_p, bits, mu, p_src, q_src,
                                    c_lo, c_hi, n_it)
    return a, b, rng_c, rng_p


def _bernoulli_case(seed, p_src, q_src, n_it, ell=2, blocks=9):
    rng_c = np.random.default_rng(seed)
    rng_p = np.random.default_rng(seed)
    bits = (np.arange(blocks) % 2).astype(np.uint8)
    palt = np.full((blocks, ell), 0.4)
    pnull = np.full((blocks, ell), 0.2)
    lp1 = np.log(palt / pnull)
    lp0 = np.log((1 - palt) / (1 - pnull))
    c_hi = math.log(p_src / q_src)
    c_lo = -math.inf if p_src == 1.0 else math.log((1 - p_src) / (1 - q_src))
    a = compiled.mrk_bernoulli_batch(rng_c, bits, lp1, lp0, pnull,
                                     p_src, q_src, c_lo, c_hi, n_it)
    b = _mrkpure.mrk_bernoulli_batch(rng_p, bits, lp1, lp0, pnull,
                                     p_src, q_src, c_lo, c_hi, n_it)
    return a, b, rng_c, rng_p


@pytest.mark.parametrize("seed", [0, 1, 12345])
@pytest.mark.parametrize("p_src,q_src,n_it", [
    (0.9, 0.2, 40), (1.0, 0.5, 25), (0.6, 0.55, 0), (0.5, 0.25, 100)])
def test_gaussian_bit_identical(seed, p_src, q_src, n_it):
    a, b, rng_c, rng_p = _gaussian_case(seed, p_src, q_src, n_it)
    assert np.array_equal(a, b)
    # the two backends consumed exactly the same number of draws
    assert rng_c.random() == rng_p.random()


@pytest.mark.parametrize("seed", [0, 7])
@pytest.mark.parametrize("p_src,q_src,n_it", [
    (0.9, 0.2, 40), (1.0, 0.25, 60), (0.5, 0.4, 3)])
def test_bernoulli_bit_identical(seed, p_src, q_src, n_it):
    a, b, rng_c, rng_p = _bernoulli_case(seed, p_src, q_src, n_it)
    assert np.array_equal(a, b)
    assert rng_c.random() == rng_p.random()


def test_backend_reports_compiled():
    assert backend.have_compiled()
    assert backend.backend_name() in ("compiled", "pure")


def test_zero_iterations_returns_fallback():
    a, b, _, _ = _gaussian_case(3, 0.9, 0.2, 0)
    assert np.all(a == 0.0) and np.all(b == 0.0)
