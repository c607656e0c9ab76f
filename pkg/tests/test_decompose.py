import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boussinesq_rh.decompose import (RAY_ANCHOR, ArcDecomposer, RayDecomposer, analytic_bound_ratio,
                                     hermite_polynomial, hermite_rational, ray_fixture, remainder_slope,
                                     taylor_coefficients, v1_samples)
from boussinesq_rh.phase import saddle_points


@pytest.fixture(scope="module")
def ray():
    return RayDecomposer(ray_fixture(), N=2)


@given(st.complex_numbers(max_magnitude=2))
def test_taylor_coefficients_of_exp(k0):
    c = taylor_coefficients(np.exp, k0, 10)
    exact = np.exp(k0) / np.array([math.factorial(n) for n in range(10)])
    assert np.max(np.abs(c - exact)) < 1e-12 * abs(np.exp(k0))


def test_hermite_rational_contact_order():
    r = ray_fixture()
    order = 8
    f0 = hermite_rational(r, order)
    errs = [abs(f0(RAY_ANCHOR + h) - r(RAY_ANCHOR + h)) for h in (0.1, 0.05)]
    assert math.log2(errs[0] / errs[1]) > order - 0.5
    decay = math.log2(abs(f0(1e4j)) / abs(f0(2e4j)))
    assert abs(decay - (order + 1)) < 0.01  # f0 = O(k^{-order-1})


def test_hermite_polynomial_matches_both_ends():
    r = lambda k: np.exp(np.asarray(k) ** 2)
    ka, kb = np.exp(1.7j), np.exp(2.0j)
    f0 = hermite_polynomial(r, 4, ka, kb)
    for kk in (ka, kb):
        e = [abs(f0(kk + h) - r(kk + h)) for h in (0.02, 0.01)]
        assert math.log2(e[0] / e[1]) > 3.5


def test_ray_reconstruction(ray):
    r = ray_fixture()
    d = ray.split(16)
    idx = np.linspace(0, d.k.size - 1, 40).astype(int)
    k = d.k[idx]
    assert np.max(np.abs(d.analytic(k) + d.remainder[idx] - r(k))) < 1e-10


def test_ray_remainder_decays(ray):
    # at least as fast as x^{-(N + 1/2)}
    slope, norms = remainder_slope(ray, (4, 16, 64, 256))
    assert slope < -2.5 + 0.3
    assert np.all(np.diff(norms) < 0)
    assert ray.sobolev_ok and ray.M >= 3


def test_analytic_part_stays_bounded(ray):
    ratios = analytic_bound_ratio(ray, (4, 64), v1_samples(20, np.random.default_rng(0)), tau=0.1)
    assert np.all(np.isfinite(ratios)) and ratios.max() / ratios[0] < 10


def test_arc_reconstruction():
    ctx = saddle_points(0.2)
    r = lambda k: 0.3 * np.exp(np.asarray(k, dtype=complex))
    dec = ArcDecomposer(r, ctx.arg_k1, 2 * np.pi / 3, tau=0.2, N=2, h=2e-4)
    d = dec.split(32)
    idx = np.linspace(0, d.k.size - 1, 30).astype(int)
    assert np.max(np.abs(d.analytic(d.k[idx]) + d.remainder[idx] - r(d.k[idx]))) < 1e-8


def test_parameter_checks():
    with pytest.raises(ValueError):
        RayDecomposer(ray_fixture(), N=2, M=2)
    with pytest.raises(ValueError):
        ArcDecomposer(ray_fixture(), np.pi / 3, 2 * np.pi / 3, tau=0.0)  # phase turns at pi/2
