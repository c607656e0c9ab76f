import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boussinesq_rh.phase import (MAT_A, MAT_B, OMEGA, BranchError, DomainError, lax_exponent, phase,
                                 phase21_dk, phase21_dkk, phase_sign, saddle_points, time_exponent, zmap)

taus = st.floats(0.01, 0.3)


def test_tau_zero_limit():
    ctx = saddle_points(0.0)
    assert ctx.k1 == 1j and ctx.k2 == -1j
    assert np.isinf(ctx.k3) and ctx.k4 == 0


@given(taus)
def test_saddles_are_critical(tau):
    ctx = saddle_points(tau)
    pts = np.array([ctx.k1, ctx.k2, ctx.k3, ctx.k4])
    assert np.max(np.abs(phase21_dk(tau, pts))) < 1e-10
    assert abs(abs(ctx.k1) - 1) < 1e-12
    assert ctx.k3 > 1 and abs(ctx.k3 * ctx.k4 - 1) < 1e-12
    assert np.pi / 2 < ctx.arg_k1 < 2 * np.pi / 3


@given(taus)
def test_saddle_matches_polynomial_roots(tau):
    # k^4 tau - k^3 - k + tau = 0 after clearing denominators of the derivative
    roots = np.roots([tau, -1, 0, -1, tau])
    ctx = saddle_points(tau)
    for p in (ctx.k1, ctx.k2, ctx.k3, ctx.k4):
        assert np.min(np.abs(roots - p)) < 1e-10


@given(taus, st.complex_numbers(min_magnitude=0.3, max_magnitude=3))
def test_phase21_matches_exponent_difference(tau, k):
    direct = (lax_exponent(2, k) - lax_exponent(1, k)) + tau * (time_exponent(2, k) - time_exponent(1, k))
    assert abs(phase(2, 1, tau, k) - direct) < 1e-12 * max(1, abs(direct))


@given(taus, st.complex_numbers(min_magnitude=0.3, max_magnitude=3))
def test_derivatives_by_finite_differences(tau, k):
    h = 1e-5
    fd = (phase(2, 1, tau, k + h) - phase(2, 1, tau, k - h)) / (2 * h)
    assert abs(fd - phase21_dk(tau, k)) < 1e-6 * max(1, abs(fd))
    fd2 = (phase21_dk(tau, k + h) - phase21_dk(tau, k - h)) / (2 * h)
    assert abs(fd2 - phase21_dkk(tau, k)) < 1e-6 * max(1, abs(fd2))


@given(taus, st.floats(0, 2 * np.pi))
def test_phases_imaginary_on_circle(tau, theta):
    k = np.exp(1j * theta)
    for pair in ((2, 1), (3, 1), (3, 2)):
        assert abs(np.real(phase(*pair, tau, k))) < 1e-13
        assert phase_sign(*pair, tau, k) == 0


def test_matrices_are_permutations():
    assert np.allclose(np.linalg.matrix_power(MAT_A, 3), np.eye(3))
    assert np.allclose(MAT_B @ MAT_B, np.eye(3))
    assert abs(OMEGA**3 - 1) < 1e-15


def test_domain_errors():
    with pytest.raises(DomainError):
        saddle_points(0.5)
    with pytest.raises(DomainError):
        saddle_points(-0.1)
    with pytest.raises(DomainError):
        phase(1, 2, 0.1, 1.0)
    with pytest.raises(DomainError):
        phase(2, 1, 0.1, 0.0)


@given(st.floats(0.05, 0.3), st.floats(0, 2 * np.pi), st.floats(1e-3, 0.05))
def test_zmap_reproduces_phase(tau, ang, rad):
    ctx = saddle_points(tau)
    k = ctx.k1 + rad * np.exp(1j * ang)
    x = 50.0
    z, zhat = zmap(x, ctx, k)
    lhs = x * (phase(2, 1, tau, k) - phase(2, 1, tau, ctx.k1))
    assert abs(lhs - (-1j * z**2 / 2)) < 1e-9 * max(1, abs(lhs))


def test_zmap_branch_error_far_away():
    ctx = saddle_points(0.2)
    ring = ctx.k1 + 3 * np.exp(2j * np.pi * np.arange(64) / 64)
    with pytest.raises(BranchError):
        zmap(1.0, ctx, ring)
