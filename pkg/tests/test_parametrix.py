import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from boussinesq_rh.parametrix import GlobalParametrix, local_scalars, nu_of
from boussinesq_rh.phase import saddle_points
from boussinesq_rh.scattering import ARC_START, SpectralData, arc_grid


@pytest.fixture(scope="module")
def glob(bump_spec):
    return GlobalParametrix(bump_spec, saddle_points(0.2))


def quad_delta_log(spec, ctx, k):
    """-(1/2 pi i) int G(s) ds / (s - k) along s = e^{i theta}, theta from pi/2 to arg k1."""

    def part(fn):
        return quad(lambda th: fn(spec.weight_at(th) * np.exp(1j * th) / (np.exp(1j * th) - k)), ARC_START, ctx.arg_k1,
                    epsabs=1e-14, epsrel=1e-12, limit=200)[0]

    return -(part(np.real) + 1j * part(np.imag)) / (2 * math.pi)


@pytest.mark.parametrize("k", [0.5 + 0.5j, 2j, -1.3 + 0.2j, 0.9 * np.exp(1.8j), 1.1 * np.exp(1.8j)])
def test_delta_against_adaptive_quadrature(bump_spec, glob, k):
    assert abs(glob.delta_log(k) - quad_delta_log(bump_spec, glob.ctx, k)) < 1e-10


def test_zero_spectral_data_is_trivial():
    th = arc_grid(64)
    spec = SpectralData(th, np.zeros(64), np.zeros(64))
    g = GlobalParametrix(spec, saddle_points(0.2))
    assert g.delta(0.3 + 0.1j) == 1 and g.chi(2.0) == 0
    b = local_scalars(spec, saddle_points(0.2), 10.0, g)
    assert b.nu == 0 and abs(b.d0 - 1) < 1e-15


def test_delta_tends_to_one(glob):
    assert abs(glob.delta(1e6 * np.exp(0.4j)) - 1) < 1e-6


@pytest.mark.parametrize("frac", [0.2, 0.5, 0.8])
def test_jump_ratio(bump_spec, glob, frac):
    theta = ARC_START + frac * (glob.ctx.arg_k1 - ARC_START)
    h0 = float(np.min(np.diff(bump_spec.theta)))
    assert abs(glob.boundary_ratio(theta, h0=h0) - np.exp(bump_spec.weight_at(theta))) < 1e-6


def test_modulus_constant_off_the_arc(glob):
    th = np.linspace(glob.ctx.arg_k1 + 0.05, 2 * np.pi + ARC_START - 0.05, 32)
    mod = np.array([abs(glob.delta(np.exp(1j * t))) for t in th])
    assert np.std(mod) < 1e-8


def test_Delta33_diagonal_and_decay(glob):
    D = glob.Delta(3.0 * np.exp(0.7j))
    assert np.count_nonzero(D - np.diag(np.diag(D))) == 0
    assert abs(glob.delta33(1e5 * np.exp(0.3j)) - 1) < 1e-3


@given(st.floats(0.02, 0.3))
def test_nu_nonpositive(tau):
    from boussinesq_rh.scattering import bump_profile, synthetic_spectral

    spec = synthetic_spectral(bump_profile(), arc_grid(128))
    assert nu_of(spec, saddle_points(tau)) <= 0


@pytest.mark.parametrize("x", [10.0, 100.0, 1000.0])
def test_d0_modulus(bump_spec, glob, x):
    b = local_scalars(bump_spec, glob.ctx, x, glob)
    assert abs(abs(b.d0) - math.exp(2 * math.pi * b.nu)) < 1e-8


def test_local_scalars_reject_small_x(bump_spec, glob):
    with pytest.raises(ValueError):
        local_scalars(bump_spec, glob.ctx, 1.0, glob)


def test_delta_rejects_points_on_arc(glob):
    with pytest.raises(ValueError):
        glob.delta(np.exp(1j * 1.7))
