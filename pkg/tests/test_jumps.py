import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boussinesq_rh import jumps
from boussinesq_rh.phase import DomainError, OMEGA, saddle_points
from boussinesq_rh.scattering import circle_relation_residual

seeds = st.integers(0, 2**32 - 1)


def all_segments(rng, n=6):
    return {name: jumps.sample_segment(name, n, rng) for name in jumps.SEGMENTS}


def test_zero_r_gives_identity_jumps():
    rng = np.random.default_rng(0)
    for name, k in all_segments(rng).items():
        v = jumps.build_jump(jumps.ZeroSampler(), 5.0, 0.5, k, name)
        assert np.array_equal(v, np.broadcast_to(np.eye(3), v.shape)), name


@given(seeds)
def test_relation_sampler_is_exact(seed):
    s = jumps.random_relation_sampler(np.random.default_rng(seed))
    k = np.exp(1j * np.random.default_rng(seed + 1).uniform(0, 2 * np.pi, 20))
    k = k[np.abs(k**2 - OMEGA) > 0.05]
    assert np.max(circle_relation_residual(s.r1, s.r2, k)) < 1e-12


@given(seeds)
def test_unit_determinant(seed):
    rng = np.random.default_rng(seed)
    s = jumps.random_relation_sampler(rng)
    det = jumps.determinant_residuals(s, 5.0, 0.5, all_segments(rng, 4))
    assert max(det.values()) < 1e-10


@given(seeds, st.floats(0.02, 0.3))
def test_factorizations_exact(seed, tau):
    rng = np.random.default_rng(seed)
    s = jumps.random_relation_sampler(rng)
    x = 5.0
    res = jumps.check_factorizations(s, x, tau * x, jumps.factorization_samples(saddle_points(tau), 20, rng))
    assert set(res) == set(jumps.FACTORIZATIONS)
    assert max(res.values()) < 1e-10, res


def test_symmetries_exact_r():
    rng = np.random.default_rng(3)
    s = jumps.random_relation_sampler(rng)
    k = np.concatenate(list(all_segments(rng, 5).values()))
    sym = jumps.check_symmetries(s, 5.0, 0.5, k)
    assert sym["A"] < 1e-10 and sym["B"] < 1e-10


def test_symmetry_check_discriminates():
    # r2 unrelated to r1: the circle relation fails, and so does the B symmetry on the arcs
    rng = np.random.default_rng(4)
    bad = jumps.FunctionSampler(lambda k: 0.2 * k, lambda k: 0.3 / k**2)
    arcs = np.concatenate([jumps.sample_segment(n, 10, rng) for n in ("7", "8", "9")])
    sym = jumps.check_symmetries(bad, 5.0, 0.5, arcs)
    assert sym["B"] > 1e-3


def test_factorization_check_discriminates():
    # the factorization across arg k1 uses the circle relation; the others are pure algebra
    rng = np.random.default_rng(5)
    bad = jumps.FunctionSampler(lambda k: 0.2 * k, lambda k: 0.3 / k**2)
    res = jumps.check_factorizations(bad, 5.0, 0.5, jumps.factorization_samples(saddle_points(0.1), 10, rng))
    assert res["v5(1)=v6(2)v5(2)v4(2)"] > 1e-3


def test_segment_lookup():
    assert jumps.segment_of(0.5j) == "1''"
    assert jumps.segment_of(-2j) == "1'"
    assert jumps.segment_of(np.exp(2j)) == "7"
    with pytest.raises(DomainError):
        jumps.segment_of(np.exp(1j * np.pi / 2))
    with pytest.raises(DomainError):
        jumps.segment_of(0.5 + 0.5j)


def test_segment_samples_found_again():
    rng = np.random.default_rng(6)
    for name, k in all_segments(rng, 3).items():
        assert all(jumps.segment_of(p) == name for p in k)


def test_pole_proximity_guard():
    k = np.array([OMEGA**2 * np.exp(1e-5j)])  # r2 argument at the pole
    with pytest.raises(jumps.PoleProximityError):
        jumps.build_jump(jumps.random_relation_sampler(np.random.default_rng(0)), 5.0, 0.5, k, "7")
