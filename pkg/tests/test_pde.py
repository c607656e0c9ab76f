import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boussinesq_rh.asymptotics import SectorAsymptotics
from boussinesq_rh.pde import (CAVEAT, BlowupError, FilteredBoussinesq, PdeState, PeriodicGrid, compare_asymptotic,
                               evolve, evolve_fields, initial_fields, linear_frequency, mode_amplitude,
                               smooth_window, write_snapshots)
from boussinesq_rh.scattering import arc_grid, computed_spectral, family_data, make_grid, zero_data
from boussinesq_rh.verify import small_gaussian


@pytest.fixture(scope="module")
def small():
    return small_gaussian()


@pytest.fixture(scope="module")
def grid():
    return PeriodicGrid(480.0, 2048)


def test_zero_data_stays_zero():
    st_ = evolve(zero_data(make_grid(-10, 10, 256)), 0.5, 1e-2)
    assert not np.any(st_.u) and not np.any(st_.ut)


@given(st.floats(0.1, 0.55))
def test_linear_mode_frequency(xi_req):
    # modes below 0.7 xi_max pass the smooth prefilter untouched
    grid = PeriodicGrid(2 * np.pi * 200, 1024)
    xi0 = grid.xi[np.argmin(np.abs(grid.xi - xi_req))]  # a mode of the grid
    eps = 1e-6
    u0 = eps * np.cos(xi0 * grid.x)
    s = evolve_fields(u0, np.zeros_like(u0), grid, 1.0, 1e-3)
    a = mode_amplitude(s, xi0)
    w = linear_frequency(xi0)
    assert abs(math.acos(a / eps) - w) / w < 1e-6


def test_second_order_in_dt():
    grid = PeriodicGrid(2 * np.pi * 100, 512)
    xi0 = grid.xi[np.argmin(np.abs(grid.xi - 0.5))]
    u0 = 1e-6 * np.cos(xi0 * grid.x)
    exact = 1e-6 * math.cos(linear_frequency(xi0))
    errs = [abs(mode_amplitude(evolve_fields(u0, 0 * u0, grid, 1.0, dt), xi0) - exact) for dt in (0.1, 0.05)]
    assert abs(math.log2(errs[0] / errs[1]) - 2) < 0.1


def test_time_reversal(small, grid):
    s1 = evolve(small, 1.0, 1e-2, grid=grid)
    fwd = evolve_fields(s1.u, s1.ut, grid, 1.0, 1e-2, prefilter=False)
    back = evolve_fields(fwd.u, fwd.ut, grid, -1.0, 1e-2, prefilter=False)
    assert np.max(np.abs(back.u - s1.u)) < 1e-8 and np.max(np.abs(back.ut - s1.ut)) < 1e-8


def test_t0_exact(small, grid):
    u0, u1 = initial_fields(small, grid)
    s = evolve(small, 0.0, grid=grid, snapshot_times=[0.0])
    assert np.array_equal(s.u, u0) and np.array_equal(s.ut, u1)
    assert np.array_equal(s.snapshots[0][1], u0)


def test_filter_and_mass(small, grid):
    s = evolve(small, 1.0, 1e-2, grid=grid)
    assert s.max_filtered_mode() < 1e-12
    assert abs(s.mass_rate()) < 1e-10


def test_spatial_resolution(small):
    a = evolve(small, 0.5, 1e-2, grid=PeriodicGrid(480.0, 2048))
    b = evolve(small, 0.5, 1e-2, grid=PeriodicGrid(480.0, 4096))
    assert np.max(np.abs(b.u[::2] - a.u)) < 1e-10


def test_smooth_window_shape():
    xi = np.linspace(-1, 1, 2001)
    w = smooth_window(xi, 0.8)
    assert np.all(w[np.abs(xi) <= 0.56] == 1) and np.all(w[np.abs(xi) >= 0.8] == 0)
    assert np.all((w >= 0) & (w <= 1))


def test_parameter_guards(small):
    with pytest.raises(ValueError):
        FilteredBoussinesq(PeriodicGrid(100.0, 256), xi_max=0.95)
    with pytest.raises(ValueError):
        evolve(small, 1.0, dt=-0.1)
    with pytest.raises(ValueError):
        evolve(small, 1.0, dt=10.0)


def test_blowup_detected():
    big = family_data({"amplitude": 2e3, "width": 5.0}, None, make_grid(-60, 60, 2048))
    with pytest.raises(BlowupError) as info:
        evolve(big, 1.0, 1e-2)
    assert info.value.spectrum.shape == info.value.xi.shape


def test_snapshot_csv(tmp_path, small, grid):
    s = evolve(small, 0.2, 1e-2, grid=grid, snapshot_times=[0.1, 0.2])
    path = tmp_path / "snap.csv"
    write_snapshots(path, s)
    arr = np.loadtxt(path, delimiter=",", skiprows=1)
    assert arr.shape == (2 * grid.n, 4)
    assert np.array_equal(arr[grid.n :, 2], s.u)


def test_compare_smallness(small, grid):
    # both the oracle and the leading-order formula are small on x in [20, 40] at t = 1
    s = evolve(small, 1.0, 1e-2, grid=grid)
    spec = computed_spectral(small, arc_grid(64))
    results = [SectorAsymptotics(spec, 1.0 / x).result(x) for x in np.linspace(20, 40, 11)]
    rep = compare_asymptotic(s, results)
    assert rep["caveat"] == CAVEAT and len(rep["rows"]) == 11
    for row in rep["rows"]:
        assert abs(row["u_pde"]) < 1e-3 and abs(row["u_leading"]) < 1e-3


def test_compare_flags_large_values():
    x = np.linspace(-50, 50, 1024, endpoint=False)
    s = PdeState(x, np.ones_like(x), np.zeros_like(x), 0.8, 10.0)

    class R:
        x, t, u_leading, error_scale = 20.0, 10.0, 1e-4, {"a": 1e-4}

    assert compare_asymptotic(s, [R()])["rows"][0]["flag"] == "outside asymptotic regime"
