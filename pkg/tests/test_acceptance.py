"""Acceptance criteria 1-9, one PASS/FAIL line each (printed even under capture)."""

import time

import pytest

from boussinesq_rh import verify


@pytest.fixture
def report(capsys):
    def emit(number, title, checks, elapsed=None, limit=None):
        ok = all(c.passed for c in checks)
        if limit is not None:
            ok = ok and elapsed < limit
        parts = [f"{c.name}={c.value:.3g}{'' if c.passed else ' (FAIL)'}" for c in checks]
        if elapsed is not None:
            parts.append(f"runtime={elapsed:.2f}s" + (f" (< {limit:g}s)" if limit else ""))
        with capsys.disabled():
            print(f"\nCRITERION {number} {'PASS' if ok else 'FAIL'}: {title}: " + "; ".join(parts))
        return ok

    return emit


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def test_criterion_1_saddle_closed_form(report):
    checks, dt = timed(verify.saddle_checks, n=50)
    assert report(1, "saddle closed form", checks, dt, 1.0)


def test_criterion_2_scattering_identities(report):
    checks, dt = timed(verify.scattering_checks, n_arc=64)
    checks = [c for c in checks if c.name != "volterra_residual"]
    assert report(2, "scattering identities", checks, dt, 60.0)


def test_criterion_3_delta_suite(report):
    checks = verify.delta_checks()
    wanted = {"delta_jump_ratio", "delta_modulus_constancy", "Delta33_large_k"}
    assert report(3, "delta / Delta suite", [c for c in checks if c.name in wanted])


def test_criterion_4_d0_suite(report):
    checks = verify.d0_checks(n_x=10, n_tau=10)
    assert report(4, "d0 modulus and two-route argument (10x10)", checks)


def test_criterion_5_model_problem(report):
    checks = [c for c in verify.model_checks() if c.name != "model_q0_trivial"]
    assert report(5, "model problem (jump, large z at |z|=50, beta product, Gamma modulus)", checks)


def test_criterion_6_factorizations(report):
    checks = verify.deform_checks(n=100, decomposition=False)
    wanted = [c for c in checks if c.name.startswith("factorization ") or c.name == "symmetry_computed_data"]
    assert len(wanted) == 11
    assert report(6, "lens factorizations (exact r) and symmetry of computed data", wanted)


def test_criterion_7_decomposition_decay(report):
    checks = [c for c in verify.decomposition_checks(N=2) if c.name == "decomposition_slope"]
    slope = checks[0].detail["slope"]
    assert report(7, f"remainder slope {slope:.3f} vs -2.5 +- 0.3", checks)


def test_criterion_8_asymptotic_structure(report):
    assert report(8, "amplitude flatness, saddle trajectory, zero-crossing spacing", verify.asymptotic_checks())


def test_criterion_9_pde_oracle(report):
    checks, dt = timed(verify.pde_checks)
    wanted = [c for c in checks if c.name in {"linear_dispersion", "time_reversal", "t0_reproduction"}]
    assert report(9, "filtered PDE oracle sanity", wanted, dt, 30.0)
