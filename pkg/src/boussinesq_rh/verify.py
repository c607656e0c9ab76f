"""Verification suites: every exactly stated identity, measured as a residual.

Each check returns a :class:`Check`; suites are lists of checks.  The CLI
serializes them to JSON and the acceptance tests assert on them.
"""

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import jumps
from .asymptotics import SectorAsymptotics, amplitude, arg_d0_routeB, saddle_trajectory_residual, wrap, zero_crossings
from .decompose import RayDecomposer, analytic_bound_ratio, ray_fixture, remainder_slope, v1_samples
from .model_rh import ModelProblem, cross_points, gamma_imag
from .parametrix import GlobalParametrix, local_scalars, nu_of
from .pde import (PdeState, PeriodicGrid, evolve, evolve_fields, initial_fields, linear_frequency,
                  mode_amplitude)
from .phase import OMEGA, phase, phase21_dk, saddle_points
from .scattering import (ARC_END, ARC_START, CircleReflection, InstabilityWarning, bump_profile,
                         circle_relation_residual, endpoint_limits, family_data, gaussian_fixture,
                         make_grid, synthetic_spectral, tilde_r, volterra_residual)

SUITES = ("scattering", "parametrix", "deform", "model-rh", "pde")
MODEL_Q = (0.1, 0.5 + 0.2j, 2.0)


@dataclass
class Check:
    name: str
    value: float
    tol: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self):
        d = asdict(self)
        d["value"] = _jsonable(d["value"])
        d["detail"] = {k: _jsonable(v) for k, v in d["detail"].items()}
        return d


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def check(name, value, tol, **detail):
    value = float(value)
    return Check(name, value, tol, bool(np.isfinite(value) and value < tol), detail)


def arc_midpoints(n, theta_end=ARC_END):
    return ARC_START + (theta_end - ARC_START) * (np.arange(n) + 0.5) / n


# ---------------------------------------------------------------- saddle points


def saddle_checks(n=50, tau_lo=0.01, tau_hi=0.3):
    taus = np.linspace(tau_lo, tau_hi, n + 1)[1:]
    worst_dk, worst_mod = 0.0, 0.0
    for tau in taus:
        ctx = saddle_points(tau)
        pts = np.array([ctx.k1, ctx.k2, ctx.k3, ctx.k4])
        worst_dk = max(worst_dk, float(np.max(np.abs(phase21_dk(tau, pts)))))
        worst_mod = max(worst_mod, abs(abs(ctx.k1) - 1))
    return [
        check("saddle_stationarity", worst_dk, 1e-10, n_tau=n),
        check("saddle_k1_on_circle", worst_mod, 1e-12, n_tau=n),
    ]


# ---------------------------------------------------------------- scattering


def scattering_checks(data=None, n_arc=64):
    data = gaussian_fixture() if data is None else data
    refl = CircleReflection(data)
    k = np.exp(1j * arc_midpoints(n_arc))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", InstabilityWarning)
        rel = float(np.max(circle_relation_residual(refl.r1, refl.r2, k)))
        r1, r2 = refl.r1(k), refl.r2(k)
    conj = float(np.max(np.abs(r2 - tilde_r(k) * np.conj(r1))))
    ends = endpoint_limits(data)
    end_err = max(max(abs(r1v - 1), abs(r2v + 1)) for r1v, r2v in ends.values())
    vres = max(float(np.max(volterra_residual(data, kk))) for kk in (np.exp(0.6j * np.pi), np.exp(0.2j)))
    return [
        check("circle_relation", rel, 1e-6, points=n_arc),
        check("conjugation_relation", conj, 1e-6, points=n_arc),
        check("endpoint_limits", end_err, 1e-3, limits={k: [v[0], v[1]] for k, v in ends.items()}),
        check("volterra_residual", vres, 1e-8),
    ]


# ---------------------------------------------------------------- delta, Delta, d0


def synthetic_fixture():
    return synthetic_spectral(bump_profile())


def delta_checks(spec=None, tau=0.2):
    spec = synthetic_fixture() if spec is None else spec
    ctx = saddle_points(tau)
    glob = GlobalParametrix(spec, ctx)
    spacing = float(np.min(np.diff(spec.theta)))
    mids = arc_midpoints(8, ctx.arg_k1)
    jump_err = max(abs(glob.boundary_ratio(th, h0=spacing) - np.exp(spec.weight_at(th))) for th in mids)

    # |delta| on the rest of the circle
    th = np.linspace(ctx.arg_k1 + 0.05, 2 * np.pi + ARC_START - 0.05, 64)
    mod = np.array([abs(glob.delta(np.exp(1j * t))) for t in th])
    nu = nu_of(spec, ctx)
    integral = glob.measure_integral(lambda s, t: t / 2).real / (2 * np.pi)
    closed = math.exp(nu * ctx.arg_k1 / 2 + integral)

    # k (Delta33 - 1) -> -(sqrt3 / 2pi) int G(s) (1 + s^-2) ds
    target = -math.sqrt(3) / (2 * math.pi) * glob.weight_integral(lambda s: 1 + s**-2)
    direction = np.exp(0.3j)
    radii = np.array([1e3, 2e3, 4e3])
    vals = np.array([R * direction * (glob.delta33(R * direction) - 1) for R in radii])
    limit = (8 * vals[2] - 6 * vals[1] + vals[0]) / 3  # removes 1/k and 1/k^2 terms
    return [
        check("delta_jump_ratio", jump_err, 1e-6, midpoints=8, tau=tau),
        check("delta_modulus_constancy", float(np.std(mod)), 1e-8, mean=float(np.mean(mod)), closed_form=closed),
        check("delta_modulus_closed_form", abs(float(np.mean(mod)) - closed), 1e-8),
        check("Delta33_large_k", abs(limit - target), 1e-6, limit=complex(limit), target=complex(target)),
    ]


def d0_checks(spec=None, n_x=10, n_tau=10, taus=None, xs=None):
    spec = synthetic_fixture() if spec is None else spec
    mod_err = 0.0
    ctx = saddle_points(0.2)
    glob = GlobalParametrix(spec, ctx)
    for x in (10.0, 100.0, 1000.0):
        b = local_scalars(spec, ctx, x, glob)
        mod_err = max(mod_err, abs(abs(b.d0) - math.exp(2 * math.pi * b.nu)))
    taus = np.linspace(0.03, 0.3, n_tau) if taus is None else np.asarray(taus)
    xs = np.geomspace(10, 1e4, n_x) if xs is None else np.asarray(xs)
    worst = 0.0
    for tau in taus:
        sa = SectorAsymptotics(spec, tau)
        for x in xs:
            wrapped_b, _ = arg_d0_routeB(spec, sa.ctx, x, sa.glob)
            worst = max(worst, abs(float(wrap(sa.arg_d0(x) - wrapped_b))))
    return [
        check("d0_modulus", mod_err, 1e-8, xs=[10, 100, 1000]),
        check("arg_d0_routes", worst, 1e-6, grid=[len(xs), len(taus)]),
    ]


def asymptotic_checks(spec=None):
    spec = synthetic_fixture() if spec is None else spec
    # all-order vanishing of A at tau -> 0: local log-log slope at tau = 0.02
    t1, t2 = 0.018, 0.02
    a1, a2 = amplitude(spec, saddle_points(t1)), amplitude(spec, saddle_points(t2))
    slope = math.log(a2 / a1) / math.log(t2 / t1) if a1 > 0 and a2 > 0 else float("inf")
    traj = max(abs(saddle_trajectory_residual(t)) for t in (0.05, 0.1, 0.2, 0.28))
    tau = 0.2
    sa = SectorAsymptotics(spec, tau)
    x = np.linspace(1e3, 1e4, 400001)
    zc = zero_crossings(x, sa.u(x))
    spacing = float(np.mean(np.diff(zc)))
    expected = math.pi / float(np.imag(phase(2, 1, tau, sa.ctx.k1)))
    return [
        Check("amplitude_flatness", slope, 3.0, bool(slope > 3.0), {"tau": t2, "A": [a1, a2]}),
        check("saddle_trajectory", traj, 1e-6),
        check("zero_crossing_spacing", abs(spacing / expected - 1), 1e-2, spacing=spacing, expected=expected),
    ]


# ---------------------------------------------------------------- deform


def deform_checks(n=100, seed=0, x=5.0, t=0.5, data=None, decomposition=True):
    rng = np.random.default_rng(seed)
    sampler = jumps.random_relation_sampler(rng)
    ctx = saddle_points(t / x)
    fac = jumps.check_factorizations(sampler, x, t, jumps.factorization_samples(ctx, n, rng))
    out = [check(f"factorization {name}", v, 1e-10, samples=n) for name, v in fac.items()]
    segs = {name: jumps.sample_segment(name, 10, rng) for name in jumps.SEGMENTS}
    det = jumps.determinant_residuals(sampler, x, t, segs)
    out.append(check("unit_determinant", max(det.values()), 1e-10, per_segment=det))
    sym = jumps.check_symmetries(sampler, x, t, np.concatenate(list(segs.values())))
    out.append(check("symmetry_exact_r", max(sym["A"], sym["B"]), 1e-10))
    zero = jumps.check_factorizations(jumps.ZeroSampler(), x, t, jumps.factorization_samples(ctx, 5, rng))
    out.append(check("factorization_zero_r", max(zero.values()), 1e-15))

    data = gaussian_fixture() if data is None else data
    refl = CircleReflection(data)
    arcs = np.concatenate([jumps.sample_segment(name, 17, rng) for name in ("7", "8", "9")])[:50]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", InstabilityWarning)
        sym_c = jumps.check_symmetries(refl, x, t, arcs)
        rel = float(np.max(circle_relation_residual(refl.r1, refl.r2, arcs)))
    worst = max(sym_c["A"], sym_c["B"])
    out.append(check("symmetry_computed_data", worst, 1e-6, samples=sym_c["samples"], circle_relation=rel))
    out.append(Check("symmetry_vs_circle_relation", worst, 10 * max(rel, 1e-15), bool(worst <= 10 * max(rel, 1e-15)), {"circle_relation": rel}))
    if decomposition:
        out.extend(decomposition_checks())
    return out


def decomposition_checks(N=2):
    dec = RayDecomposer(ray_fixture(), N=N)
    xs = tuple(4 * 2**j for j in range(7))
    slope, norms = remainder_slope(dec, xs)
    target = -(N + 0.5)
    rng = np.random.default_rng(1)
    ratios = analytic_bound_ratio(dec, (4, 16, 64, 256), v1_samples(40, rng), tau=0.1)
    return [
        check("decomposition_slope", abs(slope - target), 0.3, slope=slope, target=target, norms=norms, xs=list(xs), M=dec.M),
        Check("decomposition_decays_at_least_as_bound", slope, target + 0.3, bool(slope <= target + 0.3), {}),
        check("analytic_part_bound", float(np.max(ratios) / ratios[0]), 10.0, ratios=ratios),
        Check("sobolev_stable", float(dec.sobolev_norm), float("inf"), bool(dec.sobolev_ok), {"M": dec.M}),
    ]


# ---------------------------------------------------------------- model problem


def model_checks(qs=MODEL_Q, radius=50.0):
    out = []
    trivial = ModelProblem(0.0)
    zero_res = max(trivial.jump_residual(z, ray) for z, ray in cross_points())
    out.append(check("model_q0_trivial", zero_res, 1e-15))
    for q in qs:
        mp_ = ModelProblem(q)
        jres = max(mp_.jump_residual(z, ray) for z, ray in cross_points())
        ang = np.array([0.1, 1.0, 2.0, 3.0, 4.0, 5.5])
        lit, rich = 0.0, 0.0
        for a in ang:
            z = radius * np.exp(1j * a)
            e1 = z * (mp_.evaluate(z) - np.eye(3)) - mp_.m1
            e2 = 2 * z * (mp_.evaluate(2 * z) - np.eye(3)) - mp_.m1
            lit = max(lit, float(np.max(np.abs(e1))))
            rich = max(rich, float(np.max(np.abs(2 * e2 - e1))))
        nu = mp_.nu
        g = abs(gamma_imag(nu))
        ident = abs(g - math.sqrt(2 * math.pi) / (math.sqrt(-nu) * math.sqrt(math.exp(-math.pi * nu) - math.exp(math.pi * nu))))
        tag = f"q={q}"
        out += [
            check(f"model_jump {tag}", jres, 1e-8, points=len(cross_points())),
            check(f"model_large_z {tag}", lit, 1e-4, radius=radius, richardson=rich),
            check(f"beta_product {tag}", abs(mp_.beta12 * mp_.beta21 - nu), 1e-12),
            check(f"gamma_modulus {tag}", ident / g, 1e-12),
        ]
    return out


# ---------------------------------------------------------------- pde


def pde_checks():
    out = []
    xi0, eps = 0.5, 1e-6
    grid = PeriodicGrid(2 * np.pi / xi0 * 40, 1024)
    u0 = eps * np.cos(xi0 * grid.x)
    ts = list(np.linspace(0.1, 1.0, 10))
    st = evolve_fields(u0, np.zeros_like(u0), grid, 1.0, 1e-3, snapshot_times=ts)
    w = linear_frequency(xi0)
    errs = []
    for t, u, ut in st.snapshots:
        a = mode_amplitude(PdeState(grid.x, u, ut, st.xi_max, t), xi0)
        errs.append(abs(math.acos(a / eps) / t - w) / w)
    out.append(check("linear_dispersion", max(errs), 1e-6, xi0=xi0))

    data = small_gaussian()
    g2 = PeriodicGrid(480.0, 2048)
    s1 = evolve(data, 1.0, 1e-2, grid=g2)
    fwd = evolve_fields(s1.u, s1.ut, g2, 1.0, 1e-2, prefilter=False)
    back = evolve_fields(fwd.u, fwd.ut, g2, -1.0, 1e-2, prefilter=False)
    rt = max(float(np.max(np.abs(back.u - s1.u))), float(np.max(np.abs(back.ut - s1.ut))))
    out.append(check("time_reversal", rt, 1e-8))
    u0g, _ = initial_fields(data, g2)
    z = evolve(data, 0.0, grid=g2)
    out.append(Check("t0_reproduction", float(np.max(np.abs(z.u - u0g))), 0.0, bool(np.array_equal(z.u, u0g)), {}))
    out.append(check("filter_invariant", s1.max_filtered_mode(), 1e-12))
    out.append(check("mass_rate", abs(s1.mass_rate()), 1e-10))
    return out


def small_gaussian():
    """Broad, small Gaussian: nearly band-limited below the default cutoff."""
    spec = {"family": "gaussian", "amplitude": 0.1, "width": 8.0, "center": 0.0}
    return family_data(spec, {"family": "gaussian", "amplitude": 0.05, "width": 8.0, "center": 0.0}, make_grid(-90, 90, 8192))


# ---------------------------------------------------------------- suites


def run_suite(name, pool=None):
    """List of checks for a suite name (or 'all')."""
    table = {
        "scattering": lambda: scattering_checks(),
        "parametrix": lambda: saddle_checks() + delta_checks() + d0_checks(n_x=4, n_tau=4) + asymptotic_checks(),
        "deform": lambda: deform_checks(),
        "model-rh": lambda: model_checks(),
        "pde": lambda: pde_checks(),
    }
    if name == "all":
        names = list(SUITES)
    elif name in table:
        names = [name]
    else:
        raise KeyError(name)
    if pool is None:
        results = [table[n]() for n in names]
    else:
        results = list(pool.map(lambda n: table[n](), names))
    return dict(zip(names, results))


def report(results):
    suites = {name: [c.as_dict() for c in checks] for name, checks in results.items()}
    ok = all(c["passed"] for checks in suites.values() for c in checks)
    return {"passed": ok, "suites": suites}
