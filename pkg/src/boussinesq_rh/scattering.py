"""Forward scattering: initial data -> s(k), s^A(k) -> reflection coefficients.

The Volterra equation for X is equivalent to the ODE

    X_x = [L, X] + U X,        X -> I as x -> +inf,

obtained by differentiating under the integral sign (the boundary term gives
U X, the x-dependence of the conjugating exponentials gives the commutator).
Writing X = e^{xL} W e^{-xL} removes the commutator:

    W_x = e^{-xL} U e^{xL} W,  W(+inf) = I,

and the defining integral for s collapses to s = W(-inf).  The adjoint system
X^A_x = -[L, X^A] - U^T X^A is handled the same way with
X^A = e^{-xL} W^A e^{xL}, W^A_x = -e^{xL} U^T e^{-xL} W^A and s^A = W^A(-inf).
Both are integrated right to left with an adaptive Runge-Kutta scheme.  On
|k| = 1 the l_j are imaginary, so the conjugated generators stay bounded.

U = P^{-1} M P has rank one: only the third row of M is non-zero, so
U_ij = (P^{-1})_{i3} (a + b l_j) with a = -u0x/4 - i v0/(4 sqrt 3), b = -u0/2.
"""

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson, solve_ivp
from scipy.interpolate import CubicSpline, make_interp_spline

from .phase import KAPPA, OMEGA, SQRT3, lax_exponent

ARC_START = np.pi / 2
ARC_END = 2 * np.pi / 3
DEGENERATE_RADIUS = 1e-6
POLE_PROXIMITY = 0.05


class ScatteringError(RuntimeError):
    pass


class InstabilityWarning(UserWarning):
    pass


# ---------------------------------------------------------------- initial data


def _gaussian(amplitude, width, center):
    def env(x):
        return amplitude * np.exp(-(((x - center) / width) ** 2))

    def denv(x):
        return -2 * (x - center) / width**2 * env(x)

    return env, denv


def _sech2(amplitude, width, center):
    def env(x):
        return amplitude / np.cosh((x - center) / width) ** 2

    def denv(x):
        y = (x - center) / width
        return -2 * amplitude * np.tanh(y) / np.cosh(y) ** 2 / width

    return env, denv


_FAMILIES = {"gaussian": _gaussian, "sech2": _sech2}


@dataclass(frozen=True)
class InitialData:
    """Samples of (u0, u1) on a uniform grid together with evaluators for the ODE.

    ``u1`` is always the negative derivative of an envelope, so v0 = -envelope
    and the mass of u1 vanishes.
    """

    x: np.ndarray
    u0: np.ndarray
    u1: np.ndarray
    u0x: np.ndarray
    v0: np.ndarray
    coeffs: object = field(repr=False, compare=False, default=None)
    label: str = "table"

    def coefficients(self, x):
        """Return (a, b) of the rank-one Lax generator at position(s) x."""
        if self.coeffs is not None:
            return self.coeffs(x)
        return _coeffs_from(self._u0s(x), self._u0s(x, 1), self._v0s(x))

    def __post_init__(self):
        if self.coeffs is None:
            object.__setattr__(self, "_u0s", CubicSpline(self.x, self.u0))
            object.__setattr__(self, "_v0s", CubicSpline(self.x, self.v0))

    @property
    def is_zero(self):
        return not (np.any(self.u0) or np.any(self.u1))

    def mass(self):
        return float(np.trapezoid(self.u1, self.x))

    def endpoint_decay(self):
        return float(max(abs(self.u0[0]), abs(self.u0[-1]), abs(self.u1[0]), abs(self.u1[-1])))


def _coeffs_from(u0, u0x, v0):
    return -u0x / 4 - 1j * v0 / (4 * SQRT3), -u0 / 2


def make_grid(x_min=-30.0, x_max=30.0, n=4096):
    return np.linspace(x_min, x_max, n)


def family_data(u0_spec=None, u1_spec=None, grid=None):
    """Build InitialData from envelope families.

    Each spec is a dict with keys family ('gaussian' | 'sech2'), amplitude,
    width, center.  u0 is the envelope itself, u1 = -d/dx of its envelope.
    """
    grid = make_grid() if grid is None else np.asarray(grid, dtype=float)
    parts = []
    for spec in (u0_spec, u1_spec):
        if spec is None or spec.get("amplitude", 0.0) == 0.0:
            parts.append((lambda x: np.zeros_like(np.asarray(x, dtype=float)),) * 2)
            continue
        fam = spec.get("family", "gaussian")
        if fam not in _FAMILIES:
            raise ValueError(f"unknown family {fam!r}")
        parts.append(_FAMILIES[fam](float(spec["amplitude"]), float(spec.get("width", 1.0)), float(spec.get("center", 0.0))))
    (f0, df0), (g1, dg1) = parts

    def coeffs(x):
        return _coeffs_from(f0(x), df0(x), -g1(x))

    return InitialData(
        x=grid, u0=f0(grid), u1=-dg1(grid), u0x=df0(grid), v0=-g1(grid), coeffs=coeffs,
        label=json.dumps({"u0": u0_spec, "u1": u1_spec}, sort_keys=True),
    )


def table_data(x, u0, u1):
    """Build InitialData from sampled tables; v0 by cumulative Simpson, u0x from a spline."""
    x = np.asarray(x, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    if np.any(np.diff(x) <= 0):
        raise ValueError("x grid must be strictly increasing")
    u0x = CubicSpline(x, u0)(x, 1)
    v0 = cumulative_simpson(u1, x=x, initial=0.0)
    return InitialData(x=x, u0=u0, u1=u1, u0x=u0x, v0=v0, label="custom-table")


def gaussian_fixture(grid=None):
    """u0 = 0.3 exp(-x^2), u1 = -d/dx (0.2 exp(-x^2))."""
    return family_data(
        {"family": "gaussian", "amplitude": 0.3, "width": 1.0, "center": 0.0},
        {"family": "gaussian", "amplitude": 0.2, "width": 1.0, "center": 0.0},
        grid,
    )


def zero_data(grid=None):
    return family_data(None, None, grid)


# ------------------------------------------------------------------ Lax system


def _vandermonde(k):
    """P(k) rows (1, l_j, l_j^2) and the l_j themselves, stacked over k."""
    k = np.atleast_1d(np.asarray(k, dtype=complex))
    dist = np.min(np.abs(k[:, None] - KAPPA[None, :]), axis=1)
    if np.any(dist < DEGENERATE_RADIUS):
        raise ScatteringError("k is at a point where two l_j coincide; P(k) is singular")
    if np.any(k == 0):
        raise ScatteringError("k = 0 is singular")
    ell = np.stack([lax_exponent(j, k) for j in (1, 2, 3)], axis=1)  # (n, 3)
    P = np.stack([np.ones_like(ell), ell, ell**2], axis=1)  # (n, row, col)
    return P, ell


def lax_U(data, x, k):
    """The 3x3 Lax potential P(k)^{-1} M(x) P(k)."""
    P, ell = _vandermonde(k)
    a, b = data.coefficients(np.asarray(x, dtype=float))
    M = np.zeros((3, 3), dtype=complex)
    M[2, 0], M[2, 1] = a, b
    return np.linalg.solve(P[0], M @ P[0])


@dataclass(frozen=True)
class ScatteringState:
    k: complex
    X: np.ndarray
    s: np.ndarray
    sA: np.ndarray
    residual: float = float("nan")


def _integrate(data, k, adjoint=False, rtol=1e-12, atol=1e-13, dense=False):
    """Integrate the conjugated system from the right grid end to the left.

    Returns W at the left end, shape (n, 3, 3), and the solver result.
    """
    k = np.atleast_1d(np.asarray(k, dtype=complex))
    if np.any(np.abs(np.abs(k) - 1) > 1e-12):
        warnings.warn("k off the unit circle: conjugating exponentials grow", InstabilityWarning, stacklevel=3)
    P, ell = _vandermonde(k)
    p3 = np.linalg.inv(P)[:, :, 2]
    n = len(k)
    x_left, x_right = float(data.x[0]), float(data.x[-1])

    def rhs(x, y):
        w = y.reshape(n, 3, 3)
        a, b = data.coefficients(x)
        e = np.exp(x * ell)
        left = p3 / e
        right = (a + b * ell) * e
        if adjoint:
            return (-right[:, :, None] * np.einsum("nj,njm->nm", left, w)[:, None, :]).ravel()
        return (left[:, :, None] * np.einsum("nj,njm->nm", right, w)[:, None, :]).ravel()

    y0 = np.tile(np.eye(3, dtype=complex), (n, 1, 1)).ravel()
    if data.is_zero:
        return y0.reshape(n, 3, 3), None
    sol = solve_ivp(rhs, (x_right, x_left), y0, method="DOP853", rtol=rtol, atol=atol, dense_output=dense)
    if not sol.success:
        raise ScatteringError(f"ODE integration failed: {sol.message}")
    return sol.y[:, -1].reshape(n, 3, 3), (sol, rhs, ell)


def scattering_matrices(data, k, **kw):
    """s(k) and s^A(k), each of shape (n, 3, 3) for an array of k."""
    s, _ = _integrate(data, k, **kw)
    sA, _ = _integrate(data, k, adjoint=True, **kw)
    return s, sA


def volterra_residual(data, k, adjoint=False, refine=2):
    """Max residual of W(x) = I -/+ int_x^inf (conjugated U) W on the data grid.

    The integral is recomputed by cumulative Simpson quadrature from the dense
    ODE solution, which is an independent check of the integrator.  The
    quadrature grid is the data grid subdivided ``refine`` times.
    """
    _, extra = _integrate(data, k, adjoint=adjoint, dense=True)
    if extra is None:
        return 0.0
    sol, rhs, _ = extra
    xs = np.linspace(data.x[0], data.x[-1], refine * (len(data.x) - 1) + 1)
    w = sol.sol(xs).T  # (nx, n*9)
    f = np.array([rhs(x, wi) for x, wi in zip(xs, w)])
    # scipy's cumulative_simpson drops imaginary parts, so integrate them separately
    cum = cumulative_simpson(f.real, x=xs, axis=0, initial=0.0) + 1j * cumulative_simpson(f.imag, x=xs, axis=0, initial=0.0)
    tail = cum[-1][None, :] - cum  # int_x^{x_right}
    eye = np.tile(np.eye(3, dtype=complex), (len(np.atleast_1d(k)), 1, 1)).ravel()
    return float(np.max(np.abs(w - eye[None, :] + tail)))


def solve_jost(data, k):
    """Jost-type solution at the left grid end with s, s^A and the Volterra residual."""
    k = complex(k)
    W, _ = _integrate(data, k)
    WA, _ = _integrate(data, k, adjoint=True)
    _, ell = _vandermonde(k)
    xl = data.x[0]
    e = np.exp(xl * ell[0])
    X = (e[:, None] * W[0]) / e[None, :]
    return ScatteringState(k=k, X=X, s=W[0], sA=WA[0], residual=volterra_residual(data, k))


def reflection(data, k, **kw):
    """r1 = s_12/s_11 and r2 = s^A_12/s^A_11 at an array of k."""
    s, sA = scattering_matrices(data, k, **kw)
    return s[:, 0, 1] / s[:, 0, 0], sA[:, 0, 1] / sA[:, 0, 0]


def endpoint_limits(data, eps=2e-4):
    """Along-circle limits of r1, r2 at k = 1 and k = -1 (two-point Richardson from both sides)."""
    out = {}
    for name, base in (("plus", 1.0), ("minus", -1.0)):
        ks = base * np.exp(1j * np.array([eps, eps / 2, -eps, -eps / 2]))
        r1, r2 = reflection(data, ks)
        lim = lambda v: 0.5 * ((2 * v[1] - v[0]) + (2 * v[3] - v[2]))
        out[name] = (complex(lim(r1)), complex(lim(r2)))
    return out


def tilde_r(k):
    """(omega^2 - k^2) / (1 - omega^2 k^2)."""
    k = np.asarray(k, dtype=complex)
    den = 1 - OMEGA**2 * k**2
    if np.any(np.abs(den) < 1e-14):
        raise ZeroDivisionError("tilde_r has a pole at k^2 = omega")
    return (OMEGA**2 - k**2) / den


def circle_relation_residual(r1, r2, k):
    """|r1(1/(wk)) + r2(wk) + r1(w^2 k) r2(1/k)| for callables r1, r2."""
    k = np.asarray(k, dtype=complex)
    return np.abs(r1(1 / (OMEGA * k)) + r2(OMEGA * k) + r1(OMEGA**2 * k) * r2(1 / k))


class CircleReflection:
    """Reflection coefficients of given initial data at arbitrary points of the unit circle."""

    def __init__(self, data):
        self.data = data

    def _eval(self, k, which):
        k = np.asarray(k, dtype=complex)
        flat = k.ravel()
        if np.any(np.abs(flat + OMEGA**2) < POLE_PROXIMITY) or np.any(np.abs(flat - OMEGA**2) < POLE_PROXIMITY):
            if which == 1:
                warnings.warn("evaluating r2 near its poles at +-omega^2", InstabilityWarning, stacklevel=3)
        uniq, inv = np.unique(flat, return_inverse=True)
        s, _ = _integrate(self.data, uniq, adjoint=(which == 1))
        return (s[:, 0, 1] / s[:, 0, 0])[inv].reshape(k.shape)

    def r1(self, k):
        return self._eval(k, 0)

    def r2(self, k):
        return self._eval(k, 1)


# -------------------------------------------------------------- spectral data


class SpectralData:
    """r1, r2 sampled on an arc grid theta in [pi/2, 2pi/3).

    Interpolation: cubic splines for r1, r2 and a quintic spline for the log
    weight G(theta) = ln(1 + r1 r2).  When an exact profile is attached
    (synthetic data), point values use it instead of the splines.
    """

    def __init__(self, theta, r1, r2, source="computed", meta=None, profile=None):
        theta = np.asarray(theta, dtype=float)
        if theta.ndim != 1 or len(theta) < 8 or np.any(np.diff(theta) <= 0):
            raise ValueError("theta grid must be strictly increasing with at least 8 points")
        if theta[0] < ARC_START - 1e-12 or theta[-1] >= ARC_END:
            raise ValueError("theta grid must lie in [pi/2, 2pi/3)")
        self.theta = theta
        self.r1 = np.asarray(r1, dtype=complex)
        self.r2 = np.asarray(r2, dtype=complex)
        self.source = source
        self.meta = dict(meta or {})
        self.profile = profile
        prod = self.r1 * self.r2
        self.weight = np.log1p(prod.real)
        self._r1s = CubicSpline(theta, self.r1)
        self._r2s = CubicSpline(theta, self.r2)
        self.log_weight = make_interp_spline(theta, self.weight, k=5)
        self.log_weight_d = self.log_weight.derivative()

    @property
    def is_zero(self):
        return not np.any(self.weight)

    def _check(self, theta):
        theta = np.asarray(theta, dtype=float)
        if np.any(theta < self.theta[0] - 1e-12) or np.any(theta > self.theta[-1] + 1e-12):
            raise ValueError("theta outside the spectral grid")
        return theta

    def values(self, theta):
        """(r1, r2) at arc angles theta."""
        theta = self._check(theta)
        if self.profile is not None:
            r1 = self.profile(theta)
            return r1, tilde_r(np.exp(1j * theta)) * np.conj(r1)
        return self._r1s(theta), self._r2s(theta)

    def weight_at(self, theta):
        """ln(1 + r1 r2) at theta, evaluated without cancellation for tiny r."""
        r1, r2 = self.values(theta)
        return np.log1p(np.real(r1 * r2))

    def invariant_residuals(self):
        k = np.exp(1j * self.theta)
        prod = self.r1 * self.r2
        return {
            "min_one_plus_r1r2": float(np.min(1 + prod.real)) if len(prod) else 1.0,
            "max_imag_r1r2": float(np.max(np.abs(prod.imag))),
            "conjugation": float(np.max(np.abs(self.r2 - tilde_r(k) * np.conj(self.r1)))),
        }

    def to_csv(self, path):
        header = json.dumps({"source": self.source, "n": len(self.theta), "theta_min": self.theta[0], "theta_max": self.theta[-1], **self.meta}, sort_keys=True)
        with open(path, "w") as fh:
            fh.write("# " + header + "\n")
            fh.write("theta,re_r1,im_r1,re_r2,im_r2\n")
            for row in zip(self.theta, self.r1.real, self.r1.imag, self.r2.real, self.r2.imag):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")

    @classmethod
    def from_csv(cls, path):
        with open(path) as fh:
            first = fh.readline()
            if not first.startswith("# "):
                raise ValueError("spectral CSV must start with a '# {json}' metadata line")
            meta = json.loads(first[2:])
            arr = np.loadtxt(fh, delimiter=",", skiprows=1, ndmin=2)
        source = meta.pop("source", "computed")
        for key in ("n", "theta_min", "theta_max"):
            meta.pop(key, None)
        return cls(arr[:, 0], arr[:, 1] + 1j * arr[:, 2], arr[:, 3] + 1j * arr[:, 4], source=source, meta=meta)


def arc_grid(n=512):
    """Uniform grid on [pi/2, 2pi/3) including pi/2."""
    if n < 32:
        raise ValueError("arc grid needs at least 32 points")
    return ARC_START + (ARC_END - ARC_START) * np.arange(n) / n


def computed_spectral(data, theta=None):
    theta = arc_grid() if theta is None else np.asarray(theta, dtype=float)
    r1, r2 = reflection(data, np.exp(1j * theta))
    return SpectralData(theta, r1, r2, source="computed", meta={"data": data.label})


def bump_profile(amplitude=2.0, sharpness=0.25, twist=3.0):
    """r1(theta) = a exp(-s/(theta - pi/2)) exp(i c (theta - pi/2)), zero at pi/2 to all orders."""

    def profile(theta):
        d = np.asarray(theta, dtype=float) - ARC_START
        out = np.zeros(d.shape, dtype=complex)
        pos = d > 0
        out[pos] = amplitude * np.exp(-sharpness / d[pos] + 1j * twist * d[pos])
        return out

    profile.params = {"amplitude": amplitude, "sharpness": sharpness, "twist": twist}
    return profile


def synthetic_spectral(profile, theta=None):
    """SpectralData from a profile for r1 with r2 = tilde_r conj(r1)."""
    theta = arc_grid() if theta is None else np.asarray(theta, dtype=float)
    r1 = np.asarray(profile(theta), dtype=complex)
    tr = tilde_r(np.exp(1j * theta))
    if np.any(tr.real <= 0):
        raise ValueError("tilde_r must be positive on the arc grid")
    r2 = tr * np.conj(r1)
    if np.any(1 + (r1 * r2).real < 1):
        raise ValueError("profile gives 1 + r1 r2 < 1")
    return SpectralData(theta, r1, r2, source="synthetic", meta=dict(getattr(profile, "params", {})), profile=profile)


def rhat(j, spec, theta):
    """r_j / (1 + r1 r2) at arc angles theta."""
    r1, r2 = spec.values(theta)
    rj = {1: r1, 2: r2}[j]
    return rj / (1 + r1 * r2)


# -------------------------------------------------------------- assumptions


@dataclass
class AssumptionReport:
    mass_residual: float
    mass_ok: bool
    min_abs_s11: float
    nonvanishing_ok: bool
    endpoint_products: dict
    endpoint_ok: bool
    max_r1_segment: float
    circle_relation: float
    conjugation: float
    tolerances: dict = field(default_factory=dict)

    def as_dict(self):
        d = dict(self.__dict__)
        d["endpoint_products"] = {k: [v.real, v.imag] for k, v in self.endpoint_products.items()}
        return d


def verify_assumptions(data, n_circle=64, n_segment=16, mass_tol=1e-10, s11_tol=1e-8):
    """Numerical surrogates for the four standing assumptions on the data.

    The [0, i] sample and the interior D2 points are off the unit circle and
    are integrated with the same scheme, so they are approximate.
    """
    mass = abs(data.mass())
    theta = 2 * np.pi * (np.arange(n_circle) + 0.5) / n_circle
    circle = np.exp(1j * theta)
    # interior sample of the sector around arg = pi (inside) and arg = 0 (outside)
    ang = np.linspace(-np.pi / 8, np.pi / 8, 5)
    d2 = np.concatenate([0.7 * np.exp(1j * (np.pi + ang)), 1.3 * np.exp(1j * ang)])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", InstabilityWarning)
        s, sA = scattering_matrices(data, np.concatenate([circle, d2]))
        min_s11 = float(np.min(np.abs(s[:, 0, 0])))
        ends = {}
        for name, base in (("plus", 1.0), ("minus", -1.0)):
            ks = base * np.exp(1j * np.array([1e-3, 5e-4]))
            sv, _ = scattering_matrices(data, ks)
            vals = (ks - base) * sv[:, 0, 0]
            ends[name] = complex(2 * vals[1] - vals[0])
        seg = 1j * np.linspace(0.05, 0.95, n_segment)
        sseg, _ = scattering_matrices(data, seg)
        max_r1 = float(np.max(np.abs(sseg[:, 0, 1] / sseg[:, 0, 0])))
        refl = CircleReflection(data)
        arc = np.exp(1j * (ARC_START + (ARC_END - ARC_START) * (np.arange(64) + 0.5) / 64))
        rel = float(np.max(circle_relation_residual(refl.r1, refl.r2, arc)))
        r1c, r2c = refl.r1(circle), refl.r2(circle)
    conj = float(np.max(np.abs(r2c - tilde_r(circle) * np.conj(r1c))))
    return AssumptionReport(
        mass_residual=mass,
        mass_ok=mass < mass_tol,
        min_abs_s11=min_s11,
        nonvanishing_ok=min_s11 > s11_tol,
        endpoint_products=ends,
        endpoint_ok=all(abs(v) > s11_tol for v in ends.values()) or data.is_zero,
        max_r1_segment=max_r1,
        circle_relation=rel,
        conjugation=conj,
        tolerances={"mass": mass_tol, "s11": s11_tol},
    )
