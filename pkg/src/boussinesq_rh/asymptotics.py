"""Leading-order long-time formula u ~ A(tau) x^{-1/2} cos alpha(x, tau) in the sector 0 <= t/x <= tau_max.

arg d0 has two independent evaluations: route A is the real closed form
(log-modulus term, -nu ln x and an arc integral against d ln(1 + r1 r2));
route B takes the argument of the assembled product of delta values and
e^{2 chi(k1)}.  Their agreement mod 2 pi exercises delta, chi, nu, zstar and
every branch choice at once.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import loggamma

from .parametrix import GlobalParametrix, local_scalars, nu_of
from .phase import DEFAULT_TAU_MAX, OMEGA, phase, saddle_points

X_MIN = 10.0


class SectorError(ValueError):
    pass


def wrap(angle):
    """Map to (-pi, pi]."""
    out = np.mod(np.asarray(angle) + np.pi, 2 * np.pi) - np.pi
    return np.where(out == -np.pi, np.pi, out)


def amplitude(spec, ctx):
    """A(tau) = 2 sqrt3 sqrt(-nu) sqrt(-1 - 2cos(2 arg k1)) Im k1 / (-i k1 zstar)."""
    if ctx.tau == 0.0:
        return 0.0
    nu = nu_of(spec, ctx)
    radicand = -1 - 2 * np.cos(2 * ctx.arg_k1)
    if radicand < 0:
        raise SectorError("negative radicand: tau outside the sector")
    denom = (-1j * ctx.k1 * ctx.zstar).real
    return float(2 * np.sqrt(3) * np.sqrt(-nu) * np.sqrt(radicand) * ctx.k1.imag / denom)


def _routeA_parts(spec, ctx, glob):
    """x-independent part of route A: (log-modulus coefficient term, arc integral)."""
    k1, w, nu = ctx.k1, OMEGA, nu_of(spec, ctx)
    const = nu * np.log(abs((1 / (w**2 * k1) - k1) * (1 / (w * k1) - k1) / (3 * (1 / k1 - k1) ** 2 * ctx.zstar**2)))
    if glob.zero:
        return const, 0.0

    def integrand(s, theta):
        num = (k1 - s) ** 2 * (1 / (w**2 * k1) - s) * (1 / (w * k1) - s)
        den = (1 / k1 - s) ** 2 * (w * k1 - s) * (w**2 * k1 - s)
        return np.log(np.abs(num / den))

    return const, glob.measure_integral(integrand).real / (2 * np.pi)


def arg_d0_routeA(spec, ctx, x, glob=None):
    """Closed-form arg d0 (continuous in x and tau, not wrapped)."""
    if x < 2:
        raise ValueError("x must be at least 2")
    glob = GlobalParametrix(spec, ctx) if glob is None else glob
    const, integral = _routeA_parts(spec, ctx, glob)
    return float(const - nu_of(spec, ctx) * np.log(x) + integral)


def arg_d0_routeB(spec, ctx, x, glob=None):
    """Argument of the assembled d0 product; returns (wrapped, unwrapped)."""
    bundle = local_scalars(spec, ctx, x, glob)
    unwrapped = float(np.imag(np.log(bundle.d0))) if bundle.d0 != 0 else 0.0
    log_d0 = 2 * bundle.chi_k1 - 1j * bundle.nu * np.log(x) - 2j * bundle.nu * np.log(ctx.zstar) + bundle.log_ratio_k1
    return float(wrap(unwrapped)), float(np.imag(log_d0))


def arg_gamma_imag(nu):
    """arg Gamma(i nu), continuous in nu < 0 (imaginary part of the principal log-gamma)."""
    return float(np.imag(loggamma(1j * nu)))


@dataclass
class AsymptoticResult:
    x: float
    tau: float
    A: float
    alpha: float
    alpha_unwrapped: float
    u_leading: float
    error_scale: dict = field(default_factory=dict)
    route_mismatch: float = float("nan")

    @property
    def t(self):
        return self.x * self.tau


class SectorAsymptotics:
    """Per-tau cache of the phase context and global parametrix for x-sweeps."""

    def __init__(self, spec, tau, tau_max=DEFAULT_TAU_MAX):
        if tau < 0 or tau > tau_max:
            raise SectorError(f"tau = {tau} outside [0, {tau_max}]")
        self.spec = spec
        self.tau = float(tau)
        self.ctx = saddle_points(tau, tau_max)
        self.degenerate = self.tau == 0.0
        if self.degenerate:
            self.nu = 0.0
            self.A = 0.0
            return
        self.glob = GlobalParametrix(spec, self.ctx)
        self.nu = nu_of(spec, self.ctx)
        self.A = amplitude(spec, self.ctx)
        self._const, self._integral = _routeA_parts(spec, self.ctx, self.glob)
        _, r2 = spec.values(self.ctx.arg_k1)
        self.arg_r2 = float(np.angle(r2))
        self.omega_phase = float(np.imag(phase(2, 1, self.tau, self.ctx.k1)))

    @property
    def trivial(self):
        return self.degenerate or self.nu == 0.0

    def arg_d0(self, x):
        return self._const - self.nu * np.log(x) + self._integral

    def alpha(self, x):
        """Unwrapped alpha(x, tau); NaN when nu = 0 (arg Gamma(i nu) undefined)."""
        x = np.asarray(x, dtype=float)
        if self.trivial:
            return np.full(x.shape, np.nan)
        return 0.75 * np.pi + self.arg_r2 + arg_gamma_imag(self.nu) + self.arg_d0(x) + x * self.omega_phase

    def u(self, x):
        x = np.asarray(x, dtype=float)
        if self.trivial:
            return np.zeros(x.shape)
        return self.A / np.sqrt(x) * np.cos(self.alpha(x))

    def result(self, x, N=2, check_routes=False):
        x = float(x)
        alpha = float(self.alpha(x))
        mismatch = float("nan")
        if check_routes and not self.trivial:
            wrapped_b, _ = arg_d0_routeB(self.spec, self.ctx, x, self.glob)
            mismatch = float(abs(wrap(self.arg_d0(x) - wrapped_b)))
        return AsymptoticResult(
            x=x, tau=self.tau, A=float(self.A), alpha=float(wrap(alpha)) if np.isfinite(alpha) else alpha,
            alpha_unwrapped=alpha, u_leading=float(self.u(x)),
            error_scale={"xN_term": x ** (-N), "log_term": np.log(x) / x}, route_mismatch=mismatch,
        )


def phase_alpha(spec, ctx, x):
    """(wrapped, unwrapped) alpha(x, tau)."""
    a = SectorAsymptotics(spec, ctx.tau).alpha(x)
    return float(wrap(a)), float(a)


def u_leading(spec, x, t, tau_max=DEFAULT_TAU_MAX, x_min=X_MIN, N=2, check_routes=False):
    if x < x_min:
        raise ValueError(f"x must be at least {x_min}")
    tau = t / x
    if tau < 0 or tau > tau_max:
        raise SectorError(f"t/x = {tau} outside [0, {tau_max}]")
    return SectorAsymptotics(spec, tau, tau_max).result(x, N, check_routes)


def saddle_trajectory_residual(tau, h=1e-3):
    """Im(Phi(tau, k1) - tau d/dtau Phi(tau, k1(tau))) - Im k1, 5-point stencil in tau."""

    def f(t):
        return phase(2, 1, t, saddle_points(t, 0.99).k1)

    deriv = (-f(tau + 2 * h) + 8 * f(tau + h) - 8 * f(tau - h) + f(tau - 2 * h)) / (12 * h)
    k1 = saddle_points(tau, 0.99).k1
    return float(np.imag(f(tau) - tau * deriv) - k1.imag)


def zero_crossings(x, u):
    """Linear-interpolated sign changes of samples u(x)."""
    x = np.asarray(x)
    u = np.asarray(u)
    idx = np.nonzero(np.sign(u[:-1]) * np.sign(u[1:]) < 0)[0]
    return x[idx] - u[idx] * (x[idx + 1] - x[idx]) / (u[idx + 1] - u[idx])
