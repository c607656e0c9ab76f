"""Global parametrix delta / Delta and the scalars of the local parametrix.

Arc integrals run over s = e^{i theta}, theta in [pi/2, arg k1].  The log
weight G = ln(1 + r1 r2) comes from the quintic spline held by SpectralData,
so panels are aligned with the spline knots and integrated by Gauss-Legendre.
Panels are bisected until each is shorter than half its distance to the
evaluation point, which also resolves the logarithmic endpoint singularity
of chi at k = k1.

Boundary values: the arc is oriented from k1 to i (clockwise), so the + side
is the exterior of the unit disk and delta_+ = delta_- (1 + r1 r2).
"""

from dataclasses import dataclass

import numpy as np

from .phase import OMEGA, phase, zmap
from .scattering import ARC_START, tilde_r

GL_ORDER = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)
MIN_PANEL = 1e-12


class BranchTrackingError(RuntimeError):
    pass


class ArcQuadrature:
    """Gauss-Legendre rule on [pi/2, theta_end] adapted to one evaluation point."""

    def __init__(self, spec, theta_end):
        if theta_end <= ARC_START:
            raise ValueError("arc end must lie beyond pi/2")
        if theta_end > spec.theta[-1] + 1e-12:
            raise ValueError("arc end outside the spectral grid")
        knots = np.unique(spec.log_weight.t)
        inner = knots[(knots > ARC_START) & (knots < theta_end)]
        self.breaks = np.concatenate([[ARC_START], inner, [theta_end]])
        self.theta_end = theta_end
        self.spec = spec

    def panels(self, k=None, max_iter=80):
        a, b = self.breaks[:-1], self.breaks[1:]
        if k is None:
            return a, b
        for _ in range(max_iter):
            mid = 0.5 * (a + b)
            pts = np.exp(1j * np.stack([a, mid, b]))
            dist = np.min(np.abs(pts - k), axis=0)
            need = ((b - a) > 0.5 * dist) & ((b - a) > MIN_PANEL)
            if not need.any():
                break
            a2 = np.concatenate([a[~need], a[need], mid[need]])
            b2 = np.concatenate([b[~need], mid[need], b[need]])
            order = np.argsort(a2)
            a, b = a2[order], b2[order]
        return a, b

    def nodes(self, k=None):
        a, b = self.panels(k)
        half = 0.5 * (b - a)
        theta = (0.5 * (a + b))[:, None] + half[:, None] * _GL_X[None, :]
        weights = half[:, None] * _GL_W[None, :]
        return theta.ravel(), weights.ravel()

    def weight(self, theta):
        return self.spec.log_weight(theta)

    def dweight(self, theta):
        return self.spec.log_weight_d(theta)


def _diff(k, theta):
    """k - e^{i theta}, computed without cancellation when k is on the unit circle."""
    if abs(abs(k) - 1) < 1e-15:
        phi = np.angle(k)
        return -np.exp(1j * phi) * np.expm1(1j * (theta - phi))
    return k - np.exp(1j * theta)


def log_from_i(k):
    """ln(k - i) with arg in (pi/2, 5pi/2]: cut along (i, i inf)."""
    w = k - 1j
    ang = np.angle(w)
    if ang <= np.pi / 2:
        ang += 2 * np.pi
    return np.log(abs(w)) + 1j * ang


def branch_logs(k, theta):
    """ln_s(k - s) at the ascending nodes theta, continued along the arc from s = i.

    ln_s(k - s) = ln_i(k - i) + int_i^s ds'/(s' - k); the integral is
    accumulated from principal logs of ratios at consecutive nodes.
    """
    d = _diff(k, theta)
    prev = np.concatenate([[_diff(k, np.array([ARC_START]))[0]], d[:-1]])
    inc = np.log(d / prev)
    if np.any(np.abs(inc.imag) > np.pi / 2):
        raise BranchTrackingError("argument jump between adjacent nodes; evaluation point too close to the arc")
    return log_from_i(k) + np.cumsum(inc)


class GlobalParametrix:
    """delta, chi and Delta for one tau (fixed arc end arg k1)."""

    def __init__(self, spec, ctx):
        self.spec = spec
        self.ctx = ctx
        self.quad = ArcQuadrature(spec, ctx.arg_k1)
        self.zero = spec.is_zero

    def _check_off_arc(self, k):
        th = np.angle(k)
        if abs(abs(k) - 1) < 1e-14 and ARC_START - 1e-14 <= th <= self.ctx.arg_k1 + 1e-14:
            raise ValueError("evaluation point lies on the arc")

    def delta(self, k):
        """exp{-(1/2 pi i) int_i^{k1} ln(1 + r1 r2)(s) ds / (s - k)}."""
        return np.exp(self.delta_log(k))

    def delta_log(self, k):
        k = complex(k)
        if self.zero:
            return 0j
        self._check_off_arc(k)
        th, w = self.quad.nodes(k)
        s = np.exp(1j * th)
        return complex(-np.sum(w * self.quad.weight(th) * s / (-_diff(k, th))) / (2 * np.pi))

    def chi(self, k):
        """(1/2 pi i)-type Stieltjes integral of ln_s(k - s) against d ln(1 + r1 r2)."""
        k = complex(k)
        if self.zero:
            return 0j
        if k != self.ctx.k1:
            self._check_off_arc(k)
        th, w = self.quad.nodes(k)
        logs = branch_logs(k, th)
        return complex(1j / (2 * np.pi) * np.sum(w * self.quad.dweight(th) * logs))

    def log_k1(self, k):
        """ln_{k1}(k - k1): the branch ln_s(k - s) at s = k1."""
        k = complex(k)
        th, w = self.quad.nodes(k)
        return complex(branch_logs(k, np.concatenate([th, [self.ctx.arg_k1]]))[-1])

    def weight_integral(self, kernel=None):
        """int_i^{k1} G(s) kernel(s) ds along the arc."""
        th, w = self.quad.nodes()
        s = np.exp(1j * th)
        ker = 1.0 if kernel is None else kernel(s)
        return complex(np.sum(w * self.quad.weight(th) * ker * 1j * s))

    def measure_integral(self, fn):
        """int fn(s) d ln(1 + r1 r2)(s) along the arc; fn may be singular like log at k1."""
        th, w = self.quad.nodes(self.ctx.k1)
        s = np.exp(1j * th)
        return complex(np.sum(w * self.quad.dweight(th) * fn(s, th)))

    def delta33(self, k):
        k = complex(k)
        w = OMEGA
        num = self.delta_log(w * k) + self.delta_log(1 / (w**2 * k))
        den = self.delta_log(w**2 * k) + self.delta_log(1 / (w * k))
        return complex(np.exp(num - den))

    def Delta(self, k):
        """diag(Delta33(wk), Delta33(w^2 k), Delta33(k))."""
        k = complex(k)
        return np.diag([self.delta33(OMEGA * k), self.delta33(OMEGA**2 * k), self.delta33(k)])

    def boundary_ratio(self, theta, h0=None, levels=4):
        """delta_+/delta_- at e^{i theta} from offsets (1 +- h) e^{i theta}, Richardson in h."""
        if h0 is None:
            h0 = 10 * np.min(np.diff(self.spec.theta))
        hs = h0 / 2.0 ** np.arange(levels)
        vals = np.array([
            self.delta_log((1 + h) * np.exp(1j * theta)) - self.delta_log((1 - h) * np.exp(1j * theta))
            for h in hs
        ])
        # the log-ratio is analytic in h on each side; eliminate powers of h successively
        table = vals.copy()
        for m in range(1, levels):
            table = (2**m * table[1:] - table[:-1]) / (2**m - 1)
        return complex(np.exp(table[0]))

    def point_ratio(self, k):
        """delta(1/k)^2 delta(wk) delta(w^2 k) / (delta(1/(w^2 k)) delta(1/(wk))) as a log."""
        w = OMEGA
        return (
            2 * self.delta_log(1 / k)
            + self.delta_log(w * k)
            + self.delta_log(w**2 * k)
            - self.delta_log(1 / (w**2 * k))
            - self.delta_log(1 / (w * k))
        )


@dataclass
class ParametrixBundle:
    x: float
    tau: float
    nu: float
    chi_k1: complex
    d0: complex
    q: complex
    r2_k1: complex
    tilde_r_k1: float
    Y: np.ndarray
    zstar: complex
    log_ratio_k1: complex


def nu_of(spec, ctx):
    """-(1/2 pi) ln(1 + r1 r2(k1)), always <= 0."""
    if ctx.tau == 0.0:
        return 0.0
    return float(-spec.weight_at(ctx.arg_k1) / (2 * np.pi))


def sigma3_tilde_power(c):
    """diag(c, 1/c, 1): the matrix c^{sigma3~} with sigma3~ = diag(1, -1, 0)."""
    return np.diag([c, 1 / c, 1.0]).astype(complex)


def local_scalars(spec, ctx, x, glob=None):
    """nu, chi(k1), d0, q and Y at (x, tau)."""
    if x < 2:
        raise ValueError("x must be at least 2")
    glob = GlobalParametrix(spec, ctx) if glob is None else glob
    nu = nu_of(spec, ctx)
    r1, r2 = spec.values(ctx.arg_k1)
    r2 = complex(r2)
    tr = float(np.real(tilde_r(ctx.k1)))
    q = -r2 / np.sqrt(tr)
    if glob.zero:
        chi1, lr = 0j, 0j
    else:
        chi1 = glob.chi(ctx.k1)
        lr = glob.point_ratio(ctx.k1)
    log_d0 = 2 * chi1 - 1j * nu * np.log(x) - 2j * nu * np.log(ctx.zstar) + lr
    d0 = complex(np.exp(log_d0))
    phi1 = phase(2, 1, ctx.tau, ctx.k1)
    c = np.exp(-0.5 * log_d0) * tr**-0.25 * np.exp(-0.5 * x * phi1)
    return ParametrixBundle(
        x=float(x), tau=ctx.tau, nu=nu, chi_k1=chi1, d0=d0, q=complex(q), r2_k1=r2,
        tilde_r_k1=tr, Y=sigma3_tilde_power(c), zstar=ctx.zstar, log_ratio_k1=lr,
    )


def d1(glob, bundle, ctx, k):
    """e^{2(chi(k) - chi(k1))} zhat^{-2i nu} times the ratio of delta products at k and k1."""
    if glob.zero:
        return 1.0 + 0j
    _, zhat = zmap(1.0, ctx, k)
    nu = bundle.nu
    return complex(np.exp(2 * (glob.chi(k) - bundle.chi_k1) - 2j * nu * np.log(zhat) + glob.point_ratio(k) - bundle.log_ratio_k1))


def z_power(z, p):
    """z_(0)^p with the cut along [0, inf) and arg in (0, 2pi)."""
    ang = np.mod(np.angle(z), 2 * np.pi)
    return np.exp(p * (np.log(np.abs(z)) + 1j * ang))
