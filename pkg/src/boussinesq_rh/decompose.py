"""Split a reflection coefficient into an analytic part and a small remainder.

Both variants follow the same recipe.  Subtract a rational interpolant f0 that
matches r to high order at the anchor point(s), change variables to the real
phase phi along the contour, Fourier transform the rescaled difference F(phi),
and cut the inverse transform at s = x/4.  The low-frequency half continues
analytically off the contour (where Re Phi_21 >= 0), the high-frequency half is
the remainder.

ray: k in (-i inf, -i], anchor k* = -i, phi = -(i/2)(k - 1/k), tau frozen at 0.
arc: k = e^{i theta} on an arc where phi = (1 - tau cos theta) sin theta is monotone.
"""

import warnings
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .phase import phase

RAY_ANCHOR = -1j
RAY_POLE = 2j  # f0 has its only pole here, in the upper half plane


class SobolevWarning(UserWarning):
    """F does not look like an H^{N+1} function on the chosen grid."""


def taylor_coefficients(fn, k0, order, rho=0.5, n=256):
    """First ``order`` Taylor coefficients of an analytic fn at k0 (Cauchy integral by FFT)."""
    z = k0 + rho * np.exp(2j * np.pi * np.arange(n) / n)
    c = np.fft.fft(fn(z)) / n
    return c[:order] / rho ** np.arange(order)


def _binomial_series(a, power, order):
    """Taylor coefficients of (a + h)^power in h."""
    return np.array([comb(power, j) * a ** (power - j) for j in range(order)], dtype=complex)


def hermite_rational(r, order, anchor=RAY_ANCHOR, pole=RAY_POLE, extra_decay=None, rho=0.5):
    """f0 = P(k) / (k - pole)^D matching r to ``order`` terms at the anchor.

    deg P < order and D = order + extra_decay, so f0 = O(k^{-extra_decay - 1}).
    """
    extra_decay = order if extra_decay is None else extra_decay
    power = order + extra_decay
    c = taylor_coefficients(r, anchor, order, rho)
    p = np.convolve(c, _binomial_series(anchor - pole, power, order))[:order]

    def f0(k):
        k = np.asarray(k, dtype=complex)
        return np.polyval(p[::-1], k - anchor) / (k - pole) ** power

    return f0


def hermite_polynomial(r, order, ka, kb, rho=0.2):
    """Polynomial of degree 2*order - 1 matching r to ``order`` terms at ka and kb."""
    center, scale = (ka + kb) / 2, abs(kb - ka) / 2
    rows, rhs = [], []
    deg = 2 * order
    for kk in (ka, kb):
        tc = taylor_coefficients(r, kk, order, min(rho, scale))
        u0 = (kk - center) / scale
        for j in range(order):
            # j-th Taylor coefficient in k of sum a_n u^n
            row = [comb(n, j) * u0 ** (n - j) / scale**j if n >= j else 0 for n in range(deg)]
            rows.append(row)
            rhs.append(tc[j])
    a = np.linalg.solve(np.array(rows, dtype=complex), np.array(rhs, dtype=complex))

    def f0(k):
        u = (np.asarray(k, dtype=complex) - center) / scale
        return np.polyval(a[::-1], u)

    return f0


@dataclass
class Decomposition:
    """Result of a split at one x."""

    x: float
    N: int
    M: int
    variant: str
    k: np.ndarray  # contour points where the remainder was sampled
    remainder: np.ndarray
    linf: float
    l1: float
    analytic: object = field(repr=False)  # callable k -> analytic part
    f0: object = field(repr=False)


class _FourierSplit:
    """F on a uniform periodic phi-grid and its discrete Fourier transform."""

    def __init__(self, phi, F):
        self.phi, self.F = phi, F
        self.h = phi[1] - phi[0]
        self.Fh = np.fft.fft(F)
        self.s = 2 * np.pi * np.fft.fftfreq(phi.size, self.h)
        # coefficients c_m with F(phi) = sum c_m e^{i s_m phi}
        self.coef = self.Fh * np.exp(-1j * self.s * phi[0]) / phi.size

    def high_pass(self, s_cut):
        return np.fft.ifft(np.where(self.s >= s_cut, self.Fh, 0))

    def continue_low(self, s_cut, exponent, chunk=2048):
        """sum over s_m < s_cut of c_m exp(s_m * exponent), exponent = Phi_21 at the point."""
        keep = (self.s < s_cut) & (np.abs(self.coef) > 1e-20 * np.abs(self.coef).max())
        s, c = self.s[keep], self.coef[keep]
        exponent = np.atleast_1d(np.asarray(exponent, dtype=complex))
        out = np.empty(exponent.shape, dtype=complex)
        flat, res = exponent.ravel(), out.reshape(-1)
        for i in range(0, flat.size, chunk):
            e = flat[i : i + chunk]
            res[i : i + chunk] = np.exp(np.outer(e, s)) @ c
        return out

    def sobolev(self, order):
        return float(np.sqrt(np.sum(np.abs(self.s**order * self.Fh) ** 2) * self.h / self.phi.size))


class RayDecomposer:
    """Decomposition of r on (-i inf, -i]; r must be analytic near -i and decay along the ray."""

    variant = "ray"

    def __init__(self, r, N=2, M=None, h=2e-3, phi_span=800.0, max_M=8, near=0.1):
        self.r, self.N = r, N
        self.h, self.phi_span, self.near = h, phi_span, near
        M = N + 1 if M is None else M
        if M < N + 1:
            raise ValueError("M must be at least N + 1")
        while True:
            self._build(M, h)
            ok = self._sobolev_stable(M)
            if ok or M >= max_M:
                break
            M += 1
        if not ok:
            warnings.warn(f"F may not lie in H^{N + 1}: discrete norm unstable up to M = {M}", SobolevWarning, stacklevel=2)
        self.sobolev_ok = ok

    def _grid(self, h):
        n = int(round(2 * self.phi_span / h))
        return -1 + h * (np.arange(n) - n // 2)

    def _build(self, M, h):
        self.M = M
        m = 4 * M
        self.f0 = hermite_rational(self.r, m)
        f1 = lambda k: self.r(k) - self.f0(k)
        # f1 / (k - k*)^M near the anchor from its Taylor tail, to avoid cancellation
        tail = taylor_coefficients(f1, RAY_ANCHOR, m + 24)[m:]
        phi = self._grid(h)
        mask = phi < -1
        y = -phi[mask] + np.sqrt(phi[mask] ** 2 - 1)
        k = -1j * y
        dk = k - RAY_ANCHOR
        with np.errstate(all="ignore"):
            val = f1(k) / dk**M
        close = np.abs(dk) < self.near
        val[close] = np.polyval(tail[::-1], dk[close]) * dk[close] ** (m - M)
        F = np.zeros(phi.size, dtype=complex)
        F[mask] = k ** (2 * M) * val
        self.phi, self.mask, self.k = phi, mask, k
        self.split_core = _FourierSplit(phi, F)
        self.prefactor = dk**M / k ** (2 * M)

    def _sobolev_stable(self, M):
        a = self.split_core.sobolev(self.N + 1)
        saved = (self.phi, self.mask, self.k, self.split_core, self.prefactor)
        self._build(M, self.h / 2)
        b = self.split_core.sobolev(self.N + 1)
        self.phi, self.mask, self.k, self.split_core, self.prefactor = saved
        self.sobolev_norm = a
        return np.isfinite(a) and abs(b - a) <= 1e-2 * max(a, 1e-300)

    def _pre(self, k):
        k = np.asarray(k, dtype=complex)
        return (k - RAY_ANCHOR) ** self.M / k ** (2 * self.M)

    def split(self, x):
        x = float(x)
        if x < 1:
            raise ValueError("x must be at least 1")
        core = self.split_core
        rem = self.prefactor * core.high_pass(x / 4)[self.mask]
        y = np.abs(self.k)
        order = np.argsort(y)
        l1 = float(np.trapezoid(np.abs(rem[order]), y[order]))

        def analytic(k):
            k = np.asarray(k, dtype=complex)
            return self.f0(k) + self._pre(k) * core.continue_low(x / 4, phase(2, 1, 0.0, k)).reshape(k.shape)

        return Decomposition(x, self.N, self.M, self.variant, self.k, rem,
                             float(np.max(np.abs(rem))), l1, analytic, self.f0)


class ArcDecomposer:
    """Decomposition of r on the arc theta in [theta_a, theta_b] of the unit circle."""

    variant = "arc"

    def __init__(self, r, theta_a, theta_b, tau=0.0, N=2, M=None, h=5e-5, pad=4.0):
        self.r, self.N, self.tau = r, N, tau
        self.M = N + 1 if M is None else M
        if self.M < N + 1:
            raise ValueError("M must be at least N + 1")
        self.theta = np.linspace(theta_a, theta_b, 4001)
        ph = (1 - tau * np.cos(self.theta)) * np.sin(self.theta)
        d = np.diff(ph)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("phase is not monotone on the arc")
        self.ka, self.kb = np.exp(1j * theta_a), np.exp(1j * theta_b)
        m = 2 * self.M
        self.f0 = hermite_polynomial(r, m, self.ka, self.kb)
        lo, hi = min(ph[0], ph[-1]), max(ph[0], ph[-1])
        n = int(round((hi - lo + 2 * pad) / h))
        phi = lo - pad + h * np.arange(n)
        mask = (phi > lo) & (phi < hi)
        th = self._invert(phi[mask], ph)
        k = np.exp(1j * th)
        pre = ((k - self.ka) * (k - self.kb)) ** self.M
        F = np.zeros(n, dtype=complex)
        F[mask] = self._quotient(r, k, m)
        self.phi, self.mask, self.k, self.prefactor = phi, mask, k, pre
        self.split_core = _FourierSplit(phi, F)
        self.sobolev_norm = self.split_core.sobolev(N + 1)

    def _quotient(self, r, k, m, n=256, chunk=4096):
        """(r - f0) / ((k - ka)(k - kb))^M from the Hermite remainder integral.

        r - f0 = w(k) / (2 pi i) \oint r(s) / (w(s) (s - k)) ds with
        w = ((s - ka)(s - kb))^m, on a circle around both endpoints; this
        avoids dividing roundoff by a vanishing prefactor near ka and kb.
        """
        center = (self.ka + self.kb) / 2
        radius = 3 * abs(self.kb - self.ka) / 2
        s = center + radius * np.exp(2j * np.pi * np.arange(n) / n)
        ws = ((s - self.ka) * (s - self.kb)) ** m
        weights = r(s) * (s - center) / ws / n
        out = np.empty(k.shape, dtype=complex)
        for i in range(0, k.size, chunk):
            kk = k[i : i + chunk]
            g = (weights[None, :] / (s[None, :] - kk[:, None])).sum(axis=1)
            out[i : i + chunk] = ((kk - self.ka) * (kk - self.kb)) ** (m - self.M) * g
        return out

    def _invert(self, target, ph):
        # interpolate, then polish with Newton on (1 - tau cos) sin
        sgn = 1 if ph[-1] > ph[0] else -1
        th = np.interp(sgn * target, sgn * ph, self.theta)
        tau = self.tau
        for _ in range(4):
            g = (1 - tau * np.cos(th)) * np.sin(th) - target
            dg = np.cos(th) - tau * np.cos(2 * th)
            step = np.where(np.abs(dg) > 1e-8, g / np.where(dg == 0, 1, dg), 0)
            th = np.clip(th - step, self.theta.min(), self.theta.max())
        return th

    def split(self, x):
        x = float(x)
        core = self.split_core
        rem = self.prefactor * core.high_pass(x / 4)[self.mask]
        th = np.angle(self.k)
        order = np.argsort(th)
        l1 = float(np.trapezoid(np.abs(rem[order]), th[order]))

        def analytic(k):
            k = np.asarray(k, dtype=complex)
            pre = ((k - self.ka) * (k - self.kb)) ** self.M
            low = core.continue_low(x / 4, phase(2, 1, self.tau, k)).reshape(k.shape)
            return self.f0(k) + pre * low

        return Decomposition(x, self.N, self.M, self.variant, self.k, rem,
                             float(np.max(np.abs(rem))), l1, analytic, self.f0)


def decompose(r, x, N=2, variant="ray", **kw):
    """One-shot split; build a decomposer directly to reuse it across many x."""
    if variant == "ray":
        return RayDecomposer(r, N=N, **kw).split(x)
    if variant == "arc":
        return ArcDecomposer(r, N=N, **kw).split(x)
    raise ValueError(f"unknown variant {variant!r}")


def remainder_slope(decomposer, xs=tuple(4 * 2**j for j in range(7))):
    """Least-squares log-log slope of the remainder sup norm against x."""
    xs = np.asarray(xs, dtype=float)
    norms = np.array([decomposer.split(x).linf for x in xs])
    slope = np.polyfit(np.log(xs), np.log(norms), 1)[0]
    return float(slope), norms


def v1_samples(n, rng, rmax=5.0):
    """Random points of the closed sector arg k in [-pi/2, -pi/3], 1 <= |k| <= rmax."""
    ang = rng.uniform(-np.pi / 2, -np.pi / 3, n)
    rad = rng.uniform(1.0, rmax, n)
    return rad * np.exp(1j * ang)


def analytic_bound_ratio(decomposer, xs, k, tau=0.0):
    """max over k of |f_a| / (|k - k*|^M e^{(x/4)|Re Phi_21(tau,k)|}) for each x.

    The analytic part of a ray decomposition minus f0 is what the pointwise
    bound controls, so f0 is subtracted before taking the ratio.
    """
    k = np.asarray(k, dtype=complex)
    re = np.abs(np.real(phase(2, 1, tau, k)))
    out = []
    for x in xs:
        d = decomposer.split(x)
        fa = d.analytic(k) - d.f0(k)
        bound = np.abs(k - RAY_ANCHOR) ** decomposer.M * np.exp(x / 4 * re)
        out.append(float(np.max(np.abs(fa) / bound)))
    return np.array(out)


def ray_fixture(amplitude=0.4 + 0.2j):
    """An entire function with Gaussian decay along the negative imaginary axis."""

    def r(k):
        k = np.asarray(k, dtype=complex)
        return amplitude * np.exp(k**2 / 8 - 0.5 * k)

    return r
