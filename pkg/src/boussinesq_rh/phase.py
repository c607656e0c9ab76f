"""Roots of unity, phase functions, saddle points and the local conformal map.

All functions are pure and vectorize over ``k`` where that is natural.
"""

from dataclasses import dataclass

import numpy as np

OMEGA = np.exp(2j * np.pi / 3)
KAPPA = np.exp(1j * np.pi * np.arange(6) / 3)  # sixth roots of unity, kappa_1..kappa_6

# cyclic permutation (A^3 = I) and transposition (B^2 = I)
MAT_A = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=float)
MAT_B = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=float)

SQRT3 = np.sqrt(3.0)
_PAIRS = ((2, 1), (3, 1), (3, 2))
DEFAULT_TAU_MAX = 0.3


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of a phase function."""


class BranchError(ValueError):
    """Raised when a principal square root would be evaluated across its cut."""


def _nonzero(k):
    k = np.asarray(k, dtype=complex)
    if np.any(k == 0):
        raise DomainError("k = 0 is a singular point")
    return k


def lax_exponent(j, k):
    """x-exponent l_j(k) = i(w + 1/w)/(2 sqrt 3) with w = omega^j k."""
    if j not in (1, 2, 3):
        raise DomainError(f"index j must be 1, 2 or 3, got {j}")
    w = OMEGA**j * _nonzero(k)
    return 1j * (w + 1 / w) / (2 * SQRT3)


def time_exponent(j, k):
    """t-exponent z_j(k) = i(w^2 + w^-2)/(4 sqrt 3) with w = omega^j k."""
    if j not in (1, 2, 3):
        raise DomainError(f"index j must be 1, 2 or 3, got {j}")
    w = OMEGA**j * _nonzero(k)
    return 1j * (w**2 + w**-2) / (4 * SQRT3)


def phase(i, j, tau, k):
    """Scaled phase (l_i - l_j) + (z_i - z_j) tau for the pairs (2,1), (3,1), (3,2)."""
    if (i, j) not in _PAIRS:
        raise DomainError(f"phase pair must be one of {_PAIRS}, got {(i, j)}")
    k = _nonzero(k)
    if (i, j) == (2, 1):
        return (k**2 - 1) / (2 * k) - (k**4 - 1) * tau / (4 * k**2)
    return (lax_exponent(i, k) - lax_exponent(j, k)) + (time_exponent(i, k) - time_exponent(j, k)) * tau


def phase21_dk(tau, k):
    """First k-derivative of the (2,1) phase."""
    k = _nonzero(k)
    return 0.5 + 0.5 / k**2 - tau * (k / 2 + 1 / (2 * k**3))


def phase21_dkk(tau, k):
    """Second k-derivative of the (2,1) phase."""
    k = _nonzero(k)
    return -1 / k**3 - tau * (0.5 - 1.5 / k**4)


def phase_sign(i, j, tau, k, zero_band=1e-14):
    """Sign of Re phase(i, j, tau, k), with values inside the zero band mapped to 0."""
    re = np.real(phase(i, j, tau, k))
    return np.where(np.abs(re) <= zero_band, 0, np.sign(re)).astype(int)


@dataclass(frozen=True)
class PhaseContext:
    tau: float
    k1: complex
    k2: complex
    k3: float
    k4: float
    arg_k1: float
    zstar: complex
    hess: complex


def _check_tau(tau, tau_max):
    if not np.isfinite(tau) or tau < 0 or tau >= 1 or tau > tau_max:
        raise DomainError(f"tau must lie in [0, {tau_max}], got {tau}")


def saddle_points(tau, tau_max=DEFAULT_TAU_MAX):
    """Closed-form critical points of the (2,1) phase and the derived local data.

    At tau = 0 the formula has a removable 1/tau; the limit k1 = i, k2 = -i is
    returned and the real pair degenerates to (inf, 0).
    """
    tau = float(tau)
    _check_tau(tau, tau_max)
    if tau == 0.0:
        k1 = 1j
        k3 = np.inf
    else:
        s = np.sqrt(8 * tau**2 + 1)
        k1 = (1 - s + 1j * np.sqrt(2) * np.sqrt(4 * tau**2 - 1 + s)) / (4 * tau)
        k3 = (1 + s + np.sqrt(2) * np.sqrt(-4 * tau**2 + 1 + s)) / (4 * tau)
    hess, zstar = _hess_zstar(tau, k1)
    return PhaseContext(
        tau=tau,
        k1=complex(k1),
        k2=complex(np.conj(k1)),
        k3=float(k3),
        k4=0.0 if np.isinf(k3) else float(1 / k3),
        arg_k1=float(np.angle(k1)),
        zstar=zstar,
        hess=hess,
    )


def _hess_zstar(tau, k1):
    hess = complex((4 * tau - 3 * k1 - k1**3) / (4 * k1**4))
    root = np.sqrt(2) * np.exp(1j * np.pi / 4) * np.sqrt(hess)
    # exactly one of the two branches makes -i k1 zstar positive
    zstar = root if np.real(-1j * k1 * root) > 0 else -root
    return hess, complex(zstar)


def hessian_and_zstar(tau, tau_max=DEFAULT_TAU_MAX):
    """Return (hess, zstar): half the second derivative of the phase at k1 and the scaling z_star."""
    ctx = saddle_points(tau, tau_max)
    return ctx.hess, ctx.zstar


def zmap(x, ctx, k):
    """Local variable z near k1 with x (phase(k) - phase(k1)) = -i z^2 / 2.

    Returns (z, zhat) where z = zstar sqrt(x) (k - k1) zhat and zhat(k1) = 1.
    """
    k = np.asarray(k, dtype=complex)
    dk = k - ctx.k1
    dphi = phase(2, 1, ctx.tau, k) - phase(2, 1, ctx.tau, ctx.k1)
    at_saddle = np.abs(dk) < 1e-300
    safe = np.where(at_saddle, 1.0, dk)
    radicand = np.where(at_saddle, 1.0, 2j * dphi / (ctx.zstar**2 * safe**2))
    if np.any(np.real(radicand) <= 0):
        raise BranchError("zhat radicand reached the negative real axis; shrink the disk radius")
    zhat = np.sqrt(radicand)
    z = ctx.zstar * np.sqrt(x) * dk * zhat
    return z, zhat


def admissible_radius(ctx, eps=0.1, n_check=64, min_eps=1e-4):
    """Largest eps' = eps / 2^m for which zmap stays on its principal branch on the disk."""
    ring = np.exp(2j * np.pi * np.arange(n_check) / n_check)
    while eps >= min_eps:
        pts = ctx.k1 + np.concatenate([eps * ring, 0.5 * eps * ring])
        try:
            zmap(1.0, ctx, pts)
            return eps
        except BranchError:
            eps /= 2
    raise BranchError("no admissible disk radius found")
