"""Parabolic-cylinder solution of the model problem on the cross.

The upper-left 2x2 block is built sector by sector.  With
a = -i nu and D(z) = exp((-i nu ln z + i z^2 / 4) sigma3), Phi = m D solves
Phi' = [[iz/2, -i b12], [i b21, -iz/2]] Phi, whose columns are Weber functions
D_a(e^{-i pi/4} z) (or of -e^{-i pi/4} z) and D_{-a}(e^{i pi/4} z) (or of
-e^{i pi/4} z).  In each quarter-plane the pair whose large-z expansion holds
there is used, normalized against D with a log branch continuous across the
sector.  The jumps between sectors are then a check, not an input.
"""

import cmath

import mpmath as mp
import numpy as np
from scipy.special import loggamma

from .parametrix import z_power

# ray j points along e^{i RAY_ANGLE[j]}; sector j sits counterclockwise of ray j
RAY_ANGLE = {1: np.pi / 4, 2: 3 * np.pi / 4, 3: 5 * np.pi / 4, 4: 7 * np.pi / 4}
_SECTOR_CENTER = {0: 0.0, 1: np.pi / 2, 2: np.pi, 3: 3 * np.pi / 2}
# (flip first column argument, flip second column argument)
_SECTOR_FLIP = {0: (False, False), 1: (False, True), 2: (True, True), 3: (True, False)}
_RAY_SIDES = {1: (0, 1), 2: (1, 2), 3: (2, 3), 4: (3, 0)}  # (minus side, plus side)
NU_ZERO = 1e-10


def _log_near(z, center):
    ang = cmath.phase(z)
    while ang < center - np.pi:
        ang += 2 * np.pi
    while ang > center + np.pi:
        ang -= 2 * np.pi
    return mp.log(abs(z)) + 1j * ang


def gamma_imag(nu):
    """Gamma(i nu) through the principal log-gamma."""
    return complex(np.exp(loggamma(1j * nu)))


def sector_of(z):
    ang = np.mod(cmath.phase(z), 2 * np.pi)
    if ang < np.pi / 4 or ang > 7 * np.pi / 4:
        return 0
    return int((ang - np.pi / 4) // (np.pi / 2)) + 1


def on_cross(z, tol=1e-14):
    """True when z lies on one of the four rays (angles pi/4 + j pi/2)."""
    if abs(z) < tol:
        return True
    ang = np.mod(cmath.phase(z), np.pi / 2)
    return abs(ang - np.pi / 4) < tol


class ModelProblem:
    """The model solution for one value of q."""

    def __init__(self, q, dps=30):
        self.q = complex(q)
        self.p = 1 + abs(self.q) ** 2
        self.nu = -np.log(self.p) / (2 * np.pi)
        self.trivial = abs(self.nu) < NU_ZERO
        self.dps = dps
        if self.trivial:
            self.beta12 = self.beta21 = 0j
        else:
            nu = self.nu
            self.beta12 = np.sqrt(2 * np.pi) * np.exp(1j * np.pi / 4) * np.exp(1.5 * np.pi * nu) / (self.q * gamma_imag(nu))
            self.beta21 = np.sqrt(2 * np.pi) * np.exp(-1j * np.pi / 4) * np.exp(-2.5 * np.pi * nu) / (-np.conj(self.q) * gamma_imag(-nu))

    @property
    def m1(self):
        out = np.zeros((3, 3), dtype=complex)
        out[0, 1], out[1, 0] = self.beta12, self.beta21
        return out

    def _block(self, z, sector):
        a = mp.mpc(0, -self.nu)
        center = _SECTOR_CENTER[sector]
        flip1, flip2 = _SECTOR_FLIP[sector]
        zc = cmath.exp(1j * center)
        log_c = _log_near(zc, center)
        s1 = -1 if flip1 else 1
        zeta = s1 * mp.exp(-1j * mp.pi / 4) * z
        c1 = mp.exp(a * log_c) / mp.exp(a * mp.log(s1 * mp.exp(-1j * mp.pi / 4) * zc))
        f11 = c1 * mp.pcfd(a, zeta)
        f21 = s1 * 1j * c1 * a * mp.exp(-1j * mp.pi / 4) * mp.pcfd(a - 1, zeta) / self.beta12
        s2 = -1 if flip2 else 1
        xi = s2 * mp.exp(1j * mp.pi / 4) * z
        c2 = mp.exp(-a * log_c) / mp.exp(-a * mp.log(s2 * mp.exp(1j * mp.pi / 4) * zc))
        f22 = c2 * mp.pcfd(-a, xi)
        f12 = -c2 * s2 * mp.exp(1j * mp.pi / 4) * a * mp.pcfd(-a - 1, xi) / (1j * self.beta21)
        lz = _log_near(z, center)
        e1 = mp.exp(-a * lz - 1j * z**2 / 4)  # inverse of D_11
        e2 = mp.exp(a * lz + 1j * z**2 / 4)
        return np.array([[complex(f11 * e1), complex(f12 * e2)], [complex(f21 * e1), complex(f22 * e2)]])

    def evaluate(self, z, sector=None):
        """m^X(q, z) as a 3x3 matrix; ``sector`` forces the continuation from that sector."""
        z = complex(z)
        out = np.eye(3, dtype=complex)
        if self.trivial:
            return out
        if abs(z) > 1e3:
            raise OverflowError("model solution is only evaluated for |z| <= 1000")
        if sector is None:
            sector = sector_of(z)
        with mp.workdps(self.dps):
            out[:2, :2] = self._block(mp.mpc(z.real, z.imag), sector)
        return out

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        flat = [self.evaluate(v) for v in z.ravel()]
        return np.array(flat).reshape(z.shape + (3, 3))

    def jump(self, z, ray):
        """v^X on ray 1..4 at z (z_(0) branch with arg in (0, 2 pi))."""
        z = complex(z)
        q, p = self.q, self.p
        zp = complex(z_power(z, 2j * self.nu))  # z^{2 i nu}
        e = cmath.exp(1j * z**2 / 2)
        v = np.eye(3, dtype=complex)
        if ray == 1:
            v[0, 1] = -np.conj(q) / p / zp * e
        elif ray == 2:
            v[1, 0] = q * zp / e
        elif ray == 3:
            v[0, 1] = np.conj(q) / zp * e
        elif ray == 4:
            v[1, 0] = -q / p * zp / e
        else:
            raise ValueError("ray must be 1..4")
        return v

    def boundary_values(self, z, ray):
        """(m_-, m_+) on a ray, by analytic continuation from the adjacent sectors."""
        minus, plus = _RAY_SIDES[ray]
        return self.evaluate(z, minus), self.evaluate(z, plus)

    def jump_residual(self, z, ray):
        m_minus, m_plus = self.boundary_values(z, ray)
        return float(np.max(np.abs(m_plus - m_minus @ self.jump(z, ray))))


def model_mX(q, z):
    return ModelProblem(q)(z)


def cross_points(radii=(0.25, 0.5, 1.0, 2.0, 3.5, 5.0)):
    """(z, ray) pairs: ``len(radii)`` points on each of the four rays."""
    return [(r * cmath.exp(1j * RAY_ANGLE[j]), j) for j in (1, 2, 3, 4) for r in radii]
