"""Jump matrices of the row-vector RH problem and the algebra of its lens factorizations.

Reflection coefficients enter through *samplers*: any object with vectorized
``r1(k)`` and ``r2(k)`` methods.  Jumps are returned as arrays of shape
``k.shape + (3, 3)``.
"""

import numpy as np

from .phase import MAT_A, MAT_B, OMEGA, DomainError, phase

POLE_PROXIMITY = 1e-3
ON_CONTOUR_TOL = 1e-9

# ray segments: name -> (angle in degrees, outside the unit disk?)
RAYS = {
    "1'": (270, True), "1''": (90, False),
    "2'": (330, True), "2''": (150, False),
    "3'": (30, True), "3''": (210, False),
    "4'": (90, True), "4''": (270, False),
    "5'": (150, True), "5''": (330, False),
    "6'": (210, True), "6''": (30, False),
}
# circle segments: name -> list of (start, end) angles in degrees, mod 360
ARCS = {
    "7": [(90, 150), (270, 330)],
    "8": [(330, 390), (150, 210)],
    "9": [(30, 90), (210, 270)],
}
SEGMENTS = tuple(RAYS) + tuple(ARCS)


class PoleProximityError(ValueError):
    """An r2 argument sits on top of a pole at +-omega^2."""


class ZeroSampler:
    def r1(self, k):
        return np.zeros(np.shape(k), dtype=complex)

    def r2(self, k):
        return np.zeros(np.shape(k), dtype=complex)


class FunctionSampler:
    """Wrap two vectorized callables."""

    def __init__(self, r1, r2):
        self._r1, self._r2 = r1, r2

    def r1(self, k):
        return np.asarray(self._r1(np.asarray(k, dtype=complex)), dtype=complex)

    def r2(self, k):
        return np.asarray(self._r2(np.asarray(k, dtype=complex)), dtype=complex)


class RelationSampler:
    """r1 given analytically; r2 solved so that the circle relation

        r1(1/(wk)) + r2(wk) + r1(w^2 k) r2(1/k) = 0

    holds exactly on every orbit {w^j p, w^j / p}.  Used as the exact-r fixture
    for the factorization identities.
    """

    def __init__(self, r1):
        self._r1 = r1

    def r1(self, k):
        return np.asarray(self._r1(np.asarray(k, dtype=complex)), dtype=complex)

    def r2(self, k):
        k = np.asarray(k, dtype=complex)
        p = k.ravel()
        n = p.size
        orbit = np.empty((n, 6), dtype=complex)
        for j in range(3):
            orbit[:, j] = OMEGA**j * p
            orbit[:, 3 + j] = OMEGA**j / p
        # index of w*q and 1/q inside the orbit
        times_w = [1, 2, 0, 4, 5, 3]
        inv = [3, 5, 4, 0, 2, 1]
        mat = np.zeros((n, 6, 6), dtype=complex)
        rhs = np.empty((n, 6), dtype=complex)
        for m in range(6):
            q = orbit[:, m]
            mat[:, m, times_w[m]] += 1
            mat[:, m, inv[m]] += self.r1(OMEGA**2 * q)
            rhs[:, m] = -self.r1(1 / (OMEGA * q))
        y = np.linalg.solve(mat, rhs[..., None])[..., 0]
        return y[:, 0].reshape(k.shape)


def polynomial_r1(coeffs, powers):
    """r1(k) = sum c_n k^n, a Laurent polynomial used for synthetic fixtures."""
    coeffs = np.asarray(coeffs, dtype=complex)

    def r1(k):
        k = np.asarray(k, dtype=complex)
        return sum(c * k**p for c, p in zip(coeffs, powers))

    return r1


def random_relation_sampler(rng, scale=0.3):
    coeffs = scale * (rng.standard_normal(5) + 1j * rng.standard_normal(5)) / 2
    return RelationSampler(polynomial_r1(coeffs, (-2, -1, 0, 1, 2)))


# ---------------------------------------------------------------- geometry


def segment_of(k, tol=ON_CONTOUR_TOL):
    """Name of the contour segment containing the single point k."""
    k = complex(k)
    r = abs(k)
    if r == 0:
        raise DomainError("k = 0 is an intersection point")
    ang = np.degrees(np.angle(k)) % 360
    if abs(r - 1) < tol:
        for name, arcs in ARCS.items():
            for a, b in arcs:
                if a < ang < b or a < ang + 360 < b:
                    return name
        raise DomainError(f"k = {k} is an intersection point of the contour")
    for name, (a, outside) in RAYS.items():
        d = abs((ang - a + 180) % 360 - 180)
        if np.radians(d) * r < tol and outside == (r > 1):
            return name
    raise DomainError(f"k = {k} is not on the jump contour")


def sample_segment(name, n, rng, rmin=0.2, rmax=3.0):
    """n random points in the interior of a segment."""
    if name in RAYS:
        a, outside = RAYS[name]
        rad = rng.uniform(1.05, rmax, n) if outside else rng.uniform(rmin, 0.95, n)
        return rad * np.exp(1j * np.radians(a))
    arcs = ARCS[name]
    pick = rng.integers(0, len(arcs), n)
    lo = np.array([arcs[i][0] for i in pick]) + 2
    hi = np.array([arcs[i][1] for i in pick]) - 2
    return np.exp(1j * np.radians(rng.uniform(lo, hi)))


# ---------------------------------------------------------------- jumps


class _Ctx:
    """Cached r values and exponentials at a fixed (x, t, k)."""

    def __init__(self, sampler, x, t, k):
        self.s = sampler
        self.k = np.asarray(k, dtype=complex)
        tau = t / x
        self.e21 = np.exp(x * phase(2, 1, tau, self.k))
        self.e31 = np.exp(x * phase(3, 1, tau, self.k))
        self.e32 = np.exp(x * phase(3, 2, tau, self.k))
        self._cache = {}

    def arg(self, code):
        k, w = self.k, OMEGA
        return {
            "k": k, "wk": w * k, "w2k": w**2 * k,
            "1/k": 1 / k, "1/wk": 1 / (w * k), "1/w2k": 1 / (w**2 * k),
        }[code]

    def r1(self, code):
        key = (1, code)
        if key not in self._cache:
            self._cache[key] = self.s.r1(self.arg(code))
        return self._cache[key]

    def r2(self, code):
        key = (2, code)
        if key not in self._cache:
            p = self.arg(code)
            near = np.minimum(np.abs(p - OMEGA**2), np.abs(p + OMEGA**2))
            if np.any(near < POLE_PROXIMITY):
                raise PoleProximityError(f"r2 evaluated within {POLE_PROXIMITY} of a pole at +-omega^2")
            self._cache[key] = self.s.r2(p)
        return self._cache[key]

    def f(self, code):
        # f at k, wk or w2k: f(p) = 1 + r1r2(p) + r1r2(1/(w^2 p))
        partner = {"k": "1/w2k", "wk": "1/k", "w2k": "1/wk"}[code]
        return 1 + self.r1(code) * self.r2(code) + self.r1(partner) * self.r2(partner)

    def eye(self):
        out = np.zeros(self.k.shape + (3, 3), dtype=complex)
        out[..., 0, 0] = out[..., 1, 1] = out[..., 2, 2] = 1
        return out


def _assemble(c, entries):
    out = c.eye()
    for (i, j), val in entries.items():
        out[..., i - 1, j - 1] = val
    return out


def _v_ray(c, name):
    r1, r2 = c.r1, c.r2
    e21, e31, e32 = c.e21, c.e31, c.e32
    table = {
        "1'": {(1, 2): -r1("k") / e21},
        "1''": {(2, 1): r1("1/k") * e21},
        "2'": {(2, 3): -r2("1/wk") / e32},
        "2''": {(3, 2): r2("wk") * e32},
        "3'": {(3, 1): -r1("w2k") * e31},
        "3''": {(1, 3): r1("1/w2k") / e31},
        "4'": {(1, 2): -r2("1/k") / e21},
        "4''": {(2, 1): r2("k") * e21},
        "5'": {(2, 3): -r1("wk") / e32},
        "5''": {(3, 2): r1("1/wk") * e32},
        "6'": {(3, 1): -r2("1/w2k") * e31},
        "6''": {(1, 3): r2("w2k") / e31},
    }
    return _assemble(c, table[name])


def _v_arc(c, name):
    r1, r2 = c.r1, c.r2
    e21, e31, e32 = c.e21, c.e31, c.e32
    if name == "7":
        return _assemble(c, {
            (1, 2): -r1("k") / e21,
            (1, 3): r2("w2k") / e31,
            (2, 1): -r2("k") * e21,
            (2, 2): 1 + r1("k") * r2("k"),
            (2, 3): (r2("1/wk") - r2("k") * r2("w2k")) / e32,
            (3, 1): r1("w2k") * e31,
            (3, 2): (r1("1/wk") - r1("k") * r1("w2k")) * e32,
            (3, 3): c.f("w2k"),
        })
    if name == "8":
        return _assemble(c, {
            (1, 1): c.f("k"),
            (1, 2): r1("k") / e21,
            (1, 3): (r1("1/w2k") - r1("k") * r1("wk")) / e31,
            (2, 1): r2("k") * e21,
            (2, 3): -r1("wk") / e32,
            (3, 1): (r2("1/w2k") - r2("wk") * r2("k")) * e31,
            (3, 2): -r2("wk") * e32,
            (3, 3): 1 + r1("wk") * r2("wk"),
        })
    return _assemble(c, {
        (1, 1): 1 + r1("w2k") * r2("w2k"),
        (1, 2): (r2("1/k") - r2("wk") * r2("w2k")) / e21,
        (1, 3): -r2("w2k") / e31,
        (2, 1): (r1("1/k") - r1("wk") * r1("w2k")) * e21,
        (2, 2): c.f("wk"),
        (2, 3): r1("wk") / e32,
        (3, 1): -r1("w2k") * e31,
        (3, 2): r2("wk") * e32,
    })


def build_jump(sampler, x, t, k, segment):
    """Jump matrix v on the named segment, evaluated at k (the formula is applied as written)."""
    if segment not in SEGMENTS:
        raise DomainError(f"unknown segment {segment!r}")
    c = _Ctx(sampler, x, t, k)
    return _v_ray(c, segment) if segment in RAYS else _v_arc(c, segment)


def jump(sampler, x, t, k):
    """v at points of the contour, with the segment found from each point's position."""
    k = np.atleast_1d(np.asarray(k, dtype=complex))
    names = np.array([segment_of(p) for p in k.ravel()]).reshape(k.shape)
    out = np.empty(k.shape + (3, 3), dtype=complex)
    for name in np.unique(names):
        mask = names == name
        out[mask] = build_jump(sampler, x, t, k[mask], name)
    return out


# ---------------------------------------------------------------- checks


def _maxabs(a):
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def determinant_residuals(sampler, x, t, k_by_segment):
    """max |det v - 1| per segment."""
    return {
        name: _maxabs(np.linalg.det(build_jump(sampler, x, t, k, name)) - 1)
        for name, k in k_by_segment.items()
    }


def check_symmetries(sampler, x, t, k_samples):
    """Residuals of v(k) = A v(wk) A^-1 and v(k) = B v(1/k)^-1 B over samples on the contour."""
    k = np.atleast_1d(np.asarray(k_samples, dtype=complex))
    v = jump(sampler, x, t, k)
    va = MAT_A @ jump(sampler, x, t, OMEGA * k) @ MAT_A.T
    vb = MAT_B @ np.linalg.inv(jump(sampler, x, t, 1 / k)) @ MAT_B
    return {"A": _maxabs(v - va), "B": _maxabs(v - vb), "samples": int(k.size)}


class ExactFactors:
    """All lens factors with the analytic/remainder splits replaced by r itself.

    Remainder parts vanish, so v_2^(2), v_8^(2) are the identity and
    v_5^(2) is diagonal.
    """

    def __init__(self, sampler, x, t, k):
        self.c = _Ctx(sampler, x, t, k)
        self.sampler, self.x, self.t = sampler, x, t

    def v(self, name):
        return _v_ray(self.c, name) if name in RAYS else _v_arc(self.c, name)

    def rhat(self, j, code="k"):
        c = self.c
        r = c.r1(code) if j == 1 else c.r2(code)
        return r / (1 + c.r1(code) * c.r2(code))

    def m(self, entries):
        return _assemble(self.c, entries)

    # first transformation
    def v1a_1(self):
        return self.m({(2, 1): self.c.r1("1/k") * self.c.e21})

    def v4a_1(self):
        return self.m({(1, 2): -self.c.r2("1/k") / self.c.e21})

    # second transformation
    def v1_2(self):
        c = self.c
        return self.m({
            (1, 2): c.r2("1/k") / c.e21,
            (3, 1): -c.r1("w2k") * c.e31,
            (3, 2): c.r2("wk") * c.e32,
        })

    def v3_2(self):
        c = self.c
        return self.m({
            (1, 3): -c.r2("w2k") / c.e31,
            (2, 1): c.r1("1/k") * c.e21,
            (2, 3): c.r1("wk") / c.e32,
        })

    def v4_2(self):
        c = self.c
        return self.m({
            (1, 2): self.rhat(1) / c.e21,
            (3, 1): c.r2("1/w2k") * c.e31,
            (3, 2): -c.r1("1/wk") * c.e32,
        })

    def v5_2(self):
        g = 1 + self.c.r1("k") * self.c.r2("k")
        return self.m({(1, 1): g, (2, 2): 1 / g})

    def v6_2(self):
        c = self.c
        return self.m({
            (1, 3): c.r1("1/w2k") / c.e31,
            (2, 1): self.rhat(2) * c.e21,
            (2, 3): -c.r2("1/wk") / c.e32,
        })

    def v7_2(self):
        c = self.c
        return self.m({
            (2, 1): -c.r2("k") * c.e21,
            (3, 1): c.r1("w2k") * c.e31,
            (3, 2): c.r1("1/wk") * c.e32,
        })

    def v9_2(self):
        c = self.c
        return self.m({
            (1, 2): -c.r1("k") / c.e21,
            (1, 3): c.r2("w2k") / c.e31,
            (2, 3): c.r2("1/wk") / c.e32,
        })

    def v1s_2(self):
        c = self.c
        return self.m({
            (3, 1): -(c.r1("w2k") + c.r2("k") * c.r1("1/wk") + c.r2("1/w2k")) * c.e31,
        })

    # third transformation
    def v4_3(self):
        return self.m({(1, 2): self.rhat(1) / self.c.e21})

    def v4u_3(self):
        c = self.c
        return self.m({(3, 1): c.r2("1/w2k") * c.e31, (3, 2): -c.r1("1/wk") * c.e32})

    def v6d_3(self):
        c = self.c
        return self.m({(1, 3): c.r1("1/w2k") / c.e31, (2, 3): -c.r2("1/wk") / c.e32})

    def v6_3(self):
        return self.m({(2, 1): self.rhat(2) * self.c.e21})

    def v7_3(self):
        return self.m({(2, 1): -self.c.r2("k") * self.c.e21})

    def v7u_3(self):
        c = self.c
        return self.m({
            (3, 1): (c.r1("w2k") + c.r1("1/wk") * c.r2("k")) * c.e31,
            (3, 2): c.r1("1/wk") * c.e32,
        })

    def v9_3(self):
        return self.m({(1, 2): -self.c.r1("k") / self.c.e21})

    def v9d_3(self):
        c = self.c
        return self.m({
            (1, 3): (c.r2("w2k") + c.r1("k") * c.r2("1/wk")) / c.e31,
            (2, 3): c.r2("1/wk") / c.e32,
        })


def _v1s_lhs(sampler, x, t, k):
    """v_7^(2)(k)^-1 A B v_9^(2)(1/(wk))^-1 B A^-1."""
    left = np.linalg.inv(ExactFactors(sampler, x, t, k).v7_2())
    right = np.linalg.inv(ExactFactors(sampler, x, t, 1 / (OMEGA * k)).v9_2())
    ab = MAT_A @ MAT_B
    return left @ ab @ right @ np.linalg.inv(ab)


# name -> (lhs, rhs) builders on an ExactFactors instance
FACTORIZATIONS = {
    "v1''=v1a(1)v1r(1)": (lambda e: e.v("1''"), lambda e: e.v1a_1()),
    "v4'=v4a(1)v4r(1)": (lambda e: e.v("4'"), lambda e: e.v4a_1()),
    "v2(1)=v3(2)v2(2)v1(2)": (lambda e: e.v("9"), lambda e: e.v3_2() @ e.v1_2()),
    "v5(1)=v6(2)v5(2)v4(2)": (lambda e: np.linalg.inv(e.v("7")), lambda e: e.v6_2() @ e.v5_2() @ e.v4_2()),
    "v8(1)=v7(2)v8(2)v9(2)": (lambda e: e.v("7"), lambda e: e.v7_2() @ e.v9_2()),
    "v4(2)=v4(3)v4u(3)": (lambda e: e.v4_2(), lambda e: e.v4_3() @ e.v4u_3()),
    "v6(2)=v6d(3)v6(3)": (lambda e: e.v6_2(), lambda e: e.v6d_3() @ e.v6_3()),
    "v7(2)=v7u(3)v7(3)": (lambda e: e.v7_2(), lambda e: e.v7u_3() @ e.v7_3()),
    "v9(2)=v9(3)v9d(3)": (lambda e: e.v9_2(), lambda e: e.v9_3() @ e.v9d_3()),
    "v1s(2)": (None, lambda e: e.v1s_2()),
}


def factorization_samples(ctx, n, rng):
    """Random admissible k for each identity, on the arc or ray where it is used."""
    a1 = float(ctx.arg_k1)
    arc = lambda lo, hi: np.exp(1j * rng.uniform(lo, hi, n))
    lo_cut, hi_cut = np.pi / 3 + 1e-3, 2 * np.pi / 3 - 1e-3
    return {
        "v1''=v1a(1)v1r(1)": 1j * rng.uniform(0.1, 0.95, n),
        "v4'=v4a(1)v4r(1)": 1j * rng.uniform(1.05, 4.0, n),
        "v2(1)=v3(2)v2(2)v1(2)": arc(lo_cut, np.pi / 2),
        "v5(1)=v6(2)v5(2)v4(2)": arc(np.pi / 2, max(a1, np.pi / 2 + 1e-3)),
        "v8(1)=v7(2)v8(2)v9(2)": arc(a1, hi_cut),
        "v4(2)=v4(3)v4u(3)": arc(np.pi / 2, hi_cut),
        "v6(2)=v6d(3)v6(3)": arc(np.pi / 2, hi_cut),
        "v7(2)=v7u(3)v7(3)": arc(np.pi / 2, hi_cut),
        "v9(2)=v9(3)v9d(3)": arc(np.pi / 2, hi_cut),
        "v1s(2)": arc(lo_cut, hi_cut),
    }


def check_factorizations(sampler, x, t, k_samples):
    """Max |lhs - rhs| per lens factorization, with r_a = r and r_r = 0.

    ``k_samples`` maps identity names (keys of FACTORIZATIONS) to sample arrays;
    a single array is used for every identity.
    """
    if not isinstance(k_samples, dict):
        k_samples = {name: k_samples for name in FACTORIZATIONS}
    out = {}
    for name, k in k_samples.items():
        k = np.atleast_1d(np.asarray(k, dtype=complex))
        lhs_fn, rhs_fn = FACTORIZATIONS[name]
        e = ExactFactors(sampler, x, t, k)
        lhs = _v1s_lhs(sampler, x, t, k) if lhs_fn is None else lhs_fn(e)
        scale = max(1.0, _maxabs(lhs))
        out[name] = _maxabs(lhs - rhs_fn(e)) / scale
    return out
