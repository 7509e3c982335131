"""
Elliptic integrals, Jacobi elliptic functions and the Weierstrass family for real cubic roots.

Scalars in give Python scalars out; numpy arrays in give arrays of the same shape.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike
from scipy import special

from app.config import settings
from app.errors import DegenerateRoots, DomainError, NoSolutionInStrip, PoleAtOne, PoleError
from app.models import EllipticContext, Strip

logger = logging.getLogger(__name__)

_EPS = float(np.finfo(float).eps)
_MAX_ITER = 64


def _as_array(x: ArrayLike, dtype=float) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=dtype)
    return arr, arr.ndim == 0


def _out(arr: np.ndarray, scalar: bool):
    return arr.item() if scalar else arr


# ---------------------------------------------------------------------------
# Complete and incomplete elliptic integrals
# ---------------------------------------------------------------------------


def _agm(a: float, b: float) -> float:
    for _ in range(_MAX_ITER):
        if abs(a - b) <= 4.0 * _EPS * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def _k_real(p: float) -> float:
    """K(p) for real p < 1."""
    if p < 0.0:
        p_prime = 1.0 - p
        return _k_real(-p / p_prime) / math.sqrt(p_prime)
    if p >= 1.0:
        raise PoleAtOne(f"K(p) is infinite at p = {p}")
    return math.pi / (2.0 * _agm(1.0, math.sqrt(1.0 - p)))


def _e_real(m: float) -> float:
    """E(m) for real m <= 1 from the AGM with the c_n correction sum."""
    if m < 0.0:
        m_prime = 1.0 - m
        return math.sqrt(m_prime) * _e_real(-m / m_prime)
    if m == 1.0:
        return 1.0
    a, b = 1.0, math.sqrt(1.0 - m)
    weight = 0.5
    correction = weight * m
    for _ in range(_MAX_ITER):
        c = 0.5 * (a - b)
        if abs(c) <= _EPS * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        weight *= 2.0
        correction += weight * c * c
    return math.pi / (2.0 * a) * (1.0 - correction)


def ellint_K(p: float, pole_tolerance: float | None = None) -> complex:
    """Complete elliptic integral of the first kind, K(p) = int_0^{pi/2} (1 - p sin^2)^(-1/2).

    Args:
        p: Modulus squared, any finite real.
        pole_tolerance: Width of the window around p = 1 that raises PoleAtOne.

    Returns:
        Real K for p < 1, and [K(1/p) - i K(1 - 1/p)] / sqrt(p) for p > 1.
    """
    tol = settings.pole_tolerance if pole_tolerance is None else pole_tolerance
    if not math.isfinite(p):
        raise DomainError(f"K(p) needs a finite modulus, got {p}")
    if abs(p - 1.0) < tol:
        raise PoleAtOne(f"K(p) has a logarithmic pole at p = 1 (p = {p})")
    if p > 1.0:
        return complex(_k_real(1.0 / p), -_k_real(1.0 - 1.0 / p)) / math.sqrt(p)
    return complex(_k_real(p), 0.0)


def ellint_E(m: float) -> float:
    """Complete elliptic integral of the second kind for m <= 1."""
    if not math.isfinite(m) or m > 1.0:
        raise DomainError(f"E(m) requires m <= 1, got {m}")
    return _e_real(m)


def _modulus(e1: float, e2: float, e3: float) -> float:
    """p = (e2 - e3)/(e1 - e3), snapped to 0 or 1 within the degenerate tolerance."""
    p = (e2 - e3) / (e1 - e3)
    tol = settings.degenerate_tolerance
    if p < tol:
        return 0.0
    if p > 1.0 - tol:
        return 1.0
    return p


def _split_amplitude(phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """phi = phi0 + j*pi with |phi0| <= pi/2."""
    j = np.rint(phi / math.pi)
    return phi - j * math.pi, j


def _carlson_terms(phi: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    phi0, j = _split_amplitude(phi)
    s = np.sin(phi0)
    return s, np.cos(phi0) ** 2, j


def ellint_F(phi: ArrayLike, m: float) -> float | np.ndarray:
    """Incomplete elliptic integral of the first kind F(phi|m), m <= 1.

    scipy covers 0 <= m <= 1; negative m goes through Carlson's R_F.
    """
    if m > 1.0:
        raise DomainError(f"F(phi|m) requires m <= 1, got {m}")
    arr, scalar = _as_array(phi)
    if m >= 0.0:
        return _out(np.asarray(special.ellipkinc(arr, m)), scalar)
    s, c2, j = _carlson_terms(arr)
    value = s * special.elliprf(c2, 1.0 - m * s * s, 1.0) + 2.0 * j * _k_real(m)
    return _out(np.asarray(value), scalar)


def ellint_E_incomplete(phi: ArrayLike, m: float) -> float | np.ndarray:
    """Incomplete elliptic integral of the second kind E(phi|m), m <= 1."""
    if m > 1.0:
        raise DomainError(f"E(phi|m) requires m <= 1, got {m}")
    arr, scalar = _as_array(phi)
    if m >= 0.0:
        return _out(np.asarray(special.ellipeinc(arr, m)), scalar)
    s, c2, j = _carlson_terms(arr)
    y = 1.0 - m * s * s
    value = (
        s * special.elliprf(c2, y, 1.0)
        - (m / 3.0) * s**3 * special.elliprd(c2, y, 1.0)
        + 2.0 * j * _e_real(m)
    )
    return _out(np.asarray(value), scalar)


# ---------------------------------------------------------------------------
# Jacobi elliptic functions and Jacobi zeta
# ---------------------------------------------------------------------------


def _sncndn(u: np.ndarray, m: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if m >= 0.0:
        sn, cn, dn, _ = special.ellipj(u, m)
        return sn, cn, dn
    # imaginary-modulus reduction: sn(u|m) = sd(u sqrt(1-m) | mu) / sqrt(1-m)
    root = math.sqrt(1.0 - m)
    sn, cn, dn, _ = special.ellipj(u * root, -m / (1.0 - m))
    return sn / (dn * root), cn / dn, 1.0 / dn


def jacobi_sn_cn_dn(xi: ArrayLike, m: float):
    """Jacobi sn, cn, dn with parameter m <= 1 (negative m by the sd reduction).

    Args:
        xi: Real argument, scalar or array.
        m: Parameter (modulus squared).

    Returns:
        Tuple (sn, cn, dn) with the shape of xi.
    """
    if not math.isfinite(m) or m > 1.0:
        raise DomainError(f"Jacobi functions require m <= 1, got {m}")
    u, scalar = _as_array(xi)
    sn, cn, dn = (np.asarray(v, dtype=float) for v in _sncndn(u, m))
    return _out(sn, scalar), _out(cn, scalar), _out(dn, scalar)


def _zeta_unit(u: np.ndarray, m: float) -> np.ndarray:
    if m == 0.0:
        return np.zeros_like(u)
    k = _k_real(m)
    u0 = u - 2.0 * k * np.rint(u / (2.0 * k))
    sn, cn, _, _ = special.ellipj(u0, m)
    amplitude = np.arctan2(sn, cn)
    return special.ellipeinc(amplitude, m) - (_e_real(m) / k) * u0


def jacobi_zeta(xi: ArrayLike, m: float) -> float | np.ndarray:
    """Jacobi zeta Z(xi|m) = int_0^xi dn^2 - (E/K) xi.

    Negative m goes through the imaginary-modulus transformation, which the
    vertical coordinate of extended-branch knots needs.
    """
    if not math.isfinite(m) or m >= 1.0:
        raise DomainError(f"Jacobi zeta requires m < 1, got {m}")
    u, scalar = _as_array(xi)
    if m >= 0.0:
        return _out(np.asarray(_zeta_unit(u, m)), scalar)
    root = math.sqrt(1.0 - m)
    n = -m / (1.0 - m)
    t = u * root
    sn, cn, dn, _ = special.ellipj(t, n)
    return _out(np.asarray(root * (_zeta_unit(t, n) - n * sn * cn / dn)), scalar)


# ---------------------------------------------------------------------------
# Weierstrass functions through Jacobi theta series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _ThetaLattice:
    """Rectangular lattice with half-periods w1 (real) and i*w3, nome q <= exp(-pi).

    The theta series are scaled by q^(1/4) so q = 0 (w3 infinite) is exact.
    """

    w1: float
    w3: float
    e3: float
    q: float
    eta1: float
    th2_0: float
    th3_0: float
    th1p_0: float
    n: np.ndarray
    sign: np.ndarray
    qpow: np.ndarray
    qsq: np.ndarray

    @classmethod
    def build(cls, e1: float, e2: float, e3: float, terms: int) -> "_ThetaLattice":
        d = e1 - e3
        p = _modulus(e1, e2, e3)
        w1 = _k_real(p) / math.sqrt(d)
        if p == 0.0:
            w3, q, terms = math.inf, 0.0, 1
        else:
            w3 = _k_real(1.0 - p) / math.sqrt(d)
            q = math.exp(-math.pi * w3 / w1)
        n = np.arange(terms, dtype=float)
        sign = np.where(n % 2 == 0, 1.0, -1.0)
        qpow = q ** (n * (n + 1.0))
        qsq = q ** (n * n)
        odd = 2.0 * n + 1.0
        th1p_0 = float(np.sum(sign * odd * qpow))
        th1ppp_0 = -float(np.sum(sign * odd**3 * qpow))
        eta1 = -(math.pi**2 / (12.0 * w1)) * th1ppp_0 / th1p_0
        return cls(
            w1=w1,
            w3=w3,
            e3=e3,
            q=q,
            eta1=eta1,
            th2_0=float(np.sum(qpow)),
            th3_0=float(1.0 + 2.0 * np.sum(qsq[1:])),
            th1p_0=th1p_0,
            n=n,
            sign=sign,
            qpow=qpow,
            qsq=qsq,
        )

    @property
    def eta3(self) -> complex:
        if math.isinf(self.w3):
            return complex(math.nan, math.nan)
        # Legendre: eta1*omega3 - eta3*omega1 = i*pi/2
        return 1j * (self.eta1 * self.w3 - 0.5 * math.pi) / self.w1

    def reduce(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        j = np.rint(z.real / (2.0 * self.w1))
        z0 = z - 2.0 * j * self.w1
        if math.isinf(self.w3):
            return z0, j, np.zeros_like(j)
        k = np.rint(z.imag / (2.0 * self.w3))
        return z0 - 2.0 * k * complex(0.0, self.w3), j, k

    def series(self, v: np.ndarray):
        odd = 2.0 * self.n + 1.0
        arg = np.multiply.outer(v, odd)
        sin_arg, cos_arg = np.sin(arg), np.cos(arg)
        th1 = np.sum(self.sign * self.qpow * sin_arg, axis=-1)
        th1p = np.sum(self.sign * odd * self.qpow * cos_arg, axis=-1)
        th2 = np.sum(self.qpow * cos_arg, axis=-1)
        even = np.cos(np.multiply.outer(v, 2.0 * self.n[1:]))
        th3 = 1.0 + 2.0 * np.sum(self.qsq[1:] * even, axis=-1)
        th4 = 1.0 + 2.0 * np.sum(self.sign[1:] * self.qsq[1:] * even, axis=-1)
        return th1, th1p, th2, th3, th4

    def wp(self, z0: np.ndarray) -> np.ndarray:
        scale = math.pi / (2.0 * self.w1)
        th1, _, _, _, th4 = self.series(scale * z0)
        return self.e3 + (scale * self.th2_0 * self.th3_0 * th4 / th1) ** 2

    def wp_prime(self, z0: np.ndarray) -> np.ndarray:
        scale = math.pi / (2.0 * self.w1)
        th1, _, th2, th3, th4 = self.series(scale * z0)
        return -2.0 * scale**3 * self.th1p_0**2 * th2 * th3 * th4 / th1**3

    def zeta(self, z0: np.ndarray) -> np.ndarray:
        scale = math.pi / (2.0 * self.w1)
        th1, th1p, _, _, _ = self.series(scale * z0)
        return self.eta1 * z0 / self.w1 + scale * th1p / th1

    def sigma(self, z0: np.ndarray) -> np.ndarray:
        scale = math.pi / (2.0 * self.w1)
        th1, _, _, _, _ = self.series(scale * z0)
        return np.exp(self.eta1 * z0**2 / (2.0 * self.w1)) * th1 / (scale * self.th1p_0)


@lru_cache(maxsize=512)
def _lattice_for(e1: float, e2: float, e3: float, terms: int) -> tuple[_ThetaLattice, bool]:
    """Theta lattice in the orientation that keeps the nome at most exp(-pi).

    When p > 1/2 the lattice is rotated by z -> iz, which maps the roots to
    (-e3, -e2, -e1) and swaps the roles of the two half-periods.
    """
    if _modulus(e1, e2, e3) <= 0.5:
        return _ThetaLattice.build(e1, e2, e3, terms), False
    return _ThetaLattice.build(-e3, -e2, -e1, terms), True


def _lattice(ctx: EllipticContext) -> tuple[_ThetaLattice, bool]:
    return _lattice_for(ctx.e1, ctx.e2, ctx.e3, settings.theta_terms)


def _prepare(z: ArrayLike, lattice: _ThetaLattice, rotated: bool, check_pole: bool):
    zc, scalar = _as_array(z, complex)
    w = 1j * zc if rotated else zc
    z0, j, k = lattice.reduce(w)
    if check_pole and np.any(np.abs(z0) < settings.pole_tolerance):
        raise PoleError(f"Weierstrass function evaluated at a lattice point (z = {z})")
    return z0, j, k, scalar


def _wp(z: ArrayLike, lattice: _ThetaLattice, rotated: bool):
    z0, _, _, scalar = _prepare(z, lattice, rotated, True)
    value = lattice.wp(z0)
    return _out(-value if rotated else value, scalar)


def _zeta(z: ArrayLike, lattice: _ThetaLattice, rotated: bool):
    z0, j, k, scalar = _prepare(z, lattice, rotated, True)
    value = lattice.zeta(z0) + 2.0 * j * lattice.eta1
    if np.any(k != 0):
        value = value + 2.0 * k * lattice.eta3
    return _out(1j * value if rotated else value, scalar)


def wp_eval(z: ArrayLike, ctx: EllipticContext):
    """Weierstrass p-function of the lattice described by ctx."""
    return _wp(z, *_lattice(ctx))


def wp_prime(z: ArrayLike, ctx: EllipticContext):
    """Derivative of the Weierstrass p-function."""
    lattice, rotated = _lattice(ctx)
    z0, _, _, scalar = _prepare(z, lattice, rotated, True)
    value = lattice.wp_prime(z0)
    return _out(-1j * value if rotated else value, scalar)


def weier_zeta(z: ArrayLike, ctx: EllipticContext):
    """Weierstrass zeta, with quasi-period corrections applied after lattice reduction."""
    return _zeta(z, *_lattice(ctx))


def weier_sigma(z: ArrayLike, ctx: EllipticContext):
    """Weierstrass sigma, continued from the fundamental cell with its quasi-periodicity."""
    lattice, rotated = _lattice(ctx)
    z0, j, k, scalar = _prepare(z, lattice, rotated, False)
    eta = j * lattice.eta1
    shift = j * lattice.w1
    if np.any(k != 0):
        eta = eta + k * lattice.eta3
        shift = shift + 1j * k * lattice.w3
    parity = np.where((j + k + j * k) % 2 == 0, 1.0, -1.0)
    value = parity * np.exp(2.0 * eta * (z0 + shift)) * lattice.sigma(z0)
    return _out(-1j * value if rotated else value, scalar)


# ---------------------------------------------------------------------------
# Contexts
# ---------------------------------------------------------------------------


def half_periods(e1: float, e2: float, e3: float) -> tuple[float, float]:
    """Real half-period omega1 and |omega3| for ordered real roots.

    omega1 is infinite when e1 = e2 (and |omega3| when e2 = e3).
    """
    d = e1 - e3
    if d < settings.degenerate_tolerance:
        raise DegenerateRoots(f"Cubic roots collapse: e1 - e3 = {d}")
    p = _modulus(e1, e2, e3)
    root = math.sqrt(d)
    omega1 = math.inf if p == 1.0 else _k_real(p) / root
    omega3_abs = math.inf if p == 0.0 else _k_real(1.0 - p) / root
    return omega1, omega3_abs


def elliptic_context(e1: float, e2: float, e3: float) -> EllipticContext:
    """Build the lattice description for ordered roots e1 >= e2 >= e3 summing to zero."""
    if not (e1 >= e2 >= e3):
        raise DomainError(f"Roots must satisfy e3 <= e2 <= e1, got ({e1}, {e2}, {e3})")
    scale = max(abs(e1), abs(e3), 1.0)
    if abs(e1 + e2 + e3) > 1e-12 * scale:
        raise DomainError(f"Roots must sum to zero, got {e1 + e2 + e3}")
    omega1, omega3_abs = half_periods(e1, e2, e3)
    p = _modulus(e1, e2, e3)
    g2 = 2.0 * (e1 * e1 + e2 * e2 + e3 * e3)
    g3 = 4.0 * e1 * e2 * e3
    delta = 16.0 * ((e1 - e2) * (e1 - e3) * (e2 - e3)) ** 2

    lattice, rotated = _lattice_for(e1, e2, e3, settings.theta_terms)
    omega3 = complex(0.0, omega3_abs)
    if math.isinf(omega3_abs):
        eta3 = complex(math.nan, math.nan)
    else:
        eta3 = complex(_zeta(omega3, lattice, rotated))
    omega2 = eta1 = eta2 = None
    if math.isfinite(omega1):
        eta1 = complex(_zeta(omega1, lattice, rotated))
        omega2 = -omega1 - omega3
        eta2 = -eta1 - eta3
    return EllipticContext(
        e1=e1,
        e2=e2,
        e3=e3,
        g2=g2,
        g3=g3,
        delta=delta,
        p=p,
        p_prime=1.0 - p,
        omega1=omega1,
        omega3_abs=omega3_abs,
        omega2=omega2,
        eta1=eta1,
        eta2=eta2,
        eta3=eta3,
        g3_sign=int(np.sign(g3)),
    )


def context_from_invariants(g2: float, g3: float) -> EllipticContext:
    """Context for the invariants (g2, g3) when all three roots are real."""
    if g2 <= 0.0:
        raise DegenerateRoots(f"g2 = {g2} leaves no real lattice")
    radius = math.sqrt(g2 / 12.0)
    cosine = 3.0 * g3 / (2.0 * g2) * math.sqrt(12.0 / g2)
    if abs(cosine) > 1.0 + 1e-12:
        raise DomainError(f"Negative discriminant (complex roots) for g2 = {g2}, g3 = {g3}")
    angle = math.acos(min(max(cosine, -1.0), 1.0)) / 3.0
    roots = sorted(
        (2.0 * radius * math.cos(angle - 2.0 * math.pi * k / 3.0) for k in range(3)),
        reverse=True,
    )
    # keep the sum exactly zero
    roots[1] = -(roots[0] + roots[2])
    roots[1] = min(max(roots[1], roots[2]), roots[0])
    return elliptic_context(*roots)


def homogeneity_check(t: float, z: complex, g2: float, g3: float) -> float:
    """|t^2 wp(t z; g2/t^4, g3/t^6) - wp(z; g2, g3)|."""
    if t == 0.0:
        raise DomainError("homogeneity factor must be nonzero")
    base = context_from_invariants(g2, g3)
    scaled = context_from_invariants(g2 / t**4, g3 / t**6)
    return abs(t * t * wp_eval(t * z, scaled) - wp_eval(z, base))


def _strip_ratio(value: float, low: float, high: float, w: float, strip: Strip) -> float:
    tol = settings.strip_tolerance
    if not (-tol <= value <= 1.0 + tol):
        raise NoSolutionInStrip(
            f"wp = {w} is not attained on the {strip.value} strip, range [{low}, {high}]"
        )
    return min(max(value, 0.0), 1.0)


def wp_inverse(w: float, ctx: EllipticContext, strip: Strip = Strip.OMEGA3) -> complex:
    """Point z of the requested strip with wp(z) = w, for real w.

    The omega3 strip is {Omega + omega3 : 0 <= Omega <= omega1}; the others are
    the real axis (0, omega1], the line omega1 + iy and the imaginary axis.
    """
    e1, e2, e3 = ctx.roots
    d = e1 - e3
    root = math.sqrt(d)
    if strip is Strip.OMEGA3:
        if e2 == e3:
            raise NoSolutionInStrip("the omega3 strip runs off to infinity when e2 = e3")
        ratio = _strip_ratio((w - e3) / (e2 - e3), e3, e2, w, strip)
        omega = ellint_F(math.asin(math.sqrt(ratio)), ctx.p) / root
        return complex(omega, ctx.omega3_abs)
    if strip is Strip.OMEGA1:
        if e1 == e2:
            raise NoSolutionInStrip("the omega1 strip runs off to infinity when e1 = e2")
        ratio = _strip_ratio((e1 - w) / (e1 - e2), e2, e1, w, strip)
        y = ellint_F(math.asin(math.sqrt(ratio)), ctx.p_prime) / root
        return complex(ctx.omega1, y)
    if strip is Strip.REAL_AXIS:
        if w - e3 <= 0.0:
            raise NoSolutionInStrip(f"wp = {w} is not attained on the real axis")
        ratio = _strip_ratio(d / (w - e3), e1, math.inf, w, strip)
        return complex(ellint_F(math.asin(math.sqrt(ratio)), ctx.p) / root, 0.0)
    if e1 - w <= 0.0:
        raise NoSolutionInStrip(f"wp = {w} is not attained on the imaginary axis")
    ratio = _strip_ratio(d / (e1 - w), -math.inf, e3, w, strip)
    return complex(0.0, ellint_F(math.asin(math.sqrt(ratio)), ctx.p_prime) / root)
