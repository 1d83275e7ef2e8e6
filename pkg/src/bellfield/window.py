"""Compact coarse-graining window, its Fourier transform, and the spectral
moment integrals K_mu and L_mu built from it."""

import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath as mp
import numpy as np
from scipy import integrate

from .numeric import QuadratureSpec, adaptive_integrate


class DivergenceError(ArithmeticError):
    pass


def shape_F(delta):
    return (delta + 2) * (delta * delta + 2 * delta + 2) / 4


def shape_G(delta):
    d = delta
    return 8 * (d ** 3 + 5 * d ** 2 + 10 * d + 10) / (5 * (d + 2) ** 2 * (d * d + 2 * d + 2) ** 2)


@dataclass(frozen=True)
class WindowSpec:
    delta: float
    F: float = field(init=False)
    G: float = field(init=False)

    def __post_init__(self):
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ValueError(f"window ramp width must be positive, got {self.delta}")
        object.__setattr__(self, "F", shape_F(self.delta))
        object.__setattr__(self, "G", shape_G(self.delta))

    @property
    def plateau(self):
        return 3 / (4 * math.pi * self.F)

    @property
    def support(self):
        return 1 + self.delta


def window_value(x, w: WindowSpec):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("window radius must be non-negative")
    d = w.delta
    ramp = w.plateau * (1 + d - x) / d
    out = np.where(x <= 1, w.plateau, np.where(x <= 1 + d, ramp, 0.0))
    return float(out) if out.ndim == 0 else out


# ------------------------------------------------------------- Fourier transform

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _sphere_kernel(x):
    """(sin x - x cos x)/x^3, the transform of a unit ball up to a factor 3."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 0.5
    xs = x[small] ** 2
    # alternating series sum_k (-1)^(k+1) 2k x^(2k-2)/(2k+1)!
    acc = np.zeros_like(xs)
    for k in range(9, 0, -1):
        acc = acc * xs + (-1) ** (k + 1) * 2 * k / math.factorial(2 * k + 1)
    out[small] = acc
    xl = x[~small]
    out[~small] = (np.sin(xl) - xl * np.cos(xl)) / xl ** 3
    return out


def _taylor_fourier(z, delta):
    # 3/F sum_{j>=2} (-1)^j (2j-2)/(2j)! S_{2j}(c) z^(2j-4), S_n(c) = sum_{i<n} c^i
    c = 1 + delta
    F = shape_F(delta)
    z2 = z * z
    acc = np.zeros_like(z)
    for j in range(14, 1, -1):
        s = sum(c ** i for i in range(2 * j))
        acc = acc * z2 + (-1) ** j * (2 * j - 2) / math.factorial(2 * j) * s
    return 3 / F * acc


def fourier_transform(z, delta):
    """W~(z) for ramp width delta >= 0 (delta = 0 is the sharp top hat)."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("wavenumber must be non-negative")
    if delta == 0:
        out = 3 * _sphere_kernel(z)
        return float(out) if out.ndim == 0 else out
    c = 1 + delta
    F = shape_F(delta)
    zf = np.atleast_1d(z).astype(float)
    out = np.empty_like(zf)
    taylor = c * zf <= 0.5
    mid = (~taylor) & (zf * delta <= 1)
    far = ~(taylor | mid)
    out[taylor] = _taylor_fourier(zf[taylor], delta)
    if np.any(mid):
        # (3/(delta F)) int_1^c s^3 kernel(s z) ds
        s = 1 + delta * (_GL_X + 1) / 2
        zm = zf[mid]
        vals = s[None, :] ** 3 * _sphere_kernel(s[None, :] * zm[:, None])
        out[mid] = 3 / F * 0.5 * (vals @ _GL_W)
    if np.any(far):
        zz = zf[far]
        cz = c * zz
        num = zz * np.sin(zz) - cz * np.sin(cz) + 2 * np.cos(zz) - 2 * np.cos(cz)
        out[far] = 3 * num / (delta * F * zz ** 4)
    return float(out[0]) if z.ndim == 0 else out.reshape(z.shape)


def window_fourier(z, w: WindowSpec):
    return fourier_transform(z, w.delta)


def window_fourier_quadrature(z, w: WindowSpec, spec=QuadratureSpec(rel_tol=1e-12)):
    """Transform computed from its definition (4 pi / z) int_0^{1+delta} x W(x) sin(z x) dx."""
    if z == 0:
        return 4 * math.pi * adaptive_integrate(
            lambda x: x * x * window_value(x, w), 0, w.support, spec, points=[1.0])
    f = lambda x: x * window_value(x, w) * np.sin(z * x)
    return 4 * math.pi / z * adaptive_integrate(f, 0, w.support, spec, points=[1.0])


# ------------------------------------------------------------------ K and L

@dataclass(frozen=True)
class IntegralParams:
    mu: int
    alpha: float = 0.0
    beta: float = 0.0
    delta: float = 0.1

    def __post_init__(self):
        if self.mu not in (-1, 1, 3):
            raise ValueError(f"mu must be -1, 1 or 3, got {self.mu}")
        if not self.alpha >= 0:
            raise ValueError("alpha must be non-negative")
        if not 0 <= self.beta < 1:
            raise ValueError("beta must lie in [0, 1)")
        if not self.delta >= 0:
            raise ValueError("delta must be non-negative")

    def check_convergent(self):
        if self.mu == -1 and self.beta == 0:
            raise DivergenceError("K/L with mu=-1 diverge logarithmically at beta=0")
        if self.mu == 3 and self.delta == 0:
            raise DivergenceError("K/L with mu=3 diverge logarithmically at delta=0")


def _trig_terms(delta):
    """W~(z) = pref * z^(-q) * sum coef z^p trig(omega z) as (pref, q, terms)."""
    d = mp.mpf(delta)
    one = mp.mpf(1)
    if delta == 0:
        return mp.mpf(3), 3, [(one, 0, "s", one), (-one, 1, "c", one)]
    c = 1 + d
    F = (d + 2) * (d * d + 2 * d + 2) / 4
    pref = 3 / (d * F)
    return pref, 4, [(one, 1, "s", one), (2 * one, 0, "c", one), (-c, 1, "s", c), (-2 * one, 0, "c", c)]


def _multiply(t1, t2):
    # product-to-sum on (coef, power, kind, omega) lists
    out = defaultdict(lambda: mp.mpf(0))
    for a, p, k, w in t1:
        for b, q, l, v in t2:
            co = a * b / 2
            if k == "s" and l == "s":
                res = [(co, "c", w - v), (-co, "c", w + v)]
            elif k == "c" and l == "c":
                res = [(co, "c", w - v), (co, "c", w + v)]
            elif k == "s":
                res = [(co, "s", w + v), (co, "s", w - v)]
            else:
                res = [(co, "s", v + w), (co, "s", v - w)]
            for cc, kk, ww in res:
                if ww < 0:
                    ww = -ww
                    if kk == "s":
                        cc = -cc
                if kk == "s" and ww == 0:
                    continue
                out[(p + q, kk, ww)] += cc
    return [(v, p, k, w) for (p, k, w), v in out.items() if v != 0]


def integrand_terms(mu, alpha, delta):
    """z^mu W~^2 [sinc(alpha z)] as a list of (coef, n, kind, omega) for coef z^-n trig(omega z)."""
    pref, q, u = _trig_terms(delta)
    t = _multiply(u, u)
    extra = 0
    if alpha:
        a = mp.mpf(alpha)
        t = _multiply(t, [(1 / a, 0, "s", a)])
        extra = 1
    pref2 = pref * pref
    return [(pref2 * co, 2 * q - mu - p + extra, k, w) for co, p, k, w in t]


def _tail_integrals(nmax, w, beta):
    # E_n = int_beta^inf z^-n exp(i w z) dz by upward recurrence from E_1
    E = [None, -mp.ci(w * beta) + 1j * (mp.pi / 2 - mp.si(w * beta))]
    for n in range(2, nmax + 1):
        E.append((beta ** (1 - n) * mp.expj(w * beta) + 1j * w * E[n - 1]) / (n - 1))
    return E


def _moment_mp(mu, alpha, beta, delta, dps):
    with mp.workdps(dps):
        terms = integrand_terms(mu, alpha, delta)
        total = mp.mpf(0)
        if beta > 0:
            b = mp.mpf(beta)
            by_omega = defaultdict(list)
            for co, n, k, w in terms:
                by_omega[w].append((co, n, k))
            for w, lst in by_omega.items():
                if w == 0:
                    for co, n, _ in lst:
                        total += co * b ** (1 - n) / (n - 1)
                    continue
                E = _tail_integrals(max(n for _, n, _ in lst), w, b)
                for co, n, k in lst:
                    total += co * (E[n].real if k == "c" else E[n].imag)
            return total
        # beta = 0: regularized Mellin transforms, poles cancel between terms
        pole = mp.mpf(0)
        scale = mp.mpf(0)
        for co, n, k, w in terms:
            if w == 0:
                continue
            m = n - 1
            A = (-1) ** m / mp.factorial(m)
            if k == "c":
                t0, t1 = mp.cos(m * mp.pi / 2), mp.pi / 2 * mp.sin(m * mp.pi / 2)
            else:
                t0, t1 = -mp.sin(m * mp.pi / 2), mp.pi / 2 * mp.cos(m * mp.pi / 2)
            psi = -mp.euler + mp.harmonic(m)
            total += co * A * w ** m * (t0 * (psi - mp.log(w)) + t1)
            pole += co * A * t0 * w ** m
            scale += abs(co * A * w ** m)
        if abs(pole) > scale * mp.mpf(10) ** (-dps // 2):
            raise DivergenceError("integral diverges at z = 0")
        return total


def _digits_guess(mu, alpha, beta, delta):
    g = 30.0
    if delta > 0:
        g += 2 * math.log10(1 / delta) if delta < 1 else 0
    if beta > 0:
        g += (9 - mu) * math.log10(1 / beta)
    if alpha:
        g += (10 - mu) * math.log10(max(alpha, 1.0))
    return int(g)


@lru_cache(maxsize=65536)
def _moment_analytic(mu, alpha, beta, delta):
    dps = _digits_guess(mu, alpha, beta, delta)
    prev = None
    for _ in range(8):
        val = _moment_mp(mu, alpha, beta, delta, dps)
        if prev is not None and abs(val - prev) <= mp.mpf(10) ** -17 * max(abs(val), mp.mpf(10) ** -300):
            return float(val)
        prev = val
        dps += 20
    raise ArithmeticError(f"precision escalation failed for mu={mu}, alpha={alpha}, beta={beta}, delta={delta}")


def _sinc(x):
    return np.sinc(x / np.pi)


_BULK_END = 64 * math.pi


def _moment_quadrature(mu, alpha, beta, delta, spec):
    def f(z):
        w = fourier_transform(z, delta)
        out = z ** mu * w * w
        if alpha:
            out = out * _sinc(alpha * z)
        return out

    bulk = _bulk_quadrature(f, alpha, beta, delta, spec)
    return bulk + _oscillatory_tail(integrand_terms(mu, alpha, delta), _BULK_END)


def _bulk_quadrature(f, alpha, beta, delta, spec):
    pts = []
    x = beta if beta > 0 else 2.0 ** -12
    while x < 1:
        pts.append(x)
        x *= 2
    freq = max(alpha, 1 + delta, 1.0) + 1 + delta
    pts += list(np.arange(1.0, _BULK_END, math.pi / freq))
    # room for the seeded panels plus refinement
    spec = QuadratureSpec(spec.rel_tol, spec.abs_tol, max(spec.max_subdivisions, 4 * len(pts)))
    return adaptive_integrate(f, beta, _BULK_END, spec, points=pts)


def _oscillatory_tail(terms, start):
    """Sum of coef * int_start^inf z^-n trig(omega z) dz, each by a Fourier-weighted rule."""
    total = 0.0
    for co, n, kind, w in terms:
        co = float(co)
        w = float(w)
        if w == 0:
            total += co * start ** (1 - n) / (n - 1)
            continue
        with warnings.catch_warnings():
            # QUADPACK flags cycles where the requested absolute accuracy is below rounding
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(lambda z, n=n: z ** (-n), start, math.inf,
                                    weight="cos" if kind == "c" else "sin", wvar=w, limlst=200,
                                    epsabs=1e-15 * start ** (1 - n))
        total += co * val
    return total


def _moment(p: IntegralParams, alpha, method, spec):
    p.check_convergent()
    if method == "auto":
        try:
            return _moment_analytic(p.mu, float(alpha), float(p.beta), float(p.delta))
        except DivergenceError:
            raise
        except ArithmeticError:
            # precision escalation gave up; the quadrature path is the fallback
            return _moment_quadrature(p.mu, float(alpha), float(p.beta), float(p.delta), spec)
    if method == "analytic":
        return _moment_analytic(p.mu, float(alpha), float(p.beta), float(p.delta))
    if method == "quadrature":
        return _moment_quadrature(p.mu, float(alpha), float(p.beta), float(p.delta), spec)
    raise ValueError(f"unknown method {method!r}")


def integral_K(p: IntegralParams, method="auto", spec=QuadratureSpec()):
    """K_mu(beta, delta) = int_beta^inf z^mu W~^2 dz."""
    return _moment(p, 0.0, method, spec)


def integral_L(p: IntegralParams, method="auto", spec=QuadratureSpec()):
    """L_mu(alpha, beta, delta) = int_beta^inf z^mu W~^2 sinc(alpha z) dz."""
    if not p.alpha > 0:
        raise ValueError("L needs alpha > 0")
    return _moment(p, p.alpha, method, spec)


def spectral_integral(weight, alpha, beta, delta, spec=QuadratureSpec(), tail_terms=None):
    """int_beta^inf W~^2(z) weight(z) [sinc(alpha z)] dz / z by direct quadrature.

    The bulk up to z = 64 pi is integrated adaptively; ``tail_terms`` gives the
    trig decomposition used beyond it (see ``integrand_terms``).
    """
    def f(z):
        w = fourier_transform(z, delta)
        out = w * w * weight(z) / z
        if alpha:
            out = out * _sinc(alpha * z)
        return out

    bulk = _bulk_quadrature(f, alpha, beta, delta, spec)
    return bulk + (_oscillatory_tail(tail_terms, _BULK_END) if tail_terms else 0.0)
