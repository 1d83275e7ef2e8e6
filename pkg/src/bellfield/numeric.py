"""Special functions, adaptive quadrature, shell-truncated double sums and a
Monte-Carlo phase-space oracle."""

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special


class DomainError(ValueError):
    pass


class RangeError(OverflowError):
    pass


class MatrixError(np.linalg.LinAlgError):
    pass


class ConvergenceError(RuntimeError):
    """Raised when an iterative scheme stops before reaching its tolerance.

    ``estimate`` and ``error`` hold the best value found so far.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf"), order=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
        self.order = order


@dataclass(frozen=True)
class Constants:
    euler_gamma: float = 0.57721566490153286061


CONSTANTS = Constants()


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 0.0
    max_subdivisions: int = 20000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if not self.abs_tol >= 0:
            raise ValueError("abs_tol must be non-negative")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")


# --------------------------------------------------------------- special functions

def cosine_integral(x):
    """Ci(x) for x > 0 (scalar or array)."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("cosine integral is defined here for x > 0 only")
    out = special.sici(arr)[1]
    return float(out) if out.ndim == 0 else out


def erf_real(x):
    return special.erf(x)


# |Im z| beyond this makes exp(-z^2) overflow for some real parts
ERF_IMAG_LIMIT = 26.0

_ERF_SERIES_RADIUS = 0.5


def _erf_series(z):
    # Maclaurin series, used where 1 - exp(-z^2) w(iz) cancels
    z = np.asarray(z, dtype=complex)
    z2 = z * z
    term = z.copy()
    total = z.copy()
    for n in range(1, 30):
        term = term * (-z2) / n
        total = total + term / (2 * n + 1)
    return 2.0 / math.sqrt(math.pi) * total


def erf_complex(z):
    """erf on the complex plane via the Faddeeva function w."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z.imag) > ERF_IMAG_LIMIT):
        raise RangeError(f"|Im z| exceeds {ERF_IMAG_LIMIT}; erf would overflow")
    flip = z.real < 0
    zz = np.where(flip, -z, z)
    with np.errstate(over="ignore", invalid="ignore"):
        far = 1.0 - np.exp(-zz * zz) * special.wofz(1j * zz)
    near = _erf_series(zz)
    out = np.where(np.abs(zz) < _ERF_SERIES_RADIUS, near, far)
    out = np.where(flip, -out, out)
    return complex(out) if out.ndim == 0 else out


def erf_complex_scaled(x, y):
    """exp(-y^2) * erf(x + i y) for real arrays x, y; never overflows."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    sgn = np.where(x < 0, -1.0, 1.0)
    xs = sgn * x
    ys = sgn * y
    ey = np.exp(-ys * ys)
    far = ey - np.exp(-xs * xs - 2j * xs * ys) * special.wofz(-ys + 1j * xs)
    small = xs * xs + ys * ys < _ERF_SERIES_RADIUS ** 2
    if np.any(small):
        near = ey * _erf_series(xs + 1j * ys)
        far = np.where(small, near, far)
    return sgn * far


# ----------------------------------------------------------------- quadrature

# Gauss-Kronrod 7/15 abscissae and weights
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes sit at odd Kronrod positions
_WG15 = np.zeros(15)
_WG15[1::2] = np.concatenate([_WG[:3], _WG[3:], _WG[:3][::-1]])


_ROUNDOFF = 50 * np.finfo(float).eps


def _gk_panels(f, lo, hi):
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    y = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    k = half * (y @ _WK)
    g = half * (y @ _WG15)
    return k, np.abs(k - g), half * (np.abs(y) @ _WK)


def adaptive_integrate(f: Callable, a: float, b: float, spec: QuadratureSpec = QuadratureSpec(),
                       points=None, full_output=False):
    """Globally adaptive Gauss-Kronrod (7/15) integration of a vectorized ``f``.

    ``b`` may be ``inf``; the tail is mapped onto the unit interval with
    z = a + t/(1-t).  ``points`` seeds the initial panel breakpoints.
    """
    a = float(a)
    b = float(b)
    if b == a:
        return (0.0, 0.0) if full_output else 0.0
    if b < a:
        res = adaptive_integrate(f, b, a, spec, points, full_output)
        return (-res[0], res[1]) if full_output else -res
    if math.isinf(b):
        g = f

        def f(t, g=g, a=a):
            s = 1.0 - t
            return g(a + t / s) / (s * s)

        if points is not None:
            pts = np.asarray(points, dtype=float)
            pts = pts[(pts > a) & np.isfinite(pts)]
            points = (pts - a) / (1.0 + pts - a)
        a, b = 0.0, 1.0

    edges = [a]
    if points is not None:
        edges += sorted(float(p) for p in np.asarray(points).ravel() if a < p < b)
    edges.append(b)
    lo = np.array(edges[:-1])
    hi = np.array(edges[1:])
    vals, errs, mags = _gk_panels(f, lo, hi)
    panels = [(-e, l, h, v, m) for l, h, v, e, m in zip(lo, hi, vals, errs, mags)]
    heapq.heapify(panels)
    total = math.fsum(vals)
    err = math.fsum(errs)
    n_panels = len(panels)

    while True:
        # below ~50 eps * integral of |f| the estimate is limited by rounding, as in QUADPACK
        floor = _ROUNDOFF * math.fsum(p[4] for p in panels)
        tol = max(spec.abs_tol, spec.rel_tol * abs(total), floor)
        if err <= tol:
            break
        if n_panels >= spec.max_subdivisions:
            raise ConvergenceError(
                f"adaptive_integrate: {n_panels} panels, error {err:.3g} > {tol:.3g}",
                estimate=total, error=err, order=n_panels)
        # refine every panel whose error exceeds its even share, at least the worst one
        share = tol / n_panels
        picked = [heapq.heappop(panels)]
        while panels and -panels[0][0] > share and len(picked) < 2048:
            picked.append(heapq.heappop(panels))
        plo = np.array([p[1] for p in picked])
        phi = np.array([p[2] for p in picked])
        pmid = 0.5 * (plo + phi)
        if np.any((pmid <= plo) | (pmid >= phi)):
            raise ConvergenceError("adaptive_integrate: panel width underflow",
                                   estimate=total, error=err, order=n_panels)
        clo = np.concatenate([plo, pmid])
        chi = np.concatenate([pmid, phi])
        cv, ce, cm = _gk_panels(f, clo, chi)
        if not (np.all(np.isfinite(cv)) and np.all(np.isfinite(ce))):
            raise ConvergenceError("adaptive_integrate: non-finite integrand",
                                   estimate=total, error=err, order=n_panels)
        for l, h, v, e, m in zip(clo, chi, cv, ce, cm):
            heapq.heappush(panels, (-e, l, h, v, m))
        n_panels += len(picked)
        # resum from scratch to keep rounding from accumulating
        total = math.fsum(p[3] for p in panels)
        err = math.fsum(-p[0] for p in panels)

    return (total, err) if full_output else total


# -------------------------------------------------------------- shell sums

@dataclass(frozen=True)
class ShellSum:
    value: float
    order: int
    last_shell: float


def shell_indices(order):
    """Integer pairs (n, m) with max(|n|, |m|) == order, in a fixed order."""
    if order == 0:
        return np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int64)
    span = np.arange(-order, order + 1, dtype=np.int64)
    inner = np.arange(-order + 1, order, dtype=np.int64)
    n = np.concatenate([np.full(span.size, -order), np.full(span.size, order), inner, inner])
    m = np.concatenate([span, span, np.full(inner.size, -order), np.full(inner.size, order)])
    return n, m


def truncated_double_sum(term, tail_tol=1e-10, max_order=400, min_order=0,
                         vectorized=True, full_output=False):
    """Sum term(n, m) over growing square shells max(|n|,|m|) = N.

    Shells up to ``min_order`` are always included; after that the sum stops
    at the first shell whose summed absolute terms fall below ``tail_tol``.
    With ``vectorized`` the callable receives whole shells as integer arrays.
    """
    total = 0.0
    last = float("inf")
    for order in range(0, max_order + 1):
        n, m = shell_indices(order)
        if vectorized:
            vals = np.asarray(term(n, m), dtype=float)
        else:
            vals = np.array([term(int(i), int(j)) for i, j in zip(n, m)], dtype=float)
        total += math.fsum(vals)
        last = math.fsum(np.abs(vals))
        if order >= min_order and last < tail_tol:
            return ShellSum(total, order, last) if full_output else total
    raise ConvergenceError(
        f"truncated_double_sum: shell {max_order} still contributes {last:.3g} > {tail_tol:.3g}",
        estimate=total, error=last, order=max_order)


# ---------------------------------------------------------- Monte-Carlo oracle

def as_matrix(gamma):
    full = getattr(gamma, "full", None)
    return np.asarray(full() if callable(full) else gamma, dtype=float)


def sample_gaussian(gamma, n_samples, seed):
    """Draw n_samples points of N(0, gamma) from a Philox stream keyed by seed."""
    cov = as_matrix(gamma)
    if not np.allclose(cov, cov.T, rtol=0, atol=1e-12 * np.max(np.abs(cov))):
        raise MatrixError("covariance is not symmetric")
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise MatrixError("covariance is not positive-definite") from exc
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.standard_normal((n_samples, cov.shape[0])) @ chol.T


def gaussian_mc_expectation(gamma, g, n_samples=10**6, seed=0):
    """(2 pi)^2 <g> over the Gaussian Wigner function with covariance gamma.

    ``g`` maps an (n, 4) array of phase-space points to n values.  Returns the
    mean and its standard error.
    """
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    q = sample_gaussian(gamma, n_samples, seed)
    vals = np.asarray(g(q), dtype=float) * (2 * math.pi) ** 2
    mean = float(np.mean(vals))
    err = float(np.std(vals, ddof=1) / math.sqrt(n_samples))
    return mean, err
