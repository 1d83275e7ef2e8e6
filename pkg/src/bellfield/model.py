"""Vacuum power spectra, the two-patch covariance matrix, purity and the
field-sector Schur complement."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numeric import MatrixError, QuadratureSpec
from .window import (IntegralParams, WindowSpec, integral_K, integral_L, integrand_terms,
                     spectral_integral)

# slack on the uncertainty bound det(gamma) >= 1/16
DET_TOL = 1e-9
MAX_CONDITION = 1e12


class UnphysicalStateError(ValueError):
    pass


class ConditioningError(np.linalg.LinAlgError):
    pass


MINKOWSKI = "minkowski"
DESITTER = "desitter"


def alpha_min(delta):
    return 2 * (1 + delta)


@dataclass(frozen=True)
class SceneParams:
    background: str
    alpha: float
    window: WindowSpec
    beta: float = 0.0
    HR: Optional[float] = None

    def __post_init__(self):
        if self.background not in (MINKOWSKI, DESITTER):
            raise ValueError(f"unknown background {self.background!r}")
        if self.background == DESITTER and not (self.HR is not None and self.HR > 0):
            raise ValueError("de Sitter needs HR > 0")
        if self.background == MINKOWSKI and self.HR is not None:
            raise ValueError("HR is meaningless for Minkowski")
        amin = alpha_min(self.window.delta)
        if not self.alpha >= amin * (1 - 1e-12):
            raise ValueError(f"alpha={self.alpha} below the non-overlap bound {amin}")
        if not 0 <= self.beta < 1:
            raise ValueError("beta must lie in [0, 1)")

    @classmethod
    def minkowski(cls, alpha, delta, beta=0.0):
        return cls(MINKOWSKI, alpha, WindowSpec(delta), beta)

    @classmethod
    def desitter(cls, HR, alpha, beta, delta):
        return cls(DESITTER, alpha, WindowSpec(delta), beta, HR)

    @property
    def delta(self):
        return self.window.delta


@dataclass(frozen=True)
class PowerSpectra:
    """Reduced spectra as polynomials in z = kR/a, {power: coefficient}.

    Normalized so that gamma_ab = (4 pi / 3G) int dz/z W~^2 P_ab (sinc).
    """
    phiphi: dict
    phipi: dict
    pipi: dict

    @staticmethod
    def _eval(poly, z):
        z = np.asarray(z, dtype=float)
        return sum(c * z ** k for k, c in poly.items()) + 0.0 * z

    def p_phiphi(self, z):
        return self._eval(self.phiphi, z)

    def p_phipi(self, z):
        return self._eval(self.phipi, z)

    def p_pipi(self, z):
        return self._eval(self.pipi, z)


_INV4PI2 = 1 / (4 * math.pi ** 2)


def minkowski_spectra():
    return PowerSpectra({2: _INV4PI2}, {}, {4: _INV4PI2})


def desitter_spectra(HR):
    if not HR > 0:
        raise ValueError("HR must be positive")
    return PowerSpectra({2: _INV4PI2, 0: HR * HR * _INV4PI2}, {2: -HR * _INV4PI2}, {4: _INV4PI2})


@dataclass(frozen=True)
class CovarianceMatrix:
    g11: float
    g12: float
    g22: float
    g13: float
    g14: float
    g24: float

    def full(self):
        g11, g12, g22, g13, g14, g24 = self.as_tuple()
        return np.array([[g11, g12, g13, g14],
                         [g12, g22, g14, g24],
                         [g13, g14, g11, g12],
                         [g14, g24, g12, g22]])

    def as_tuple(self):
        return (self.g11, self.g12, self.g22, self.g13, self.g14, self.g24)

    def mode_blocks(self):
        """Covariances of the even and odd patch combinations (q1 +- q3)/sqrt(2)."""
        plus = (self.g11 + self.g13, self.g12 + self.g14, self.g22 + self.g24)
        minus = (self.g11 - self.g13, self.g12 - self.g14, self.g22 - self.g24)
        return plus, minus

    def det(self):
        # gamma is block diagonal in the even/odd basis
        out = 1.0
        for x, y, z in self.mode_blocks():
            out *= x * z - y * y
        return out

    def is_positive_definite(self):
        return all(x > 0 and x * z - y * y > 0 for x, y, z in self.mode_blocks())


def _entries_from_integrals(s: SceneParams):
    d = s.delta
    scale = 3 * math.pi * s.window.G
    K = lambda mu: integral_K(IntegralParams(mu, 0.0, s.beta, d))
    L = lambda mu: integral_L(IntegralParams(mu, s.alpha, s.beta, d))
    if s.background == MINKOWSKI:
        return (K(1) / scale, 0.0, K(3) / scale, L(1) / scale, 0.0, L(3) / scale)
    h = s.HR
    K1, L1 = K(1), L(1)
    return ((h * h * K(-1) + K1) / scale, -h * K1 / scale, K(3) / scale,
            (h * h * L(-1) + L1) / scale, -h * L1 / scale, L(3) / scale)


def _entries_from_spectra(s: SceneParams, spec):
    spectra = minkowski_spectra() if s.background == MINKOWSKI else desitter_spectra(s.HR)
    pref = 4 * math.pi / (3 * s.window.G)

    def entry(poly, alpha):
        if not poly:
            return 0.0
        tail = []
        for k, c in poly.items():
            tail += [(c * co, n, kind, w) for co, n, kind, w in integrand_terms(k - 1, alpha, s.delta)]
        weight = lambda z: PowerSpectra._eval(poly, z)
        return pref * spectral_integral(weight, alpha, s.beta, s.delta, spec, tail_terms=tail)

    a = s.alpha
    return (entry(spectra.phiphi, 0.0), entry(spectra.phipi, 0.0), entry(spectra.pipi, 0.0),
            entry(spectra.phiphi, a), entry(spectra.phipi, a), entry(spectra.pipi, a))


def build_covariance(s: SceneParams, method="integrals", spec=QuadratureSpec()):
    """Six independent covariance entries.

    ``integrals`` assembles them from K/L moments; ``spectra`` integrates the
    power spectra against W~^2 directly and serves as a cross-check.
    """
    if method == "integrals":
        return CovarianceMatrix(*_entries_from_integrals(s))
    if method == "spectra":
        return CovarianceMatrix(*_entries_from_spectra(s, spec))
    raise ValueError(f"unknown method {method!r}")


def purity(gamma: CovarianceMatrix):
    if not gamma.is_positive_definite():
        raise MatrixError("covariance is not positive-definite")
    det = gamma.det()
    if det < 1 / 16 - DET_TOL:
        raise UnphysicalStateError(f"det(gamma) = {det!r} violates the uncertainty bound 1/16")
    return min(1.0, 1 / (4 * math.sqrt(det)))


@dataclass(frozen=True)
class ReducedA:
    a11: float
    a12: float
    a22: float

    def matrix(self):
        return np.array([[self.a11, self.a12], [self.a12, self.a22]])

    def det(self):
        return self.a11 * self.a22 - self.a12 * self.a12


@dataclass(frozen=True)
class PrecisionBlocks:
    """Blocks of gamma^-1 in field-first ordering (phi1, phi2, pi1, pi2)."""
    phiphi: np.ndarray
    phipi: np.ndarray
    pipi: np.ndarray
    a: np.ndarray


# (phi1, pi1, phi2, pi2) -> (phi1, phi2, pi1, pi2)
FIELD_FIRST = [0, 2, 1, 3]


def precision_blocks(gamma: CovarianceMatrix) -> PrecisionBlocks:
    g = gamma.full()
    if not gamma.is_positive_definite():
        raise MatrixError("covariance is not positive-definite")
    cond = np.linalg.cond(g)
    if not cond <= MAX_CONDITION:
        raise ConditioningError(f"covariance condition number {cond:.3g} exceeds {MAX_CONDITION:.0e}")
    inv = np.linalg.solve(g, np.eye(4))
    inv = 0.5 * (inv + inv.T)
    inv = inv[np.ix_(FIELD_FIRST, FIELD_FIRST)]
    ff, fp, pp = inv[:2, :2], inv[:2, 2:], inv[2:, 2:]
    a = ff - fp @ np.linalg.solve(pp, fp.T)
    return PrecisionBlocks(ff, fp, pp, 0.5 * (a + a.T))


def reduced_a(gamma: CovarianceMatrix) -> ReducedA:
    a = precision_blocks(gamma).a
    return ReducedA(float(a[0, 0]), float(a[0, 1]), float(a[1, 1]))
