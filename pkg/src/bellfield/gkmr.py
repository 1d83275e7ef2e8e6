"""Parity-based (GKMR) pseudo-spin correlators, the optimized CHSH value and
the closed-form asymptotic expansions used to cross-check them."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .model import CovarianceMatrix, purity, reduced_a
from .numeric import CONSTANTS

EULER = CONSTANTS.euler_gamma


@dataclass(frozen=True)
class CorrelatorSet:
    sxsx: float
    szsz: float
    sxsz: float
    bell: float
    purity: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("sxsx", "szsz"):
            v = getattr(self, name)
            if not -1 - 1e-12 <= v <= 1 + 1e-12:
                raise ValueError(f"{name}={v} outside [-1, 1]")


def bell_value(szsz_value, sxsx_value):
    return 2 * math.hypot(szsz_value, sxsx_value)


def szsz(gamma: CovarianceMatrix):
    return purity(gamma)


def sxsx(gamma: CovarianceMatrix):
    a = reduced_a(gamma)
    return -2 / math.pi * math.atan(a.a12 / math.sqrt(a.det()))


def sxsz(gamma: CovarianceMatrix = None):
    # the integrand sign(phi1) delta(phi2) delta(pi2) is odd under q -> -q
    return 0.0


def bell(gamma: CovarianceMatrix) -> CorrelatorSet:
    p = purity(gamma)
    x = sxsx(gamma)
    return CorrelatorSet(x, p, sxsz(gamma), bell_value(p, x), p)


def chsh(c: CorrelatorSet, theta, theta_prime):
    """CHSH sum with a = S_z, a' = S_x and b, b' in the xz plane at polar angles theta, theta'."""
    zx = c.sxsz  # <S_z S_x> vanishes for the same parity reason as <S_x S_z>
    e_ab = math.sin(theta) * zx + math.cos(theta) * c.szsz
    e_abp = math.sin(theta_prime) * zx + math.cos(theta_prime) * c.szsz
    e_apb = math.sin(theta) * c.sxsx + math.cos(theta) * c.sxsz
    e_apbp = math.sin(theta_prime) * c.sxsx + math.cos(theta_prime) * c.sxsz
    return e_ab + e_abp + e_apb - e_apbp


def chsh_maximum(c: CorrelatorSet):
    """Maximize the raw CHSH sum over both angles numerically.

    The sum separates into a theta part and a theta' part, so each is a
    bounded one-dimensional search around the best point of a coarse scan.
    """
    zx = c.sxsz

    def best(sin_coef, cos_coef):
        f = lambda t: -(sin_coef * math.sin(t) + cos_coef * math.cos(t))
        grid = np.linspace(-math.pi, math.pi, 73)
        t0 = grid[int(np.argmin([f(t) for t in grid]))]
        res = optimize.minimize_scalar(f, bounds=(t0 - 0.1, t0 + 0.1), method="bounded",
                                       options={"xatol": 1e-12})
        return float(res.x)

    t = best(zx + c.sxsx, c.szsz + c.sxsz)
    tp = best(zx - c.sxsx, c.szsz - c.sxsz)
    return chsh(c, t, tp), t, tp


# ------------------------------------------------------------------ expansions

def _log_term(delta):
    return 1 - 2 * math.log(delta / 2)


def minkowski_spin_approx(alpha, delta):
    """Small-delta, large-alpha forms of (sxsx, szsz) in flat space."""
    sx = 8 * (1 + delta) / (9 * math.pi * alpha ** 2)
    if delta == 0:
        return sx, 0.0
    sz = 4 * math.pi ** 2 / (9 * abs(_log_term(delta))) * (1 + 8 / (81 * alpha ** 4))
    return sx, sz


def minkowski_bell_approx(alpha, delta):
    if delta == 0:
        return 16 / (9 * math.pi * alpha ** 2)
    L = _log_term(delta)
    return 8 * math.pi ** 2 / (9 * abs(L)) * (1 + 2 / alpha ** 4 * (4 / 81 + (L / math.pi ** 3) ** 2))


def minkowski_bell_plateau(delta):
    return 8 * math.pi ** 2 / (9 * abs(_log_term(delta)))


def desitter_smallHR_approx(alpha, beta, delta, HR):
    """(sxsx, szsz) expanded to second order in HR, then in 1/alpha, delta and beta."""
    g = EULER
    l2 = math.log(2)
    L = _log_term(delta)
    # the HR^2 bracket enters with a minus sign: gamma_13/gamma_11 grows with HR
    # because L_-1 > 0, which the full pipeline confirms
    sx = 8 / (9 * math.pi * alpha ** 2) - HR ** 2 * (
        8 / (9 * math.pi) * (g + math.log(alpha * beta) - 1)
        + 32 * (5 * g - 11 + 5 * math.log(2 * beta)) / (405 * alpha ** 2 * math.pi))
    num = (1 + 2 * g * (1 + 2 * l2) - 5 * l2 + 4 * l2 ** 2 + math.log(beta) * (2 - 4 * math.log(delta / 2))
           + (7 - 4 * g - 4 * l2) * math.log(delta))
    sz = 4 * math.pi ** 2 / (9 * abs(L)) + 8 * math.pi ** 2 / 81 * HR ** 2 * num / (L * abs(L))
    return sx, sz


def desitter_largeHR_approx(alpha, beta, delta, HR):
    """(sxsx, szsz) at leading order for HR >> 1 and alpha >> 1."""
    g = EULER
    l2 = math.log(2)
    ratio = 4 * (1 - g - math.log(alpha * beta)) / math.sqrt(
        (3 + 4 * math.log(alpha / 2)) * (11 - 8 * g - 4 * math.log(2 * alpha * beta ** 2)))
    sx = 2 / math.pi * math.atan(ratio)
    first = (4 * g * (1 + 2 * l2) - 1 - 9 * l2 + 4 * l2 ** 2
             + 2 * math.log(alpha * beta ** 2) * (1 - 2 * math.log(delta / 2))
             + math.log(delta) * (11 - 8 * g - 4 * l2))
    second = (3 - l2 + 4 * l2 ** 2 - math.log(alpha) * (2 - 4 * math.log(delta / 2))
              + (3 - 4 * l2) * math.log(delta))
    sz = 2 * math.pi ** 2 / HR ** 2 / math.sqrt(first * second)
    return sx, sz


# ------------------------------------------------- phase-space transforms (oracle)

def weyl_sx(phi):
    return np.sign(phi) / (2 * math.pi)


def weyl_sz_smoothed(phi, pi, var_phi, var_pi):
    """-(1/2) delta(phi) delta(pi) with each delta replaced by a centred Gaussian."""
    k = np.exp(-0.5 * (phi * phi / var_phi + pi * pi / var_pi)) / (2 * math.pi * math.sqrt(var_phi * var_pi))
    return -0.5 * k


def weyl_sy_smoothed(phi, pi, var_phi, eps):
    """-(1/2pi) delta(phi) P(1/pi) with a Gaussian delta and a Lorentzian principal value."""
    k = np.exp(-0.5 * phi * phi / var_phi) / math.sqrt(2 * math.pi * var_phi)
    return -k * pi / (pi * pi + eps * eps) / (2 * math.pi)
