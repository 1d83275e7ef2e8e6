"""Larsson pseudo-spin correlators: field-axis bins of width ell.

Two exact evaluation routes are provided.  The bin route integrates each
(n, m) pair of field bins (one field integral done by error functions, the
other by Gauss-Legendre panels) and sums square shells.  The dual route
expands the bin indicator functions in Fourier series so every term is a
Gaussian characteristic function.  The bin route is cheap when ell is large
compared with the field spread, the dual route when it is small.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .gkmr import CorrelatorSet, bell_value
from .model import CovarianceMatrix, ReducedA, precision_blocks, purity
from .numeric import ConvergenceError, QuadratureSpec, erf_complex_scaled, truncated_double_sum

SIGNS = ((1, 1), (1, -1), (-1, 1), (-1, -1))
# bins extend to this many field standard deviations
_CLIP_SIGMAS = 9.0
_GL_ORDER = 16
_MAX_PANELS = 64
# Gaussian factors below exp(-_EXP_CUT) are dropped in the dual series
_EXP_CUT = 40.0
_MAX_DUAL_K = 4001


@dataclass(frozen=True)
class LarssonConfig:
    ell: float
    tail_tol: float = 1e-10
    max_shell: int = 400
    quad: QuadratureSpec = QuadratureSpec()
    method: str = "auto"

    def __post_init__(self):
        if not (self.ell > 0 and math.isfinite(self.ell)):
            raise ValueError("ell must be positive and finite")
        if not self.tail_tol > 0:
            raise ValueError("tail_tol must be positive")
        if self.method not in ("auto", "bins", "dual"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class LarssonAuxiliary:
    """Shift coefficients of the conditional momentum mean along a sign vector.

    For signs eps, (a_tilde_1, a_tilde_2) = Lambda_phipi Lambda_pipi^-1 eps,
    the field-space gradient of the momentum phase l*eps.E[pi | phi].
    """
    a_tilde_1: float
    a_tilde_2: float
    eps: tuple

    @classmethod
    def from_blocks(cls, blocks, eps):
        v = blocks.phipi @ np.linalg.solve(blocks.pipi, np.asarray(eps, dtype=float))
        return cls(float(v[0]), float(v[1]), tuple(eps))


def _erf_diff(x1, x0):
    """erf(x1) - erf(x0) without cancellation in the tails."""
    both_pos = (x0 > 0) & (x1 > 0)
    both_neg = (x0 < 0) & (x1 < 0)
    plain = special.erf(x1) - special.erf(x0)
    pos = special.erfc(x0) - special.erfc(x1)
    neg = special.erfc(-x1) - special.erfc(-x0)
    return np.where(both_pos, pos, np.where(both_neg, neg, plain))


class _Context:
    """Per-covariance quantities shared by all (n, m) terms."""

    def __init__(self, gamma: CovarianceMatrix, cfg: LarssonConfig, a: ReducedA = None):
        self.cfg = cfg
        self.ell = cfg.ell
        if gamma is not None:
            blocks = precision_blocks(gamma)
            self.blocks = blocks
            self.a11, self.a12, self.a22 = blocks.a[0, 0], blocks.a[0, 1], blocks.a[1, 1]
            self.prefactor = 1 / (2 * math.pi * math.sqrt(gamma.det() * np.linalg.det(blocks.pipi)))
        else:
            self.blocks = None
            self.a11, self.a12, self.a22 = a.a11, a.a12, a.a22
            self.prefactor = math.sqrt(a.det()) / (2 * math.pi)
        self.s = math.sqrt(2 * self.a22)
        self.curv = self.a11 - self.a12 ** 2 / self.a22
        self.sigma = 1 / math.sqrt(self.curv)
        self.clip = _CLIP_SIGMAS * self.sigma
        self.norm = math.sqrt(math.pi / (2 * self.a22))
        scales = [self.sigma]
        if self.a12 != 0:
            scales.append(2 * self.s / abs(self.a12))
        self.eps_data = []
        if self.blocks is not None:
            cov_pi = np.linalg.inv(self.blocks.pipi)
            for eps in SIGNS:
                aux = LarssonAuxiliary.from_blocks(self.blocks, eps)
                e = np.array(eps, dtype=float)
                gauss = math.exp(-0.5 * self.ell ** 2 * e @ cov_pi @ e)
                freq = self.a12 * aux.a_tilde_2 / self.a22 - aux.a_tilde_1
                self.eps_data.append((aux, gauss, freq))
                if freq != 0:
                    scales.append(8 / (self.ell * abs(freq)))
        self.panel = min(scales)
        x, w = np.polynomial.legendre.leggauss(_GL_ORDER)
        self._gx = (x + 1) / 2
        self._gw = w / 2

    def nodes(self, lo, hi):
        """Composite Gauss-Legendre nodes on [lo, hi] clipped to the field support."""
        lo = np.maximum(lo, -self.clip)
        hi = np.minimum(hi, self.clip)
        width = np.clip(hi - lo, 0.0, None)
        panels = int(min(_MAX_PANELS, max(1, math.ceil(min(self.ell, 2 * self.clip) / self.panel))))
        t = (np.arange(panels)[:, None] + self._gx[None, :]).ravel() / panels
        wt = np.tile(self._gw, panels) / panels
        phi = lo[:, None] + width[:, None] * t[None, :]
        return phi, width[:, None] * wt[None, :]

    def z_terms(self, n, m):
        ell = self.ell
        phi, w = self.nodes(n * ell, (n + 1) * ell)
        base = self.a12 * phi
        x1 = (base + self.a22 * ((m + 1) * ell)[:, None]) / self.s
        x0 = (base + self.a22 * (m * ell)[:, None]) / self.s
        g = np.exp(-0.5 * phi * phi * self.curv)
        return self.norm * np.sum(w * g * _erf_diff(x1, x0), axis=1)

    def x_terms(self, n, m, return_complex=False):
        ell = self.ell
        lo = ell / 2 + 2 * n * ell
        phi, w = self.nodes(lo, lo + ell)
        base = self.a12 * phi
        env = np.exp(-0.5 * phi * phi * self.curv)
        top = self.a22 * ((2 * m + 1.5) * ell)[:, None]
        bot = self.a22 * ((2 * m + 0.5) * ell)[:, None]
        total = np.zeros(n.shape, dtype=complex)
        for aux, gauss, freq in self.eps_data:
            y = ell * aux.a_tilde_2 / self.s
            # exp(-y^2) is folded into the scaled erf
            d = erf_complex_scaled((base + top) / self.s, y) - erf_complex_scaled((base + bot) / self.s, y)
            total += gauss * np.sum(w * env * np.exp(1j * ell * phi * freq) * d, axis=1)
        total *= self.norm
        return total if return_complex else total.real


def z_term(n, m, a: ReducedA, cfg: LarssonConfig):
    """Gaussian weight of field bin n at patch 1 and bin m at patch 2 (unnormalized)."""
    ctx = _Context(None, cfg, a)
    return float(ctx.z_terms(np.array([n]), np.array([m]))[0])


def x_term(n, m, gamma: CovarianceMatrix, cfg: LarssonConfig, return_complex=False):
    """Momentum-phase weighted bin pair term; real after summing the four sign vectors."""
    ctx = _Context(gamma, cfg)
    val = ctx.x_terms(np.array([n]), np.array([m]), return_complex=True)[0]
    return complex(val) if return_complex else float(val.real)


def start_shell(gamma_or_sigma, ell):
    sigma = gamma_or_sigma if np.isscalar(gamma_or_sigma) else math.sqrt(gamma_or_sigma.g11)
    return int(math.ceil(6 * sigma / ell)) + 2


# ------------------------------------------------------------------ bin route

@dataclass
class _Diagnostics:
    method: str = ""
    shells: int = 0
    tail: float = 0.0
    approximation: bool = False
    extra: dict = field(default_factory=dict)


def _bins(gamma, cfg, want):
    ctx = _Context(gamma, cfg)
    n0 = start_shell(ctx.sigma, cfg.ell)
    out = {}
    diag = _Diagnostics("bins")
    if "szsz" in want:
        term = lambda n, m: np.where((n + m) % 2 == 0, 1.0, -1.0) * ctx.z_terms(n, m)
        r = truncated_double_sum(term, cfg.tail_tol / ctx.prefactor, cfg.max_shell, min(n0, cfg.max_shell),
                                 full_output=True)
        out["szsz"] = ctx.prefactor * r.value
        diag.shells = max(diag.shells, r.order)
        diag.tail = max(diag.tail, ctx.prefactor * r.last_shell)
    if "sxsx" in want:
        residue = [0.0, 0.0]

        def term(n, m):
            c = ctx.x_terms(n, m, return_complex=True)
            residue[0] += float(np.sum(np.abs(c.imag)))
            residue[1] += float(np.sum(np.abs(c)))
            return c.real

        r = truncated_double_sum(term, cfg.tail_tol / ctx.prefactor, cfg.max_shell, min(n0, cfg.max_shell),
                                 full_output=True)
        out["sxsx"] = ctx.prefactor * r.value
        diag.shells = max(diag.shells, r.order)
        diag.tail = max(diag.tail, ctx.prefactor * r.last_shell)
        diag.extra["imag_residue"] = residue[0] / residue[1] if residue[1] else 0.0
    return out, diag


# ------------------------------------------------------------------ dual route

def _dual_kmax(gamma, ell):
    # slowest Gaussian decay is along the smallest field-marginal eigenvalue
    lam = gamma.g11 - abs(gamma.g13)
    return int(ell / math.pi * math.sqrt(2 * _EXP_CUT / lam)) + 3


def _dual_szsz(g, ks, ell):
    a = ks * math.pi / ell
    s11, s12 = g.g11, g.g13
    A, B = np.meshgrid(a, a, indexing="ij")
    quad = A * A * s11 + B * B * s11
    e_minus = np.exp(-0.5 * (quad - 2 * A * B * s12))
    e_plus = np.exp(-0.5 * (quad + 2 * A * B * s12))
    terms = 0.5 * (e_minus - e_plus) / np.outer(ks, ks)
    return 16 / math.pi ** 2 * terms


def _dual_sxsx(g, ks, ell):
    full = g.full()
    kap = np.concatenate([[0.0], ks * math.pi / ell, -ks * math.pi / ell])
    sgn = np.where(((ks - 1) // 2) % 2 == 0, 1.0, -1.0)
    coef = np.concatenate([[0.5], -sgn / (math.pi * ks), -sgn / (math.pi * ks)])
    C = np.outer(coef, coef)
    total = np.zeros_like(C)
    K1, K2 = np.meshgrid(kap, kap, indexing="ij")
    for e1, e2 in SIGNS:
        t = np.stack([K1, np.full_like(K1, ell * e1), K2, np.full_like(K1, ell * e2)], axis=-1)
        q = np.einsum("ija,ab,ijb->ij", t, full, t)
        total += C * np.exp(-0.5 * q)
    return total, kap


def _dual(gamma, cfg, want):
    ell = cfg.ell
    kmax = _dual_kmax(gamma, ell)
    while True:
        ks = np.arange(1, kmax + 1, 2, dtype=float)
        out = {}
        tail = 0.0
        if "szsz" in want:
            t = _dual_szsz(gamma, ks, ell)
            out["szsz"] = float(np.sum(t))
            tail = max(tail, float(np.sum(np.abs(t[-1, :])) + np.sum(np.abs(t[:, -1]))))
        if "sxsx" in want:
            t, kap = _dual_sxsx(gamma, ks, ell)
            out["sxsx"] = float(np.sum(t))
            edge = np.abs(np.abs(kap) - kap.max()) < 1e-12 * max(kap.max(), 1.0)
            tail = max(tail, float(np.sum(np.abs(t[edge, :])) + np.sum(np.abs(t[:, edge]))))
        if tail < cfg.tail_tol or kmax >= _MAX_DUAL_K:
            break
        kmax = min(2 * kmax + 1, _MAX_DUAL_K)
    if tail >= cfg.tail_tol:
        raise ConvergenceError(f"dual series at ell={ell}: last shell {tail:.3g} with k <= {kmax}",
                               estimate=out.get("sxsx", out.get("szsz")), error=tail, order=kmax)
    return out, _Diagnostics("dual", kmax, tail)


# ------------------------------------------------------------------ dispatch

def _choose(gamma, cfg):
    if cfg.method != "auto":
        return cfg.method
    n0 = start_shell(gamma, cfg.ell)
    kmax = _dual_kmax(gamma, cfg.ell)
    bins_ok = n0 <= cfg.max_shell
    dual_ok = kmax <= _MAX_DUAL_K
    if bins_ok and dual_ok:
        # both exact: pick the cheaper term count
        return "bins" if (2 * n0 + 1) ** 2 * 16 < 4 * (kmax + 1) ** 2 else "dual"
    if bins_ok:
        return "bins"
    if dual_ok:
        return "dual"
    return "approx"


def _evaluate(gamma, cfg, want):
    method = _choose(gamma, cfg)
    if method == "bins":
        return _bins(gamma, cfg, want)
    if method == "dual":
        return _dual(gamma, cfg, want)
    a = precision_blocks(gamma).a
    out = {"sxsx": small_ell_sxsx(gamma, cfg.ell),
           "szsz": small_ell_szsz(ReducedA(a[0, 0], a[0, 1], a[1, 1]), cfg.ell)}
    return out, _Diagnostics("small-ell", approximation=True)


def szsz_larsson(gamma: CovarianceMatrix, cfg: LarssonConfig):
    return _evaluate(gamma, cfg, ("szsz",))[0]["szsz"]


def sxsx_larsson(gamma: CovarianceMatrix, cfg: LarssonConfig):
    return _evaluate(gamma, cfg, ("sxsx",))[0]["sxsx"]


def sxsz_larsson(gamma=None, cfg=None):
    # odd in (phi2, pi2) -> -(phi2, pi2) after shifting by half a bin
    return 0.0


def bell_larsson(gamma: CovarianceMatrix, cfg: LarssonConfig) -> CorrelatorSet:
    vals, diag = _evaluate(gamma, cfg, ("szsz", "sxsx"))
    sz = vals["szsz"]
    sx = vals["sxsx"]
    info = {"method": diag.method, "shells": diag.shells, "tail": diag.tail,
            "approximation": diag.approximation}
    info.update(diag.extra)
    return CorrelatorSet(sx, sz, sxsz_larsson(), bell_value(sz, sx), purity(gamma), info)


def minimum_bin_ell(gamma: CovarianceMatrix, max_shell=400):
    """Smallest ell the bin route can reach within max_shell shells."""
    return 6 * math.sqrt(gamma.g11) / (max_shell - 2)


# ------------------------------------------------------------------ limits

def small_ell_sxsx(gamma: CovarianceMatrix, ell):
    """Bins much finer than the field spread: the indicators average to 1/2 each."""
    total = 0.0
    for e1, e2 in SIGNS:
        quad = gamma.g22 + gamma.g22 + 2 * e1 * e2 * gamma.g24
        total += math.exp(-0.5 * ell * ell * quad)
    return total / 4


def small_ell_szsz(a: ReducedA, ell):
    """Leading Fourier harmonic of the alternating-bin correlator."""
    if ell == 0:
        return 0.0
    det = a.det()
    var_diff = (a.a11 + a.a22 + 2 * a.a12) / det
    var_sum = (a.a11 + a.a22 - 2 * a.a12) / det
    c = math.pi ** 2 / (2 * ell * ell)
    return 8 / math.pi ** 2 * (math.exp(-c * var_diff) - math.exp(-c * var_sum))


def large_ell_limits(gamma: CovarianceMatrix):
    """(sxsx, szsz) as ell -> infinity."""
    from .gkmr import sxsx
    return 0.0, sxsx(gamma)


# --------------------------------------------------- phase-space transforms (oracle)

def weyl_sz(phi, ell):
    return np.where(np.floor(phi / ell).astype(np.int64) % 2 == 0, 1.0, -1.0)


def weyl_sx(phi, pi, ell):
    inside = np.floor((phi - ell / 2) / ell).astype(np.int64) % 2 == 0
    return 2 * np.cos(pi * ell) * inside


def weyl_sy(phi, pi, ell):
    inside = np.floor((phi - ell / 2) / ell).astype(np.int64) % 2 == 0
    return 2 * np.sin(pi * ell) * inside
