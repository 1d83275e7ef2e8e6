"""Self-check suite behind ``bellfield validate``.

Each check compares two independent routes to the same number and records the
measured deviation next to its tolerance.  ``gamma_hook`` perturbs the
covariance fed to the closed forms of the Monte-Carlo checks, which is how the
negative control is exercised.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import gkmr
from .larsson import LarssonConfig, bell_larsson, sxsx_larsson, szsz_larsson, weyl_sx, weyl_sz
from .model import CovarianceMatrix, SceneParams, build_covariance, precision_blocks, purity
from .numeric import gaussian_mc_expectation
from .window import IntegralParams, integral_K, integral_L


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    tolerance: float
    unit: str = "rel"

    @property
    def passed(self):
        return bool(self.measured <= self.tolerance)

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<34} {self.unit}={self.measured:.3e}  tol={self.tolerance:.1e}"


def _rel(a, b, floor=1e-300):
    return abs(a - b) / max(abs(b), floor)


def _entry_dev(g1: CovarianceMatrix, g2: CovarianceMatrix):
    """Largest entry difference scaled by sqrt(gamma_ii gamma_jj)."""
    d = g1.full()
    e = g2.full()
    scale = np.sqrt(np.outer(np.diag(e), np.diag(e)))
    return float(np.max(np.abs(d - e) / scale))


def check_kl(fast):
    alphas = [3.0, 20.0] if fast else [2.2, 3.0, 10.0, 40.0]
    betas = [1e-3] if fast else [1e-4, 1e-2]
    deltas = [0.1] if fast else [0.01, 0.1, 1.0]
    worst = 0.0
    for d in deltas:
        for b in betas:
            for mu in (-1, 1, 3):
                p = IntegralParams(mu, 0.0, b, d)
                worst = max(worst, _rel(integral_K(p, "analytic"), integral_K(p, "quadrature")))
                for a in alphas:
                    p = IntegralParams(mu, a, b, d)
                    worst = max(worst, _rel(integral_L(p, "analytic"), integral_L(p, "quadrature")))
    return Check("kl_analytic_vs_quadrature", worst, 1e-8)


def _scenes(fast):
    out = [SceneParams.minkowski(3.0, 0.1), SceneParams.desitter(1.0, 3.0, 1e-4, 0.1)]
    if not fast:
        out += [SceneParams.minkowski(4.5, 1.0), SceneParams.desitter(100.0, 2.02, 1e-4, 0.01),
                SceneParams.desitter(1e-2, 10.0, 1e-3, 0.5)]
    return out


def check_spectra(fast):
    worst = 0.0
    for s in _scenes(True):
        worst = max(worst, _entry_dev(build_covariance(s, "spectra"), build_covariance(s)))
    return Check("covariance_integrals_vs_spectra", worst, 1e-8)


def _smoothed_szsz(gamma: CovarianceMatrix, kappa):
    g = gamma.full()
    g = g + kappa * np.diag(np.diag(g))
    return 1 / (4 * math.sqrt(np.linalg.det(g)))


def check_gkmr_mc(seed, fast, gamma_hook):
    n = 200_000 if fast else 1_000_000
    kappa = 0.05
    dev = {"sxsx": 0.0, "szsz": 0.0, "sxsz": 0.0}
    for k, s in enumerate(_scenes(fast)):
        g = build_covariance(s)
        ref = gamma_hook(g) if gamma_hook else g
        vphi, vpi = kappa * g.g11, kappa * g.g22
        mc, err = gaussian_mc_expectation(g, lambda q: gkmr.weyl_sx(q[:, 0]) * gkmr.weyl_sx(q[:, 2]), n, seed + k)
        dev["sxsx"] = max(dev["sxsx"], abs(mc - gkmr.sxsx(ref)) / err)
        mc, err = gaussian_mc_expectation(
            g, lambda q: gkmr.weyl_sz_smoothed(q[:, 0], q[:, 1], vphi, vpi)
            * gkmr.weyl_sz_smoothed(q[:, 2], q[:, 3], vphi, vpi), n, seed + 100 + k)
        dev["szsz"] = max(dev["szsz"], abs(mc - _smoothed_szsz(ref, kappa)) / err)
        mc, err = gaussian_mc_expectation(
            g, lambda q: gkmr.weyl_sx(q[:, 0]) * gkmr.weyl_sz_smoothed(q[:, 2], q[:, 3], vphi, vpi),
            n, seed + 200 + k)
        dev["sxsz"] = max(dev["sxsz"], abs(mc - gkmr.sxsz(ref)) / err)
    return [Check(f"gkmr_{name}_vs_monte_carlo", v, 3.0, "sigma") for name, v in dev.items()]


def check_larsson_mc(seed, fast, gamma_hook):
    n = 200_000 if fast else 1_000_000
    norm = 1 / (2 * math.pi) ** 2
    dev = {"sxsx": 0.0, "szsz": 0.0}
    for k, s in enumerate(_scenes(True)):
        g = build_covariance(s)
        ref = gamma_hook(g) if gamma_hook else g
        for ell in ((1.0,) if fast else (0.5, 1.0, 3.0)):
            cfg = LarssonConfig(ell)
            mc, err = gaussian_mc_expectation(
                g, lambda q: norm * weyl_sz(q[:, 0], ell) * weyl_sz(q[:, 2], ell), n, seed + 300 + k)
            dev["szsz"] = max(dev["szsz"], abs(mc - szsz_larsson(ref, cfg)) / err)
            mc, err = gaussian_mc_expectation(
                g, lambda q: norm * weyl_sx(q[:, 0], q[:, 1], ell) * weyl_sx(q[:, 2], q[:, 3], ell),
                n, seed + 400 + k)
            dev["sxsx"] = max(dev["sxsx"], abs(mc - sxsx_larsson(ref, cfg)) / err)
    return [Check(f"larsson_{name}_vs_monte_carlo", v, 3.0, "sigma") for name, v in dev.items()]


def check_larsson_routes(fast):
    worst = 0.0
    for s in _scenes(True):
        g = build_covariance(s)
        for ell in (1.0, 3.0):
            a = bell_larsson(g, LarssonConfig(ell, method="bins"))
            b = bell_larsson(g, LarssonConfig(ell, method="dual"))
            worst = max(worst, abs(a.sxsx - b.sxsx), abs(a.szsz - b.szsz))
    return Check("larsson_bins_vs_fourier_series", worst, 1e-9, "abs")


def check_limits():
    g = build_covariance(SceneParams.minkowski(3.0, 0.1))
    small = bell_larsson(g, LarssonConfig(1e-2))
    large = szsz_larsson(g, LarssonConfig(1e2))
    return [Check("larsson_small_ell_limit", abs(small.bell - 2), 1e-2, "abs"),
            Check("larsson_large_ell_limit", abs(large - gkmr.sxsx(g)), 1e-2, "abs")]


def check_structure(fast):
    worst_schur = 0.0
    bad = 0
    for s in _scenes(fast):
        g = build_covariance(s)
        p = purity(g)
        blocks = precision_blocks(g)
        ident = g.det() * np.linalg.det(blocks.pipi) * np.linalg.det(blocks.a)
        worst_schur = max(worst_schur, abs(ident - 1))
        c = gkmr.bell(g)
        swapped = CovarianceMatrix(*g.as_tuple())  # exchange leaves the six entries unchanged
        if not (0 < p <= 1 and g.det() >= 1 / 16 - 1e-9 and abs(c.sxsx) <= 1 and abs(c.szsz) <= 1):
            bad += 1
        full = g.full()[np.ix_([2, 3, 0, 1], [2, 3, 0, 1])]
        if not np.array_equal(full, swapped.full()):
            bad += 1
    return [Check("schur_determinant_identity", worst_schur, 1e-10, "abs"),
            Check("physical_state_invariants", float(bad), 0.0, "count")]


def check_reduction():
    beta, delta, alpha = 1e-4, 1e-2, 3.0
    ds = build_covariance(SceneParams.desitter(1e-6, alpha, beta, delta))
    flat = build_covariance(SceneParams.minkowski(alpha, delta, beta))
    return Check("desitter_small_HR_reduction", _entry_dev(ds, flat), 1e-6)


def run_validation(seed=0, fast=False, gamma_hook=None):
    checks = [check_kl(fast), check_spectra(fast)]
    checks += check_gkmr_mc(seed, fast, gamma_hook)
    checks += check_larsson_mc(seed, fast, gamma_hook)
    checks += [check_larsson_routes(fast)]
    checks += check_limits()
    checks += check_structure(fast)
    checks += [check_reduction()]
    return checks


def format_report(checks, seed, fast):
    lines = [f"bellfield validation  seed={seed}  mode={'fast' if fast else 'full'}"]
    lines += [c.line() for c in checks]
    n_ok = sum(c.passed for c in checks)
    lines.append(f"summary: {n_ok}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n"


def perturb_entry(scale, entry="g13"):
    """Hook multiplying one covariance entry, for negative controls."""
    def hook(g: CovarianceMatrix):
        vals = dict(zip(("g11", "g12", "g22", "g13", "g14", "g24"), g.as_tuple()))
        vals[entry] *= scale
        return CovarianceMatrix(**vals)
    return hook
