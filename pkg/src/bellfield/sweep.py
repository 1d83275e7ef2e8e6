"""Parameter sweeps: config parsing, grid expansion, per-point evaluation and
table formatting.  File I/O lives in the command-line layer."""

import copy
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .gkmr import bell
from .larsson import LarssonConfig, bell_larsson
from .model import (DESITTER, MINKOWSKI, ConditioningError, SceneParams, UnphysicalStateError, alpha_min,
                    build_covariance)
from .numeric import ConvergenceError, MatrixError
from .window import DivergenceError

PARAM_NAMES = ("HR", "alpha", "beta", "delta", "ell")
OBSERVABLES = ("sxsx", "szsz", "bell", "purity")
FAMILIES = ("gkmr", "larsson")


class SpecError(ValueError):
    """Invalid sweep configuration."""


def param_order(names):
    return sorted(names, key=str.lower)


@dataclass(frozen=True)
class GridAxis:
    name: str
    min: float = None
    max: float = None
    count: int = 1
    scale: str = "linear"
    values: tuple = None

    def __post_init__(self):
        if self.name not in PARAM_NAMES:
            raise SpecError(f"unknown axis {self.name!r}; expected one of {', '.join(PARAM_NAMES)}")
        if self.values is not None:
            if not self.values:
                raise SpecError(f"axis {self.name}: empty value list")
            return
        if self.scale not in ("linear", "log"):
            raise SpecError(f"axis {self.name}: scale must be linear or log")
        if not isinstance(self.count, int) or self.count < 1:
            raise SpecError(f"axis {self.name}: count must be a positive integer")
        for key in ("min", "max"):
            v = getattr(self, key)
            if not (isinstance(v, (int, float)) or v == "min"):
                raise SpecError(f"axis {self.name}: {key} must be a number")
        if self.scale == "log" and not all(isinstance(v, str) or v > 0 for v in (self.min, self.max)):
            raise SpecError(f"axis {self.name}: log scale needs positive limits")

    def grid(self, delta=None):
        if self.values is not None:
            return [float(v) for v in self.values]
        lo, hi = self.min, self.max
        # "min" is only meaningful for alpha; it is resolved per point
        if lo == "min":
            lo = alpha_min(delta)
        if hi == "min":
            hi = alpha_min(delta)
        if self.count == 1:
            return [float(lo)]
        if self.scale == "log":
            return [float(v) for v in np.geomspace(lo, hi, self.count)]
        return [float(v) for v in np.linspace(lo, hi, self.count)]

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict) or "name" not in d:
            raise SpecError("each axis needs at least a name")
        extra = set(d) - {"name", "min", "max", "count", "scale", "values"}
        if extra:
            raise SpecError(f"axis {d['name']}: unknown keys {sorted(extra)}")
        vals = d.get("values")
        if vals is None and ("min" not in d or "max" not in d):
            raise SpecError(f"axis {d['name']}: give min/max/count or an explicit values list")
        return cls(d["name"], d.get("min"), d.get("max"), d.get("count", 1), d.get("scale", "linear"),
                   tuple(vals) if vals is not None else None)


DEFAULTS = {
    "background": MINKOWSKI,
    "family": "gkmr",
    "axes": [],
    "fixed": {},
    "larsson": {},
    "output": None,
    "format": "csv",
    "plot": False,
    "workers": 1,
}


@dataclass(frozen=True)
class SweepSpec:
    background: str
    axes: tuple
    fixed: dict = field(default_factory=dict, hash=False)
    family: str = "gkmr"
    larsson: dict = field(default_factory=dict, hash=False)
    output: str = None
    format: str = "csv"
    plot: bool = False
    workers: int = 1
    config: dict = field(default_factory=dict, hash=False, compare=False)

    @classmethod
    def from_config(cls, cfg):
        if not isinstance(cfg, dict):
            raise SpecError("config must be a JSON object")
        unknown = set(cfg) - set(DEFAULTS)
        if unknown:
            raise SpecError(f"unknown config keys {sorted(unknown)}")
        full = copy.deepcopy(DEFAULTS)
        full.update(copy.deepcopy(cfg))
        if full["background"] not in (MINKOWSKI, DESITTER):
            raise SpecError(f"background must be {MINKOWSKI} or {DESITTER}")
        if full["family"] not in FAMILIES:
            raise SpecError(f"family must be one of {FAMILIES}")
        if full["format"] not in ("csv", "json"):
            raise SpecError("format must be csv or json")
        if not isinstance(full["workers"], int) or full["workers"] < 1:
            raise SpecError("workers must be a positive integer")
        if not isinstance(full["axes"], list):
            raise SpecError("axes must be a list")
        axes = tuple(GridAxis.from_dict(a) for a in full["axes"])
        names = [a.name for a in axes]
        if len(set(names)) != len(names):
            raise SpecError("axis names must be unique")
        fixed = full["fixed"]
        if not isinstance(fixed, dict):
            raise SpecError("fixed must be an object")
        bad = set(fixed) - set(PARAM_NAMES)
        if bad:
            raise SpecError(f"unknown fixed parameters {sorted(bad)}")
        clash = set(fixed) & set(names)
        if clash:
            raise SpecError(f"parameters both fixed and swept: {sorted(clash)}")
        have = set(fixed) | set(names)
        need = {"alpha", "delta"}
        if full["background"] == DESITTER:
            need |= {"HR", "beta"}
        if full["family"] == "larsson":
            need |= {"ell"}
        missing = need - have
        if missing:
            raise SpecError(f"missing parameters {sorted(missing)}")
        if full["background"] == MINKOWSKI and "HR" in have:
            raise SpecError("HR is not a Minkowski parameter")
        if full["family"] == "gkmr" and "ell" in have:
            raise SpecError("ell only applies to the larsson family")
        for k, v in fixed.items():
            if not (isinstance(v, (int, float)) and not isinstance(v, bool)) and not (k == "alpha" and v == "min"):
                raise SpecError(f"fixed {k} must be a number")
        lcfg = full["larsson"]
        bad = set(lcfg) - {"tail_tol", "max_shell", "method"}
        if bad:
            raise SpecError(f"unknown larsson keys {sorted(bad)}")
        try:
            LarssonConfig(1.0, **lcfg)
        except (TypeError, ValueError) as exc:
            raise SpecError(f"larsson config: {exc}") from None
        return cls(full["background"], axes, dict(fixed), full["family"], dict(lcfg), full["output"],
                   full["format"], bool(full["plot"]), full["workers"], full)

    def param_names(self):
        return param_order(set(self.fixed) | {a.name for a in self.axes})

    def columns(self):
        cols = self.param_names() + list(OBSERVABLES) + ["clamped", "error"]
        if self.family == "larsson":
            cols += ["method", "shells", "tail"]
        return cols

    def points(self):
        """Parameter dicts in row-major order, first axis outermost."""
        out = []

        def rec(k, cur):
            if k == len(self.axes):
                out.append(dict(cur))
                return
            ax = self.axes[k]
            delta = cur.get("delta", self.fixed.get("delta"))
            if ax.name == "alpha" and "min" in (ax.min, ax.max) and delta is None:
                raise SpecError("alpha=min needs delta fixed or on an earlier axis")
            for v in ax.grid(delta):
                cur[ax.name] = v
                rec(k + 1, cur)
            cur.pop(ax.name, None)

        rec(0, dict(self.fixed))
        return out

    def config_hash(self):
        canon = {k: v for k, v in self.config.items() if k not in ("output", "workers", "plot")}
        blob = json.dumps(canon, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def set_override(cfg, assignment):
    """Apply ``key.path=value`` to a nested config; value is JSON if it parses."""
    if "=" not in assignment:
        raise SpecError(f"override {assignment!r} is not key=value")
    key, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    parts = key.strip().split(".")
    if not all(parts):
        raise SpecError(f"bad override key {key!r}")
    node = cfg
    for i, p in enumerate(parts[:-1]):
        nxt = parts[i + 1]
        if isinstance(node, list):
            try:
                node = node[int(p)]
            except (ValueError, IndexError):
                raise SpecError(f"override {key!r}: no list element {p}") from None
            continue
        if p not in node or not isinstance(node[p], (dict, list)):
            node[p] = [] if nxt.isdigit() else {}
        node = node[p]
    last = parts[-1]
    if isinstance(node, list):
        try:
            node[int(last)] = value
        except (ValueError, IndexError):
            raise SpecError(f"override {key!r}: no list element {last}") from None
    else:
        node[last] = value
    return cfg


# ------------------------------------------------------------------ evaluation

ERROR_CODES = (
    (DivergenceError, "divergent"),
    (ConvergenceError, "no_convergence"),
    (UnphysicalStateError, "unphysical"),
    (ConditioningError, "ill_conditioned"),
    (MatrixError, "not_positive_definite"),
    (ArithmeticError, "arithmetic"),
    (ValueError, "invalid_point"),
)


def error_code(exc):
    for kind, code in ERROR_CODES:
        if isinstance(exc, kind):
            return code
    return "internal"


def scene_for(background, params):
    delta = params["delta"]
    if background == MINKOWSKI:
        return SceneParams.minkowski(params["alpha"], delta, params.get("beta", 0.0))
    return SceneParams.desitter(params["HR"], params["alpha"], params["beta"], delta)


def evaluate_point(task):
    """One grid point -> one row dict; failures become an error code."""
    background, family, params, lcfg = task
    row = dict(params)
    row["clamped"] = 0
    try:
        delta = float(params["delta"])
        amin = alpha_min(delta) if delta > 0 else 2.0
        alpha = params["alpha"]
        if alpha == "min" or alpha < amin:
            row["clamped"] = int(alpha != "min")
            alpha = amin
        row["alpha"] = float(alpha)
        scene = scene_for(background, row)
        gamma = build_covariance(scene)
        if family == "gkmr":
            res = bell(gamma)
        else:
            res = bell_larsson(gamma, LarssonConfig(params["ell"], **lcfg))
            row["method"] = res.diagnostics["method"]
            row["shells"] = res.diagnostics["shells"]
            row["tail"] = res.diagnostics["tail"]
        row.update(sxsx=res.sxsx, szsz=res.szsz, bell=res.bell, purity=res.purity, error="")
    except Exception as exc:  # noqa: BLE001 - every failure becomes a flagged row
        row["error"] = error_code(exc)
    return row


def run_sweep(spec: SweepSpec, workers=None):
    tasks = [(spec.background, spec.family, p, spec.larsson) for p in spec.points()]
    n = workers or spec.workers
    if n <= 1 or len(tasks) < 2:
        return [evaluate_point(t) for t in tasks]
    # map() yields in submission order, so completion order never leaks into the table
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(evaluate_point, tasks, chunksize=max(1, len(tasks) // (4 * n))))


# ------------------------------------------------------------------ formatting

def format_value(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    return str(v)


def provenance(spec: SweepSpec, extra=None):
    lines = [f"bellfield {__version__}", f"config-sha256 {spec.config_hash()}",
             f"background {spec.background}", f"family {spec.family}"]
    for k, v in (extra or {}).items():
        lines.append(f"{k} {v}")
    return lines


def to_csv(columns, rows, prov):
    buf = io.StringIO()
    for line in prov:
        buf.write(f"# {line}\n")
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(format_value(r.get(c)) for c in columns) + "\n")
    return buf.getvalue()


def to_json(columns, rows, prov):
    clean = [{c: (r.get(c) if not (isinstance(r.get(c), float) and not math.isfinite(r.get(c)))
                  else format_value(r.get(c))) for c in columns} for r in rows]
    return json.dumps({"provenance": prov, "columns": columns, "rows": clean}, indent=1) + "\n"


def parse_csv(text):
    """(provenance lines, columns, rows as string dicts) from emitted CSV."""
    prov, cols, rows = [], None, []
    for line in text.splitlines():
        if line.startswith("#"):
            prov.append(line[1:].strip())
        elif cols is None:
            cols = line.split(",")
        elif line:
            rows.append(dict(zip(cols, line.split(","))))
    return prov, cols, rows
