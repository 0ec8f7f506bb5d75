"""Experiment sweeps, exponent fits and report output (CSV, JSON, SVG)."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
from dataclasses import dataclass, field, fields
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .classes import (
    EXTREMAL_CANDIDATES,
    WClassSpec,
    _random_real_coeffs,
    a_exponent,
    h_class_sample,
    w_sample,
)
from .cutoff import balancing_threshold, block_decompose, bound_value, budget_schedule
from .discretization import dt1_point_search
from .exceptions import ConfigError, HypcrossError, ResourceCapError
from .index_sets import compositions, hyperbolic_cross, hyperbolic_cross_size
from .sampling_recovery import (
    SmolyakRecovery,
    WeightedLeastSquaresRecovery,
    cubature_chain,
    random_points,
    recovery_error,
)
from .trigpoly import TrigPoly, block_projection, nikolskii_ratio, norm

SCHEMA_VERSION = 1
OUTPUT_ENV = "HYPCROSS_OUTPUT_DIR"
COLUMNS = ("experiment", "d", "n", "m", "p", "r", "q", "family", "metric", "value", "seed")
EXPERIMENTS = ("nikolskii", "littlewood_paley", "cutoff_constants", "recovery", "cubature", "discretization", "schedule")
FAMILIES = ("w", "h", "extremal", "random")
METHODS = ("smolyak", "wls")


def default_output_dir() -> str:
    return os.environ.get(OUTPUT_ENV, ".")


class Row(NamedTuple):
    experiment: str
    d: object = ""
    n: object = ""
    m: object = ""
    p: object = ""
    r: object = ""
    q: object = ""
    family: str = ""
    metric: str = ""
    value: float = float("nan")
    seed: object = ""


class Fit(NamedTuple):
    series: str
    power: float
    log_power: float
    loglog_power: float
    residual: float
    intercept: float
    npoints: int


@dataclass
class Report:
    rows: list[Row] = field(default_factory=list)
    fits: list[Fit] = field(default_factory=list)

    def series(self) -> dict[str, list[tuple[float, float]]]:
        """Group numeric rows with a valid ``m`` into ``(m, value)`` series.

        The series id is every column except ``n``, ``m``, ``value`` and ``seed``;
        repeated ``m`` values (several seeds) keep the maximum, the empirical sup.
        """
        groups: dict[str, dict[float, float]] = {}
        for row in self.rows:
            if row.m == "" or row.metric.startswith("skipped") or not math.isfinite(row.value):
                continue
            key = "|".join(f"{c}={getattr(row, c)}" for c in COLUMNS if c not in ("n", "m", "value", "seed"))
            per_m = groups.setdefault(key, {})
            m = float(row.m)
            per_m[m] = max(per_m.get(m, -math.inf), row.value)
        return {k: sorted(v.items()) for k, v in groups.items()}

    def fit_all(self, loglog: bool = False) -> list[Fit]:
        fits = []
        for key, pts in self.series().items():
            try:
                fits.append(fit_exponents(pts, loglog=loglog, label=key))
            except ValueError:
                continue
        self.fits = fits
        return fits


# --------------------------------------------------------------------------
# config

def _as_list(v) -> list:
    if v is None:
        return []
    return list(v) if isinstance(v, (list, tuple)) else [v]


@dataclass
class SweepConfig:
    experiment: str
    d: list = field(default_factory=lambda: [2])
    n: list = field(default_factory=lambda: [3])
    m: list = field(default_factory=list)
    p: list = field(default_factory=lambda: [4.0])
    r: list = field(default_factory=lambda: [0.4])
    q: list = field(default_factory=lambda: [2.0])
    family: list = field(default_factory=lambda: ["random"])
    method: list = field(default_factory=lambda: ["smolyak"])
    variant: list = field(default_factory=lambda: ["AT0"])
    seeds: list = field(default_factory=lambda: [0])
    truncation: int | None = None
    oversampling: int = 4
    wls_factor: float = 1.0
    B: float = 1.0
    c_factor: float = 2.0
    trials: int = 20
    max_cell_size: int = 2**26
    output_dir: str | None = None
    formats: list = field(default_factory=lambda: ["csv", "json", "svg"])
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, raw: dict) -> "SweepConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a mapping")
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "experiment" not in raw:
            raise ConfigError("config needs an 'experiment'")
        lists = {"d", "n", "m", "p", "r", "q", "family", "method", "variant", "seeds", "formats"}
        kwargs = {k: (_as_list(v) if k in lists else v) for k, v in raw.items()}
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str, overrides: dict | None = None) -> "SweepConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_dict(raw)

    def validate(self):
        self.p = [_pval(v) for v in self.p]
        self.q = [_pval(v) for v in self.q]
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {self.schema_version}")
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        needed = {"d", "n", "p", "seeds"}
        if self.experiment in ("recovery", "cubature"):
            needed |= {"r", "q", "family", "method"}
        if self.experiment == "schedule":
            needed = {"d", "m", "p", "r", "family", "variant"}
        if self.experiment == "discretization":
            needed = {"d", "n", "q", "seeds"}
        for name in sorted(needed):
            if not getattr(self, name):
                raise ConfigError(f"parameter grid {name!r} is empty")
        if any(int(d) < 1 for d in self.d) or any(int(n) < 0 for n in self.n):
            raise ConfigError("need d >= 1 and n >= 0")
        bad = [f for f in self.family if f not in FAMILIES]
        if bad:
            raise ConfigError(f"unknown family {bad}")
        bad = [mth for mth in self.method if mth not in METHODS]
        if bad:
            raise ConfigError(f"unknown method {bad}")
        if any(p < 1 for p in self.p + self.q):
            raise ConfigError("p and q must be >= 1")
        bad = [f for f in self.formats if f not in ("csv", "json", "svg")]
        if bad:
            raise ConfigError(f"unknown output format {bad}")


# --------------------------------------------------------------------------
# cells

def _pval(p):
    return math.inf if str(p).lower() in ("inf", "infinity") else float(p)


def _skip(exp: str, reason: str, **params) -> Row:
    return Row(exp, metric=f"skipped:{reason}", value=float("nan"), **params)


def _random_on(Q, seed) -> TrigPoly:
    return TrigPoly(Q, _random_real_coeffs(Q, np.random.default_rng(seed)))


def make_operator(method: str, n: int, d: int, seed=0, wls_factor: float = 1.0):
    """Recovery operator and its sample points for level ``n``."""
    if method == "smolyak":
        op = SmolyakRecovery(n, d)
        return op, op.sample_points().values
    if method == "wls":
        Q = hyperbolic_cross(n, d)
        N = len(Q)
        m = max(N, math.ceil(wls_factor * N * max(math.log(N), 1.0)))
        return WeightedLeastSquaresRecovery(Q), random_points(m, d, seed).values
    raise ValueError(f"unknown method {method!r}")


def operator_space(op):
    return op.reproduction_set() if isinstance(op, SmolyakRecovery) else op.frequencies


def test_function(family: str, d: int, n_trunc: int, p, r: float, seed: int, op=None) -> TrigPoly:
    """One member of the sampled family, truncated to ``T(Q_{n_trunc})``."""
    if family == "w":
        return w_sample(WClassSpec(r, p, n_trunc), d, seed)
    if family == "h":
        return h_class_sample(r, n_trunc, d, p, seed)
    if family == "extremal":
        name = EXTREMAL_CANDIDATES[seed % len(EXTREMAL_CANDIDATES)]
        return w_sample(WClassSpec(r, p, n_trunc), d, name)
    if family == "random":
        if op is None:
            return _random_on(hyperbolic_cross(n_trunc, d), seed)
        return _random_on(operator_space(op), seed)
    raise ValueError(f"unknown family {family!r}")


def recovery_cell(method: str, d: int, n: int, q, family: str, r: float, p, seed: int,
                  truncation: int | None = None, wls_factor: float = 1.0) -> list[Row]:
    """Error rows for one ``(operator, f)`` pair."""
    op, X = make_operator(method, n, d, seed, wls_factor)
    f = test_function(family, d, truncation if truncation is not None else n + 2, p, r, seed, op)
    err = recovery_error(f, op, _pval(q), points=X)
    base = dict(d=d, n=n, m=len(X), p=p, r=r, q=q, family=family, seed=seed)
    return [Row("recovery", metric=f"{method}_error", value=err, **base)]


def cubature_cell(method: str, d: int, n: int, q, family: str, r: float, p, seed: int,
                  truncation: int | None = None, wls_factor: float = 1.0, oversampling: int = 4) -> list[Row]:
    """Cubature error, the (ni<sr) chain and the Novak cross-check for one pair."""
    op, X = make_operator(method, n, d, seed, wls_factor)
    f = test_function(family, d, truncation if truncation is not None else n + 2, p, r, seed, op)
    ch = cubature_chain(f, op, X, _pval(q), oversampling)
    base = dict(d=d, n=n, m=len(X), p=p, r=r, q=q, family=family, seed=seed)
    tol = 1e-8
    rows = [Row("cubature", metric=f"{method}_{k}", value=float(v), **base) for k, v in ch.items()]
    chain_ok = ch["cubature_error"] <= ch["l1"] + tol and ch["l1"] <= ch["lq"] + tol
    rows.append(Row("cubature", metric=f"{method}_chain_ok", value=float(chain_ok), **base))
    rows.append(Row("cubature", metric=f"{method}_novak_margin", value=2 * ch["sup"] - ch["cubature_error"], **base))
    rows.append(Row("cubature", metric=f"{method}_novak_ok", value=float(ch["cubature_error"] <= 2 * ch["sup"] + tol), **base))
    return rows


def _grid(cfg: SweepConfig, *names):
    return itertools.product(*(getattr(cfg, k) for k in names))


def run_sweep(cfg: SweepConfig) -> Report:
    """Run every cell of ``cfg``; cells over the size budget or outside an
    operation's range produce a ``skipped:*`` row."""
    cfg.validate()
    exp = cfg.experiment
    rows: list[Row] = []

    def guarded(size: int, params: dict, fn):
        if size > cfg.max_cell_size:
            rows.append(_skip(exp, "size", **params))
            return
        try:
            rows.extend(fn())
        except ResourceCapError:
            rows.append(_skip(exp, "size", **params))
        except (ValueError, HypcrossError) as exc:
            if isinstance(exc, ConfigError):
                raise
            rows.append(_skip(exp, "range", **params))

    if exp == "nikolskii":
        for d, n, p, seed in _grid(cfg, "d", "n", "p", "seeds"):
            params = dict(d=d, n=n, p=p, family="random", seed=seed)

            def cell(d=d, n=n, p=p, seed=seed):
                f = _random_on(hyperbolic_cross(n, d), seed)
                out = [Row(exp, m=len(f), metric="ratio", value=nikolskii_ratio(f, _pval(p), oversampling=cfg.oversampling), **params)]
                if n >= 1 and _pval(p) < math.inf:
                    out.append(Row(exp, m=len(f), metric="bound_N", value=bound_value("N", n=n, p=p, d=d), **params))
                return out

            guarded(hyperbolic_cross_size(n, d), params, cell)

    elif exp == "littlewood_paley":
        for d, n, p, seed in _grid(cfg, "d", "n", "p", "seeds"):
            params = dict(d=d, n=n, p=p, family="random", seed=seed)

            def cell(d=d, n=n, p=p, seed=seed):
                f = _random_on(hyperbolic_cross(n, d, shell_only=True), seed)
                pv = _pval(p)
                total = sum(norm(block_projection(f, s), pv) ** pv for s in compositions(n, d)) ** (1 / pv)
                return [Row(exp, m=len(f), metric="lp_ratio", value=total / norm(f, pv), **params)]

            guarded(hyperbolic_cross_size(n, d, shell_only=True), params, cell)

    elif exp == "cutoff_constants":
        ms = cfg.m or [None]
        for d, n, p, m, seed in itertools.product(cfg.d, cfg.n, cfg.p, ms, cfg.seeds):
            budget = m if m is not None else max(1, 2 ** (n - 2))
            params = dict(d=d, n=n, m=budget, p=p, family="random", seed=seed)

            def cell(d=d, n=n, p=p, budget=budget, seed=seed):
                f = _random_on(hyperbolic_cross(n, d, shell_only=True), seed)
                T = balancing_threshold(n, budget, _pval(p))
                dec = block_decompose(f, T, _pval(p))
                c = dec.realized_constants(cfg.oversampling)
                return [
                    Row(exp, metric="T", value=T, **params),
                    Row(exp, metric="C_sup", value=c["C_sup"], **params),
                    Row(exp, metric="C_l2", value=c["C_l2"], **params),
                    Row(exp, metric="reconstruction_error", value=dec.reconstruction_error(f), **params),
                ]

            guarded(hyperbolic_cross_size(n, d, shell_only=True) * 16, params, cell)

    elif exp in ("recovery", "cubature"):
        for method, d, n, q, family, r, p, seed in _grid(cfg, "method", "d", "n", "q", "family", "r", "p", "seeds"):
            trunc = cfg.truncation if cfg.truncation is not None else n + 2
            params = dict(d=d, n=n, p=p, r=r, q=q, family=family, seed=seed)
            N = hyperbolic_cross_size(n, d)
            m_est = N if method == "smolyak" else N * max(1.0, cfg.wls_factor * math.log(max(N, 1)))
            size = int(m_est * (hyperbolic_cross_size(trunc, d) + N))
            if exp == "recovery":
                fn = lambda a=(method, d, n, q, family, r, p, seed): recovery_cell(*a, truncation=trunc, wls_factor=cfg.wls_factor)
            else:
                fn = lambda a=(method, d, n, q, family, r, p, seed): cubature_cell(
                    *a, truncation=trunc, wls_factor=cfg.wls_factor, oversampling=cfg.oversampling)
            guarded(size, params, fn)

    elif exp == "discretization":
        for d, n, q, seed in _grid(cfg, "d", "n", "q", "seeds"):
            params = dict(d=d, n=n, q=q, family="random", seed=seed)

            def cell(d=d, n=n, q=q, seed=seed):
                Q = hyperbolic_cross(n, d)
                res = dt1_point_search(Q, _pval(q), cfg.B, cfg.c_factor, cfg.trials, seed)
                return [
                    Row(exp, m=res.m, metric="C1", value=res.report.C1, **params),
                    Row(exp, m=res.m, metric="C2", value=res.report.C2, **params),
                    Row(exp, m=res.m, metric="success_rate", value=res.success_rate, **params),
                ]

            guarded(hyperbolic_cross_size(n, d) ** 2 * 64, params, cell)

    elif exp == "schedule":
        for variant, d, m, p, r, family in _grid(cfg, "variant", "d", "m", "p", "r", "family"):
            params = dict(d=d, m=m, p=p, r=r, family=f"{family}:{variant}")

            def cell(variant=variant, d=d, m=m, p=p, r=r, family=family):
                pv = _pval(p)
                sch = budget_schedule(int(m), d, pv, r, a_exponent(family, 2, d), a_exponent(family, pv, d), variant)
                out = [
                    Row(exp, n=sch.n0, metric="n0", value=float(sch.n0), **params),
                    Row(exp, metric="total", value=float(sch.total), **params),
                    Row(exp, metric="realized_C", value=sch.realized_constant, **params),
                    Row(exp, metric="width_sum", value=sch.width_bound_sum(), **params),
                ]
                if sch.n1 is not None:
                    out.append(Row(exp, n=sch.n1, metric="n1", value=float(sch.n1), **params))
                return out

            guarded(0, params, cell)

    report = Report(rows)
    report.fit_all()
    return report


# --------------------------------------------------------------------------
# fits

def fit_exponents(points: Sequence[tuple[float, float]], loglog: bool = False, label: str = "") -> Fit:
    """Least squares fit of ``log v = a + b log m + c log log m`` (``+ e log log log m``
    when ``loglog``). Needs at least 4 distinct ``m > e^e`` and positive values."""
    pts = [(float(m), float(v)) for m, v in points]
    ms = np.array([m for m, _ in pts])
    vs = np.array([v for _, v in pts])
    if len(pts) < 4 or len(set(ms.tolist())) != len(pts):
        raise ValueError("need at least 4 distinct m values")
    if np.any(ms <= math.e**math.e):
        raise ValueError("all m must exceed e^e")
    if np.any(vs <= 0) or not np.all(np.isfinite(vs)):
        raise ValueError("values must be positive and finite")
    lm = np.log(ms)
    cols = [np.ones_like(lm), lm, np.log(lm)]
    if loglog:
        cols.append(np.log(np.log(lm)))
    A = np.stack(cols, axis=1)
    if np.linalg.matrix_rank(A) < A.shape[1]:
        raise ValueError("degenerate design for the exponent fit")
    coef, *_ = np.linalg.lstsq(A, np.log(vs), rcond=None)
    resid = float(np.linalg.norm(A @ coef - np.log(vs)))
    e = float(coef[3]) if loglog else 0.0
    return Fit(label, float(coef[1]), float(coef[2]), e, resid, float(coef[0]), len(pts))


# --------------------------------------------------------------------------
# output

def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: Iterable[Row]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _parse_cell(text: str):
    if text == "":
        return ""
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def rows_from_csv(text: str) -> list[Row]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != COLUMNS:
        raise ConfigError(f"CSV header must be {','.join(COLUMNS)}")
    rows = []
    for rec in reader:
        vals = dict(zip(COLUMNS, rec))
        row = {k: _parse_cell(v) for k, v in vals.items()}
        row["experiment"], row["family"], row["metric"] = vals["experiment"], vals["family"], vals["metric"]
        row["value"] = float(vals["value"])
        rows.append(Row(**row))
    return rows


def report_to_json(report: Report) -> str:
    def clean(v):
        if isinstance(v, float) and math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return None if isinstance(v, float) and math.isnan(v) else v

    payload = {
        "schema_version": SCHEMA_VERSION,
        "columns": list(COLUMNS),
        "rows": [{k: clean(v) for k, v in row._asdict().items()} for row in report.rows],
        "fits": [f._asdict() for f in report.fits],
    }
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def report_to_svg(report: Report, width: int = 640, height: int = 480) -> str:
    """Log-log scatter of every series with one ``<path>`` per series
    (the fitted curve when a fit exists, otherwise the polyline through the points)."""
    series = report.series()
    fits = {f.series: f for f in report.fits}
    pad = 50
    pts = [(m, v) for s in series.values() for m, v in s if m > 0 and v > 0]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
           f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" fill="none" stroke="black"/>']
    if not pts:
        out.append("</svg>")
        return "\n".join(out) + "\n"
    lx = [math.log10(m) for m, _ in pts]
    ly = [math.log10(v) for _, v in pts]
    x0, x1 = min(lx), max(lx) if max(lx) > min(lx) else min(lx) + 1
    y0, y1 = min(ly), max(ly) if max(ly) > min(ly) else min(ly) + 1

    def sx(m):
        return pad + (math.log10(m) - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(v):
        return height - pad - (math.log10(v) - y0) / (y1 - y0) * (height - 2 * pad)

    out.append(f'<text x="{pad}" y="{height - 10}" font-size="12">log10 m: {x0:.3g} .. {x1:.3g}</text>')
    out.append(f'<text x="5" y="{pad - 10}" font-size="12">log10 value: {y0:.3g} .. {y1:.3g}</text>')
    palette = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")
    for i, (key, data) in enumerate(series.items()):
        color = palette[i % len(palette)]
        data = [(m, v) for m, v in data if m > 0 and v > 0]
        if not data:
            continue
        out.append(f"<g><title>{key}</title>")
        for m, v in data:
            out.append(f'<circle cx="{sx(m):.2f}" cy="{sy(v):.2f}" r="3" fill="{color}"/>')
        fit = fits.get(key)
        if fit is not None:
            grid = np.geomspace(data[0][0], data[-1][0], 32)
            curve = [(m, math.exp(fit.intercept + fit.power * math.log(m) + fit.log_power * math.log(math.log(m))
                                  + fit.loglog_power * math.log(math.log(math.log(m))))) for m in grid]
        else:
            curve = data
        d_attr = " ".join(f"{'M' if j == 0 else 'L'}{sx(m):.2f},{sy(v):.2f}" for j, (m, v) in enumerate(curve))
        out.append(f'<path d="{d_attr}" fill="none" stroke="{color}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit(report: Report, fmt: str, path: str) -> str:
    """Write ``report`` as ``csv``, ``json`` or ``svg`` to ``path``; returns the path."""
    writers = {"csv": lambda: rows_to_csv(report.rows), "json": lambda: report_to_json(report),
               "svg": lambda: report_to_svg(report)}
    if fmt not in writers:
        raise ValueError(f"unknown format {fmt!r}")
    text = writers[fmt]()
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def reference_table(report: Report) -> list[dict]:
    """Fitted log exponents of recovery series next to the log exponents of
    the upper shape ``m^{-r} (log m)^{(d-2)(1-r)+1}`` and the Smolyak lower
    shape ``m^{-r} (log m)^{(d-1)(1/2+r)}``. Informational only."""
    table = []
    for fit in report.fits:
        parts = dict(item.split("=", 1) for item in fit.series.split("|"))
        if parts.get("experiment") != "recovery":
            continue
        try:
            d, r = int(parts["d"]), float(parts["r"])
        except (KeyError, ValueError):
            continue
        table.append({
            "series": fit.series,
            "fitted_power": fit.power,
            "fitted_log_power": fit.log_power,
            "upper_shape_power": -r,
            "upper_shape_log_power": (d - 2) * (1 - r) + 1,
            "smolyak_lower_log_power": (d - 1) * (0.5 + r),
        })
    return table
