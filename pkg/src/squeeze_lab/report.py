"""The verify-paper pipeline and its CSV / JSON / SVG outputs."""

from __future__ import annotations

import csv
import json
import math
import os
import time
from xml.sax.saxutils import escape
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .counterexample import (
    CounterexampleConfig,
    beta_threshold,
    build_K,
    certify_origin_sublevel,
    w0_bound_sweep,
    psh_violation_report,
    sq_upper_closed_form,
    sq_upper_numeric,
)
from .errors import SqueezeLabError
from .geometry import (
    DegreeVector,
    DomainSpec,
    Status,
    conv_g2_contains,
    conv_g2_gauge,
    d_action,
    d_minkowski,
    d_sublevel_contains,
    g2_contains,
    sample_g2,
    support_conv_g2,
)
from .metrics import CircleGrid, c_g2_rho, c_origin_sandwich

SCHEMA_VERSION = 1
PASS, FAIL, INDETERMINATE = "pass", "fail", "indeterminate"


@dataclass
class RunConfig:
    r: float = 0.4
    eps: float = 0.05
    tol: float = 1e-9
    tau_grid: int = 512
    k_density: int = 64
    slice_points: int = 16
    slice_angles: int = 4
    out: Optional[str] = None
    seed: int = 42
    trials: int = 1000
    certification_grid: int = 10_000
    w0_grid: int = 2048
    timings: bool = False
    # negative-control hook: shifts the threshold used by the pipeline
    beta_offset: float = 0.0

    def counterexample(self) -> CounterexampleConfig:
        return CounterexampleConfig(r=self.r, eps=self.eps, k_density=self.k_density,
                                    slice_points=self.slice_points, slice_angles=self.slice_angles,
                                    grid=CircleGrid(self.tau_grid), tol=self.tol)

    def output_dir(self) -> Path:
        return Path(self.out or os.environ.get("SQUEEZE_LAB_OUT") or "squeeze_lab_out")


@dataclass
class CheckResult:
    name: str
    verdict: str
    details: dict


@dataclass
class ReportBundle:
    config: dict
    checks: list
    violation: dict
    ambiguity_log: list
    tables: dict = field(default_factory=dict)
    plot: dict = field(default_factory=dict)
    timings: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return all(c.verdict == PASS for c in self.checks) and self.violation["violated"]

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def summary(self) -> dict:
        out = {
            "schema": SCHEMA_VERSION,
            "config": self.config,
            "checks": [asdict(c) for c in self.checks],
            "violation": self.violation,
            "ambiguity_log": self.ambiguity_log,
            "status": PASS if self.passed else FAIL,
            "exit_code": self.exit_code,
        }
        if self.timings is not None:
            out["timings_s"] = self.timings
        return out


class CheckAborted(SqueezeLabError):
    def __init__(self, check, error):
        super().__init__(f"check '{check}' aborted: {type(error).__name__}: {error}")
        self.check = check
        self.error = error


def _verdict(ok: bool) -> str:
    return PASS if ok else FAIL


def _random_points(rng, n, r1, r2):
    mod = np.sqrt(rng.uniform(0, 1, (n, 2))) * np.array([r1, r2])
    return mod * np.exp(2j * np.pi * rng.uniform(0, 1, (n, 2)))


def _unit(rng, n=None):
    u = rng.normal(size=(4,) if n is None else (n, 4))
    return u / np.linalg.norm(u, axis=-1, keepdims=True)


# -- individual checks -------------------------------------------------------

def check_gauge_oracle(cfg, rng, tables):
    d = DegreeVector(1, 2)
    rows = []
    worst = {}
    for label, dom, pts, oracle in (
        ("polydisc", DomainSpec.polydisc(cfg.r, cfg.tol), _random_points(rng, cfg.trials, 1.0, 1.0), None),
        ("conv_g2", DomainSpec.conv_hull_g2(cfg.tol), _random_points(rng, cfg.trials, 2.0, 1.0), conv_g2_gauge),
    ):
        h = d_minkowski(pts, dom, d, cfg.tol)
        exact = dom.closed_form_gauge(pts, d) if oracle is None else oracle(pts)
        res = np.abs(h - exact)
        worst[label] = float(res.max())
        rows += [[label, cfg.r if label == "polydisc" else "", p[0].real, p[0].imag, p[1].real, p[1].imag,
                  a, b, e] for p, a, b, e in zip(pts, h, exact, res)]
    tables["gauge_residuals.csv"] = (
        ["domain", "r", "z1_re", "z1_im", "z2_re", "z2_im", "bisection", "closed_form", "residual"], rows)
    return CheckResult("gauge_oracle", _verdict(max(worst.values()) <= 1e-8),
                       {"max_residual": worst, "tolerance": 1e-8, "n_points": cfg.trials})


def check_sandwich(cfg, rng, tables):
    dom = DomainSpec.polydisc(cfg.r)
    d = DegreeVector(1, 2)
    pts = _random_points(rng, cfg.trials, 0.95 * cfg.r, 0.95 * cfg.r)
    lower, upper = c_origin_sandwich(pts, dom, d, 1e-12)
    oracle = np.max(np.arctanh(np.abs(pts) / cfg.r), axis=-1)
    inside = bool(np.all(lower <= oracle + 1e-9) and np.all(oracle <= upper + 1e-9))
    x = 0.95 * cfg.r * rng.uniform(0, 1, cfg.trials) * np.exp(2j * np.pi * rng.uniform(0, 1, cfg.trials))
    zeros = np.zeros_like(x)
    lo2, _ = c_origin_sandwich(np.stack([zeros, x], -1), dom, d, 1e-12)
    _, up1 = c_origin_sandwich(np.stack([x, zeros], -1), dom, d, 1e-12)
    tight_left = float(np.abs(lo2 - np.arctanh(np.abs(x) / cfg.r)).max())
    tight_right = float(np.abs(up1 - np.arctanh(np.abs(x) / cfg.r)).max())
    ok = inside and tight_left <= 1e-9 and tight_right <= 1e-9
    return CheckResult("sandwich_polydisc", _verdict(ok), {
        "ordered": inside, "left_tight_residual": tight_left,
        "right_tight_residual": tight_right, "tolerance": 1e-9})


def check_membership(cfg, rng, tables):
    samples = sample_g2(10)
    g2_ok = all(g2_contains(p).status is Status.INSIDE for p in samples)
    bounded = bool(np.all(np.abs(samples[:, 0]) < 2) and np.all(np.abs(samples[:, 1]) < 1))
    reject = g2_contains((1 + 1j, 0)).status is Status.OUTSIDE
    closure = g2_contains((2, 1)).status is Status.BOUNDARY
    pts = _random_points(rng, cfg.trials, 2.0, 1.0)
    contradictions = agreement_misses = 0
    counts = {s.value: 0 for s in Status}
    dom = DomainSpec.conv_hull_g2(cfg.tol)
    sub = d_sublevel_contains(pts, dom, DegreeVector(1, 2), 1.0, cfg.tol)
    for p, in_sub in zip(pts, sub):
        v = conv_g2_contains(p)
        counts[v.status.value] += 1
        if v.status is Status.BOUNDARY:
            continue
        if (v.status is Status.INSIDE) != bool(in_sub):
            agreement_misses += 1
        if v.status is Status.INSIDE:
            x = np.array([p[0].real, p[0].imag, p[1].real, p[1].imag])
            dirs = np.vstack([x / np.linalg.norm(x) if np.any(x) else _unit(rng), _unit(rng, 4)])
            if max(u @ x - support_conv_g2(u) for u in dirs) > 1e-6:
                contradictions += 1
    ok = g2_ok and bounded and reject and closure and contradictions == 0 and agreement_misses == 0
    return CheckResult("membership", _verdict(ok), {
        "g2_samples_inside": g2_ok, "g2_samples_bounded": bounded, "rejects_1_plus_i": reject,
        "2_1_is_boundary": closure, "hull_verdicts": counts, "hull_contradictions": contradictions,
        "sublevel_disagreements": agreement_misses})


def check_balanced(cfg, rng, tables):
    samples = sample_g2(6)
    failures = 0
    for _ in range(cfg.trials):
        k = rng.integers(1, 6)
        w = rng.dirichlet(np.ones(k))
        p = w @ samples[rng.integers(0, len(samples), k)]
        lam = math.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        if conv_g2_contains(d_action(p, lam)).status is not Status.INSIDE:
            failures += 1
    return CheckResult("hull_balanced", _verdict(failures == 0), {"failures": failures, "trials": cfg.trials})


def check_metric_axioms(cfg, rng, tables):
    samples = sample_g2(10)
    z, w, u = (samples[rng.integers(0, len(samples), cfg.trials)] for _ in range(3))
    grid = CircleGrid(cfg.tau_grid)
    zw, _ = c_g2_rho(z, w, grid)
    wz, _ = c_g2_rho(w, z, grid)
    zu, _ = c_g2_rho(z, u, grid)
    uw, _ = c_g2_rho(u, w, grid)
    zz, _ = c_g2_rho(z, z, grid)
    symmetric = bool(np.array_equal(zw, wz))
    slack = float(np.max(np.arctanh(zw) - np.arctanh(zu) - np.arctanh(uw)))
    xs = np.array([0.1, 0.2, 0.3])
    origin, _ = c_g2_rho(np.zeros((3, 2), complex), np.stack([xs, 0 * xs], -1).astype(complex), grid)
    origin_err = float(np.abs(origin - xs / (2 - xs)).max())
    ok = symmetric and not np.any(zz) and slack <= 1e-8 and origin_err <= 1e-9
    return CheckResult("metric_axioms", _verdict(ok), {
        "symmetric": symmetric, "max_triangle_excess": slack, "axis_formula_error": origin_err})


def check_w0_bound(cfg, rng, tables, ccfg):
    z1 = cfg.r * rng.uniform(0.01, 0.999, cfg.trials) * np.exp(2j * np.pi * rng.uniform(0, 1, cfg.trials))
    recs = w0_bound_sweep(z1, ccfg, CircleGrid(cfg.w0_grid))
    tables["lemma33.csv"] = (
        ["r", "tau_grid", "z1_re", "z1_im", "max_value", "tau_re", "tau_im", "bound", "doubled_bound",
         "within_bound", "within_doubled"],
        [[cfg.r, cfg.w0_grid, rec.z1.real, rec.z1.imag, rec.max_value, rec.argmax_tau.real,
          rec.argmax_tau.imag, rec.bound, rec.doubled_bound, int(rec.passes), int(rec.passes_doubled)]
         for rec in recs])
    rate = sum(rec.passes for rec in recs) / len(recs)
    rate2 = sum(rec.passes_doubled for rec in recs) / len(recs)
    return CheckResult("w0_mobius_bound", _verdict(rate2 == 1.0), {
        "pass_rate_doubled_bound": rate2, "pass_rate_printed_bound": rate, "n": len(recs)})


def check_beta(cfg, rng, tables):
    rs = np.linspace(0.01, 0.49, 50)
    errs = []
    for r in list(rs) + [cfg.r]:
        b = beta_threshold(r) + (cfg.beta_offset if r == cfg.r else 0.0)
        errs.append((abs((r - b) / (1 - r * b) - r * r / 4), b < r))
    worst = max(e for e, _ in errs)
    ok = worst <= 1e-12 and all(lt for _, lt in errs)
    return CheckResult("beta_identity", _verdict(ok), {
        "max_identity_error": worst, "beta": beta_threshold(cfg.r) + cfg.beta_offset})


def check_origin(cfg, rng, tables, ccfg):
    cert = certify_origin_sublevel(ccfg, cfg.certification_grid)
    return CheckResult("origin_certificate", PASS, {**asdict(cert), "lower_bound": cfg.r / 2})


def check_consistency(cfg, rng, tables, ccfg, K):
    xs = np.linspace(0.125 * cfg.r, 0.975 * cfg.r, 50)
    excess = max(sq_upper_numeric(np.array([x, 0j]), K, ccfg).upper - sq_upper_closed_form(x, ccfg).upper
                 for x in xs)
    at_origin = sq_upper_numeric(np.zeros(2, complex), K, ccfg).upper
    ok = excess <= 1e-3 and cfg.r / 2 <= at_origin
    return CheckResult("numeric_closed_form_consistency", _verdict(ok), {
        "max_numeric_minus_closed": float(excess), "numeric_upper_at_origin": at_origin,
        "origin_lower": cfg.r / 2})


def run_verify_paper(cfg: RunConfig) -> ReportBundle:
    """Run every check in order and assemble the report bundle."""
    rng = np.random.default_rng(cfg.seed)
    ccfg = cfg.counterexample()
    tables, checks, timings = {}, [], {}

    def run(name, fn, *args):
        start = time.perf_counter()
        try:
            result = fn(cfg, rng, tables, *args)
        except SqueezeLabError as err:
            raise CheckAborted(name, err) from err
        timings[name] = round(time.perf_counter() - start, 3)
        checks.append(result)
        return result

    run("gauge_oracle", check_gauge_oracle)
    run("sandwich_polydisc", check_sandwich)
    run("membership", check_membership)
    run("hull_balanced", check_balanced)
    run("metric_axioms", check_metric_axioms)
    run("w0_mobius_bound", check_w0_bound, ccfg)
    run("beta_identity", check_beta)
    run("origin_certificate", check_origin, ccfg)

    start = time.perf_counter()
    try:
        K = build_K(ccfg)
        beta = beta_threshold(cfg.r) + cfg.beta_offset
        report = psh_violation_report(ccfg, K, beta=beta, certification_grid=cfg.certification_grid)
    except SqueezeLabError as err:
        raise CheckAborted("slice_violation", err) from err
    timings["slice_violation"] = round(time.perf_counter() - start, 3)
    run("numeric_closed_form_consistency", check_consistency, ccfg, K)

    tables["slice_bounds.csv"] = (
        ["r", "eps", "k_density", "tau_grid", "beta", "radius", "angle", "closed_form_upper",
         "numeric_upper", "center_lower"],
        [[cfg.r, cfg.eps, cfg.k_density, cfg.tau_grid, report.beta, row.radius, row.angle,
          row.closed_form, row.numeric, report.center_lower] for row in report.slice_upper])
    violation = {
        "violated": report.violated, "verdict": report.verdict.value, "beta": report.beta,
        "center_lower": report.center_lower, "sup_slice_upper": report.sup_upper,
        "n_slice_points": len(report.slice_upper), "k_points": len(K),
    }
    xs = np.linspace(0.0, cfg.r, 201)[1:-1]
    numeric = {}
    for row in report.slice_upper:
        numeric[row.radius] = max(numeric.get(row.radius, 0.0), row.numeric)
    plot = {
        "series": [
            {"label": "closed-form upper bound", "x": list(xs),
             "y": [sq_upper_closed_form(x, ccfg).upper for x in xs], "kind": "line"},
            {"label": "numeric upper bound (max over angles)", "x": list(numeric),
             "y": list(numeric.values()), "kind": "points"},
        ],
        "hlines": [(cfg.r / 2, "r/2 (lower bound at 0)")],
        "vlines": [(report.beta, "beta")],
    }
    return ReportBundle(asdict(cfg), checks, violation, report.ambiguity_log, tables, plot,
                        timings if cfg.timings else None)


# -- writers -----------------------------------------------------------------

def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def emit_csv(header, rows, path) -> None:
    """Write a header row and data rows; floats carry 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def emit_svg_plot(series, path, hlines=(), vlines=(), xlabel="|z1|",
                  ylabel="upper bound on S((z1, 0))", title="Slice bounds") -> None:
    """Self-contained SVG line/point plot with labelled reference lines."""
    xlabel, ylabel, title = escape(xlabel), escape(ylabel), escape(title)
    hlines = [(v, escape(label)) for v, label in hlines]
    vlines = [(v, escape(label)) for v, label in vlines]
    W, H, left, right, top, bottom = 640, 420, 70, 20, 40, 55
    xs = [x for s in series for x in s["x"]] + [v for v, _ in vlines]
    ys = [y for s in series for y in s["y"]] + [v for v, _ in hlines]
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    y0, y1 = (0.0, max(ys) * 1.05) if ys else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def X(x):
        return left + (x - x0) / (x1 - x0) * (W - left - right)

    def Y(y):
        return H - bottom - (y - y0) / (y1 - y0) * (H - top - bottom)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" '
           'font-family="sans-serif" font-size="12">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<text x="{W / 2:.1f}" y="22" text-anchor="middle" font-size="14">{title}</text>',
           f'<line x1="{left}" y1="{H - bottom}" x2="{W - right}" y2="{H - bottom}" stroke="black"/>',
           f'<line x1="{left}" y1="{top}" x2="{left}" y2="{H - bottom}" stroke="black"/>']
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{X(t):.2f}" y1="{H - bottom}" x2="{X(t):.2f}" y2="{H - bottom + 5}" stroke="black"/>')
        out.append(f'<text x="{X(t):.2f}" y="{H - bottom + 18}" text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{left - 5}" y1="{Y(t):.2f}" x2="{left}" y2="{Y(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{Y(t) + 4:.2f}" text-anchor="end">{t:.3g}</text>')
    out.append(f'<text x="{(left + W - right) / 2:.1f}" y="{H - 12}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text transform="translate(16,{(top + H - bottom) / 2:.1f}) rotate(-90)" '
               f'text-anchor="middle">{ylabel}</text>')
    for value, label in hlines:
        out.append(f'<line x1="{left}" y1="{Y(value):.2f}" x2="{W - right}" y2="{Y(value):.2f}" '
                   'stroke="#c0392b" stroke-dasharray="6,4"/>')
        out.append(f'<text x="{W - right - 4}" y="{Y(value) - 5:.2f}" text-anchor="end" fill="#c0392b">{label}</text>')
    for value, label in vlines:
        out.append(f'<line x1="{X(value):.2f}" y1="{top}" x2="{X(value):.2f}" y2="{H - bottom}" '
                   'stroke="#2c3e50" stroke-dasharray="3,3"/>')
        out.append(f'<text x="{X(value) + 4:.2f}" y="{top + 12}" fill="#2c3e50">{label}</text>')
    colours = ["#1f77b4", "#ff7f0e", "#2ca02c"]
    for i, s in enumerate(series):
        colour = colours[i % len(colours)]
        if s.get("kind", "line") == "line" and s["x"]:
            pts = " ".join(f"{X(x):.2f},{Y(y):.2f}" for x, y in zip(s["x"], s["y"]))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="1.5"/>')
        else:
            out += [f'<circle cx="{X(x):.2f}" cy="{Y(y):.2f}" r="2.5" fill="{colour}"/>'
                    for x, y in zip(s["x"], s["y"])]
        ly = top + 16 * (i + 1)
        out.append(f'<rect x="{left + 12}" y="{ly - 9}" width="10" height="10" fill="{colour}"/>')
        out.append(f'<text x="{left + 28}" y="{ly}">{escape(s["label"])}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def write_bundle(bundle: ReportBundle, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, (header, rows) in bundle.tables.items():
        emit_csv(header, rows, out / name)
    if bundle.plot:
        emit_svg_plot(bundle.plot["series"], out / "slice.svg",
                      hlines=bundle.plot["hlines"], vlines=bundle.plot["vlines"])
    (out / "summary.json").write_text(json.dumps(_jsonable(bundle.summary()), indent=2, sort_keys=True) + "\n")
    return out
