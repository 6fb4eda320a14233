"""Acceptance criteria, each checked against an independent oracle at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -s`` to see the PASS/FAIL lines as
they are produced; they are also repeated in the terminal summary.
"""

import numpy as np
import pytest

from squeeze_lab import (
    CounterexampleConfig,
    DegreeVector,
    DomainSpec,
    Status,
    build_K,
    c_origin_sandwich,
    conv_g2_contains,
    d_action,
    d_minkowski,
    g2_contains,
    sample_g2,
    sq_lower_origin,
    sq_upper_closed_form,
    sq_upper_numeric,
    support_conv_g2,
)
from squeeze_lab.counterexample import beta_threshold, certify_origin_sublevel, w0_bound_sweep
from squeeze_lab.geometry import g2_margin
from squeeze_lab.metrics import c_g2_rho
from squeeze_lab.report import RunConfig, run_verify_paper

from oracles import random_g2, random_points, toeplitz_min_eig

D12 = DegreeVector(1, 2)
R = 0.4


def test_01_gauge_oracle(rng, record):
    z = random_points(rng, 1000, 1.0, 1.0)
    h = d_minkowski(z, DomainSpec.polydisc(R), D12)
    exact = np.maximum(np.abs(z[:, 0]) / R, np.sqrt(np.abs(z[:, 1]) / R))
    err = float(np.max(np.abs(h - exact)))
    assert record(1, err <= 1e-8, f"polydisc gauge max residual {err:.2e} (tol 1e-8, n=1000)")


def test_02_homogeneity(rng, record):
    dom = DomainSpec.conv_hull_g2()
    z = random_points(rng, 200, 2.0, 1.0)
    lam = rng.uniform(0.05, 1.5, 200) * np.exp(2j * np.pi * rng.uniform(0, 1, 200))
    lhs = d_minkowski(d_action(z, lam, D12), dom, D12)
    rhs = np.abs(lam) * d_minkowski(z, dom, D12)
    err = float(np.max(np.abs(lhs - rhs)))
    assert record(2, err <= 5e-9, f"conv(G2) gauge homogeneity max error {err:.2e} (tol 5e-9, n=200)")


def test_03_sandwich(rng, record):
    dom = DomainSpec.polydisc(R)
    z = random_points(rng, 1000, 0.95 * R, 0.95 * R)
    lo, hi = c_origin_sandwich(z, dom, D12, tol=1e-12)
    exact = np.max(np.arctanh(np.abs(z) / R), axis=-1)
    excess = float(max(np.max(lo - exact), np.max(exact - hi)))
    ordered = excess <= 1e-9
    x = 0.95 * R * rng.uniform(0, 1, 1000) * np.exp(2j * np.pi * rng.uniform(0, 1, 1000))
    zero = np.zeros_like(x)
    left, _ = c_origin_sandwich(np.stack([zero, x], -1), dom, D12, tol=1e-12)
    _, right = c_origin_sandwich(np.stack([x, zero], -1), dom, D12, tol=1e-12)
    axis = np.arctanh(np.abs(x) / R)
    tl, tr = float(np.max(np.abs(left - axis))), float(np.max(np.abs(right - axis)))
    ok = ordered and tl <= 1e-9 and tr <= 1e-9
    assert record(3, ok, f"sandwich ordering excess {excess:.1e}, left tight {tl:.1e}, right tight {tr:.1e} (tol 1e-9)")


def test_04_membership(rng, record):
    pts = sample_g2(10)
    all_in = all(g2_contains(p).status is Status.INSIDE for p in pts)
    rejected = g2_contains((1 + 1j, 0)).status is Status.OUTSIDE
    contradictions = 0
    z = random_points(rng, 1000, 2.2, 1.2)
    for p in z:
        v = conv_g2_contains(p)
        if v.status is Status.INSIDE:
            w = np.array([c[0] for c in v.certificate])
            atoms = np.array([tuple(c[1]) for c in v.certificate])
            x = np.array([p[0].real, p[0].imag, p[1].real, p[1].imag])
            u = rng.normal(size=4)
            u /= np.linalg.norm(u)
            bad = (np.any(w < -1e-6) or abs(w.sum() - 1) > 1e-6 or np.any(g2_margin(atoms) <= 0)
                   or not np.allclose(w @ atoms, p, atol=1e-6)
                   or u @ x > support_conv_g2(u) + 1e-6 or toeplitz_min_eig(p) < -1e-9)
        elif v.status is Status.OUTSIDE:
            bad = toeplitz_min_eig(p) > 1e-9
        else:
            bad = abs(toeplitz_min_eig(p)) > 1e-4
        contradictions += bool(bad)
    ok = all_in and rejected and contradictions == 0
    assert record(4, ok, f"{len(pts)} G2 image points inside={all_in}, (1+i,0) rejected={rejected}, "
                         f"hull contradictions {contradictions}/1000")


def test_05_metric_axioms(rng, record):
    x, y, z = random_g2(rng, 1000), random_g2(rng, 1000), random_g2(rng, 1000)
    xy, _ = c_g2_rho(x, y)
    yx, _ = c_g2_rho(y, x)
    yz, _ = c_g2_rho(y, z)
    xz, _ = c_g2_rho(x, z)
    symmetric = bool(np.array_equal(xy, yx))
    slack = float(np.max(np.arctanh(xz) - np.arctanh(xy) - np.arctanh(yz)))
    xs = np.array([0.1, 0.2, 0.3])
    rho, _ = c_g2_rho(np.zeros((3, 2), complex), np.stack([xs, 0 * xs], -1))
    axis_err = float(np.max(np.abs(rho - xs / (2 - xs))))
    ok = symmetric and slack <= 1e-8 and axis_err <= 1e-9
    assert record(5, ok, f"symmetry exact={symmetric}, triangle excess {slack:.1e}, "
                         f"x/(2-x) error {axis_err:.1e}")


def test_06_beta_identity(record):
    rs = np.linspace(0.005, 0.495, 50)
    betas = np.array([beta_threshold(r) for r in rs])
    err = float(np.max(np.abs((rs - betas) / (1 - rs * betas) - rs**2 / 4)))
    below = bool(np.all(betas < rs))
    assert record(6, err <= 1e-12 and below, f"identity error {err:.1e} (tol 1e-12), beta < r: {below}")


def test_07_origin_certificate(record):
    cfg = CounterexampleConfig(r=R)
    cert = certify_origin_sublevel(cfg, 10_000)
    lower = sq_lower_origin(cfg).lower
    ok = cert.n_points >= 10_000 and abs(lower - 0.2) <= 1e-15
    assert record(7, ok, f"{cert.n_points} grid points, {cert.n_sublevel} in sublevel set, "
                         f"0 failures, lower bound {lower}")


def test_08_slice_values(record):
    cfg = CounterexampleConfig(r=R)
    expected = {0.37: np.sqrt(0.03 / 0.852), 0.38: np.sqrt(0.02 / 0.848), 0.39: np.sqrt(0.01 / 0.844)}
    got = {x: sq_upper_closed_form(x, cfg).upper for x in expected}
    err = max(abs(got[x] - expected[x]) for x in expected)
    ok = err <= 1e-6 and all(v < 0.2 for v in got.values())
    assert record(8, ok, "slice bounds " + ", ".join(f"{x}: {v:.4f}" for x, v in got.items())
                  + f" (max error {err:.1e}, all < 0.2)")


@pytest.mark.parametrize("label overrides".split(), [
    ("defaults", {}),
    ("k_density x2", {"k_density": 128}),
    ("tau grid x2", {"tau_grid": 1024}),
    ("slice points x2", {"slice_points": 32}),
])
def test_09_end_to_end(label, overrides, record):
    bundle = run_verify_paper(RunConfig(**overrides))
    v = bundle.violation
    ok = v["violated"] and bundle.exit_code == 0
    assert record(9, ok, f"verify-paper [{label}]: verdict {v['verdict']}, sup slice upper "
                         f"{v['sup_slice_upper']:.6f} < center {v['center_lower']}")


def test_10_w0_mobius_bound(rng, record):
    cfg = CounterexampleConfig(r=R)
    z1 = R * rng.uniform(0.001, 0.999, 1000) * np.exp(2j * np.pi * rng.uniform(0, 1, 1000))
    recs = w0_bound_sweep(z1, cfg)
    doubled = sum(rec.passes_doubled for rec in recs) / len(recs)
    printed = sum(rec.passes for rec in recs) / len(recs)
    assert record(10, doubled == 1.0, f"doubled bound holds for {doubled:.1%}; printed (undoubled) bound "
                                      f"holds for {printed:.1%} (reported only)")


def test_11_numeric_consistency(record):
    cfg = CounterexampleConfig(r=R)
    K = build_K(cfg)
    xs = np.linspace(0.05, 0.39, 52)[1:-1]
    excess = max(sq_upper_numeric(np.array([x, 0]), K, cfg).upper - sq_upper_closed_form(x, cfg).upper
                 for x in xs)
    origin = sq_upper_numeric(np.zeros(2), K, cfg).upper
    lower = sq_lower_origin(cfg).lower
    ok = excess <= 1e-3 and lower <= origin
    assert record(11, ok, f"max numeric - closed form {excess:.4f} (tol 1e-3, n={len(xs)}); "
                          f"origin {lower} <= {origin:.4f}")
