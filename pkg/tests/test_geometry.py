import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from squeeze_lab import (
    BracketingFailed,
    CertificateSearchFailed,
    DegreeVector,
    DomainError,
    DomainSpec,
    Status,
    conv_g2_contains,
    d_action,
    d_minkowski,
    d_sublevel_contains,
    g2_contains,
    quadratic_roots,
    sample_g2,
    support_conv_g2,
)
from squeeze_lab.errors import NotBalancedError
from squeeze_lab.geometry import conv_g2_gauge, conv_g2_margin, g2_margin, symmetrize

from oracles import random_g2, random_points, toeplitz_min_eig, torus_support

unit = st.floats(0, 1, allow_nan=False)
angle = st.floats(0, 2 * np.pi, allow_nan=False)


# -- symmetrized bidisc -------------------------------------------------------

@pytest.mark.parametrize("s p roots".split(), [
    (3, 2, (1, 2)),
    (0, 1, (-1j, 1j)),
    (2, 1, (1, 1)),
    (0, 0, (0, 0)),
])
def test_quadratic_roots_examples(s, p, roots):
    got = quadratic_roots(s, p)
    assert np.allclose(got, roots, atol=1e-12)


@given(st.complex_numbers(max_magnitude=1e3), st.complex_numbers(max_magnitude=1e3))
def test_quadratic_roots_resubstitute(a, b):
    s, p = a + b, a * b
    x, y = quadratic_roots(s, p)
    scale = 1 + abs(s) + abs(p)
    assert abs(x + y - s) <= 1e-9 * scale
    assert abs(x * y - p) <= 1e-9 * scale * (1 + abs(x) + abs(y))


@pytest.mark.parametrize("z status".split(), [
    ((0, 0), Status.INSIDE),
    ((0.5, 0.06), Status.INSIDE),
    ((1 + 1j, 0), Status.OUTSIDE),
    ((2, 1), Status.BOUNDARY),
    ((0, 1), Status.BOUNDARY),
    ((0, 1.2), Status.OUTSIDE),
])
def test_g2_contains_examples(z, status):
    assert g2_contains(z).status is status


def test_g2_margin_is_root_criterion(rng):
    # a point is in G2 iff both preimages lie in the unit disc
    z = random_points(rng, 2000, 2.2, 1.2)
    x, y = np.array([quadratic_roots(*p) for p in z]).T
    expected = 1 - np.maximum(np.abs(x), np.abs(y))
    assert np.allclose(g2_margin(z), expected, atol=1e-12)


def test_sample_g2_size_and_inside():
    pts = sample_g2(2)
    assert pts.shape == (16, 2)
    assert np.all([g2_contains(p).status is Status.INSIDE for p in pts])
    pts = sample_g2(10)
    assert len(pts) == 10**4
    assert np.all(np.abs(pts[:, 0]) < 2) and np.all(np.abs(pts[:, 1]) < 1)
    assert np.all(g2_margin(pts) > 0)


def test_g2_invalid_input():
    with pytest.raises(DomainError):
        g2_contains((np.nan, 0))


# -- convex hull --------------------------------------------------------------

@pytest.mark.parametrize("u value".split(), [
    ((1, 0, 0, 0), 2.0),
    ((-1, 0, 0, 0), 2.0),
    ((0, 0, 1, 0), 1.0),
    ((0, 1, 0, 0), 2.0),
])
def test_support_examples(u, value):
    assert support_conv_g2(u) == pytest.approx(value, abs=1e-6)


def test_support_matches_torus_bruteforce(rng):
    # the brute-force grid can only under-estimate
    for _ in range(40):
        u = rng.normal(size=4)
        u /= np.linalg.norm(u)
        ours, brute = support_conv_g2(u), torus_support(u)
        assert brute <= ours + 1e-9
        assert ours - brute <= 1e-3


def test_hull_margin_sign_matches_toeplitz(rng):
    # closure of conv(G2) = positive semidefinite moment matrices
    z = random_points(rng, 3000, 2.2, 1.2)
    m = conv_g2_margin(z)
    eig = np.array([toeplitz_min_eig(p) for p in z])
    clear = np.abs(m) > 1e-3
    assert np.array_equal(m[clear] > 0, eig[clear] > 0)


@pytest.mark.parametrize("z status".split(), [
    ((0, 0), Status.INSIDE),
    ((1.5, 0.4), Status.INSIDE),
    ((2, 1), Status.BOUNDARY),
    ((2.1, 0), Status.OUTSIDE),
    ((0, 1.2), Status.OUTSIDE),
    ((1 + 1j, 0), Status.BOUNDARY),
    ((0.9 + 0.9j, 0), Status.INSIDE),
])
def test_conv_g2_contains_examples(z, status):
    assert conv_g2_contains(z).status is status


def test_hull_contains_non_g2_point():
    z = (0.99 + 0.99j, 0)
    assert g2_contains(z).status is Status.OUTSIDE
    v = conv_g2_contains(z)
    assert v.status is Status.INSIDE
    assert 2 <= len(v.certificate) <= 5


def _check_certificate(z, cert, tol=1e-6):
    w = np.array([c[0] for c in cert])
    pts = np.array([tuple(c[1]) for c in cert])
    assert np.all(w >= -tol) and abs(w.sum() - 1) <= tol
    assert np.all(g2_margin(pts) > 0)
    assert np.allclose(w @ pts, z, atol=tol)


def test_hull_certificates_and_separations_agree(rng):
    z = random_points(rng, 300, 2.2, 1.2)
    for p in z:
        v = conv_g2_contains(p)
        if v.status is Status.INSIDE:
            _check_certificate(p, v.certificate)
            assert toeplitz_min_eig(p) > -1e-9
        elif v.status is Status.OUTSIDE:
            assert toeplitz_min_eig(p) < 1e-9


def test_hull_soundness_for_g2_points(rng):
    z = random_g2(rng, 300)
    for p in z:
        assert conv_g2_contains(p).status is Status.INSIDE


def test_hull_closed_under_convex_combination(rng):
    a, b = random_g2(rng, 200), random_g2(rng, 200)
    t = rng.uniform(0, 1, (200, 1))
    assert np.all(conv_g2_margin(t * a + (1 - t) * b) > 0)


def test_conv_g2_contains_rejects_bad_tol():
    with pytest.raises(ValueError):
        conv_g2_contains((0, 0), tol=0)


def test_certificate_search_failure_is_signalled(monkeypatch):
    import squeeze_lab.geometry as geo
    monkeypatch.setattr(geo, "_check_certificate", lambda *a: False)
    with pytest.raises(CertificateSearchFailed):
        conv_g2_contains((0.1, 0))


# -- d-gauges -----------------------------------------------------------------

def test_d_action():
    out = d_action((1, 1), 1j, DegreeVector(1, 2))
    assert np.allclose(out, (1j, -1))
    assert np.allclose(d_action((2, 3), 0), (0, 0))


def test_degree_vector_validation():
    assert DegreeVector().L == 2
    with pytest.raises(ValueError):
        DegreeVector(0, 1)


@pytest.mark.parametrize("z h".split(), [
    ((0.2, 0), 0.5),
    ((0, 0.1), 0.5),
    ((0.4, 0), 1.0),
    ((0, 0), 0.0),
])
def test_polydisc_gauge_examples(z, h):
    assert d_minkowski(z, DomainSpec.polydisc(0.4)) == pytest.approx(h, abs=1e-9)


@pytest.mark.parametrize("z h".split(), [
    ((1.0, 0), 1 / np.sqrt(2)),
    ((0, 0.25), 0.5),
    ((2, 1), 1.0),
])
def test_hull_gauge_examples(z, h):
    assert d_minkowski(z, DomainSpec.conv_hull_g2()) == pytest.approx(h, abs=1e-9)


@pytest.mark.parametrize("dom".split(), [
    (DomainSpec.polydisc(0.4),),
    (DomainSpec.conv_hull_g2(),),
    (DomainSpec.symmetrized_bidisc(),),
    (DomainSpec.ball((0, 0), 0.7),),
])
def test_bisection_matches_closed_form(dom, rng):
    z = random_points(rng, 500, 1.0, 1.0)
    exact = dom.closed_form_gauge(z, DegreeVector(1, 2))
    assert np.max(np.abs(d_minkowski(z, dom) - exact)) <= 2e-9


def test_bracketing_failure():
    with pytest.raises(BracketingFailed):
        d_minkowski((1.8, 0), DomainSpec.polydisc(0.4))


def test_not_balanced():
    with pytest.raises(NotBalancedError):
        d_minkowski((0.1, 0), DomainSpec.conv_hull_g2(), DegreeVector(1, 1))
    with pytest.raises(NotBalancedError):
        d_minkowski((0.1, 0), DomainSpec.ball((0.1, 0), 0.5))


def test_k_2k_degrees_accepted():
    z = (0.3, 0.05)
    h1 = d_minkowski(z, DomainSpec.conv_hull_g2(), DegreeVector(1, 2))
    h2 = d_minkowski(z, DomainSpec.conv_hull_g2(), DegreeVector(2, 4))
    assert h2 == pytest.approx(np.sqrt(h1), abs=1e-8)


@settings(max_examples=60, deadline=None)
@given(unit, angle, unit, angle, st.floats(0.05, 1.5), angle)
def test_homogeneity(m1, a1, m2, a2, lam_mod, lam_arg):
    z = np.array([1.9 * m1 * np.exp(1j * a1), 0.9 * m2 * np.exp(1j * a2)])
    lam = lam_mod * np.exp(1j * lam_arg)
    dom = DomainSpec.conv_hull_g2()
    h = d_minkowski(z, dom)
    assert d_minkowski(d_action(z, lam), dom) == pytest.approx(lam_mod * h, abs=5e-9)


@settings(max_examples=60, deadline=None)
@given(unit, angle, unit, angle)
def test_sublevel_matches_membership(m1, a1, m2, a2):
    z = np.array([2.2 * m1 * np.exp(1j * a1), 1.2 * m2 * np.exp(1j * a2)])
    dom = DomainSpec.conv_hull_g2()
    margin = conv_g2_margin(z)
    if abs(margin) > 1e-6:
        assert d_sublevel_contains(z, dom) == (margin > 0)


def test_gauge_monotone_along_rays(rng):
    dom = DomainSpec.conv_hull_g2()
    z = random_points(rng, 50, 1.5, 0.8)
    t = np.linspace(0.1, 1.2, 12)
    for p in z:
        h = d_minkowski(np.array([d_action(p, s) for s in t]), dom)
        assert np.all(np.diff(h) > 0)


def test_symmetrize_image_in_hull_gauge(rng):
    x = rng.uniform(-0.9, 0.9, 100) + 1j * rng.uniform(-0.3, 0.3, 100)
    y = rng.uniform(-0.3, 0.3, 100) + 1j * rng.uniform(-0.6, 0.6, 100)
    z = symmetrize(x, y)
    assert np.all(conv_g2_gauge(z) <= np.maximum(np.abs(x), np.abs(y)) + 1e-12)
