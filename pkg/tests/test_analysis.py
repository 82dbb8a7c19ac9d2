import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import gaussian
from relhartree import analysis as an
from relhartree.errors import NumericError, SizeError, UsageError
from relhartree.operators import hls_constant
from relhartree.spectral import make_grid

vec = st.tuples(st.floats(-50, 50), st.floats(-50, 50))


def naive_g(eta, sigma):
    """grad<sigma+eta> - grad<sigma> in extended precision."""
    e = np.asarray(eta, dtype=np.longdouble)
    s = np.asarray(sigma, dtype=np.longdouble)
    z = s + e
    return z / np.sqrt(1 + z @ z) - s / np.sqrt(1 + s @ s)


def test_phase_examples():
    assert an.phase(an.PhasePoint((1.0, 0.0), (1.0, 0.0))) == pytest.approx(math.sqrt(2) - 1, rel=1e-15)
    assert an.phase(an.PhasePoint((3.0, -2.0), (0.0, 0.0))) == 0.0
    with pytest.raises(UsageError):
        an.PhasePoint((np.inf, 0.0))


def test_grad_phase_matches_finite_differences():
    rng = np.random.default_rng(7)
    h = 1e-6
    for _ in range(1000):
        xi, eta = rng.uniform(-5, 5, size=(2, 2))
        g = an.grad_xi_phase(an.PhasePoint(xi, eta))
        fd = [
            (an.phase(an.PhasePoint(xi + h * e, eta)) - an.phase(an.PhasePoint(xi - h * e, eta))) / (2 * h)
            for e in np.eye(2)
        ]
        assert np.allclose(g, fd, atol=1e-6)


@given(vec, vec)
def test_gradient_difference_matches_extended_precision(eta, sigma):
    ref = naive_g(eta, sigma)
    nr = float(np.sqrt(ref @ ref))
    if nr < 1e-8:
        return
    got = an.bracket_gradient_difference(eta, sigma)
    assert np.linalg.norm(got - ref.astype(float)) <= 1e-10 * nr


def test_gradient_difference_at_w_zero():
    eta = np.array([2.0, 1.0])
    got = an.bracket_gradient_difference(eta, -eta / 2)
    ref = naive_g(eta, -eta / 2).astype(float)
    assert np.allclose(got, ref, rtol=1e-14)


def test_gradient_difference_tiny_eta_keeps_precision():
    # naive float64 cancels completely here; the rewritten form does not
    sigma = np.array([3.0, 4.0])
    eta = np.array([1e-12, 0.0])
    got = an.bracket_gradient_difference(eta, sigma)
    # linearisation: H(sigma) eta with H = (I <s>^2 - s s^T) / <s>^3
    b = math.sqrt(26.0)
    H = (np.eye(2) * b**2 - np.outer(sigma, sigma)) / b**3
    assert np.allclose(got, H @ eta, rtol=1e-10)


def test_multiplier_examples():
    m = an.resonance_multiplier(an.PhasePoint(eta=(1.0, 0.0), sigma=(0.0, 0.0)))
    assert np.allclose(m, [math.sqrt(2), 0.0], rtol=1e-15)
    with pytest.raises(NumericError):
        an.resonance_multiplier(an.PhasePoint(eta=(0.0, 0.0), sigma=(1.0, 0.0)))


@given(vec, vec)
def test_multiplier_is_reciprocal_of_g(eta, sigma):
    if np.hypot(*eta) < 1e-6:
        return
    g = an.bracket_gradient_difference(eta, sigma)
    m = an.resonance_multiplier_array(np.asarray(eta), np.asarray(sigma))
    assert np.linalg.norm(m) * np.linalg.norm(g) == pytest.approx(1.0, rel=1e-12)
    assert float(m @ g) == pytest.approx(1.0, rel=1e-12)


def test_multiplier_blows_up_like_inverse_eta():
    sigma = np.array([0.7, -0.3])
    sizes = np.geomspace(1e-8, 1e-4, 9)
    mags = [np.linalg.norm(an.resonance_multiplier(an.PhasePoint(eta=(s, 0.0), sigma=sigma))) for s in sizes]
    slope = np.polyfit(np.log(sizes), np.log(mags), 1)[0]
    assert slope == pytest.approx(-1.0, abs=1e-4)


def test_null_structure_saturation():
    # collinear large sigma saturates the lower shape, perpendicular the upper one
    lo, mid, up = an.null_structure_terms(np.array([1e-2, 0.0]), np.array([1e3, 0.0]))
    assert 0.5 < mid / lo < 2.0
    lo, mid, up = an.null_structure_terms(np.array([1e-2, 0.0]), np.array([0.0, 1e3]))
    assert mid / up == pytest.approx(1.0, rel=1e-3)


def test_verify_null_structure_small():
    st_ = an.verify_null_structure(10_000, seed=3)
    assert st_.passed
    c_lo, c_hi = st_.empirical_constants
    assert 0.3 < c_lo <= c_hi < 2.5
    with pytest.raises(UsageError):
        an.verify_null_structure(100, seed=3)
    assert an.verify_null_structure(10_000, seed=3).to_dict() == st_.to_dict()


def test_m_divergence_matches_first_derivatives():
    rng = np.random.default_rng(11)
    eta = rng.uniform(-3, 3, size=(200, 2))
    sigma = rng.uniform(-3, 3, size=(200, 2))
    h = 1e-6
    fd = np.zeros(200)
    for k, e in enumerate(np.eye(2)):
        fd += (
            an.resonance_multiplier_array(eta, sigma + h * e)[:, k] - an.resonance_multiplier_array(eta, sigma - h * e)[:, k]
        ) / (2 * h)
    div = an._div_m(eta[:, 0], eta[:, 1], sigma[:, 0], sigma[:, 1])
    assert np.allclose(div, fd, rtol=1e-5, atol=1e-6 * np.max(np.abs(fd)))


def test_verify_m_derivatives_small():
    st_ = an.verify_m_derivatives(2, 2000, seed=5)
    assert st_.passed
    consts = st_.details["constant_by_order"]
    assert set(consts) == {0, 1, 2}
    assert all(0 < c < 50 for c in consts.values())
    with pytest.raises(UsageError):
        an.verify_m_derivatives(3, 10, seed=5)
    with pytest.raises(UsageError):
        an.m_derivatives(np.ones(2), np.ones(2), 3)


def test_log_uniform_pairs_ranges():
    eta, sigma = an.log_uniform_pairs(5000, seed=1, lo=1e-2, hi=1e2)
    for v in (eta, sigma):
        r = np.linalg.norm(v, axis=1)
        assert r.min() >= 1e-2 * (1 - 1e-12) and r.max() <= 1e2 * (1 + 1e-12)


def test_dispersive_structure_and_homogeneity():
    g = make_grid(128, 64.0)
    phi = gaussian(g, width=0.7)
    t = np.linspace(1, 12, 12)
    a = an.verify_dispersive([1, 2], t, phi, t_safe=16.0)
    b = an.verify_dispersive([1, 2], t, phi * 3.0)
    for N in (1, 2):
        assert np.allclose(a.details["ratios"][N], b.details["ratios"][N], rtol=1e-12)
        assert np.all(np.isfinite(a.details["ratios"][N]))
    assert a.n_samples == 24
    with pytest.raises(UsageError, match="horizon"):
        an.verify_dispersive([1], t, phi, t_safe=5.0)


def test_dispersive_t_zero_bound():
    # at t = 0 the ratio is ||S_1 phi||_inf / ||phi||_1 <= (2 pi)^-2 ||chi||_1 < 1
    g = make_grid(128, 64.0)
    st_ = an.verify_dispersive([1], np.linspace(0, 8, 9), gaussian(g), fit_from=1.0)
    assert 0 < st_.details["ratios"][1][0] < 1.0


def test_hls_zero_and_amplitude_invariance(rng):
    g = make_grid(64, 32.0)
    f = an.random_localized_fields(g, 20, rng)
    r1 = an.hls_ratios(f, g, 1.5)
    r2 = an.hls_ratios(7.0 * f, g, 1.5)
    assert np.allclose(r1, r2, rtol=1e-12)
    assert np.all(an.hls_ratios(np.zeros((2, 64, 64)), g, 1.5) == 0.0)


def test_hls_dilation_invariance():
    # the bound is dilation invariant, so a resolved Gaussian gives the same ratio at any width
    g = make_grid(256, 64.0)
    vals = []
    for w in (1.0, 2.0):
        u = gaussian(g, width=w).values[None]
        vals.append(an.hls_ratios(u, g, 1.5)[0])
    assert vals[0] == pytest.approx(vals[1], rel=1e-4)


def test_verify_hls_small():
    st_ = an.verify_hls(1.5, 300, seed=2, batch=128)
    assert st_.passed and st_.n_samples == 300
    assert st_.details["hls_constant"] == pytest.approx(2 * math.pi / 0.5 + 1)
    assert st_.empirical_constants[1] == pytest.approx(st_.worst_ratio * hls_constant(1.5))


def test_cm_separable_is_product():
    a = lambda x1, x2: np.exp(-(x1**2 + x2**2)) * (1 + 0.3 * x1)  # noqa: E731
    b = lambda x1, x2: np.exp(-2 * ((x1 - 0.2) ** 2 + x2**2))  # noqa: E731
    est = an.estimate_cm_norm(lambda x1, x2, e1, e2: a(x1, x2) * b(e1, e2), (4.0, 3.0), (16, 12))
    prod = an.l1_inverse_transform_2d(a, 4.0, 16) * an.l1_inverse_transform_2d(b, 3.0, 12)
    assert est == pytest.approx(prod, rel=1e-12)


@pytest.mark.parametrize("n,M", [(16, 1), (16, 5), (32, 16), (64, 7)])
def test_dirichlet_oracle(n, M):
    B = 3.0
    k = an._axis(B, n)
    idx = lambda x: (x < k[M] - 1e-12).astype(float) if M < n else np.ones_like(x)  # noqa: E731
    got = an.l1_inverse_transform_2d(lambda x1, x2: idx(x1) * idx(x2), B, n)
    assert got == pytest.approx(an.dirichlet_l1(n, M) ** 2, rel=1e-12)


def test_cm_guards():
    with pytest.raises(SizeError):
        an.estimate_cm_norm(lambda *a: 1.0, (1.0, 1.0), (128, 64))
    with np.errstate(divide="ignore"), pytest.raises(NumericError):
        an.estimate_cm_norm(lambda x1, x2, e1, e2: 1 / (x1 * 0), (1.0, 1.0), (4, 4))


def test_m1_symbol_support_and_step_stability():
    sym = an.m1_symbol(0.125, 1, 1)
    e = np.array([0.1, 0.01, 1.0])
    s = np.array([0.3, 0.3, 0.3])
    out = sym(e, 0 * e, s, 0 * s)
    # chi_L vanishes at |eta| = 0.01 (< L/2) and at 1.0 (> 2L)
    assert out[1] == 0.0 and out[2] == 0.0
    assert np.isfinite(out[0]) and out[0] != 0.0
    coarse = an.m1_symbol(0.125, 1, 1, h_rel=1e-4)(e, 0 * e, s, 0 * s)
    assert coarse[0] == pytest.approx(out[0], rel=1e-5)
