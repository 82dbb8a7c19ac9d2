import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import gamma as G

from relhartree.errors import BandError, ConfigurationError, NumericError, UsageError
from relhartree.operators import (
    PotentialParams,
    bessel_power,
    bump_radial,
    chi,
    chi_dyadic,
    dyadic_scales,
    half_wave,
    hartree_term,
    hls_constant,
    is_dyadic,
    lp_project,
    lp_project_inhom,
    resolvable_band,
    rho_inhom,
    riesz_constant,
    riesz_convolve,
    torus_riesz_offset,
)
from relhartree.observables import sobolev_norm
from relhartree.spectral import PHYSICAL, SPECTRAL, Field, l2_norm, make_grid

from conftest import gaussian, random_field


# --- <D>^s and the half-wave group


def test_bessel_power_identity_and_constant(grid64, rng):
    f = random_field(grid64, rng)
    assert np.max(np.abs(bessel_power(f, 0).values - f.values)) < 1e-12
    c = Field(grid64, np.full(grid64.shape, 2.5 + 0j))
    assert np.max(np.abs(bessel_power(c, 7.0).values - c.values)) < 1e-12


@given(st.integers(0, 2**32 - 1), st.floats(-4, 4))
def test_bessel_power_inverse(seed, s):
    g = make_grid(16, 8.0)
    f = random_field(g, np.random.default_rng(seed))
    back = bessel_power(bessel_power(f, s), -s)
    assert np.max(np.abs(back.values - f.values)) / np.max(np.abs(f.values)) < 1e-12


def test_half_wave_identity(grid64, rng):
    f = random_field(grid64, rng)
    assert np.max(np.abs(half_wave(f, 0.0).values - f.values)) < 1e-12


@given(st.integers(0, 2**32 - 1))
def test_half_wave_unitary(seed):
    g = make_grid(32, 16.0)
    f = random_field(g, np.random.default_rng(seed))
    assert l2_norm(half_wave(f, 37.5)) == pytest.approx(l2_norm(f), rel=1e-12)


@given(st.integers(0, 2**32 - 1), st.floats(-50, 50), st.floats(-50, 50))
def test_half_wave_group_law(seed, t1, t2):
    g = make_grid(32, 16.0)
    f = random_field(g, np.random.default_rng(seed))
    a = half_wave(half_wave(f, t1), t2).values
    b = half_wave(f, t1 + t2).values
    assert np.max(np.abs(a - b)) / np.max(np.abs(f.values)) < 1e-11


# --- Riesz potential


def test_riesz_constant_closed_form():
    # gamma = 1: F(|x|^-1) = 2 pi / |xi|
    assert riesz_constant(1.0) == pytest.approx(2 * np.pi)
    g = 1.5
    assert riesz_constant(g) == pytest.approx(2 ** 0.5 * np.pi * G(0.25) / G(0.75))


@pytest.mark.parametrize("gamma", [1.2, 1.5, 1.8])
def test_riesz_gaussian_at_origin_matches_quadrature(gamma):
    g = make_grid(512, 64.0)
    dens = gaussian(g)
    dens = Field(g, dens.values / (2 * np.pi))
    V = riesz_convolve(dens, PotentialParams(gamma, zero_mode="continuum"))
    # radial quadrature of int |y|^-gamma e^{-|y|^2/2}/(2 pi) dy
    val, _ = integrate.quad(lambda r: r ** (1 - gamma) * np.exp(-r * r / 2), 0, np.inf)
    exact = val
    i0 = g.n // 2
    assert V.values[i0, i0].real == pytest.approx(exact, rel=1e-3)
    assert exact == pytest.approx(2 ** (-gamma / 2) * G(1 - gamma / 2), rel=1e-8)


def test_riesz_zero_policy_loses_the_offset():
    g = make_grid(512, 64.0)
    dens = Field(g, gaussian(g).values / (2 * np.pi))
    V = riesz_convolve(dens, PotentialParams(1.5)).values[256, 256].real
    exact = 2 ** -0.75 * G(0.25)
    assert abs(V / exact - 1) > 1e-3
    assert V - exact == pytest.approx(torus_riesz_offset(64.0, 1.5), rel=1e-3)


def test_riesz_zero_policy_mean_free(grid64, rng):
    dens = Field(grid64, np.abs(random_field(grid64, rng).values) ** 2)
    V = riesz_convolve(dens, PotentialParams(1.5))
    assert abs(np.mean(V.values)) < 1e-12 * np.max(np.abs(V.values))


@pytest.mark.parametrize("c", [0.3, -2.0, 17.0])
def test_riesz_value_policy_shifts_by_constant(grid64, rng, c):
    dens = Field(grid64, np.abs(random_field(grid64, rng).values) ** 2)
    V0 = riesz_convolve(dens, PotentialParams(1.5)).values
    Vc = riesz_convolve(dens, PotentialParams(1.5, zero_mode=c)).values
    shift = c * np.sum(dens.values.real) * grid64.dx**2
    assert np.max(np.abs(Vc - V0 - shift)) < 1e-10 * (1 + abs(shift))


def test_riesz_zero_input():
    g = make_grid(32, 16.0)
    V = riesz_convolve(Field.zeros(g), PotentialParams(1.5, zero_mode="continuum"))
    assert np.max(np.abs(V.values)) == 0


def test_riesz_real_output_for_real_input(grid64, rng):
    dens = Field(grid64, np.abs(random_field(grid64, rng).values) ** 2)
    V = riesz_convolve(dens, PotentialParams(1.3)).values
    assert np.max(np.abs(V.imag)) < 1e-12 * np.max(np.abs(V.real))


@given(st.integers(0, 2**32 - 1), st.integers(-16, 16), st.integers(-16, 16))
def test_riesz_translation_invariance(seed, j1, j2):
    g = make_grid(32, 16.0)
    dens = Field(g, np.abs(random_field(g, np.random.default_rng(seed)).values) ** 2)
    p = PotentialParams(1.5, zero_mode="continuum")
    a = riesz_convolve(dens.shift(j1, j2), p).values
    b = riesz_convolve(dens, p).shift(j1, j2).values
    assert np.max(np.abs(a - b)) < 1e-12 * np.max(np.abs(b))


def test_riesz_rejects_nonfinite(grid64):
    vals = np.zeros(grid64.shape)
    vals[0, 0] = np.nan
    with pytest.raises(NumericError):
        riesz_convolve(Field(grid64, vals), PotentialParams(1.5))


@pytest.mark.parametrize("gamma", [1.1, 1.5, 1.9])
def test_torus_offset_independent_of_splitting_parameter(gamma):
    ref = torus_riesz_offset(8.0, gamma)
    for scale in (0.5, 2.0):
        assert torus_riesz_offset(8.0, gamma, scale) == pytest.approx(ref, rel=1e-10)


@given(st.floats(0.5, 500.0), st.floats(1.01, 1.99))
def test_torus_offset_homogeneity(L, gamma):
    # K_0 for side L is L^-gamma K_0(x/L) for side 1
    assert torus_riesz_offset(L, gamma) == pytest.approx(torus_riesz_offset(1.0, gamma) * L**-gamma, rel=1e-9)


def test_potential_params_validation():
    for bad in (1.0, 2.0, 0.5, 2.5):
        with pytest.raises(ConfigurationError):
            PotentialParams(bad)
    with pytest.raises(ConfigurationError):
        PotentialParams(1.5, mass=2.0)
    with pytest.raises(ConfigurationError):
        PotentialParams(1.5, zero_mode="bogus")
    with pytest.raises(ConfigurationError):
        PotentialParams(1.5, zero_mode=float("inf"))


# --- Hartree term and the HLS-type bound


def test_hartree_zero_argument(grid64, rng):
    u = random_field(grid64, rng)
    z = Field.zeros(grid64)
    p = PotentialParams(1.5)
    for args in ((z, u, u), (u, z, u), (u, u, z)):
        assert np.max(np.abs(hartree_term(*args, p).values)) == 0


def test_hartree_real_nonnegative_for_real_data():
    g = make_grid(128, 32.0)
    u = gaussian(g, width=1.5)
    out = hartree_term(u, u, u, PotentialParams(1.5, zero_mode="continuum")).values
    assert np.max(np.abs(out.imag)) < 1e-12 * np.max(np.abs(out))
    assert np.min(out.real) > -1e-12 * np.max(np.abs(out))


def test_hartree_trilinear(grid64, rng):
    u, v, w = (random_field(grid64, rng, smooth=2.0) for _ in range(3))
    p = PotentialParams(1.5)
    a = hartree_term(u * 2.0, v * 3j, w * (1 - 1j), p).values
    b = 2.0 * np.conj(3j) * (1 - 1j) * hartree_term(u, v, w, p).values
    assert np.max(np.abs(a - b)) < 1e-11 * np.max(np.abs(b))


def test_hartree_usage_errors(grid64, rng):
    u = random_field(grid64, rng)
    p = PotentialParams(1.5)
    with pytest.raises(UsageError):
        hartree_term(u, u.spectral(), u, p)
    with pytest.raises(UsageError):
        hartree_term(u, u, random_field(make_grid(32, 32.0), rng), p)


def test_hls_constant_is_the_optimised_split():
    # C(R) = 2 pi/(2-g) R^{2-g} |u|_inf^2 + R^{-g} |u|_2^2 at R = |u|_2/|u|_inf
    gam, a, b = 1.4, 2.0, 5.0
    R = b / a
    split = 2 * np.pi / (2 - gam) * R ** (2 - gam) * a**2 + R**-gam * b**2
    assert split == pytest.approx(hls_constant(gam) * b ** (2 - gam) * a**gam)


def test_hls_bound_twenty_fields():
    g = make_grid(64, 32.0)
    rng = np.random.default_rng(5)
    from relhartree.analysis import random_localized_fields

    fields = random_localized_fields(g, 20, rng)
    for gam in (1.2, 1.5, 1.8):
        p = PotentialParams(gam, zero_mode="continuum")
        for vals in fields:
            u = Field(g, vals)
            lhs = l2_norm(hartree_term(u, u, u, p))
            l2, linf = l2_norm(u), np.max(np.abs(vals))
            assert lhs <= hls_constant(gam) * l2 ** (2 - gam) * linf**gam * l2


# --- Littlewood-Paley


def test_bump_shape():
    r = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 3.0])
    v = bump_radial(r)
    assert list(v[[0, 1, 2]]) == [1.0, 1.0, 1.0]
    assert list(v[[4, 5]]) == [0.0, 0.0]
    assert 0 < v[3] < 1
    rr = np.linspace(0, 3, 301)
    assert np.all(np.diff(bump_radial(rr)) <= 0)


@given(st.floats(1e-3, 1e3), st.floats(0, 2 * np.pi))
def test_dyadic_partition_of_unity(r, th):
    k1, k2 = r * np.cos(th), r * np.sin(th)
    total = sum(chi_dyadic(k1, k2, 2.0**j) for j in range(-14, 14))
    assert total == pytest.approx(1.0, abs=1e-12)


@given(st.floats(0, 1e3), st.floats(0, 2 * np.pi))
def test_inhomogeneous_partition(r, th):
    k1, k2 = r * np.cos(th), r * np.sin(th)
    total = sum(rho_inhom(k1, k2, 2**j) for j in range(0, 14))
    assert total == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("L", [0.125, 1.0, 4.0])
def test_chi_support(L):
    r = np.linspace(0, 5 * L, 5001)
    v = chi_dyadic(r, 0 * r, L)
    assert np.all(v[(r <= L / 2) | (r >= 2 * L)] == 0)
    assert np.all(v[(r > 0.55 * L) & (r < 1.98 * L)] > 0)


def test_is_dyadic():
    assert is_dyadic(0.25) and is_dyadic(1) and is_dyadic(1024)
    assert not is_dyadic(0.3) and not is_dyadic(3) and not is_dyadic(0) and not is_dyadic(-2)


def _annulus_field(g, lo, hi, rng):
    spec = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    spec[(g.kabs < lo) | (g.kabs > hi)] = 0
    return Field(g, spec * g.extent, SPECTRAL)


def test_lp_sum_reconstructs_band_limited(rng):
    g = make_grid(128, 64.0)
    scales = dyadic_scales(g)
    f = _annulus_field(g, scales[0], scales[-1], rng)
    total = sum(lp_project(f, L).values for L in scales)
    assert np.max(np.abs(total - f.values)) < 1e-10 * np.max(np.abs(f.values))


def test_lp_annulus_orthogonality(rng):
    g = make_grid(256, 64.0)
    L = 2.0
    f = _annulus_field(g, L * 0.999, L * 1.001, rng)
    for Lp in dyadic_scales(g):
        if abs(math.log2(Lp / L)) >= 2:
            assert np.max(np.abs(lp_project(f, Lp).values)) == 0


@given(st.integers(0, 2**32 - 1))
def test_lp_almost_orthogonal(seed):
    g = make_grid(64, 64.0)
    f = random_field(g, np.random.default_rng(seed)).spectral()
    sc = dyadic_scales(g)
    for i, L in enumerate(sc):
        for Lp in sc[i + 2 :]:
            a = lp_project(f, L).values
            b = lp_project(f, Lp).values
            assert np.vdot(a, b) == 0


def test_lp_energy_fraction_of_gaussian():
    g = make_grid(1024, 512.0)
    f = gaussian(g)
    got = l2_norm(lp_project(f, 1.0)) ** 2
    # (2 pi)^-2 int chi_1(xi)^2 (2 pi)^2 e^{-|xi|^2} dxi, radial quadrature
    val, _ = integrate.quad(
        lambda r: chi_dyadic(r, 0.0, 1.0) ** 2 * np.exp(-r * r) * 2 * np.pi * r, 0.5, 2, limit=400, epsabs=1e-14, epsrel=1e-13
    )
    assert got == pytest.approx(val, rel=1e-8)


def test_band_errors():
    g = make_grid(64, 64.0)
    lo, hi = resolvable_band(g)
    f = Field.zeros(g)
    with pytest.raises(BandError, match="resolvable band"):
        lp_project(f, 2.0 ** math.floor(math.log2(lo) - 1))
    with pytest.raises(BandError):
        lp_project(f, 2.0 ** math.ceil(math.log2(hi) + 1))
    with pytest.raises(BandError):
        lp_project(f, 0.3)
    with pytest.raises(BandError):
        lp_project_inhom(f, 3)


def test_inhom_telescopes_and_support(rng):
    g = make_grid(256, 32.0)
    Ns = [1, 2, 4, 8]
    f = _annulus_field(g, 0.0, 8.0, rng)
    total = sum(lp_project_inhom(f, N).values for N in Ns)
    assert np.max(np.abs(total - f.values)) < 1e-10 * np.max(np.abs(f.values))
    low = _annulus_field(g, 0.0, 1.9, rng)
    assert np.max(np.abs(lp_project_inhom(low, 8).values)) == 0


def test_sobolev_equivalence_constant():
    g = make_grid(256, 32.0)
    rng = np.random.default_rng(11)
    Ns = [1, 2, 4, 8]
    for i in range(10):
        spec = (rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)) * np.exp(-g.k2 / (2 * (0.5 + 0.15 * i) ** 2))
        f = Field(g, spec * g.extent, SPECTRAL)
        lhs = sum(N**6 * l2_norm(lp_project_inhom(f, N)) ** 2 for N in Ns)
        ratio = lhs / sobolev_norm(f, 3) ** 2
        assert 0.25 <= ratio <= 4.0
