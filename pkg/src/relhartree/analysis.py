"""Pointwise and sampled checks of the phase/multiplier inequalities, the
frequency-localised dispersive estimate, the HLS-type bound and discrete
Coifman-Meyer norm estimates.

Every sampler takes an explicit ``seed``; results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft

from .errors import NumericError, SizeError, UsageError
from .observables import fit_power_law, l1_norm
from .operators import (
    PotentialParams,
    _check_scale,
    chi_dyadic,
    hls_constant,
    rho_inhom,
    riesz_symbol,
)
from .spectral import PHYSICAL, Field, Grid, make_grid


@dataclass(frozen=True)
class PhasePoint:
    xi: tuple[float, float] = (0.0, 0.0)
    eta: tuple[float, float] = (0.0, 0.0)
    sigma: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        for name in ("xi", "eta", "sigma"):
            v = tuple(float(c) for c in getattr(self, name))
            if len(v) != 2 or not all(np.isfinite(v)):
                raise UsageError(f"{name} must be a finite 2-vector")
            object.__setattr__(self, name, v)


@dataclass
class SampleStats:
    """Outcome of a sampled inequality check.

    ``empirical_constants`` is ``(c_lower, c_upper)``; a side that the
    inequality does not have is reported as NaN.  ``details`` carries
    verifier-specific tables.
    """

    n_samples: int
    violations: int
    worst_ratio: float
    empirical_constants: tuple[float, float]
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "violations": self.violations,
            "worst_ratio": self.worst_ratio,
            "empirical_constants": list(self.empirical_constants),
            "details": _jsonable(self.details),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


# --------------------------------------------------------------------------
# phase and the space-resonance multiplier


def _jb(x1, x2):
    return np.sqrt(1.0 + x1 * x1 + x2 * x2)


def bracket_gradient_difference(eta, sigma):
    """g = grad<sigma+eta> - grad<sigma>, evaluated without cancellation.

    With w = 2 sigma + eta, a = <sigma+eta>, b = <sigma>:
        g = [c (w.eta) w + (a+b)^2 (w x eta) w_perp] / (2ab(a+b) |w|^2),
        c = (a+b)^2 - |w|^2 = 2 + 2(ab - zeta.sigma) > 0,
    and ab - zeta.sigma is rewritten through the Lagrange identity when
    zeta.sigma > 0.  Both pieces are sums of positive terms, so g keeps full
    relative precision even when the two gradients nearly coincide.
    Arrays broadcast; the last axis has length 2.
    """
    eta = np.asarray(eta, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    e1, e2 = eta[..., 0], eta[..., 1]
    s1, s2 = sigma[..., 0], sigma[..., 1]
    z1, z2 = s1 + e1, s2 + e2
    a = _jb(z1, z2)
    b = _jb(s1, s2)
    zs = z1 * s1 + z2 * s2
    cross_es = e1 * s2 - e2 * s1  # zeta x sigma = eta x sigma
    with np.errstate(divide="ignore", invalid="ignore"):
        num = 1.0 + (z1 * z1 + z2 * z2) + (s1 * s1 + s2 * s2) + cross_es**2
        q = np.where(zs > 0, num / (a * b + np.abs(zs)), a * b - zs)
        c = 2.0 + 2.0 * q
        w1, w2 = 2.0 * s1 + e1, 2.0 * s2 + e2
        ww = w1 * w1 + w2 * w2
        wdot = w1 * e1 + w2 * e2
        wcross = w1 * e2 - w2 * e1
        apb2 = (a + b) ** 2
        g1 = (c * wdot * w1 + apb2 * wcross * (-w2)) / ww
        g2 = (c * wdot * w2 + apb2 * wcross * w1) / ww
        denom = 2.0 * a * b * (a + b)
        g1 = g1 / denom
        g2 = g2 / denom
    # w = 0 means zeta = -sigma, where M is isotropic: g = eta (a+b)^2 / (2ab(a+b))
    flat = ww == 0
    if np.any(flat):
        g1 = np.where(flat, e1 * (a + b) / (2 * a * b), g1)
        g2 = np.where(flat, e2 * (a + b) / (2 * a * b), g2)
    return np.stack([g1, g2], axis=-1)


def phase(p: PhasePoint) -> float:
    """phi(xi, eta) = <xi> - <xi - eta>."""
    x = np.asarray(p.xi)
    y = x - np.asarray(p.eta)
    a, b = _jb(*x), _jb(*y)
    return float(((x @ x) - (y @ y)) / (a + b))


def grad_xi_phase(p: PhasePoint) -> np.ndarray:
    """grad_xi phi = xi/<xi> - (xi-eta)/<xi-eta>."""
    x = np.asarray(p.xi)
    eta = np.asarray(p.eta)
    return bracket_gradient_difference(eta, x - eta)


def resonance_multiplier_array(eta, sigma):
    g = bracket_gradient_difference(eta, sigma)
    n2 = np.sum(g * g, axis=-1, keepdims=True)
    return g / n2


def resonance_multiplier(p: PhasePoint) -> np.ndarray:
    """m(eta, sigma) = grad_s(<s+eta> - <s>) / |grad_s(<s+eta> - <s>)|^2."""
    if p.eta == (0.0, 0.0):
        raise NumericError("resonance multiplier is singular at eta = 0")
    return resonance_multiplier_array(np.asarray(p.eta), np.asarray(p.sigma))


def _maxmin_brackets(eta, sigma):
    a = _jb(eta[..., 0] + sigma[..., 0], eta[..., 1] + sigma[..., 1])
    b = _jb(sigma[..., 0], sigma[..., 1])
    return np.maximum(a, b), np.minimum(a, b)


def null_structure_terms(eta, sigma):
    """(lower shape, middle quantity, upper shape) of the two-sided bound

        |eta| / (max min^2)  <~  |grad<eta+sigma> - grad<sigma>|  <~  |eta| / max
    """
    eta = np.asarray(eta, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    ne = np.hypot(eta[..., 0], eta[..., 1])
    mx, mn = _maxmin_brackets(eta, sigma)
    mid = np.linalg.norm(bracket_gradient_difference(eta, sigma), axis=-1)
    return ne / (mx * mn**2), mid, ne / mx


def log_uniform_pairs(n: int, seed: int, lo: float = 1e-3, hi: float = 1e3):
    """n (eta, sigma) pairs with log-uniform magnitudes and uniform directions."""
    rng = np.random.default_rng(seed)
    mags = np.exp(rng.uniform(np.log(lo), np.log(hi), size=(n, 2)))
    ang = rng.uniform(0.0, 2.0 * np.pi, size=(n, 2))
    eta = mags[:, :1] * np.stack([np.cos(ang[:, 0]), np.sin(ang[:, 0])], axis=-1)
    sigma = mags[:, 1:] * np.stack([np.cos(ang[:, 1]), np.sin(ang[:, 1])], axis=-1)
    return eta, sigma


_REL_SLACK = 1e-12


def verify_null_structure(n: int, seed: int, lo: float = 1e-3, hi: float = 1e3) -> SampleStats:
    """Fit c_lo, c_hi with c_lo*lower <= middle <= c_hi*upper over n samples."""
    if n < 10_000:
        raise UsageError("verify_null_structure needs n >= 1e4 samples")
    eta, sigma = log_uniform_pairs(n, seed, lo, hi)
    lower, mid, upper = null_structure_terms(eta, sigma)
    r_lo = mid / lower
    r_hi = mid / upper
    c_lo = float(np.min(r_lo))
    c_hi = float(np.max(r_hi))
    bad = (mid < c_lo * lower * (1 - _REL_SLACK)) | (mid > c_hi * upper * (1 + _REL_SLACK)) | ~np.isfinite(mid)
    i_lo, i_hi = int(np.argmin(r_lo)), int(np.argmax(r_hi))
    return SampleStats(
        n_samples=n,
        violations=int(bad.sum()),
        worst_ratio=float(c_hi / c_lo),
        empirical_constants=(c_lo, c_hi),
        details={
            "argmin_lower": {"eta": eta[i_lo], "sigma": sigma[i_lo]},
            "argmax_upper": {"eta": eta[i_hi], "sigma": sigma[i_hi]},
        },
    )


def m_derivatives(eta, sigma, order: int, h_rel: float = 1e-5):
    """Max over |alpha| = order of |d_sigma^alpha m| by central differences,
    step h = h_rel (1 + |sigma|) per axis."""
    eta = np.asarray(eta, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    m = lambda s: resonance_multiplier_array(eta, s)  # noqa: E731
    if order == 0:
        return np.linalg.norm(m(sigma), axis=-1)
    h = (h_rel * (1.0 + np.linalg.norm(sigma, axis=-1)))[..., None]
    e1 = np.array([1.0, 0.0])
    e2 = np.array([0.0, 1.0])
    if order == 1:
        d1 = (m(sigma + h * e1) - m(sigma - h * e1)) / (2 * h)
        d2 = (m(sigma + h * e2) - m(sigma - h * e2)) / (2 * h)
        return np.maximum(np.linalg.norm(d1, axis=-1), np.linalg.norm(d2, axis=-1))
    if order == 2:
        m0 = m(sigma)
        d11 = (m(sigma + h * e1) - 2 * m0 + m(sigma - h * e1)) / h**2
        d22 = (m(sigma + h * e2) - 2 * m0 + m(sigma - h * e2)) / h**2
        d12 = (
            m(sigma + h * (e1 + e2)) - m(sigma + h * (e1 - e2)) - m(sigma - h * (e1 - e2)) + m(sigma - h * (e1 + e2))
        ) / (4 * h**2)
        return np.max(np.stack([np.linalg.norm(d, axis=-1) for d in (d11, d12, d22)]), axis=0)
    raise UsageError("derivative order must be 0, 1 or 2")


def m_derivative_bound(eta, sigma, order: int):
    """|eta|^-1 max(<eta+sigma>, <sigma>) min(<eta+sigma>, <sigma>)^(2+order)."""
    eta = np.asarray(eta, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    mx, mn = _maxmin_brackets(eta, sigma)
    return mx * mn ** (2 + order) / np.hypot(eta[..., 0], eta[..., 1])


def verify_m_derivatives(max_order: int, n: int, seed: int, lo: float = 1e-3, hi: float = 1e3) -> SampleStats:
    """Fitted constant per derivative order; ``empirical_constants[1]`` is the largest."""
    if not 0 <= max_order <= 2:
        raise UsageError("max_order must be 0, 1 or 2")
    eta, sigma = log_uniform_pairs(n, seed, lo, hi)
    consts, worst, viol = {}, 0.0, 0
    for k in range(max_order + 1):
        meas = m_derivatives(eta, sigma, k)
        ratio = meas / m_derivative_bound(eta, sigma, k)
        if not np.all(np.isfinite(ratio)):
            viol += int((~np.isfinite(ratio)).sum())
        c = float(np.nanmax(ratio))
        consts[k] = c
        viol += int((ratio > c * (1 + _REL_SLACK)).sum())
        worst = max(worst, c)
    return SampleStats(n, viol, worst, (float("nan"), max(consts.values())), {"constant_by_order": consts})


# --------------------------------------------------------------------------
# frequency-localised dispersive estimate


def verify_dispersive(
    N_list: Sequence[int],
    t_list: Sequence[float],
    datum: Field,
    t_safe: float | None = None,
    fit_from: float | None = None,
) -> SampleStats:
    """Ratios ||e^{it<D>} S_N phi||_inf <t> / (N^2 ||phi||_1) and per-N decay exponents.

    The large-t window for the exponent is t >= ``fit_from`` (default
    max(t)/4).  ``violations`` counts non-finite ratios and exponents outside
    [-1.15, -0.85].
    """
    g = datum.grid
    t_arr = np.asarray(sorted(float(t) for t in t_list))
    if t_safe is not None and t_arr[-1] > t_safe + 1e-12:
        raise UsageError(f"t = {t_arr[-1]} exceeds the wrap-around horizon {t_safe:.6g}")
    for N in N_list:
        _check_scale(g, N, inhom=True)
    phi1 = l1_norm(datum)
    if phi1 == 0:
        raise UsageError("datum must be non-zero")
    spec = datum.spectral().values
    k1, k2 = g.kk
    fit_from = t_arr[-1] / 4.0 if fit_from is None else fit_from
    table, exps, sups = {}, {}, {}
    bad = 0
    for N in N_list:
        base = spec * rho_inhom(k1, k2, N)
        sup = np.array([np.max(np.abs(g.ifft(base * np.exp(1j * t * g.bracket)))) for t in t_arr])
        ratio = sup * np.sqrt(1.0 + t_arr**2) / (N**2 * phi1)
        table[int(N)] = ratio
        sups[int(N)] = sup
        sel = t_arr >= fit_from
        fit = fit_power_law(t_arr[sel], sup[sel])
        exps[int(N)] = fit.exponent
        bad += int((~np.isfinite(ratio)).sum())
        if not (-1.15 <= fit.exponent <= -0.85):
            bad += 1
    sup_ratio = float(max(np.max(r) for r in table.values()))
    return SampleStats(
        n_samples=len(N_list) * t_arr.size,
        violations=bad,
        worst_ratio=sup_ratio,
        empirical_constants=(float("nan"), sup_ratio),
        details={"t": t_arr, "ratios": table, "exponents": exps, "sup": sups, "fit_from": fit_from},
    )


# --------------------------------------------------------------------------
# HLS-type bound with the explicit constant


def random_localized_fields(grid: Grid, count: int, rng: np.random.Generator, max_bumps: int = 4) -> np.ndarray:
    """Smooth complex fields: sums of 1..max_bumps modulated Gaussians near the origin.

    Centres lie within |x| <= extent/16 and widths in [extent/32, extent/20],
    so the mass stays well inside |x| <= extent/4.
    """
    x = grid.x
    L = grid.extent
    k = rng.integers(1, max_bumps + 1, size=count)
    live = np.arange(max_bumps)[None, :] < k[:, None]
    r = L / 16.0 * np.sqrt(rng.uniform(size=(count, max_bumps)))
    th = rng.uniform(0, 2 * np.pi, size=(count, max_bumps))
    c1, c2 = r * np.cos(th), r * np.sin(th)
    w = rng.uniform(L / 32.0, L / 20.0, size=(count, max_bumps))
    amp = (rng.normal(size=(count, max_bumps)) + 1j * rng.normal(size=(count, max_bumps))) * live
    kx, ky = rng.uniform(-1.0, 1.0, size=(2, count, max_bumps))
    # each bump is separable: an outer product of two 1D modulated Gaussians
    f1 = np.exp(-((x - c1[..., None]) ** 2) / (2 * w[..., None] ** 2) + 1j * kx[..., None] * x)
    f2 = np.exp(-((x - c2[..., None]) ** 2) / (2 * w[..., None] ** 2) + 1j * ky[..., None] * x)
    return np.einsum("cb,cbi,cbj->cij", amp, f1, f2)


def hls_ratios(fields: np.ndarray, grid: Grid, gamma: float) -> np.ndarray:
    """||(|x|^-g * |u|^2)||_inf / (C ||u||_2^(2-g) ||u||_inf^g) for a stack of fields.

    The convolution uses the continuum-matched zero mode, so it approximates
    the R^2 integral for localised data.
    """
    p = PotentialParams(gamma, zero_mode="continuum")
    sym = riesz_symbol(grid, p)
    n = grid.n
    dens = np.abs(fields) ** 2
    V = sfft.irfft2(sym[:, : n // 2 + 1] * sfft.rfft2(dens, axes=(-2, -1)), s=(n, n), axes=(-2, -1))
    vmax = np.max(np.abs(V), axis=(-2, -1))
    l2 = np.sqrt(dens.sum(axis=(-2, -1)) * grid.dx**2)
    linf = np.sqrt(np.max(dens, axis=(-2, -1)))
    bound = hls_constant(gamma) * l2 ** (2 - gamma) * linf**gamma
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(bound > 0, vmax / bound, 0.0)


def verify_hls(gamma: float, n_fields: int, seed: int, grid: Grid | None = None, batch: int = 500) -> SampleStats:
    """Check ||(|x|^-g * |u|^2)||_inf <= (2pi/(2-g) + 1) ||u||_2^(2-g) ||u||_inf^g."""
    grid = grid or make_grid(64, 32.0)
    rng = np.random.default_rng(seed)
    ratios = []
    done = 0
    while done < n_fields:
        m = min(batch, n_fields - done)
        ratios.append(hls_ratios(random_localized_fields(grid, m, rng), grid, gamma))
        done += m
    r = np.concatenate(ratios)
    viol = int(np.sum(~(r <= 1.0)))
    c = float(np.max(r))
    return SampleStats(
        n_fields,
        viol,
        c,
        (float("nan"), c * hls_constant(gamma)),
        {"hls_constant": hls_constant(gamma), "ratio_quantiles": np.quantile(r, [0.5, 0.9, 0.99]).tolist()},
    )


# --------------------------------------------------------------------------
# Coifman-Meyer norm estimates

MAX_CM_POINTS = 2**24


def _axis(B: float, n: int) -> np.ndarray:
    return -B + (2.0 * B / n) * np.arange(n)


def l1_inverse_transform_2d(symbol: Callable, B: float, n: int) -> float:
    """Discrete ||int a(xi) e^{ix.xi} dxi||_{L^1_x} for a(xi) sampled on [-B, B)^2, n points per axis."""
    k = _axis(B, n)
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    a = np.asarray(symbol(k1, k2), dtype=complex)
    return float((2 * np.pi) ** 2 * np.sum(np.abs(sfft.ifft2(a))))


def estimate_cm_norm(
    symbol: Callable,
    box: tuple[float, float],
    shape: tuple[int, int],
    chunk: int = 4,
) -> float:
    """Estimate C(m) = ||iint m(xi,eta) e^{ix.xi} e^{iy.eta} deta dxi||_{L^1_{x,y}}.

    ``symbol(xi1, xi2, eta1, eta2)`` is sampled on [-B1, B1)^2 x [-B2, B2)^2
    with ``shape = (n1, n2)`` points per axis; the 4D inverse DFT gives the
    integral on the reciprocal grid and C = (2 pi)^4 sum |ifftn(m)|.
    This is an estimate: it converges only as the box and grid grow.
    """
    B1, B2 = box
    n1, n2 = shape
    total = n1**2 * n2**2
    if total > MAX_CM_POINTS:
        raise SizeError(f"4D grid of {total} points exceeds the limit {MAX_CM_POINTS}")
    a1 = _axis(B1, n1)
    a2 = _axis(B2, n2)
    e1, e2 = np.meshgrid(a2, a2, indexing="ij")
    arr = np.empty((n1, n1, n2, n2), dtype=complex)
    for i0 in range(0, n1, chunk):
        x1 = a1[i0 : i0 + chunk][:, None, None, None]
        x2 = a1[None, :, None, None]
        arr[i0 : i0 + x1.shape[0]] = symbol(x1, x2, e1[None, None], e2[None, None])
    if not np.all(np.isfinite(arr)):
        raise NumericError("symbol is not finite on the truncation box")
    out = sfft.ifftn(arr, axes=(0, 1, 2, 3), overwrite_x=True)
    return float((2 * np.pi) ** 4 * np.sum(np.abs(out)))


def dirichlet_l1(n: int, M: int) -> float:
    """(2 pi / n) sum_p |sum_{j<M} e^{2 pi i p j / n}| in closed form."""
    p = np.arange(1, n)
    vals = np.abs(np.sin(np.pi * p * M / n) / np.sin(np.pi * p / n))
    return float(2 * np.pi / n * (M + vals.sum()))


def _div_m(eta1, eta2, s1, s2):
    """Analytic div_sigma m with m = g/|g|^2, J = H(sigma+eta) - H(sigma)."""
    z1, z2 = s1 + eta1, s2 + eta2
    eta = np.stack(np.broadcast_arrays(eta1, eta2), axis=-1)
    sig = np.stack(np.broadcast_arrays(s1, s2), axis=-1)
    g = bracket_gradient_difference(eta, sig)
    g1, g2 = g[..., 0], g[..., 1]

    def hess(x1, x2):
        b = _jb(x1, x2)
        b3 = b**3
        return (1.0 + x2 * x2) / b3, -x1 * x2 / b3, (1.0 + x1 * x1) / b3

    h11a, h12a, h22a = hess(z1, z2)
    h11b, h12b, h22b = hess(s1, s2)
    j11, j12, j22 = h11a - h11b, h12a - h12b, h22a - h22b
    gg = g1 * g1 + g2 * g2
    gjg = g1 * g1 * j11 + 2 * g1 * g2 * j12 + g2 * g2 * j22
    return (j11 + j22) / gg - 2.0 * gjg / gg**2


def m1_symbol(L: float, N1: int, N2: int, h_rel: float = 1e-5) -> Callable:
    """m_1^{(L,N1,N2)}(eta, sigma) = div_s(m div_s m) chi_L(eta) rho_N1(eta+sigma) rho_N2(sigma).

    div_s(m div_s m) = (div m)^2 + m . grad(div m); div m is analytic and its
    gradient is a central difference with step h_rel (1 + |sigma|).
    """

    def sym(e1, e2, s1, s2):
        e1, e2, s1, s2 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (e1, e2, s1, s2)))
        cut = chi_dyadic(e1, e2, L) * rho_inhom(e1 + s1, e2 + s2, N1) * rho_inhom(s1, s2, N2)
        out = np.zeros(e1.shape)
        live = cut != 0
        if not live.any():
            return out
        E1, E2, S1, S2 = e1[live], e2[live], s1[live], s2[live]
        h = h_rel * (1.0 + np.hypot(S1, S2))
        dm = _div_m(E1, E2, S1, S2)
        gx = (_div_m(E1, E2, S1 + h, S2) - _div_m(E1, E2, S1 - h, S2)) / (2 * h)
        gy = (_div_m(E1, E2, S1, S2 + h) - _div_m(E1, E2, S1, S2 - h)) / (2 * h)
        m = resonance_multiplier_array(np.stack([E1, E2], -1), np.stack([S1, S2], -1))
        out[live] = (dm * dm + m[..., 0] * gx + m[..., 1] * gy) * cut[live]
        return out

    return sym
