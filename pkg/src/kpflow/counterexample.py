"""Sharpness counterexample for the bilinear estimate: a pair of
frequency-box functions at scales (alpha, alpha^2) and (N, alpha^2) near
the dispersion surface, alpha = N^{-1/2}, whose interaction pushes
||dx(uv)||_{X_{1,-1/2}} up like N^{1/4} while the right side grows only
through an N^eps factor.  Fitting log-log slopes over an N-sweep exhibits
failure of the estimate for eps < 1/4.

The boxes live at frequencies O(N^3) in tau, so no global space-time grid
is used: each factor is a closed-form smoothed indicator sampled on a
small local lattice, and the convolution is a direct sum over the
low-frequency box with the tau axis collapsed through a precomputed 1D
band cross-correlation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .spectral import (
    KP1,
    DispersionParams,
    modulation_shell_index,
    theta_shell_index,
    weight_w,
)

TWO_PI_CUBED = (2.0 * np.pi) ** 3


def smoothed_indicator(x: np.ndarray, a: float, b: float, w: float) -> np.ndarray:
    """Indicator of [a, b] with cosine ramps of width w inside the interval."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = (x >= a) & (x <= b)
    out[inside] = 1.0
    lo = inside & (x < a + w)
    out[lo] = 0.5 * (1.0 - np.cos(np.pi * (x[lo] - a) / w))
    hi = inside & (x > b - w)
    out[hi] = 0.5 * (1.0 - np.cos(np.pi * (b - x[hi]) / w))
    return out


def smoothed_indicator_deriv(x: np.ndarray, a: float, b: float, w: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    lo = (x >= a) & (x < a + w)
    out[lo] = 0.5 * np.pi / w * np.sin(np.pi * (x[lo] - a) / w)
    hi = (x > b - w) & (x <= b)
    out[hi] = -0.5 * np.pi / w * np.sin(np.pi * (b - x[hi]) / w)
    return out


def _omega(xi, mu, params: DispersionParams) -> np.ndarray:
    return xi**3 - params.gamma * mu**2 / xi


def _dmu_omega(xi, mu, params: DispersionParams) -> np.ndarray:
    return -2.0 * params.gamma * mu / xi


@dataclass(frozen=True)
class HatBox:
    """Closed-form smoothed indicator of a frequency box crossed with the
    modulation band |tau - omega(xi, mu)| <= band, sampled on a local
    lattice of cell centers.

    Taper widths are fixed fractions of the sides (one eighth per spatial
    axis, a quarter band in tau), so the continuum function does not
    depend on the lattice resolution; at the minimum 8-cells-per-side
    resolution the spatial taper is exactly one cell."""

    xi0: float
    xi1: float
    mu0: float
    mu1: float
    amplitude: float
    n_xi: int
    n_mu: int
    n_tau: int
    band: float = 1.0
    params: DispersionParams = KP1

    def __post_init__(self) -> None:
        set_ = object.__setattr__
        d_xi = (self.xi1 - self.xi0) / self.n_xi
        d_mu = (self.mu1 - self.mu0) / self.n_mu
        set_(self, "d_xi", d_xi)
        set_(self, "d_mu", d_mu)
        set_(self, "taper_xi", (self.xi1 - self.xi0) / 8.0)
        set_(self, "taper_mu", (self.mu1 - self.mu0) / 8.0)
        xi = self.xi0 + d_xi * (np.arange(self.n_xi) + 0.5)
        mu = self.mu0 + d_mu * (np.arange(self.n_mu) + 0.5)
        om = _omega(xi[:, None], mu[None, :], self.params)
        lo = float(om.min()) - self.band
        hi = float(om.max()) + self.band
        d_tau = (hi - lo) / self.n_tau
        set_(self, "d_tau", d_tau)
        set_(self, "taper_tau", self.band / 4.0)
        tau = lo + d_tau * (np.arange(self.n_tau) + 0.5)
        set_(self, "xi", xi)
        set_(self, "mu", mu)
        set_(self, "tau", tau)
        set_(self, "cell_volume", d_xi * d_mu * d_tau)

    # closed-form factors -------------------------------------------------
    def fx(self, xi) -> np.ndarray:
        return smoothed_indicator(xi, self.xi0, self.xi1, self.taper_xi)

    def fmu(self, mu) -> np.ndarray:
        return smoothed_indicator(mu, self.mu0, self.mu1, self.taper_mu)

    def fband(self, s) -> np.ndarray:
        return smoothed_indicator(s, -self.band, self.band, self.taper_tau)

    def values(self) -> np.ndarray:
        """Samples of the hat function on the lattice."""
        om = _omega(self.xi[:, None, None], self.mu[None, :, None], self.params)
        s = self.tau[None, None, :] - om
        return (
            self.amplitude
            * self.fx(self.xi)[:, None, None]
            * self.fmu(self.mu)[None, :, None]
            * self.fband(s)
        )

    def dmu_values(self) -> np.ndarray:
        """Samples of d/dmu of the hat function (both the mu-edge and the
        moving modulation-band terms)."""
        XI = self.xi[:, None, None]
        MU = self.mu[None, :, None]
        om = _omega(XI, MU, self.params)
        s = self.tau[None, None, :] - om
        gx = self.fx(self.xi)[:, None, None]
        gm = self.fmu(self.mu)[None, :, None]
        dgm = smoothed_indicator_deriv(self.mu, self.mu0, self.mu1, self.taper_mu)[None, :, None]
        b = self.fband(s)
        db = smoothed_indicator_deriv(s, -self.band, self.band, self.taper_tau)
        return self.amplitude * gx * (dgm * b + gm * db * (-_dmu_omega(XI, MU, self.params)))

    def dtau_values(self) -> np.ndarray:
        om = _omega(self.xi[:, None, None], self.mu[None, :, None], self.params)
        s = self.tau[None, None, :] - om
        db = smoothed_indicator_deriv(s, -self.band, self.band, self.taper_tau)
        return (
            self.amplitude
            * self.fx(self.xi)[:, None, None]
            * self.fmu(self.mu)[None, :, None]
            * db
        )

    def l2_norm(self) -> float:
        """Physical-normalization L2 norm (hat-space integral / (2 pi)^3)."""
        v = self.values()
        return float(np.sqrt(np.sum(np.abs(v) ** 2) * self.cell_volume / TWO_PI_CUBED))


@dataclass(frozen=True)
class CounterexamplePair:
    N: float
    alpha: float
    u: HatBox  # low-frequency factor on E1
    v: HatBox  # high-frequency factor on E2
    params: DispersionParams = KP1


def build_pair(
    N: float,
    resolution: Dict[str, int] | None = None,
    params: DispersionParams = KP1,
) -> CounterexamplePair:
    """Construct the box pair

        E1: xi in [alpha/2, alpha],  mu in [-6 alpha^2, 6 alpha^2]
        E2: xi in [N, N + alpha],    mu in [sqrt(3) N^2, sqrt(3) N^2 + alpha^2]

    both within modulation band 1, with amplitudes alpha^{-3/2} and
    N^{-1} alpha^{-3/2}, alpha = N^{-1/2} exactly."""
    if N < 16:
        raise ValueError("N must be at least 16")
    res = {"n_xi": 12, "n_mu": 16, "n_tau": 48}
    if resolution:
        res.update(resolution)
    if min(res.values()) < 8:
        raise ValueError("resolution must put at least 8 cells on each box side")
    alpha = N ** (-0.5)
    u = HatBox(
        xi0=alpha / 2.0,
        xi1=alpha,
        mu0=-6.0 * alpha**2,
        mu1=6.0 * alpha**2,
        amplitude=alpha ** (-1.5),
        n_xi=res["n_xi"],
        n_mu=res["n_mu"],
        n_tau=res["n_tau"],
        params=params,
    )
    v = HatBox(
        xi0=N,
        xi1=N + alpha,
        mu0=np.sqrt(3.0) * N**2,
        mu1=np.sqrt(3.0) * N**2 + alpha**2,
        amplitude=N ** (-1.0) * alpha ** (-1.5),
        n_xi=res["n_xi"],
        n_mu=res["n_mu"],
        n_tau=res["n_tau"],
        params=params,
    )
    return CounterexamplePair(N=float(N), alpha=alpha, u=u, v=v, params=params)


# ---------------------------------------------------------------------------
# modulation-space norms on a local lattice


def lattice_xsb_norm(
    vals: np.ndarray,
    xi: np.ndarray,
    mu: np.ndarray,
    tau: np.ndarray,
    cell_volume: float,
    s: float,
    b: float,
    params: DispersionParams = KP1,
    c: float = 0.5,
) -> float:
    """X_{s,b} norm of hat-side samples on a rectangular lattice: ell^1 over
    (j, m) / (j, n) shells of 2^{jb}-weighted L2 masses, with the cell
    measure divided by (2 pi)^3 to match the physical normalization."""
    XI = xi[:, None, None]
    MU = mu[None, :, None]
    om = _omega(XI, MU, params)
    mod = tau[None, None, :] - om
    j_idx = modulation_shell_index(mod)
    w = weight_w(XI, MU)
    mass = np.abs(vals) ** 2 * (w ** (2.0 * s)) * (cell_volume / TWO_PI_CUBED)
    chi1 = np.abs(XI) >= c * np.abs(MU) / np.abs(XI)
    chi1 = np.broadcast_to(chi1, mass.shape)
    m_idx = np.broadcast_to(theta_shell_index(xi)[:, None, None], mass.shape)
    n_idx = np.broadcast_to(theta_shell_index(mu)[None, :, None], mass.shape)

    total = 0.0
    for region, sp_idx in ((chi1, m_idx), (~chi1, n_idx)):
        msk = region & (mass > 0)
        if not np.any(msk):
            continue
        nsp = int(sp_idx[msk].max()) + 1
        combined = j_idx[msk] * nsp + sp_idx[msk]
        sums = np.bincount(combined, weights=mass[msk])
        nz = np.flatnonzero(sums)
        jvals = nz // nsp
        total += float(np.sum(2.0 ** (jvals * b) * np.sqrt(sums[nz])))
    return total


def lattice_y_norm(
    box: HatBox, s: float, r: float, b: float, params: DispersionParams = KP1
) -> Tuple[float, float]:
    """(t-part, y-part) of the Y_{s,r,b} norm of a HatBox: X_{s,b} of
    i d/dtau and X_{r,b} of i d/dmu of the hat function."""
    args = (box.xi, box.mu, box.tau, box.cell_volume)
    t_part = lattice_xsb_norm(box.dtau_values(), *args, s, b, params)
    y_part = lattice_xsb_norm(box.dmu_values(), *args, r, b, params)
    return t_part, y_part


# ---------------------------------------------------------------------------
# convolution by direct summation over the low-frequency box


def _band_cross_correlation(u: HatBox, v: HatBox, nfine: int = 4096):
    """K(sigma) = integral b_u(a) b_v(sigma - a) da for the two 1D band
    profiles; returned as (grid, values) for linear interpolation."""
    a = np.linspace(-u.band, u.band, nfine)
    da = a[1] - a[0]
    bu = u.fband(a)
    m = int(np.ceil(2.0 * v.band / da)) + 1
    bgrid = np.linspace(-v.band, v.band, m)
    bv = v.fband(bgrid)
    full = np.convolve(bu, bv) * da
    sig0 = a[0] + bgrid[0]
    sigma = sig0 + da * np.arange(full.size)
    return sigma, full


def convolve_pair(
    pair: CounterexamplePair,
    out_resolution: Dict[str, int] | None = None,
    quad_resolution: Dict[str, int] | None = None,
):
    """(u_hat * v_hat)(zeta) on a lattice covering the sumset E1 + E2.

    Direct summation over a dedicated quadrature lattice on the
    high-frequency box E2 (whose mu side is the narrow alpha^2 one, so
    resolving both factors' tapers stays cheap), with the tau integral
    collapsed through the precomputed 1D band cross-correlation."""
    u, v = pair.u, pair.v
    res = {"n_xi": 2 * u.n_xi, "n_mu": 2 * u.n_mu, "n_tau": 64}
    if out_resolution:
        res.update(out_resolution)
    quad = {"n_xi": 48, "n_mu": 24}
    if quad_resolution:
        quad.update(quad_resolution)

    xi_lo, xi_hi = u.xi0 + v.xi0, u.xi1 + v.xi1
    mu_lo, mu_hi = u.mu0 + v.mu0, u.mu1 + v.mu1
    om_u = _omega(u.xi[:, None], u.mu[None, :], pair.params)
    om_v = _omega(v.xi[:, None], v.mu[None, :], pair.params)
    tau_lo = float(om_u.min() + om_v.min()) - u.band - v.band
    tau_hi = float(om_u.max() + om_v.max()) + u.band + v.band

    nxo, nmo, nto = res["n_xi"], res["n_mu"], res["n_tau"]
    d_xi = (xi_hi - xi_lo) / nxo
    d_mu = (mu_hi - mu_lo) / nmo
    d_tau = (tau_hi - tau_lo) / nto
    xi_o = xi_lo + d_xi * (np.arange(nxo) + 0.5)
    mu_o = mu_lo + d_mu * (np.arange(nmo) + 0.5)
    tau_o = tau_lo + d_tau * (np.arange(nto) + 0.5)

    # quadrature lattice over E2 (cell centers)
    nqx, nqm = quad["n_xi"], quad["n_mu"]
    q_dxi = (v.xi1 - v.xi0) / nqx
    q_dmu = (v.mu1 - v.mu0) / nqm
    q_xi = v.xi0 + q_dxi * (np.arange(nqx) + 0.5)
    q_mu = v.mu0 + q_dmu * (np.arange(nqm) + 0.5)

    sigma, K = _band_cross_correlation(u, v)
    gxv = v.fx(q_xi)
    gmv = v.fmu(q_mu)
    out = np.zeros((nxo, nmo, nto))
    amp = u.amplitude * v.amplitude * q_dxi * q_dmu
    for i, cxi in enumerate(q_xi):
        if gxv[i] == 0.0:
            continue
        gx1 = u.fx(xi_o - cxi)  # (nxo,)
        rows = np.flatnonzero(gx1)  # u's xi-support keeps xi_o - cxi > 0
        if rows.size == 0:
            continue
        xi_shift = (xi_o[rows] - cxi)[:, None]
        for jm, cmu in enumerate(q_mu):
            wgt = gxv[i] * gmv[jm]
            if wgt == 0.0:
                continue
            gm1 = u.fmu(mu_o - cmu)  # (nmo,)
            if not np.any(gm1):
                continue
            om2 = _omega(cxi, cmu, pair.params)
            om1 = _omega(xi_shift, (mu_o - cmu)[None, :], pair.params)
            arg = tau_o[None, None, :] - om2 - om1[:, :, None]
            kval = np.interp(arg.ravel(), sigma, K, left=0.0, right=0.0).reshape(arg.shape)
            out[rows] += (amp * wgt) * (
                gx1[rows, None, None] * gm1[None, :, None]
            ) * kval
    cell = d_xi * d_mu * d_tau
    return out, xi_o, mu_o, tau_o, cell


@dataclass(frozen=True)
class PairComponents:
    """Epsilon-independent measurements for one N: the left side and the
    X/Y norms of both factors, plus support-geometry probes."""

    N: float
    lhs: float
    x_u: float
    x_v: float
    y_u: float
    y_v: float
    dmu_y_u: float  # the d/dmu part of ||u||_{Y_{1,0,1/2}} alone
    dmu_y_v: float
    min_support_modulation: float
    support_contains_target: bool

    def rhs(self, eps: float) -> float:
        return self.x_u * (self.x_v + self.x_v ** (1.0 - eps) * self.y_v**eps) + (
            self.x_v * (self.x_u + self.x_u ** (1.0 - eps) * self.y_u**eps)
        )

    def ratio_indicator(self, eps: float) -> float:
        r = self.rhs(eps)
        return self.lhs / r if r > 0 else 0.0


@dataclass(frozen=True)
class SideEvaluation:
    N: float
    eps: float
    lhs: float
    x_u: float
    x_v: float
    y_u: float
    y_v: float
    ratio_indicator: float
    min_support_modulation: float
    support_contains_target: bool


def evaluate_components(
    pair: CounterexamplePair,
    out_resolution: Dict[str, int] | None = None,
) -> PairComponents:
    """||dx(uv)||_{X_{1,-1/2}} via the localized convolution, together with
    the X_{1,1/2} and Y_{1,0,1/2} norms of both factors."""
    u, v = pair.u, pair.v
    conv, xi_o, mu_o, tau_o, cell = convolve_pair(pair, out_resolution)
    lhs_vals = np.abs(xi_o)[:, None, None] * conv / TWO_PI_CUBED
    lhs = lattice_xsb_norm(lhs_vals, xi_o, mu_o, tau_o, cell, s=1.0, b=-0.5, params=pair.params)

    x_u = lattice_xsb_norm(u.values(), u.xi, u.mu, u.tau, u.cell_volume, 1.0, 0.5, pair.params)
    x_v = lattice_xsb_norm(v.values(), v.xi, v.mu, v.tau, v.cell_volume, 1.0, 0.5, pair.params)
    tu, yu = lattice_y_norm(u, 1.0, 0.0, 0.5, pair.params)
    tv, yv = lattice_y_norm(v, 1.0, 0.0, 0.5, pair.params)

    # support probes: the sumset reaches modulation O(1), and the marked
    # near-surface point lies inside the computed support box
    om_o = _omega(xi_o[:, None, None], mu_o[None, :, None], pair.params)
    mod = np.abs(tau_o[None, None, :] - om_o)
    support = np.abs(conv) > 1e-8 * np.max(np.abs(conv))
    min_mod = float(mod[support].min()) if np.any(support) else np.inf
    N, alpha = pair.N, pair.alpha
    target = (N + alpha, np.sqrt(3.0) * N**2 + alpha**2, 4.0 * N**3)
    contains = bool(
        xi_o[0] <= target[0] <= xi_o[-1]
        and mu_o[0] <= target[1] <= mu_o[-1]
        and tau_o[0] <= target[2] <= tau_o[-1]
    )
    return PairComponents(
        N=pair.N,
        lhs=lhs,
        x_u=x_u,
        x_v=x_v,
        y_u=tu + yu,
        y_v=tv + yv,
        dmu_y_u=yu,
        dmu_y_v=yv,
        min_support_modulation=min_mod,
        support_contains_target=contains,
    )


def evaluate_sides(
    pair: CounterexamplePair,
    eps: float,
    out_resolution: Dict[str, int] | None = None,
) -> SideEvaluation:
    """Components plus the indicator

        ratio = lhs / [x_u (x_v + x_v^{1-eps} y_v^eps)
                       + x_v (x_u + x_u^{1-eps} y_u^eps)].
    """
    c = evaluate_components(pair, out_resolution)
    return SideEvaluation(
        N=c.N,
        eps=eps,
        lhs=c.lhs,
        x_u=c.x_u,
        x_v=c.x_v,
        y_u=c.y_u,
        y_v=c.y_v,
        ratio_indicator=c.ratio_indicator(eps),
        min_support_modulation=c.min_support_modulation,
        support_contains_target=c.support_contains_target,
    )


def sweep_components(
    N_values: Sequence[float],
    resolution: Dict[str, int] | None = None,
    out_resolution: Dict[str, int] | None = None,
    params: DispersionParams = KP1,
) -> List[PairComponents]:
    return [
        evaluate_components(build_pair(N, resolution, params), out_resolution)
        for N in N_values
    ]


@dataclass(frozen=True)
class GrowthFit:
    eps: float
    slope: float
    intercept: float
    residual: float
    residual_flag: bool
    evaluations: Tuple[SideEvaluation, ...]


def growth_fit(
    N_values: Sequence[float],
    eps: float,
    resolution: Dict[str, int] | None = None,
    out_resolution: Dict[str, int] | None = None,
    params: DispersionParams = KP1,
    residual_threshold: float = 0.2,
    components: Sequence[PairComponents] | None = None,
) -> GrowthFit:
    """Least-squares slope of log(ratio_indicator) against log(N) over a
    geometric N-sweep; a large fit residual is flagged in the result, not
    fatal."""
    if len(N_values) < 4:
        raise ValueError("need at least 4 values of N")
    if components is None:
        components = sweep_components(N_values, resolution, out_resolution, params)
    evals = [
        SideEvaluation(
            N=c.N, eps=eps, lhs=c.lhs, x_u=c.x_u, x_v=c.x_v, y_u=c.y_u, y_v=c.y_v,
            ratio_indicator=c.ratio_indicator(eps),
            min_support_modulation=c.min_support_modulation,
            support_contains_target=c.support_contains_target,
        )
        for c in components
    ]
    x = np.log(np.asarray([e.N for e in evals]))
    y = np.log(np.asarray([e.ratio_indicator for e in evals]))
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return GrowthFit(
        eps=eps,
        slope=float(slope),
        intercept=float(intercept),
        residual=resid,
        residual_flag=resid > residual_threshold,
        evaluations=tuple(evals),
    )


def component_slopes(evals: Sequence) -> Dict[str, float]:
    """Fitted log-log slopes of lhs and of each rhs component against N."""
    x = np.log(np.asarray([e.N for e in evals]))
    out = {}
    for name in ("lhs", "x_u", "x_v", "y_u", "y_v"):
        y = np.log(np.asarray([getattr(e, name) for e in evals]))
        out[name] = float(np.polyfit(x, y, 1)[0])
    return out


def asymptotic_slope_fit(
    components: Sequence[PairComponents], eps: float, window: int = 4
) -> Tuple[float, List[float]]:
    """Growth exponent of the indicator in the N -> infinity limit.

    Finite-N fits carry an O(N^{-1/4}) correction: the denominator is a sum
    of N-flat terms and the eps-bearing term that grows like N^{eps}, and
    near the critical eps their crossover bends the log-log line.  Fitting
    the slope on sliding windows of a long geometric ladder and
    extrapolating those window slopes linearly in (window midpoint)^{-1/4}
    estimates the limiting exponent.  Returns (extrapolated slope, window
    slopes)."""
    if len(components) < window + 1:
        raise ValueError("need more ladder points than the window size")
    logN = np.log(np.asarray([c.N for c in components]))
    logr = np.log(np.asarray([c.ratio_indicator(eps) for c in components]))
    slopes, mids = [], []
    for i in range(len(components) - window + 1):
        slopes.append(float(np.polyfit(logN[i : i + window], logr[i : i + window], 1)[0]))
        mids.append(np.exp(logN[i : i + window].mean()))
    x = np.asarray(mids) ** -0.25
    extrapolated = float(np.polyfit(x, np.asarray(slopes), 1)[1])
    return extrapolated, slopes
