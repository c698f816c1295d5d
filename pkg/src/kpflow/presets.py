"""Initial-data presets.  Every preset satisfies the zero-mode constraint
(mean-zero in x for each y) by construction."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .spectral import Field2D, FieldST, Grid2D


def rng_for(seed: int) -> np.random.Generator:
    """Counter-based generator keyed by an explicit 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def gaussian(
    grid: Grid2D,
    amplitude: float = 1.0,
    sigma_x: float = 2.0,
    sigma_y: float = 2.0,
    target_ep_norm: Optional[float] = None,
) -> Field2D:
    """u0 = A * dx[exp(-(x^2/sigma_x^2 + y^2/sigma_y^2))], automatically
    mean-zero in x.  When target_ep_norm is given the amplitude is rescaled
    so that ||u0||_{E cap P} matches it."""
    X = grid.x[:, None]
    Y = grid.y[None, :]
    envelope = np.exp(-(X**2 / sigma_x**2 + Y**2 / sigma_y**2))
    samples = amplitude * (-2.0 * X / sigma_x**2) * envelope
    f = Field2D.from_physical(grid, samples)
    if target_ep_norm is not None:
        from .norms import energy_space_norm

        e, p = energy_space_norm(f)
        if e + p == 0:
            raise ValueError("degenerate preset, cannot normalize")
        f = Field2D(grid, f.coeffs * (target_ep_norm / (e + p)))
    return f


def single_mode(grid: Grid2D, kx: int = 1, ky: int = 0, amplitude: float = 1.0) -> Field2D:
    """Real cosine mode cos(xi_kx x + mu_ky y) scaled by amplitude."""
    if kx == 0:
        raise ValueError("kx = 0 violates the zero-mode constraint")
    xi = 2.0 * np.pi * kx / grid.Lx
    mu = 2.0 * np.pi * ky / grid.Ly
    samples = amplitude * np.cos(xi * grid.x[:, None] + mu * grid.y[None, :])
    return Field2D.from_physical(grid, samples)


def random_band(
    grid: Grid2D,
    seed: int,
    kx_band: int = 5,
    ky_band: int = 5,
    amplitude: float = 1.0,
) -> Field2D:
    """Real random field supported on modes 0 < |k| <= kx_band,
    |l| <= ky_band.  The coefficient of a given integer mode does not
    depend on the grid size, so refining the grid keeps the same function.
    """
    rng = rng_for(seed)
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    draws = {}
    for k in range(1, kx_band + 1):
        for l in range(-ky_band, ky_band + 1):
            re, im = rng.standard_normal(2)
            draws[(k, l)] = re + 1j * im
    for (k, l), val in draws.items():
        coeffs[k % grid.Nx, l % grid.Ny] = val
        coeffs[(-k) % grid.Nx, (-l) % grid.Ny] = np.conj(val)
    scale = amplitude * np.sqrt(grid.Lx * grid.Ly) / max(len(draws), 1)
    return Field2D(grid, coeffs * scale)


def random_band_complex(
    grid: Grid2D,
    seed: int,
    kx_band: int = 5,
    ky_band: int = 5,
    amplitude: float = 1.0,
) -> Field2D:
    """Complex random band-limited field (no conjugate symmetry), for norm
    and estimate sampling."""
    rng = rng_for(seed)
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    n = 0
    for k in range(-kx_band, kx_band + 1):
        if k == 0:
            continue
        for l in range(-ky_band, ky_band + 1):
            re, im = rng.standard_normal(2)
            coeffs[k % grid.Nx, l % grid.Ny] = re + 1j * im
            n += 1
    return Field2D(grid, coeffs * amplitude * np.sqrt(grid.Lx * grid.Ly) / n)


def random_band_st(
    grid: Grid2D,
    Lt: float,
    Nt: int,
    seed: int,
    kx_band: int = 4,
    ky_band: int = 4,
    kt_band: int = 4,
    amplitude: float = 1.0,
    localized: bool = False,
) -> FieldST:
    """Complex random space-time field band-limited in all three axes.

    With ``localized`` the field is damped by a fixed Gaussian envelope in
    y and t (centered, width one sixth of the box), so that coordinate
    multiplication y*f / t*f stays continuous across the periodic seam;
    required whenever the field feeds a Y-norm."""
    rng = rng_for(seed)
    coeffs = np.zeros((grid.Nx, grid.Ny, Nt), dtype=np.complex128)
    n = 0
    for k in range(-kx_band, kx_band + 1):
        if k == 0:
            continue
        for l in range(-ky_band, ky_band + 1):
            for r in range(-kt_band, kt_band + 1):
                re, im = rng.standard_normal(2)
                coeffs[k % grid.Nx, l % grid.Ny, r % Nt] = re + 1j * im
                n += 1
    scale = amplitude * np.sqrt(grid.Lx * grid.Ly * Lt) / n
    F = FieldST(grid, Lt, Nt, coeffs * scale)
    if not localized:
        return F
    phys = F.to_physical()
    y0 = grid.Ly / 6.0
    t0 = Lt / 6.0
    t = -Lt / 2 + (Lt / Nt) * np.arange(Nt)
    env = np.exp(-(grid.y[None, :, None] / y0) ** 2 - (t[None, None, :] / t0) ** 2)
    return FieldST.from_physical(grid, Lt, phys * env)
