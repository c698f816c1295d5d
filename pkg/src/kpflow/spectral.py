"""Spectral substrate: periodic grids, Fourier fields, dispersion symbols,
anisotropic weights, dyadic shells and frequency-region projections.

Conventions
-----------
Coefficients store the continuous-style transform

    f_hat(xi, mu) = integral f(x, y) exp(-i(x xi + y mu)) dx dy

approximated on a centered periodic box x in [-Lx/2, Lx/2), y in
[-Ly/2, Ly/2).  The quadrature factor Lx*Ly/(Nx*Ny) is baked into the
forward transform so that the coefficient-space norm

    ||f||^2 = sum |coeff|^2 / (Lx Ly)

equals the physical L2 norm exactly (discrete Parseval).  Every operation
here is a pure function of immutable inputs; arrays are frozen after
construction.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np

MAGIC = b"KPF2"
HEADER_BYTES = 64


def _wavenumbers(n: int, length: float) -> np.ndarray:
    """FFT-ordered table 2*pi*k/length, k in [-n/2, n/2)."""
    return 2.0 * np.pi * np.fft.fftfreq(n, d=length / n)


def _half_shift_phase(n: int) -> np.ndarray:
    """exp(+i xi_k L/2) = (-1)^k, exact for integer mode index k."""
    k = np.rint(np.fft.fftfreq(n) * n).astype(np.int64)
    return np.where(k % 2 == 0, 1.0, -1.0)


@dataclass(frozen=True)
class DispersionParams:
    """Physical constants of the KP dispersion: gamma < 0 selects KP-I,
    gamma > 0 selects KP-II; |beta| is fixed to 1."""

    gamma: float = -1.0
    beta: float = 1.0

    def __post_init__(self) -> None:
        if self.gamma == 0.0:
            raise ValueError("gamma must be nonzero")
        if abs(abs(self.beta) - 1.0) > 1e-14:
            raise ValueError("|beta| must equal 1")


KP1 = DispersionParams(gamma=-1.0, beta=1.0)
KP2 = DispersionParams(gamma=+1.0, beta=1.0)


class ZeroModePolicy(Enum):
    ZERO_OUT = "zero_out"


@dataclass(frozen=True)
class Grid2D:
    """Periodic spatial grid with precomputed wavenumber tables.

    The xi = 0 column is the zero-mode column: by the standard KP
    constraint (mean-zero in x) every field carries no mass there, which
    is what makes 1/xi multipliers well defined.
    """

    Lx: float
    Ly: float
    Nx: int
    Ny: int
    zero_mode_policy: ZeroModePolicy = ZeroModePolicy.ZERO_OUT

    def __post_init__(self) -> None:
        if self.Lx <= 0 or self.Ly <= 0:
            raise ValueError("box sides must be positive")
        if self.Nx % 2 or self.Ny % 2 or self.Nx <= 0 or self.Ny <= 0:
            raise ValueError("mode counts must be even and positive")

        set_ = object.__setattr__
        set_(self, "dx", self.Lx / self.Nx)
        set_(self, "dy", self.Ly / self.Ny)
        set_(self, "xi", _freeze(_wavenumbers(self.Nx, self.Lx)))
        set_(self, "mu", _freeze(_wavenumbers(self.Ny, self.Ly)))
        set_(self, "x", _freeze(-self.Lx / 2 + self.dx * np.arange(self.Nx)))
        set_(self, "y", _freeze(-self.Ly / 2 + self.dy * np.arange(self.Ny)))
        set_(self, "phase_x", _freeze(_half_shift_phase(self.Nx)))
        set_(self, "phase_y", _freeze(_half_shift_phase(self.Ny)))
        set_(self, "mode_weight", 1.0 / (self.Lx * self.Ly))

        XI = self.xi[:, None]
        MU = self.mu[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(XI != 0.0, np.abs(MU) / np.abs(XI), np.inf)
            inv_xi = np.where(XI != 0.0, 1.0 / XI, 0.0)
        weight = 1.0 + np.abs(XI) + ratio
        weight[0, :] = 1.0  # zero-mode column: weight unused, defined as 1
        set_(self, "mu_over_xi_abs", _freeze(np.broadcast_to(ratio, self.shape).copy()))
        set_(self, "inv_xi", _freeze(np.broadcast_to(inv_xi, self.shape).copy()))
        set_(self, "weight", _freeze(weight))

        # 2/3-rule mask for quadratic nonlinearities (also kills Nyquist)
        kx = np.rint(np.fft.fftfreq(self.Nx) * self.Nx).astype(np.int64)
        ky = np.rint(np.fft.fftfreq(self.Ny) * self.Ny).astype(np.int64)
        dealias = (np.abs(kx)[:, None] < self.Nx / 3) & (np.abs(ky)[None, :] < self.Ny / 3)
        set_(self, "dealias_mask", _freeze(dealias))

        set_(self, "m_of_xi", _freeze(theta_shell_index(self.xi)))
        set_(self, "n_of_mu", _freeze(theta_shell_index(self.mu)))

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.Nx, self.Ny)

    def xi_sorted(self) -> np.ndarray:
        return np.fft.fftshift(self.xi)

    def mu_sorted(self) -> np.ndarray:
        return np.fft.fftshift(self.mu)


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Field2D:
    """A function of (x, y) held as complex Fourier coefficients."""

    grid: Grid2D
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        c = np.array(self.coeffs, dtype=np.complex128, order="C", copy=True)
        if c.shape != self.grid.shape:
            raise ValueError(f"coefficient shape {c.shape} != grid {self.grid.shape}")
        if self.grid.zero_mode_policy is ZeroModePolicy.ZERO_OUT:
            c[0, :] = 0.0
        object.__setattr__(self, "coeffs", _freeze(c))

    @classmethod
    def from_physical(cls, grid: Grid2D, samples: np.ndarray) -> "Field2D":
        return cls(grid, forward_transform(grid, samples))

    @classmethod
    def zeros(cls, grid: Grid2D) -> "Field2D":
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    def to_physical(self) -> np.ndarray:
        return inverse_transform(self.grid, self.coeffs)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2) * self.grid.mode_weight))

    def with_coeffs(self, coeffs: np.ndarray) -> "Field2D":
        return Field2D(self.grid, coeffs)

    def is_conjugate_symmetric(self, tol: float = 1e-12) -> bool:
        """True when the field represents a real-valued u(x, y)."""
        c = self.coeffs
        mirrored = np.conj(c[np.ix_(_neg_index(self.grid.Nx), _neg_index(self.grid.Ny))])
        scale = np.max(np.abs(c)) or 1.0
        return bool(np.max(np.abs(c - mirrored)) <= tol * scale)


def _neg_index(n: int) -> np.ndarray:
    return (-np.arange(n)) % n


def forward_transform(grid: Grid2D, samples: np.ndarray) -> np.ndarray:
    ph = grid.phase_x[:, None] * grid.phase_y[None, :]
    return np.fft.fft2(samples) * ph * (grid.dx * grid.dy)


def inverse_transform(grid: Grid2D, coeffs: np.ndarray) -> np.ndarray:
    ph = grid.phase_x[:, None] * grid.phase_y[None, :]
    return np.fft.ifft2(coeffs * ph) / (grid.dx * grid.dy)


# ---------------------------------------------------------------------------
# dispersion symbol and the bilinear resonance identity


def dispersion_symbol(xi, mu, params: DispersionParams = KP1):
    """omega(xi, mu) = xi^3 - gamma mu^2 / xi  (for gamma = -1 this is
    xi^3 + mu^2/xi)."""
    xi = np.asarray(xi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if np.any(xi == 0.0):
        raise ZeroDivisionError("dispersion symbol undefined at xi = 0")
    out = xi**3 - params.gamma * mu**2 / xi
    return float(out) if out.ndim == 0 else out


def symbol_gradient_norm(xi, mu, params: DispersionParams = KP1):
    """Euclidean norm of grad omega = (3 xi^2 + gamma mu^2/xi^2, -2 gamma mu/xi)."""
    xi = np.asarray(xi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if np.any(xi == 0.0):
        raise ZeroDivisionError("symbol gradient undefined at xi = 0")
    gx = 3.0 * xi**2 + params.gamma * mu**2 / xi**2
    gy = -2.0 * params.gamma * mu / xi
    out = np.hypot(gx, gy)
    return float(out) if out.ndim == 0 else out


def bilinear_resonance(k1, k2, params: DispersionParams = KP1):
    """Resonance function of two interacting wavenumbers,

        xi1 xi2 / (xi1 + xi2) * (3 (xi1+xi2)^2 + gamma (mu1/xi1 - mu2/xi2)^2),

    identically equal to omega(k1 + k2) - omega(k1) - omega(k2)."""
    xi1, mu1 = (np.asarray(v, dtype=float) for v in k1)
    xi2, mu2 = (np.asarray(v, dtype=float) for v in k2)
    if np.any(xi1 == 0.0) or np.any(xi2 == 0.0) or np.any(xi1 + xi2 == 0.0):
        raise ZeroDivisionError("resonance undefined when xi1, xi2 or xi1+xi2 vanish")
    out = (xi1 * xi2 / (xi1 + xi2)) * (
        3.0 * (xi1 + xi2) ** 2 + params.gamma * (mu1 / xi1 - mu2 / xi2) ** 2
    )
    return float(out) if out.ndim == 0 else out


def weight_w(xi, mu):
    """Anisotropic weight w(xi, mu) = 1 + |xi| + |mu|/|xi|; the zero-mode
    column carries no mass so the weight there is defined as 1."""
    xi = np.asarray(xi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(xi != 0.0, np.abs(mu) / np.abs(xi), 0.0)
    out = np.where(xi != 0.0, 1.0 + np.abs(xi) + ratio, 1.0)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# dyadic shells

# theta shells tile (0, inf) as (2^{m-1}, 2^m] with theta_0 = [0, 1]; the
# half-open convention makes the family an exact partition on a grid whose
# wavenumbers can land on powers of two.


def theta_shell_index(s) -> np.ndarray:
    """Shell index m with |s| in (2^{m-1}, 2^m], m = 0 for |s| <= 1."""
    a = np.abs(np.asarray(s, dtype=float))
    idx = np.zeros(a.shape, dtype=np.int64)
    big = a > 1.0
    if np.any(big):
        idx[big] = np.ceil(np.log2(a[big]) - 1e-12).astype(np.int64)
    return idx


def modulation_shell_index(s) -> np.ndarray:
    """Shell index j with 2^{j-1} <= |s| < 2^j, j = 0 for |s| < 1."""
    a = np.abs(np.asarray(s, dtype=float))
    idx = np.zeros(a.shape, dtype=np.int64)
    big = a >= 1.0
    if np.any(big):
        idx[big] = np.floor(np.log2(a[big]) + 1e-12).astype(np.int64) + 1
    return idx


def dyadic_shell_mask(f: Field2D, axis: str, m: int) -> Field2D:
    """Zero all coefficients outside the dyadic shell theta_m along one axis."""
    if m < 0:
        raise ValueError("shell index must be nonnegative")
    if axis == "xi":
        keep = f.grid.m_of_xi == m
        out = np.where(keep[:, None], f.coeffs, 0.0)
    elif axis == "mu":
        keep = f.grid.n_of_mu == m
        out = np.where(keep[None, :], f.coeffs, 0.0)
    else:
        raise ValueError("axis must be 'xi' or 'mu'")
    return Field2D(f.grid, out)


# ---------------------------------------------------------------------------
# frequency-region masks


class RegionKind(Enum):
    CHI1 = "chi1"
    CHI2 = "chi2"
    PPLUS = "pplus"
    PMINUS = "pminus"
    PZERO = "pzero"


@dataclass(frozen=True)
class RegionMask:
    """Indicator of one of the anisotropic frequency regions.

    CHI1/CHI2 split at |xi| >= c |mu|/|xi| (default c = 1/2); the
    P+/P-/P0 family uses the band constants (c1, c2) so that P0 keeps
    c1 |mu|/|xi| <= |xi| <= c2 |mu|/|xi|.  Modes on the xi = 0 column are
    assigned to CHI2 and to none of P+/P-/P0 (they carry no mass).
    """

    kind: RegionKind
    c: float = 0.5
    band: Tuple[float, float] = (0.125, 8.0)

    def __post_init__(self) -> None:
        if self.c <= 0:
            raise ValueError("threshold constant must be positive")
        if not (0 < self.band[0] < self.band[1]):
            raise ValueError("band constants must satisfy 0 < c1 < c2")

    def indicator(self, grid: Grid2D) -> np.ndarray:
        absxi = np.abs(grid.xi)[:, None]
        ratio = grid.mu_over_xi_abs
        nonzero = grid.xi[:, None] != 0.0
        if self.kind is RegionKind.CHI1:
            return nonzero & (absxi >= self.c * ratio)
        if self.kind is RegionKind.CHI2:
            return ~nonzero | (absxi < self.c * ratio)
        c1, c2 = self.band
        if self.kind is RegionKind.PPLUS:
            return nonzero & (absxi > c2 * ratio)
        if self.kind is RegionKind.PMINUS:
            return nonzero & (absxi < c1 * ratio)
        return nonzero & (absxi >= c1 * ratio) & (absxi <= c2 * ratio)


def project(f: Field2D, mask: RegionMask) -> Field2D:
    return Field2D(f.grid, np.where(mask.indicator(f.grid), f.coeffs, 0.0))


# ---------------------------------------------------------------------------
# space-time fields


@dataclass(frozen=True)
class FieldST:
    """A function of (x, y, t) held as coefficients over (xi, mu, tau).

    The time box t in [-Lt/2, Lt/2) follows the same centered convention
    and quadrature factor as the spatial axes, so the coefficient-space
    norm sum |coeff|^2 / (Lx Ly Lt) equals the physical L2 norm.
    """

    grid: Grid2D
    Lt: float
    Nt: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.Lt <= 0 or self.Nt <= 0 or self.Nt % 2:
            raise ValueError("time box needs Lt > 0 and even Nt > 0")
        c = np.array(self.coeffs, dtype=np.complex128, order="C", copy=True)
        if c.shape != (self.grid.Nx, self.grid.Ny, self.Nt):
            raise ValueError("coefficient shape mismatch")
        if self.grid.zero_mode_policy is ZeroModePolicy.ZERO_OUT:
            c[0, :, :] = 0.0
        object.__setattr__(self, "coeffs", _freeze(c))
        set_ = object.__setattr__
        set_(self, "dt", self.Lt / self.Nt)
        set_(self, "tau", _freeze(_wavenumbers(self.Nt, self.Lt)))
        set_(self, "t", _freeze(-self.Lt / 2 + self.dt * np.arange(self.Nt)))
        set_(self, "phase_t", _freeze(_half_shift_phase(self.Nt)))
        set_(self, "mode_weight", self.grid.mode_weight / self.Lt)

    @classmethod
    def from_time_slices(cls, grid: Grid2D, Lt: float, slices: np.ndarray) -> "FieldST":
        """Build from an (Nx, Ny, Nt) stack of spatial coefficients sampled on
        the centered t-grid; transforms the time axis only."""
        Nt = slices.shape[2]
        ph = _half_shift_phase(Nt)
        coeffs = np.fft.fft(slices, axis=2) * ph[None, None, :] * (Lt / Nt)
        return cls(grid, Lt, Nt, coeffs)

    def to_time_slices(self) -> np.ndarray:
        """Inverse of from_time_slices: spatial coefficients per t-slice."""
        return np.fft.ifft(self.coeffs * self.phase_t[None, None, :], axis=2) / self.dt

    def to_physical(self) -> np.ndarray:
        ph = (
            self.grid.phase_x[:, None, None]
            * self.grid.phase_y[None, :, None]
            * self.phase_t[None, None, :]
        )
        return np.fft.ifftn(self.coeffs * ph) / (self.grid.dx * self.grid.dy * self.dt)

    @classmethod
    def from_physical(cls, grid: Grid2D, Lt: float, samples: np.ndarray) -> "FieldST":
        Nt = samples.shape[2]
        ph = (
            grid.phase_x[:, None, None]
            * grid.phase_y[None, :, None]
            * _half_shift_phase(Nt)[None, None, :]
        )
        coeffs = np.fft.fftn(samples) * ph * (grid.dx * grid.dy * (Lt / Nt))
        return cls(grid, Lt, Nt, coeffs)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2) * self.mode_weight))

    def with_coeffs(self, coeffs: np.ndarray) -> "FieldST":
        return FieldST(self.grid, self.Lt, self.Nt, coeffs)

    def modulation(self, params: DispersionParams = KP1) -> np.ndarray:
        """tau - omega(xi, mu) on the coefficient lattice (0 on the
        mass-free zero-mode column)."""
        omega = dispersion_grid(self.grid, params)
        return self.tau[None, None, :] - omega[:, :, None]

    def is_conjugate_symmetric(self, tol: float = 1e-12) -> bool:
        """True when the field represents a real-valued u(x, y, t)."""
        c = self.coeffs
        idx = np.ix_(
            _neg_index(self.grid.Nx), _neg_index(self.grid.Ny), _neg_index(self.Nt)
        )
        scale = np.max(np.abs(c)) or 1.0
        return bool(np.max(np.abs(c - np.conj(c[idx]))) <= tol * scale)


def dispersion_grid(grid: Grid2D, params: DispersionParams = KP1) -> np.ndarray:
    """omega on the grid, with the mass-free xi = 0 column set to 0."""
    XI = grid.xi[:, None]
    MU = grid.mu[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        om = np.where(XI != 0.0, XI**3 - params.gamma * MU**2 / XI, 0.0)
    return om


# ---------------------------------------------------------------------------
# coordinate multiplication (exact mu <-> y and tau <-> t duality)


def multiply_by_y(coeffs: np.ndarray, grid: Grid2D, axis: int = 1) -> np.ndarray:
    """Coefficients of y*f from coefficients of f (equals i d/dmu f_hat)."""
    ph = grid.phase_y
    shape = [1] * coeffs.ndim
    shape[axis] = grid.Ny
    ph = ph.reshape(shape)
    y = grid.y.reshape(shape)
    samples = np.fft.ifft(coeffs * ph, axis=axis)
    return np.fft.fft(samples * y, axis=axis) * ph


def multiply_by_t(coeffs: np.ndarray, st: FieldST, axis: int = 2) -> np.ndarray:
    """Coefficients of t*f from coefficients of f (equals i d/dtau f_hat)."""
    shape = [1] * coeffs.ndim
    shape[axis] = st.Nt
    ph = st.phase_t.reshape(shape)
    t = st.t.reshape(shape)
    samples = np.fft.ifft(coeffs * ph, axis=axis)
    return np.fft.fft(samples * t, axis=axis) * ph


# ---------------------------------------------------------------------------
# flat binary field container


def save_field(f: Field2D, path) -> None:
    """Write the KPF2 container: 64-byte header {magic, Nx, Ny, Lx, Ly as
    little-endian f64} then interleaved (re, im) f64 coefficients in
    row-major xi-then-mu FFT order."""
    g = f.grid
    header = MAGIC + struct.pack("<4d", float(g.Nx), float(g.Ny), g.Lx, g.Ly)
    header += b"\x00" * (HEADER_BYTES - len(header))
    flat = np.empty((g.Nx * g.Ny, 2), dtype="<f8")
    flat[:, 0] = f.coeffs.real.ravel(order="C")
    flat[:, 1] = f.coeffs.imag.ravel(order="C")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(flat.tobytes())


def load_field(path) -> Field2D:
    with open(path, "rb") as fh:
        header = fh.read(HEADER_BYTES)
        if header[:4] != MAGIC:
            raise ValueError("not a KPF2 field container")
        nx_f, ny_f, lx, ly = struct.unpack("<4d", header[4:36])
        nx, ny = int(nx_f), int(ny_f)
        raw = np.frombuffer(fh.read(nx * ny * 16), dtype="<f8").reshape(nx * ny, 2)
    coeffs = (raw[:, 0] + 1j * raw[:, 1]).reshape(nx, ny)
    return Field2D(Grid2D(lx, ly, nx, ny), coeffs)
