import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kpflow import presets
from kpflow.norms import (
    besov_norm,
    besov_norm_bruteforce,
    besov_pair_norm,
    constant_robustness_check,
    embedding_check,
    energy_space_norm,
    mu_derivative_coeffs,
    mu_derivative_coeffs_fd,
    weighted_besov_norm,
    xsb_norm,
    xsb_norm_bruteforce,
    ysrb_norm,
    zsb_norm,
)
from kpflow.spectral import KP1, Field2D, FieldST, Grid2D, dispersion_symbol, weight_w


@pytest.fixture(scope="module")
def grid():
    return Grid2D(32 * np.pi, 32 * np.pi, 64, 64)


@pytest.fixture(scope="module")
def small_grid():
    return Grid2D(16 * np.pi, 16 * np.pi, 16, 16)


def unit_point_mass(grid, k, l):
    c = np.zeros(grid.shape, dtype=complex)
    c[k, l] = np.sqrt(grid.Lx * grid.Ly)
    return Field2D(grid, c)


class TestBesov:
    def test_zero_field(self, grid):
        assert besov_norm(Field2D.zeros(grid), 1.0).total == 0.0

    def test_point_mass_closed_form(self, grid):
        f = unit_point_mass(grid, 16, 0)  # (xi, mu) = (1, 0), w = 2, shell m=0
        for s in (0.5, 1.0, 2.0):
            assert besov_norm(f, s).total == pytest.approx(2.0**s, rel=1e-12)

    def test_matches_bruteforce(self, small_grid):
        for seed in range(5):
            f = presets.random_band_complex(small_grid, seed=seed, kx_band=6, ky_band=6)
            for s in (0.3, 1.0):
                fast = besov_norm(f, s).total
                brute = besov_norm_bruteforce(f, s)
                assert fast == pytest.approx(brute, rel=1e-10)

    def test_monotone_in_s(self, grid):
        f = presets.random_band_complex(grid, seed=21)
        vals = [besov_norm(f, s).total for s in (0.0, 0.5, 1.0, 1.5)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))

    def test_report_total_is_shell_sum(self, grid):
        f = presets.random_band_complex(grid, seed=22)
        rep = besov_norm(f, 0.8)
        assert rep.total == pytest.approx(rep.shell_sum(), rel=1e-12)

    def test_report_records_truncation(self, grid):
        rep = besov_norm(presets.random_band_complex(grid, seed=24), 1.0)
        # no contribution can sit beyond the recorded truncation shells
        assert all(
            int(key[1:]) <= rep.params["max_" + key[0]]
            for _, key, _ in rep.shells
        )

    def test_l1_dominates_l2_over_shells(self, grid):
        f = presets.random_band_complex(grid, seed=23)
        rep = besov_norm(f, 0.8)
        assert rep.total >= rep.l2_over_shells() - 1e-12

    @settings(max_examples=10, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), alpha=st.floats(0.1, 10.0))
    def test_absolute_homogeneity(self, seed, alpha):
        g = Grid2D(16 * np.pi, 16 * np.pi, 16, 16)
        f = presets.random_band_complex(g, seed=seed)
        scaled = Field2D(g, alpha * f.coeffs)
        assert besov_norm(scaled, 1.0).total == pytest.approx(
            alpha * besov_norm(f, 1.0).total, rel=1e-12
        )

    @settings(max_examples=10, deadline=None)
    @given(s1=st.integers(0, 2**31), s2=st.integers(0, 2**31))
    def test_triangle_inequality(self, s1, s2):
        g = Grid2D(16 * np.pi, 16 * np.pi, 16, 16)
        f = presets.random_band_complex(g, seed=s1)
        h = presets.random_band_complex(g, seed=s2)
        fh = Field2D(g, f.coeffs + h.coeffs)
        assert (
            besov_norm(fh, 1.0).total
            <= besov_norm(f, 1.0).total + besov_norm(h, 1.0).total + 1e-12
        )


class TestWeightedBesov:
    def test_zero_field(self, grid):
        assert weighted_besov_norm(Field2D.zeros(grid), 0.0).total == 0.0

    def test_two_route_equivalence(self):
        # canonical route (multiplication by -i y) against the centered
        # finite difference in mu; agreement at second order in the spacing
        def route_gap(scale):
            g = Grid2D(24 * np.pi, 24 * np.pi * scale, 64, 64 * scale)
            f = presets.gaussian(g, amplitude=1.0, sigma_x=3.0, sigma_y=3.0)
            a = mu_derivative_coeffs(f)
            b = mu_derivative_coeffs_fd(f)
            return np.max(np.abs(a - b)) / np.max(np.abs(a))

        g1, g2 = route_gap(1), route_gap(2)
        assert g1 < 0.05
        assert g2 < g1 / 3.0

    def test_gaussian_norm_via_alternative_route(self):
        # the P-norm computed through the finite-difference derivative must
        # approach the canonical -iy-route value
        g = Grid2D(48 * np.pi, 48 * np.pi, 128, 128)
        f = presets.gaussian(g, amplitude=1.0, sigma_x=3.0, sigma_y=3.0)
        canonical = weighted_besov_norm(f, 0.0).total
        fd = besov_norm(Field2D(g, mu_derivative_coeffs_fd(f)), 0.0).total
        assert fd == pytest.approx(canonical, rel=2e-3)


class TestEnergySpace:
    def test_zero_field(self, grid):
        assert energy_space_norm(Field2D.zeros(grid)) == (0.0, 0.0)

    def test_point_mass_energy_is_weight(self, grid):
        k, l = 16, 32
        f = unit_point_mass(grid, k, l)
        e, _ = energy_space_norm(f)
        assert e == pytest.approx(weight_w(grid.xi[k], grid.mu[l]), rel=1e-12)

    def test_weighted_l2_against_quadrature(self, grid):
        # off-center Gaussian: p = ||y f|| against direct real-space sums
        X = grid.x[:, None]
        Y = grid.y[None, :]
        samples = X * np.exp(-(X**2 + (Y - 3.0) ** 2) / 8.0)
        f = Field2D.from_physical(grid, samples)
        phys = f.to_physical().real
        direct = np.sqrt(np.sum((grid.y[None, :] * phys) ** 2) * grid.dx * grid.dy)
        _, p = energy_space_norm(f)
        assert p == pytest.approx(direct, rel=1e-8)


class TestXsb:
    def test_on_surface_point_mass(self, small_grid):
        g = small_grid
        Lt, Nt = 4.0, 16
        k, l = 2, 1
        om = dispersion_symbol(g.xi[k], g.mu[l], KP1)
        stub = FieldST(g, Lt, Nt, np.zeros((g.Nx, g.Ny, Nt), complex))
        r = int(np.argmin(np.abs(stub.tau - om)))
        assert abs(stub.tau[r] - om) < 1.0  # modulation shell j = 0
        c = np.zeros((g.Nx, g.Ny, Nt), complex)
        c[k, l, r] = np.sqrt(g.Lx * g.Ly * Lt)
        F = FieldST(g, Lt, Nt, c)
        w = weight_w(g.xi[k], g.mu[l])
        assert xsb_norm(F, 1.0, 0.5, KP1).total == pytest.approx(w, rel=1e-12)

    def test_off_surface_point_mass(self, small_grid):
        g = small_grid
        Lt, Nt = 4.0, 32
        k, l = 2, 0
        om = dispersion_symbol(g.xi[k], g.mu[l], KP1)
        stub = FieldST(g, Lt, Nt, np.zeros((g.Nx, g.Ny, Nt), complex))
        r = int(np.argmin(np.abs(stub.tau - (om + 5.0))))
        mod = abs(stub.tau[r] - om)
        assert 4.0 <= mod < 8.0  # shell j = 3
        c = np.zeros((g.Nx, g.Ny, Nt), complex)
        c[k, l, r] = np.sqrt(g.Lx * g.Ly * Lt)
        F = FieldST(g, Lt, Nt, c)
        w = weight_w(g.xi[k], g.mu[l])
        for b in (0.5, -0.5):
            expect = 2.0 ** (3 * b) * w
            assert xsb_norm(F, 1.0, b, KP1).total == pytest.approx(expect, rel=1e-12)

    def test_matches_bruteforce(self, small_grid):
        for seed in range(3):
            F = presets.random_band_st(small_grid, 4.0, 16, seed=seed)
            for s, b in ((1.0, 0.5), (0.7, -0.5)):
                fast = xsb_norm(F, s, b, KP1).total
                brute = xsb_norm_bruteforce(F, s, b, KP1)
                assert fast == pytest.approx(brute, rel=1e-10)


class TestYZ:
    def test_zero_field(self, small_grid):
        F = FieldST(small_grid, 4.0, 16, np.zeros((16, 16, 16), complex))
        assert ysrb_norm(F, 1.0, 0.0, 0.5, KP1).total == 0.0

    def test_parts_recorded(self, small_grid):
        F = presets.random_band_st(small_grid, 4.0, 16, seed=31, localized=True)
        rep = ysrb_norm(F, 1.0, 0.0, 0.5, KP1)
        assert rep.parts is not None
        assert rep.total == pytest.approx(
            rep.parts["t_part"].total + rep.parts["y_part"].total, rel=1e-12
        )

    def test_z_is_x_plus_y(self, small_grid):
        F = presets.random_band_st(small_grid, 4.0, 16, seed=32, localized=True)
        s = 0.9
        z = zsb_norm(F, s, 0.5, KP1)
        expect = xsb_norm(F, s, 0.5, KP1).total + ysrb_norm(F, s, s - 1.0, 0.5, KP1).total
        assert z.total == pytest.approx(expect, rel=1e-12)


class TestEmbeddings:
    def test_zero_field(self, grid):
        assert embedding_check(Field2D.zeros(grid), 0.1) == (0.0, 0.0)

    def test_point_mass_closed_form(self, grid):
        k, l = 16, 32
        f = unit_point_mass(grid, k, l)
        w = weight_w(grid.xi[k], grid.mu[l])
        eps = 0.1
        up, down = embedding_check(f, eps)
        e, p = energy_space_norm(f)
        upper = besov_pair_norm(f, 1.0, 0.0)
        lower = besov_pair_norm(f, 1.0 - eps, -eps)
        assert up == pytest.approx((e + p) / upper, rel=1e-12)
        assert down == pytest.approx(lower / (e + p), rel=1e-12)
        assert up > 0 and down > 0 and np.isfinite(w)

    def test_ratio_down_monotone_in_eps(self, grid):
        for seed in range(10):
            f = presets.random_band_complex(grid, seed=seed)
            downs = [embedding_check(f, eps)[1] for eps in (0.05, 0.1, 0.2)]
            assert downs[0] >= downs[1] >= downs[2]

    def test_ratios_bounded_over_sample(self, grid):
        ups, downs = [], []
        for seed in range(20):
            f = presets.random_band_complex(grid, seed=seed)
            up, down = embedding_check(f, 0.1)
            ups.append(up)
            downs.append(down)
        assert np.all(np.isfinite(ups)) and np.all(np.isfinite(downs))


class TestConstantRobustness:
    def test_reference_constant_gives_one(self, grid):
        f = presets.random_band_complex(grid, seed=41)
        assert constant_robustness_check(f, 1.0, 0.5) == pytest.approx(1.0, rel=1e-12)

    def test_point_deep_inside_chi1(self, grid):
        f = unit_point_mass(grid, 32, 0)  # xi = 2, mu = 0: chi1 for any C
        assert constant_robustness_check(f, 1.0, 0.25) == pytest.approx(1.0)
        assert constant_robustness_check(f, 1.0, 2.0) == pytest.approx(1.0)

    def test_sweep_bounded(self, grid):
        ratios = []
        for seed in range(20):
            f = presets.random_band_complex(grid, seed=seed)
            for C in (0.25, 2.0):
                ratios.append(constant_robustness_check(f, 1.0, C))
        K = max(max(ratios), 1.0 / min(ratios))
        assert np.isfinite(K)
        assert K < 10.0  # comparable norms at desk scale
