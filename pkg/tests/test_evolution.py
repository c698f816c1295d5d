import numpy as np
import pytest

from kpflow import norms, presets
from kpflow.evolution import (
    BlowupError,
    SolverConfig,
    badrescal_check,
    conserved_diagnostics,
    critical_indices,
    duhamel_slices,
    linear_propagate,
    nonlinear_term,
    picard_residual,
    picard_slice_at,
    picard_solve,
    scaling_transform,
    simulate,
    step,
    time_cutoff,
)
from kpflow.spectral import KP1, Field2D, Grid2D, weight_w


@pytest.fixture(scope="module")
def grid():
    return Grid2D(16 * np.pi, 16 * np.pi, 64, 64)


class TestLinearPropagate:
    def test_identity_at_zero(self, grid):
        u = presets.random_band(grid, seed=1)
        out = linear_propagate(u, 0.0, KP1)
        assert np.array_equal(out.coeffs, u.coeffs)

    def test_group_property(self, grid):
        u = presets.random_band(grid, seed=2)
        there = linear_propagate(u, 1.7, KP1)
        back = linear_propagate(there, -1.7, KP1)
        assert np.max(np.abs(back.coeffs - u.coeffs)) < 1e-12 * np.max(np.abs(u.coeffs))
        # S(t)S(s) = S(t+s)
        two_step = linear_propagate(linear_propagate(u, 0.3, KP1), 0.9, KP1)
        one_step = linear_propagate(u, 1.2, KP1)
        assert np.max(np.abs(two_step.coeffs - one_step.coeffs)) < 1e-12 * np.max(
            np.abs(u.coeffs)
        )

    def test_unitary(self, grid):
        u = presets.random_band(grid, seed=3)
        out = linear_propagate(u, 1.7, KP1)
        assert out.l2_norm() == pytest.approx(u.l2_norm(), rel=1e-12)


class TestNonlinearTerm:
    def test_zero(self, grid):
        out = nonlinear_term(Field2D.zeros(grid), beta=1.0)
        assert out.l2_norm() == 0.0

    def test_cosine_closed_form(self, grid):
        # d/dx cos^2(qx) = -q sin(2qx)
        q = 2 * 2 * np.pi / grid.Lx
        u = Field2D.from_physical(
            grid, np.cos(q * grid.x)[:, None] * np.ones(grid.Ny)
        )
        out = nonlinear_term(u, beta=1.0).to_physical().real
        expect = -q * np.sin(2 * q * grid.x)[:, None] * np.ones(grid.Ny)
        assert np.max(np.abs(out - expect)) < 1e-12

    def test_against_convolution_oracle(self):
        # direct mode-pair summation of the quadratic interaction
        g = Grid2D(16 * np.pi, 16 * np.pi, 16, 16)
        u = presets.random_band(g, seed=11, kx_band=2, ky_band=2, amplitude=0.5)
        out = nonlinear_term(u, beta=1.0, dealias="none")
        c = u.coeffs
        conv = np.zeros_like(c)
        N = g.Nx
        for k1 in range(N):
            for l1 in range(N):
                if c[k1, l1] == 0:
                    continue
                for k2 in range(N):
                    for l2 in range(N):
                        if c[k2, l2] == 0:
                            continue
                        conv[(k1 + k2) % N, (l1 + l2) % N] += c[k1, l1] * c[k2, l2]
        expect = 1j * g.xi[:, None] * conv / (g.Lx * g.Ly)
        expect[0, :] = 0
        assert np.max(np.abs(out.coeffs - expect)) < 1e-10 * np.max(np.abs(expect))


class TestStep:
    def test_linear_limit(self, grid):
        u = presets.gaussian(grid, amplitude=1e-300)
        cfg = SolverConfig(dt=0.02, T=0.02)
        stepped = step(u, cfg, KP1)
        lin = linear_propagate(u, 0.02, KP1)
        scale = np.max(np.abs(lin.coeffs))
        assert np.max(np.abs(stepped.coeffs - lin.coeffs)) < 1e-10 * scale

    def test_rk4_self_convergence(self, grid):
        u0 = presets.gaussian(grid, amplitude=0.5, sigma_x=2.0, sigma_y=2.0)

        def run(dt, T=0.2):
            u = u0
            cfg = SolverConfig(dt=dt, T=T)
            for _ in range(int(round(T / dt))):
                u = step(u, cfg, KP1)
            return u

        ref = run(0.2 / 256)
        errs = []
        for dt in (0.2 / 8, 0.2 / 16, 0.2 / 32):
            d = run(dt)
            errs.append(
                np.sqrt(np.sum(np.abs(d.coeffs - ref.coeffs) ** 2) * grid.mode_weight)
            )
        orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
        assert min(orders) >= 3.8

    def test_blowup_detection(self, grid):
        u0 = presets.gaussian(grid, amplitude=1e3)
        with pytest.raises(BlowupError):
            simulate(u0, SolverConfig(dt=10.0, T=100.0), KP1)


class TestConservation:
    def test_small_run_drifts(self, grid):
        u0 = presets.gaussian(grid, amplitude=1.0, target_ep_norm=0.1)
        res = simulate(u0, SolverConfig(dt=1e-3, T=0.2), KP1, diag_every=40)
        l2s = [d.l2 for d in res.diagnostics]
        hams = [d.hamiltonian for d in res.diagnostics]
        assert max(abs(v - l2s[0]) / l2s[0] for v in l2s) < 1e-8
        assert max(abs(v - hams[0]) / abs(hams[0]) for v in hams) < 1e-10

    def test_zero_field(self, grid):
        d = conserved_diagnostics(Field2D.zeros(grid), KP1)
        assert (d.l2, d.hamiltonian, d.energy_norm) == (0.0, 0.0, 0.0)

    def test_point_mass_energy_norm_is_weight(self, grid):
        k, l = 8, 16
        c = np.zeros(grid.shape, complex)
        c[k, l] = np.sqrt(grid.Lx * grid.Ly)
        d = conserved_diagnostics(Field2D(grid, c), KP1)
        assert d.energy_norm == pytest.approx(weight_w(grid.xi[k], grid.mu[l]), rel=1e-12)
        assert d.energy_norm >= d.l2

    def test_hamiltonian_against_quadrature_oracle(self, grid):
        u = presets.gaussian(grid, amplitude=0.3, sigma_x=2.5, sigma_y=2.5)
        d = conserved_diagnostics(u, KP1)
        # dense real-space quadrature of every term
        dux = Field2D(grid, 1j * grid.xi[:, None] * u.coeffs).to_physical().real
        ratio = np.where(grid.xi[:, None] != 0, grid.mu[None, :] * grid.inv_xi, 0.0)
        anti = Field2D(grid, ratio * u.coeffs).to_physical().real
        phys = u.to_physical().real
        cell = grid.dx * grid.dy
        h_direct = (
            np.sum(dux**2) * cell
            - KP1.gamma * np.sum(anti**2) * cell
            - (2.0 * KP1.beta / 3.0) * np.sum(phys**3) * cell
        )
        assert d.hamiltonian == pytest.approx(h_direct, rel=1e-8)


class TestScaling:
    def test_identity(self, grid):
        u = presets.gaussian(grid, amplitude=0.4)
        out = scaling_transform(u, 1.0)
        assert np.array_equal(out.coeffs, u.coeffs)
        assert out.grid.Lx == grid.Lx

    def test_norm_factors_at_lambda_two(self, grid):
        u = presets.gaussian(grid, amplitude=0.7, sigma_x=2.0, sigma_y=2.0)
        v = scaling_transform(u, 2.0)
        su = np.sqrt(2.0)
        assert v.l2_norm() == pytest.approx(su * u.l2_norm(), rel=1e-10)

        def dx_norm(f):
            return np.sqrt(
                np.sum(f.grid.xi[:, None] ** 2 * np.abs(f.coeffs) ** 2)
                * f.grid.mode_weight
            )

        def anti_norm(f):
            ratio = np.where(
                f.grid.xi[:, None] != 0, f.grid.mu[None, :] * f.grid.inv_xi, 0.0
            )
            return np.sqrt(np.sum(ratio**2 * np.abs(f.coeffs) ** 2) * f.grid.mode_weight)

        assert dx_norm(v) == pytest.approx(2.0**1.5 * dx_norm(u), rel=1e-10)
        assert anti_norm(v) == pytest.approx(2.0**1.5 * anti_norm(u), rel=1e-10)

    def test_rejects_nonpositive(self, grid):
        with pytest.raises(ValueError):
            scaling_transform(presets.gaussian(grid), -1.0)

    def test_two_path_commutation(self):
        # evolve then rescale == rescale then evolve to time t (source runs
        # to lambda^3 t); dt values intentionally unrelated
        g = Grid2D(16 * np.pi, 16 * np.pi, 48, 48)
        lam, t = 2.0, 0.05
        u0 = presets.gaussian(g, amplitude=0.3, sigma_x=2.0, sigma_y=2.0)
        a = simulate(u0, SolverConfig(dt=1e-3, T=lam**3 * t), KP1, diag_every=10**9).final
        path_a = scaling_transform(a, lam)
        b0 = scaling_transform(u0, lam)
        path_b = simulate(b0, SolverConfig(dt=2.5e-4, T=t), KP1, diag_every=10**9).final
        num = np.sqrt(np.sum(np.abs(path_a.coeffs - path_b.coeffs) ** 2))
        den = np.sqrt(np.sum(np.abs(path_b.coeffs) ** 2))
        assert num / den < 1e-6


class TestCriticalIndices:
    def test_examples(self):
        assert critical_indices(0.0) == pytest.approx(-0.5)
        assert critical_indices(-0.25) == pytest.approx(0.0)
        assert critical_indices(-0.5) == pytest.approx(0.5)


class TestBadRescal:
    def test_lambda_one(self, grid):
        u = presets.gaussian(grid, amplitude=0.6)
        lhs, bound = badrescal_check(u, 1.0, s=1.0, eps=0.1)
        b = norms.besov_norm(u, 1.0).total
        p = norms.weighted_besov_norm(u, 0.0).total
        assert lhs == pytest.approx(b**0.9 * p**0.1, rel=1e-12)
        assert bound == 1.0

    def test_critical_eps_flat_bound(self, grid):
        u = presets.gaussian(grid, amplitude=0.6)
        for lam in (1.0, 0.5, 0.25):
            _, bound = badrescal_check(u, lam, s=1.0, eps=0.25)
            assert bound == 1.0

    def test_product_scaling_exponent(self):
        # the product B^{1-eps} P^{eps} of the rescaled data scales like
        # lambda^{(1-4 eps)/2}: the B factor carries lambda^{1/2}, the P
        # factor lambda^{-3/2} (exact asymptotics of the change of
        # variables; the critical exponent eps = 1/4 makes it flat)
        g = Grid2D(32 * np.pi, 32 * np.pi, 128, 128)
        u0 = presets.gaussian(g, amplitude=1.0, sigma_x=2.0, sigma_y=2.0)
        deep = np.array([2.0**-k for k in range(4, 9)])
        for eps in (0.0, 0.1, 0.25):
            lhs = [badrescal_check(u0, lam, 1.0, eps)[0] for lam in deep]
            slope = np.polyfit(np.log(deep), np.log(lhs), 1)[0]
            assert slope == pytest.approx((1.0 - 4.0 * eps) / 2.0, abs=0.15)

    def test_validation(self, grid):
        u = presets.gaussian(grid)
        with pytest.raises(ValueError):
            badrescal_check(u, 1.5, 1.0, 0.1)
        with pytest.raises(ValueError):
            badrescal_check(u, 0.5, 0.5, 0.1)


class TestTimeCutoff:
    def test_plateau_and_support(self):
        assert time_cutoff(0.0) == 1.0
        assert time_cutoff(0.5) == 1.0
        assert time_cutoff(-0.49) == 1.0
        assert time_cutoff(1.0) == 0.0
        assert time_cutoff(1.5) == 0.0
        mid = time_cutoff(0.75)
        assert 0.0 < mid < 1.0

    def test_smooth_and_monotone_on_ramp(self):
        t = np.linspace(0.5, 1.0, 200)
        vals = time_cutoff(t)
        assert np.all(np.diff(vals) <= 1e-12)


class TestPicard:
    def small_data(self, g):
        u0 = presets.gaussian(g, amplitude=1.0, sigma_x=2.0, sigma_y=2.0)
        bp = norms.besov_pair_norm(u0, 1.0, 0.0)
        return Field2D(g, u0.coeffs * (0.01 / bp))

    def test_zero_data_converges_first_iteration(self):
        g = Grid2D(16 * np.pi, 16 * np.pi, 32, 32)
        cfg = SolverConfig(picard_max_iters=5, picard_tol=1e-12, picard_slices=16)
        res = picard_solve(Field2D.zeros(g), cfg, KP1)
        assert res.converged and len(res.diffs) == 1

    def test_contraction_and_residual(self):
        g = Grid2D(16 * np.pi, 16 * np.pi, 32, 32)
        u0 = self.small_data(g)
        cfg = SolverConfig(picard_max_iters=10, picard_tol=1e-12, picard_slices=32)
        res = picard_solve(u0, cfg, KP1)
        assert res.converged
        assert res.ratios and res.ratios[-1] <= 0.5
        assert picard_residual(res, cfg, KP1, u0) < 10 * cfg.picard_tol

    def test_fixed_point_matches_rk4(self):
        g = Grid2D(16 * np.pi, 16 * np.pi, 32, 32)
        u0 = self.small_data(g)
        cfg = SolverConfig(dt=1e-3, picard_max_iters=10, picard_tol=1e-12, picard_slices=64)
        res = picard_solve(u0, cfg, KP1)
        fp = picard_slice_at(res, 0.25)
        u = u0
        for _ in range(250):
            u = step(u, cfg, KP1)
        num = np.sqrt(np.sum(np.abs(fp.coeffs - u.coeffs) ** 2))
        den = np.sqrt(np.sum(np.abs(u.coeffs) ** 2))
        assert num / den < 1e-4

    def test_duhamel_requires_origin(self):
        g = Grid2D(16 * np.pi, 16 * np.pi, 16, 16)
        slices = np.zeros((4, 16, 16), complex)
        with pytest.raises(ValueError):
            duhamel_slices(slices, np.array([0.1, 0.2, 0.3, 0.4]), g, KP1)
