"""Transport kinetics: kernel structure, conservation and dissipation of the
collision operators, shell confinement of the elastic operator, spectral
streaming, and the RK4 integrator diagnostics."""

import numpy as np
import pytest
import scipy.linalg

from diracsim.algebra import PhysicalConstants, lambda_plus, scattering_weights
from diracsim.grid import quasi_1d
from diracsim.randomfield import SpectrumDescriptor
from diracsim.transport import (TransportState, build_elastic_kernel,
                                build_kernels, collision_rhs, elastic_rhs,
                                energy_shells, free_streaming_rhs, integrate,
                                load_kernels, momentum_ball, save_kernels)

GRID = quasi_1d(64)
CONSTS = PhysicalConstants()
EPS = 0.125
SPEC = SpectrumDescriptor(band_limit=0.3, amplitudes=(2.0, 2.0, 2.0, 2.0),
                          corr_width=0.12, jump_rate=1.0)
BALL = momentum_ball(GRID, EPS, radius=0.9)
KERNELS = build_kernels(SPEC, BALL, CONSTS, GRID.d_eff)
ELASTIC = build_elastic_kernel(SPEC, BALL, CONSTS)
RNG = np.random.default_rng(7)


def _random_state(seed=0):
    rng = np.random.default_rng(seed)
    shape = GRID.shape + (BALL.n,)
    return TransportState(alpha_plus=rng.uniform(0.1, 1.0, size=shape),
                          alpha_minus=rng.uniform(0.1, 1.0, size=shape),
                          grid=GRID, ball=BALL)


class TestKernels:
    def test_zero_spectrum(self):
        spec0 = SpectrumDescriptor(band_limit=0.3, amplitudes=(0, 0, 0, 0),
                                   corr_width=0.12, jump_rate=1.0)
        k = build_kernels(spec0, BALL, CONSTS, 1)
        assert np.all(k.k_minus == 0) and np.all(k.k_plus == 0)

    def test_symmetry(self):
        assert np.abs(KERNELS.k_minus - KERNELS.k_minus.T).max() < 1e-12
        assert np.abs(KERNELS.k_plus - KERNELS.k_plus.T).max() < 1e-12
        assert np.abs(ELASTIC.k_el - ELASTIC.k_el.T).max() < 1e-12

    def test_nonnegative(self):
        assert KERNELS.k_minus.min() >= 0
        assert KERNELS.k_plus.min() >= 0
        assert ELASTIC.k_el.min() >= 0

    def test_diagonal_value(self):
        # K-(xi, xi) = R_hat(0, 0) * sum_k omega_k(xi, xi), with
        # omega_0 = 1 and omega_k = xi_k^2 / lambda^2
        i = BALL.n // 3
        xi = BALL.points[i]
        lam2 = float(lambda_plus(xi, CONSTS)) ** 2
        wsum = 1.0 + np.sum(xi**2) / lam2
        expected = float(SPEC.power_spectrum(0, 0.0, np.zeros(3))) * wsum
        assert KERNELS.k_minus[i, i] == pytest.approx(expected, rel=1e-12)

    def test_kernel_consistent_with_weights(self):
        i, j = 2, BALL.n - 3
        xi, q = BALL.points[i], BALL.points[j]
        w = scattering_weights(xi, q, CONSTS)
        dl = CONSTS.c * (float(lambda_plus(q, CONSTS)) - float(lambda_plus(xi, CONSTS)))
        expected = sum(w.omega[k] * float(SPEC.power_spectrum(k, dl, q - xi))
                       for k in range(4))
        assert KERNELS.k_minus[i, j] == pytest.approx(expected, rel=1e-12)

    def test_save_load_round_trip(self, tmp_path):
        path = str(tmp_path / "kernels.npz")
        save_kernels(path, KERNELS)
        back = load_kernels(path)
        np.testing.assert_array_equal(back.k_minus, KERNELS.k_minus)
        np.testing.assert_array_equal(back.k_plus, KERNELS.k_plus)
        assert back.prefactor == KERNELS.prefactor

    def test_slow_time_sharpening_trend(self):
        # the slow-time scaling acts like an effective jump rate -> 0: the
        # Lorentzian sharpens, the inter-band kernel mass vanishes, and the
        # intra-band kernel concentrates on the energy shell
        from diracsim.algebra import lambda_plus as lam_fn

        lam = lam_fn(BALL.points, CONSTS)
        on_shell = np.abs(lam[None, :] - lam[:, None]) < 1e-9
        plus_mass = []
        offshell_fraction = []
        for rate in (1.0, 0.25, 0.0625):
            spec = SpectrumDescriptor(band_limit=0.3, amplitudes=(2.0,) * 4,
                                      corr_width=0.12, jump_rate=rate)
            k = build_kernels(spec, BALL, CONSTS, 1)
            plus_mass.append(k.k_plus.sum())
            offshell_fraction.append(k.k_minus[~on_shell].sum() / k.k_minus.sum())
        assert plus_mass[0] > plus_mass[1] > plus_mass[2]
        assert offshell_fraction[0] > offshell_fraction[1] > offshell_fraction[2]


class TestCollisionRhs:
    def test_constant_state_is_equilibrium(self):
        shape = GRID.shape + (BALL.n,)
        state = TransportState(alpha_plus=np.full(shape, 0.8),
                               alpha_minus=np.full(shape, 0.8),
                               grid=GRID, ball=BALL)
        rp, rm = collision_rhs(state, KERNELS)
        assert np.abs(rp).max() < 1e-13
        assert np.abs(rm).max() < 1e-13

    def test_mass_neutral(self):
        state = _random_state(1)
        rp, rm = collision_rhs(state, KERNELS)
        total = (rp.sum() + rm.sum()) * GRID.cell * BALL.weight
        # oracle: the double sum with swapped indices cancels exactly
        assert abs(total) < 1e-10 * (np.abs(rp).sum() * GRID.cell * BALL.weight + 1e-30)

    def test_mass_neutral_direct_double_sum(self):
        # independent oracle at a single x: brute-force gain/loss double sums
        state = _random_state(2)
        rp, rm = collision_rhs(state, KERNELS)
        x_idx = (0, 0, 5)
        ap = state.alpha_plus[x_idx]
        am = state.alpha_minus[x_idx]
        w, pref = KERNELS.weight, KERNELS.prefactor
        brute_p = np.zeros(BALL.n)
        brute_m = np.zeros(BALL.n)
        for i in range(BALL.n):
            brute_p[i] = pref * w * (
                np.sum(KERNELS.k_minus[i] * (ap - ap[i]))
                + np.sum(KERNELS.k_plus[i] * (am - ap[i])))
            brute_m[i] = pref * w * (
                np.sum(KERNELS.k_minus[i] * (am - am[i]))
                + np.sum(KERNELS.k_plus[i] * (ap - am[i])))
        np.testing.assert_allclose(rp[x_idx], brute_p, atol=1e-13)
        np.testing.assert_allclose(rm[x_idx], brute_m, atol=1e-13)

    def test_l2_dissipation(self):
        for seed in range(5):
            state = _random_state(seed)
            rp, rm = collision_rhs(state, KERNELS)
            w = GRID.cell * BALL.weight
            diss = (np.sum(state.alpha_plus * rp) + np.sum(state.alpha_minus * rm)) * w
            assert diss <= 1e-12

    def test_lattice_mismatch_rejected(self):
        small = momentum_ball(GRID, EPS, radius=0.4)
        state = TransportState(alpha_plus=np.zeros(GRID.shape + (small.n,)),
                               alpha_minus=np.zeros(GRID.shape + (small.n,)),
                               grid=GRID, ball=small)
        with pytest.raises(ValueError, match="lattice"):
            collision_rhs(state, KERNELS)


class TestElasticRhs:
    def test_mirror_momenta_share_a_shell(self):
        shells = energy_shells(BALL, CONSTS)
        index = {tuple(p): i for i, p in enumerate(BALL.points.tolist())}
        for i, p in enumerate(BALL.points.tolist()):
            assert shells[i] == shells[index[tuple(-x for x in p)]]

    def test_explicit_half_width_controls_spread(self):
        hw = 1e-9
        shells = energy_shells(BALL, CONSTS, half_width=hw)
        lam = lambda_plus(BALL.points, CONSTS)
        for s in np.unique(shells):
            lams = lam[shells == s]
            assert lams.max() - lams.min() <= 2 * hw

    def test_shellwise_constant_is_equilibrium(self):
        shells = ELASTIC.shell_index
        vals = np.cos(shells.astype(float))           # constant within shells
        shape = GRID.shape + (BALL.n,)
        state = TransportState(alpha_plus=np.broadcast_to(vals, shape).copy(),
                               alpha_minus=np.broadcast_to(vals, shape).copy(),
                               grid=GRID, ball=BALL)
        rp, rm = elastic_rhs(state, ELASTIC)
        assert np.abs(rp).max() < 1e-13
        assert np.abs(rm).max() < 1e-13

    def test_per_shell_mass_neutral(self):
        state = _random_state(3)
        rp, _ = elastic_rhs(state, ELASTIC)
        shells = ELASTIC.shell_index
        per_point = rp.sum(axis=(0, 1, 2))
        for s in np.unique(shells):
            shell_rate = per_point[shells == s].sum()
            assert abs(shell_rate) < 1e-10 * max(np.abs(per_point).sum(), 1e-30)

    def test_band_decoupling_exact(self):
        state = _random_state(4)
        rp0, _ = elastic_rhs(state, ELASTIC)
        perturbed = state.copy()
        perturbed.alpha_minus += np.sin(np.arange(BALL.n))
        rp1, _ = elastic_rhs(perturbed, ELASTIC)
        np.testing.assert_array_equal(rp0, rp1)


class TestFreeStreaming:
    def test_x_independent_state(self):
        vals = RNG.uniform(size=BALL.n)
        shape = GRID.shape + (BALL.n,)
        state = TransportState(alpha_plus=np.broadcast_to(vals, shape).copy(),
                               alpha_minus=np.broadcast_to(vals, shape).copy(),
                               grid=GRID, ball=BALL)
        rp, rm = free_streaming_rhs(state, CONSTS)
        assert np.abs(rp).max() < 1e-12
        assert np.abs(rm).max() < 1e-12

    def test_single_mode_exact_derivative(self):
        L = GRID.lengths[2]
        x = GRID.axis_coords(2)
        g = RNG.uniform(0.5, 1.0, size=BALL.n)
        prof = np.sin(2 * np.pi * x / L)
        ap = prof[None, None, :, None] * g[None, None, None, :]
        state = TransportState(alpha_plus=ap.copy(), alpha_minus=ap.copy(),
                               grid=GRID, ball=BALL)
        rp, rm = free_streaming_rhs(state, CONSTS)
        lam = lambda_plus(BALL.points, CONSTS)
        v3 = CONSTS.c * BALL.points[:, 2] / lam
        expected_p = -(v3[None, None, None, :] * (2 * np.pi / L)
                       * np.cos(2 * np.pi * x / L)[None, None, :, None] * g)
        assert np.abs(rp - expected_p).max() < 1e-10
        # positron band streams the opposite way
        assert np.abs(rm + expected_p).max() < 1e-10

    def test_mass_conserved_by_advection(self):
        state = _random_state(5)
        rp, rm = free_streaming_rhs(state, CONSTS)
        assert abs(rp.sum()) < 1e-9
        assert abs(rm.sum()) < 1e-9


class TestIntegrate:
    def test_zero_kernel_homogeneous_constant(self):
        spec0 = SpectrumDescriptor(band_limit=0.3, amplitudes=(0, 0, 0, 0),
                                   corr_width=0.12, jump_rate=1.0)
        k0 = build_kernels(spec0, BALL, CONSTS, 1)
        vals = RNG.uniform(size=BALL.n)
        shape = GRID.shape + (BALL.n,)
        state = TransportState(alpha_plus=np.broadcast_to(vals, shape).copy(),
                               alpha_minus=np.broadcast_to(vals, shape).copy(),
                               grid=GRID, ball=BALL)
        traj = integrate(state, k0, dt=0.02, horizon=0.3, consts=CONSTS)
        np.testing.assert_allclose(traj.states[-1].alpha_plus, state.alpha_plus,
                                   atol=1e-13)

    def test_mass_and_l2_diagnostics(self):
        state = _random_state(6)
        times = np.linspace(0, 1.0, 11)
        traj = integrate(state, KERNELS, dt=0.01, horizon=1.0, consts=CONSTS,
                         output_times=times, store_states=False)
        d = traj.diagnostics
        mass0 = d.mass[0]
        assert max(abs(m - mass0) / abs(mass0) for m in d.mass) < 1e-8
        for a, b in zip(d.l2[:-1], d.l2[1:]):
            assert b <= a + 1e-10

    def test_homogeneous_relaxation_matches_expm(self):
        # oracle: eigen/exponential of the linear collision generator
        rng = np.random.default_rng(8)
        ap = rng.uniform(0.2, 1.0, size=BALL.n)
        am = rng.uniform(0.2, 1.0, size=BALL.n)
        shape = GRID.shape + (BALL.n,)
        state = TransportState(
            alpha_plus=np.broadcast_to(ap, shape).copy(),
            alpha_minus=np.broadcast_to(am, shape).copy(),
            grid=GRID, ball=BALL)
        horizon = 1.5
        traj = integrate(state, KERNELS, dt=0.01, horizon=horizon, consts=CONSTS,
                         streaming=False, output_times=np.linspace(0, horizon, 4))
        n = BALL.n
        w, pref = KERNELS.weight, KERNELS.prefactor
        loss = np.diag((KERNELS.k_minus + KERNELS.k_plus).sum(axis=1) * w)
        gen = pref * np.block([[KERNELS.k_minus * w - loss, KERNELS.k_plus * w],
                               [KERNELS.k_plus * w, KERNELS.k_minus * w - loss]])
        evals = np.linalg.eigvalsh(0.5 * (gen + gen.T))
        assert evals.max() <= 1e-10          # dissipative generator
        expm_sol = scipy.linalg.expm(gen * horizon) @ np.concatenate([ap, am])
        got = np.concatenate([traj.states[-1].alpha_plus[0, 0, 0],
                              traj.states[-1].alpha_minus[0, 0, 0]])
        np.testing.assert_allclose(got, expm_sol, atol=1e-8)
        # L2 distance to the mean decreases monotonically
        dists = [np.sum((s.alpha_plus - s.alpha_plus.mean())**2)
                 + np.sum((s.alpha_minus - s.alpha_minus.mean())**2)
                 for s in traj.states]
        for a, b in zip(dists[:-1], dists[1:]):
            assert b <= a + 1e-12

    def test_elastic_shell_mass_conserved(self):
        state = _random_state(9)
        times = np.linspace(0, 1.0, 6)
        traj = integrate(state, ELASTIC, dt=0.01, horizon=1.0, mode="elastic",
                         consts=CONSTS, output_times=times, store_states=False)
        sm = np.asarray(traj.diagnostics.shell_mass)
        scale = np.abs(sm[0]).max()
        assert np.abs(sm - sm[0]).max() / scale < 1e-8

    def test_cfl_violation_raises(self):
        state = _random_state(10)
        with pytest.raises(ValueError, match="CFL"):
            integrate(state, KERNELS, dt=1.0, horizon=1.0, consts=CONSTS)

    def test_stiffness_violation_raises(self):
        spec_hot = SpectrumDescriptor(band_limit=0.3, amplitudes=(500,) * 4,
                                      corr_width=0.12, jump_rate=1.0)
        k_hot = build_kernels(spec_hot, BALL, CONSTS, 1)
        state = _random_state(11)
        with pytest.raises(ValueError, match="stiffness"):
            integrate(state, k_hot, dt=0.02, horizon=0.1, consts=CONSTS,
                      streaming=False)

    def test_nan_guard(self):
        state = _random_state(12)
        state.alpha_plus[0, 0, 0, 0] = np.nan
        with pytest.raises(FloatingPointError):
            integrate(state, KERNELS, dt=0.01, horizon=0.05, consts=CONSTS)

    def test_bad_mode(self):
        state = _random_state(13)
        with pytest.raises(ValueError, match="mode"):
            integrate(state, KERNELS, dt=0.01, horizon=0.1, mode="both")

    def test_diagnostics_csv_export(self, tmp_path):
        from diracsim.transport import write_diagnostics_csv

        state = _random_state(14)
        traj = integrate(state, ELASTIC, dt=0.02, horizon=0.2, mode="elastic",
                         consts=CONSTS, output_times=np.linspace(0, 0.2, 5))
        csv = tmp_path / "diag.csv"
        dump = tmp_path / "fields.npz"
        write_diagnostics_csv(str(csv), traj.diagnostics, traj.states, str(dump))
        lines = csv.read_text().splitlines()
        assert lines[0] == "t,mass,l2,min_alpha,shell_mass_drift"
        assert len(lines) == 6
        drifts = [float(line.split(",")[-1]) for line in lines[1:]]
        assert max(drifts) < 1e-8
        back = np.load(dump)
        assert back["alpha_plus"].shape[0] == 5
