"""Acceptance suite: every headline criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -s`` to see one pass/fail line per
criterion.  The epsilon sweep and the limit comparison share one wave
ensemble at the desk-scale default (grid 256, eps 1/8 .. 1/64, ensemble 16),
so the whole suite finishes in a few minutes on two cores.
"""

import time

import numpy as np
import pytest

from diracsim import cli, harness
from diracsim.algebra import PhysicalConstants, lambda_plus
from diracsim.grid import quasi_1d
from diracsim.randomfield import (SpectrumDescriptor, evolve_jump_path,
                                  mode_lattice, synthesize_field)
from diracsim.transport import (TransportState, build_elastic_kernel,
                                build_kernels, elastic_rhs, integrate,
                                momentum_ball)
from diracsim.wave import SolverConfig, make_wavepacket, run

ALGEBRA_METRICS = {
    "gamma_relations", "dispersion_square", "dispersion_hermitian",
    "projector_idempotent", "projector_complete", "projector_trace",
    "eigenvector_orthonormal", "eigenvector_residual", "weights_closed_vs_trace",
    "weights_sum_one", "weights_symmetric", "weights_range", "cancellation_scalar",
}
WIGNER_METRICS = {
    "wigner_hermitian", "wigner_marginal", "wigner_norm_identity",
    "wigner_redundancy", "pseudodiff_symbol", "pseudodiff_multiplier",
}


def _announce(num, label, ok, detail=""):
    verdict = "PASS" if ok else "FAIL"
    print(f"[{verdict}] criterion {num}: {label}  {detail}")
    assert ok, f"criterion {num} failed: {label} {detail}"


@pytest.fixture(scope="module")
def desk_config():
    cfg = harness.load_config()
    cfg["threads"] = 2
    return cfg


@pytest.fixture(scope="module")
def identity_records(desk_config):
    t0 = time.perf_counter()
    records = harness.run_identity_suite(desk_config)
    return records, time.perf_counter() - t0


@pytest.fixture(scope="module")
def sweep_results(desk_config):
    t0 = time.perf_counter()
    records, fit = harness.run_cross_mode_sweep(desk_config)
    return records, fit, time.perf_counter() - t0


def test_criterion_1_exact_algebra(identity_records):
    records, elapsed = identity_records
    algebra = [r for r in records if r.metric in ALGEBRA_METRICS]
    assert len(algebra) == len(ALGEBRA_METRICS)
    worst = max(r.value for r in algebra)
    ok = worst < 1e-12 and elapsed < 10.0
    _announce(1, "exact-algebra suite (residual < 1e-12, 1000 points, < 10 s)",
              ok, f"max residual {worst:.2e}, {elapsed:.2f} s")


def test_criterion_2_wigner_identities(identity_records):
    records, elapsed = identity_records
    wig = [r for r in records if r.metric in WIGNER_METRICS]
    assert len(wig) == len(WIGNER_METRICS)
    worst = max(r.value for r in wig)
    ok = worst < 1e-10 and elapsed < 60.0
    _announce(2, "Wigner identity suite (residuals < 1e-10, < 1 min)",
              ok, f"max residual {worst:.2e}, {elapsed:.2f} s")


def test_criterion_3_wave_solver(desk_config):
    grid = quasi_1d(256)
    consts = PhysicalConstants(**desk_config["constants"])
    spec = SpectrumDescriptor.from_dict(desk_config["spectrum"])
    eps = 1 / 16
    p0 = np.array([0.0, 0.0, 0.5])
    horizon = 1.0

    # L2 drift under the random field
    lattice = mode_lattice(grid, eps, spec.band_limit)
    path = evolve_jump_path(spec, lattice, horizon / eps + 1e-6, 314, grid.d_eff)
    pk = make_wavepacket((0, 0, np.pi), p0, 0.8, "plus", 1, grid, eps, consts)
    traj = run(pk, SolverConfig(dt=eps / 8), path, horizon,
               output_times=np.linspace(0, horizon, 9))
    norms = [s.norm2() for s in traj.states]
    drift = max(abs(n - norms[0]) / norms[0] for n in norms) / horizon

    # free plane-wave phase
    pw = make_wavepacket((0, 0, np.pi), p0, np.inf, "plus", 1, grid, eps, consts)
    trajf = run(pw, SolverConfig(dt=0.02), None, horizon, output_times=[horizon])
    lam = float(lambda_plus(p0, consts))
    expected = np.exp(-1j * consts.c * lam * horizon / eps) * pw.psi
    phase_err = np.abs(trajf.states[-1].psi - expected).max() / np.abs(pw.psi).max()

    # group velocity of a momentum-narrow packet
    pkv = make_wavepacket((0, 0, np.pi), p0, 1.0, "plus", 1, grid, eps, consts)
    times = np.linspace(0, horizon, 6)
    trajv = run(pkv, SolverConfig(dt=0.02), None, horizon, output_times=times)
    L = grid.lengths[2]
    x = grid.axis_coords(2)
    cents = []
    for s in trajv.states:
        dens = s.density()[0, 0, :]
        z = np.sum(dens * np.exp(2j * np.pi * x / L)) / dens.sum()
        cents.append(np.angle(z))
    cents = np.unwrap(cents) * L / (2 * np.pi)
    v_fit = np.polyfit(times, cents, 1)[0]
    v_exp = consts.c * p0[2] / lam
    v_err = abs(v_fit - v_exp) / v_exp

    ok = drift < 1e-10 and phase_err < 1e-8 and v_err < 0.02
    _announce(3, "wave solver (drift < 1e-10/t, phase < 1e-8/t, velocity 2%)",
              ok, f"drift {drift:.2e}, phase {phase_err:.2e}, velocity err {v_err:.3%}")


def test_criterion_4_random_field(desk_config):
    grid = quasi_1d(256)
    spec = SpectrumDescriptor.from_dict(desk_config["spectrum"])
    eps = 1 / 8
    lattice = mode_lattice(grid, eps, spec.band_limit)

    # synthesized-field realness
    residue = 0.0
    for seed in range(5):
        path = evolve_jump_path(spec, lattice, 2.0, seed, grid.d_eff)
        sample = synthesize_field(path, 1.0, grid)
        residue = max(residue, sample.imag_residue)

    # autocorrelation decay exponent over 1e4 paths
    n_paths, horizon = 10_000, 3.5
    t_lags = np.linspace(0.0, 1.5, 7)
    probe = lattice.n_modes // 2
    base = np.linspace(0.0, horizon - t_lags[-1], 4)
    cov = np.zeros(len(t_lags))
    cross = np.zeros((2, len(t_lags)))
    cross_sq = np.zeros((2, len(t_lags)))
    for i in range(n_paths):
        path = evolve_jump_path(spec, lattice, horizon, 500_000 + i, 1)
        for j, tl in enumerate(t_lags):
            acc = 0.0
            acc01 = 0.0
            acc23 = 0.0
            for s in base:
                older = path.state_at(s)
                newer = path.state_at(s + tl)
                acc += (newer[0, probe] * np.conj(older[0, probe])).real
                acc01 += (newer[0, probe] * np.conj(older[1, probe])).real
                acc23 += (newer[2, probe] * np.conj(older[3, probe])).real
            cov[j] += acc / len(base)
            cross[0, j] += acc01 / len(base)
            cross[1, j] += acc23 / len(base)
            cross_sq[0, j] += (acc01 / len(base)) ** 2
            cross_sq[1, j] += (acc23 / len(base)) ** 2
    cov /= n_paths
    cross /= n_paths
    cross_sq /= n_paths
    rate_fit = -np.polyfit(t_lags, np.log(cov), 1)[0]
    rate_err = abs(rate_fit - spec.jump_rate)

    stderr = np.sqrt(np.maximum(cross_sq - cross**2, 1e-30) / n_paths)
    cross_ok = bool(np.all(np.abs(cross) <= 3 * stderr + 1e-14))

    ok = residue < 1e-12 and rate_err < 0.1 and cross_ok
    _announce(4, "random field (realness < 1e-12, decay rate +-0.1 @ 1e4 paths, "
                 "cross-corr within 3 sigma)",
              ok, f"residue {residue:.2e}, rate err {rate_err:.3f}, cross ok {cross_ok}")


def test_criterion_5_transport(desk_config):
    grid = quasi_1d(128)
    consts = PhysicalConstants(**desk_config["constants"])
    spec = SpectrumDescriptor.from_dict(desk_config["spectrum"])
    ball = momentum_ball(grid, 1 / 8, 0.9)
    rng = np.random.default_rng(5)
    shape = grid.shape + (ball.n,)
    state = TransportState(alpha_plus=rng.uniform(0.1, 1.0, size=shape),
                           alpha_minus=rng.uniform(0.1, 1.0, size=shape),
                           grid=grid, ball=ball)

    dt, horizon = 0.01, 1.0
    kernels = build_kernels(spec, ball, consts, grid.d_eff)
    times = np.arange(0.0, horizon + dt / 2, dt)         # diagnostics every step
    traj = integrate(state, kernels, dt, horizon, consts=consts,
                     output_times=times, store_states=False)
    d = traj.diagnostics
    mass_drift = max(abs(m - d.mass[0]) / abs(d.mass[0]) for m in d.mass)
    l2_growth = max(max(b - a for a, b in zip(d.l2[:-1], d.l2[1:])), 0.0)

    elastic = build_elastic_kernel(spec, ball, consts)
    traj_el = integrate(state, elastic, dt, horizon, mode="elastic", consts=consts,
                        output_times=np.linspace(0, horizon, 11), store_states=False)
    sm = np.asarray(traj_el.diagnostics.shell_mass)
    shell_drift = float(np.abs(sm - sm[0]).max() / np.abs(sm[0]).max())

    # decoupling: a positron-band perturbation leaves d(alpha+)/dt untouched
    rp0, _ = elastic_rhs(state, elastic)
    pert = state.copy()
    pert.alpha_minus = pert.alpha_minus + 0.3
    rp1, _ = elastic_rhs(pert, elastic)
    decoupled = bool(np.array_equal(rp0, rp1))

    ok = mass_drift < 1e-8 and l2_growth < 1e-10 and shell_drift < 1e-8 and decoupled
    _announce(5, "transport (mass < 1e-8, L2 monotone 1e-10/step, shell < 1e-8, "
                 "elastic decoupling exact)",
              ok, f"mass {mass_drift:.2e}, L2 growth {l2_growth:.2e}, "
                  f"shell {shell_drift:.2e}, decoupled {decoupled}")


def test_criterion_6_cross_mode_scaling(sweep_results):
    records, fit, elapsed = sweep_results
    verdicts = [r for r in records if r.metric == "cross_mode_ratio_monotone"]
    t0_rec = next(r for r in records if r.metric == "cross_mode_initial_pairing")
    slopes = [r for r in records if r.metric == "cross_mode_loglog_slope"]
    ok = (all(r.value >= 0.5 for r in verdicts)
          and t0_rec.value < 1e-10
          and all(r.value >= 0.3 for r in slopes)
          and elapsed < 1200.0)
    detail = (f"ratios/sqrt(eps) {[['%.3g' % x for x in d['ratio']] for d in fit.values()]}, "
              f"slopes {[round(r.value, 2) for r in slopes]}, {elapsed:.0f} s")
    _announce(6, "cross-mode pairing bounded by C sqrt(eps) "
                 "(ratio non-increasing within 1 sigma, < 20 min)", ok, detail)


def test_criterion_7_kinetic_limit_trend(desk_config, sweep_results):
    # reuses the cached wave ensemble from criterion 6
    records = harness.run_limit_comparison(desk_config)
    d_mono = [r for r in records if r.metric == "limit_D_monotone"]
    v_mono = [r for r in records if r.metric == "limit_V_monotone"]
    init = [r for r in records if r.metric == "limit_initial_match"]
    d_vals = [(r.params["eps"], r.params["f"], r.value) for r in records
              if r.metric == "limit_discrepancy_D"]
    ok = (all(r.value >= 0.5 for r in d_mono)
          and all(r.value >= 0.5 for r in v_mono)
          and all(r.value < 1e-8 for r in init))
    _announce(7, "kinetic-limit trend (D and V decrease across the sweep)",
              ok, f"D values {[(e, f, round(v, 6)) for e, f, v in d_vals]}")


def test_criterion_8_determinism(desk_config, tmp_path):
    def table(name):
        records = harness.run_identity_suite(desk_config)
        path = tmp_path / name
        harness.write_records_csv(str(path), records)
        text = path.read_text()
        return "\n".join(",".join(line.split(",")[:-1])
                         for line in text.splitlines())

    same_suite = table("a.csv") == table("b.csv")

    m1 = harness.run_wave_member(desk_config, 1 / 8, 4321)
    m2 = harness.run_wave_member(desk_config, 1 / 8, 4321)
    same_member = (m1["cross_f1"] == m2["cross_f1"]
                   and np.array_equal(m1["alpha_series_f1"], m2["alpha_series_f1"]))

    ok = same_suite and same_member
    _announce(8, "determinism (byte-identical tables modulo wall time)",
              ok, f"suite {same_suite}, member {same_member}")
