"""Experiment orchestration: configs, result records, and the three headline
experiments (exact-identity suite, cross-mode epsilon sweep, wave-vs-transport
limit comparison).

Configs are versioned JSON; see DEFAULT_CONFIG for the schema and the
desk-scale defaults.  Every record is reproducible from (config, seed): RNG
streams are spawned per (experiment, eps, member) from the root seed, and all
aggregation happens in deterministic order.  Result tables are byte-identical
across repeated runs except for the trailing wall-time column.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .algebra import (GAMMA, I4, PhysicalConstants, cancellation_anticommutator,
                      cancellation_constant, dispersion_matrix, eigenbasis,
                      lambda_plus, projectors, scattering_weights,
                      scattering_weights_trace)
from .grid import Grid, quasi_1d
from .randomfield import SpectrumDescriptor, evolve_jump_path, mode_lattice
from .transport import TransportState, build_kernels, integrate, momentum_ball
from .wave import (SolverConfig, SpinorField, make_wavepacket, random_band_limited,
                   run)
from .wigner import (mode_decompose, verify_pseudodiff_identities,
                     wigner_transform)

CONFIG_VERSION = 1

DEFAULT_CONFIG = {
    "version": CONFIG_VERSION,
    "seed": 2024,
    "grid": {"points": 256, "length": 2 * np.pi},
    "constants": {"m0": 1.0, "c": 1.0, "e": 1.0},
    "eps_list": [1 / 8, 1 / 16, 1 / 32, 1 / 64],
    "ensemble": 16,
    "horizon": 0.5,
    "steps_per_eps": 8,
    "samples_per_period": 8,
    "spectrum": {"band_limit": 0.25, "amplitudes": [6.0, 6.0, 6.0, 6.0],
                 "corr_length": 0.1, "jump_rate": 1.0},
    "packet": {"center": np.pi, "momentum": 0.5, "width": 0.8,
               "branch": "plus", "polarization": 1},
    "ball_radius": 0.9,
    "alpha_time": 1.0,
    "transport": {"dt": 0.01, "mode": "inelastic", "horizon": 0.5},
    "n_compare_times": 6,
    "identity_points": 1000,
    "field_paths": 10000,
    "threads": 1,
}


class ConfigError(ValueError):
    pass


def load_config(path: str | None = None, overrides: dict | None = None) -> dict:
    """Defaults, optionally updated from a JSON file, then from overrides."""
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        try:
            with open(path) as fh:
                user = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        for key, val in user.items():
            if isinstance(val, dict) and isinstance(cfg.get(key), dict):
                cfg[key].update(val)
            else:
                cfg[key] = val
    for key, val in (overrides or {}).items():
        if val is not None:
            cfg[key] = val
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict):
    """Schema and commensurability checks; raises ConfigError with specifics."""
    if cfg.get("version") != CONFIG_VERSION:
        raise ConfigError(f"config version {cfg.get('version')} != {CONFIG_VERSION}")
    required = ["seed", "grid", "constants", "eps_list", "ensemble", "horizon",
                "spectrum", "packet", "ball_radius", "transport"]
    for key in required:
        if key not in cfg:
            raise ConfigError(f"missing config key: {key}")
    n = cfg["grid"]["points"]
    if not (isinstance(n, int) and n >= 8 and n % 2 == 0):
        raise ConfigError(f"grid.points must be an even integer >= 8, got {n}")
    eps_list = cfg["eps_list"]
    if any(e2 >= e1 for e1, e2 in zip(eps_list, eps_list[1:])):
        raise ConfigError(f"eps_list must be strictly decreasing: {eps_list}")
    if any(e <= 0 for e in eps_list):
        raise ConfigError("eps values must be positive")
    L = cfg["grid"]["length"]
    p0 = cfg["packet"]["momentum"]
    for eps in eps_list:
        m = p0 * L / (2 * np.pi * eps)
        if abs(m - round(m)) > 1e-9:
            raise ConfigError(
                f"packet momentum {p0} is not on the eps={eps} lattice (needs "
                f"multiples of {2 * np.pi * eps / L})")
    edge = min(eps_list) * n / 4 * 2 * np.pi / L
    if cfg["ball_radius"] > edge:
        raise ConfigError(f"ball_radius {cfg['ball_radius']} exceeds the xi band "
                          f"edge {edge} at the smallest eps")
    consts_keys = set(cfg["constants"])
    if consts_keys != {"m0", "c", "e"}:
        raise ConfigError(f"constants must have keys m0, c, e; got {sorted(consts_keys)}")


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


@dataclass
class ResultRecord:
    """One measured quantity; reproducible from (config, seed)."""

    metric: str
    params: dict
    value: float
    error: float
    seed: int
    code_version: str = __version__
    wall_time: float = 0.0

    def passed(self) -> bool | None:
        if "threshold" in self.params:
            return bool(self.value <= self.params["threshold"])
        if "expect_true" in self.params:
            return bool(self.value >= 0.5)
        return None


CSV_COLUMNS = ["metric", "params", "value", "error", "seed", "code_version", "wall_time"]


def write_records_csv(path: str, records: list[ResultRecord]):
    """Fixed column order; floats via repr for byte-stable output."""
    with open(path, "w") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for r in records:
            params = json.dumps(r.params, sort_keys=True).replace('"', "'")
            fh.write(f'{r.metric},"{params}",{r.value!r},{r.error!r},'
                     f"{r.seed},{r.code_version},{r.wall_time!r}\n")


def write_manifest(out_dir: str, cfg: dict, extra: dict | None = None):
    os.makedirs(out_dir, exist_ok=True)
    manifest = {"config_hash": config_hash(cfg), "code_version": __version__,
                "config": cfg}
    manifest.update(extra or {})
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


def _consts(cfg) -> PhysicalConstants:
    return PhysicalConstants(**cfg["constants"])


def _grid(cfg) -> Grid:
    return quasi_1d(cfg["grid"]["points"], cfg["grid"]["length"])


def _spectrum(cfg) -> SpectrumDescriptor:
    return SpectrumDescriptor.from_dict(
        {**cfg["spectrum"], "corr_length": cfg["spectrum"]["corr_length"]})


def _member_seeds(root_seed: int, tag: str, count: int) -> list[int]:
    ss = np.random.SeedSequence(entropy=root_seed,
                                spawn_key=(int.from_bytes(tag.encode()[:8].ljust(8, b"\0"),
                                                          "little"),))
    return [int(s.generate_state(1)[0]) for s in ss.spawn(count)]


# ---------------------------------------------------------------------------
# identity suite
# ---------------------------------------------------------------------------

def run_identity_suite(config: dict) -> list[ResultRecord]:
    """Exact-identity residuals: gamma relations, dispersion/eigensystem,
    scattering weights vs the trace oracle, the cancellation identity, and
    the Wigner transform identities on band-limited data."""
    t_start = time.perf_counter()
    records = []
    seed = config["seed"]
    npts = config.get("identity_points", 1000)
    rng = np.random.Generator(np.random.Philox(key=seed))

    def rec(metric, value, threshold, **params):
        records.append(ResultRecord(
            metric=metric, params={"threshold": threshold, **params},
            value=float(value), error=0.0, seed=seed,
            wall_time=time.perf_counter() - t_start))

    # gamma relations, exact
    g = GAMMA.gamma
    res = 0.0
    res = max(res, np.abs(g[0].conj().T - g[0]).max())
    for k in (1, 2, 3):
        res = max(res, np.abs(g[k].conj().T + g[k]).max())
        res = max(res, np.abs(GAMMA.g0gk[k].conj().T - GAMMA.g0gk[k]).max())
        res = max(res, np.abs(g[k] @ g[k] + I4).max())
    res = max(res, np.abs(g[0] @ g[0] - I4).max())
    for m in range(4):
        for nn in range(4):
            if m != nn:
                res = max(res, np.abs(g[m] @ g[nn] + g[nn] @ g[m]).max())
    rec("gamma_relations", res, 0.0)

    try:
        consts = _consts(config)
        consts_ok = True
    except ValueError as exc:
        records.append(ResultRecord(
            metric="eigensystem_precondition", value=1.0, error=0.0, seed=seed,
            params={"rejected": True, "reason": str(exc), "expect_true": True},
            wall_time=time.perf_counter() - t_start))
        consts_ok = False

    if consts_ok:
        xi = rng.normal(size=(npts, 3)) * 2.0
        q = rng.normal(size=(npts, 3)) * 2.0

        qm = dispersion_matrix(xi, consts)
        lam2 = consts.mc**2 + np.sum(xi * xi, axis=-1)
        rec("dispersion_square", np.abs(qm @ qm - lam2[:, None, None] * I4).max(), 1e-12)
        rec("dispersion_hermitian", np.abs(qm - np.conj(np.swapaxes(qm, -1, -2))).max(), 1e-12)

        pp, pm = projectors(xi, consts)
        rec("projector_idempotent", np.abs(pp @ pp - pp).max(), 1e-12)
        rec("projector_complete", np.abs(pp + pm - I4).max(), 1e-12)
        rec("projector_trace", np.abs(np.trace(pp, axis1=-2, axis2=-1) - 2).max(), 1e-12)

        B = eigenbasis(xi, consts)
        gram = np.einsum("nai,naj->nij", np.conj(B), B)
        rec("eigenvector_orthonormal", np.abs(gram - I4).max(), 1e-12)
        lam = lambda_plus(xi, consts)
        sign = np.array([1.0, 1.0, -1.0, -1.0])
        qb = np.einsum("nab,nbj->naj", qm, B)
        rec("eigenvector_residual",
            np.abs(qb - sign[None, None, :] * lam[:, None, None] * B).max(), 1e-12)

        w_closed = scattering_weights(xi, q, consts)
        w_trace = scattering_weights_trace(xi, q, consts)
        rec("weights_closed_vs_trace", np.abs(w_closed.omega - w_trace.omega).max(), 1e-12)
        rec("weights_sum_one",
            np.abs(w_closed.omega + w_trace.omega_tilde - 1).max(), 1e-12)
        w_sym = scattering_weights(q, xi, consts)
        rec("weights_symmetric", np.abs(w_closed.omega - w_sym.omega).max(), 1e-12)
        rec("weights_range",
            max(float((-w_closed.omega).max()), float((w_closed.omega - 1).max()), 0.0),
            1e-12)

        res_c = 0.0
        for k in range(4):
            mats = np.stack([cancellation_anticommutator(k, xi[i], q[i], consts)
                             for i in range(0, npts, max(1, npts // 200))])
            ck = np.stack([cancellation_constant(k, xi[i], q[i], consts)
                           for i in range(0, npts, max(1, npts // 200))])
            res_c = max(res_c, float(np.abs(mats - ck[:, None, None] * I4).max()))
        rec("cancellation_scalar", res_c, 1e-12)

        # Wigner identity block (criterion-2 scale grid)
        wg = quasi_1d(128, config["grid"]["length"])
        eps_w = 0.25
        u = random_band_limited(wg, eps_w, seed + 1, band_fraction=0.15, consts=consts)
        v = random_band_limited(wg, eps_w, seed + 2, band_fraction=0.15, consts=consts)
        wd = wigner_transform(u)
        rec("wigner_hermitian", wd.hermiticity_residual(), 1e-12)
        marg = wd.marginal()
        outer = np.einsum("axyz,bxyz->xyzab", u.psi, np.conj(u.psi))
        rec("wigner_marginal", np.abs(marg - outer).max(), 1e-10)
        target = (2 * np.pi * eps_w) ** (-wg.d_eff / 2) * u.norm2()
        rec("wigner_norm_identity", abs(wd.l2_norm() - target) / target, 1e-10)
        rec("wigner_redundancy", wd.redundancy_residual(), 1e-10)

        def symbol_axial(zeta):
            # linear scalar symbol on the resolved axis: P(zeta) = zeta_3 I4
            out = np.zeros(zeta.shape[:-1] + (4, 4), dtype=complex)
            idx = np.arange(4)
            out[..., idx, idx] = zeta[..., 2][..., None]
            return out

        modes = np.array([[0, 0, 2], [0, 0, -2], [0, 0, 0]])
        coeffs = np.stack([0.3 * I4, 0.3 * I4, 0.1 * GAMMA.g0gk[1]])
        report = verify_pseudodiff_identities(u, v, symbol=symbol_axial,
                                              multiplier=(modes, coeffs))
        rec("pseudodiff_symbol", report.residual_symbol / max(report.scale_symbol, 1e-30),
            1e-10)
        rec("pseudodiff_multiplier",
            report.residual_multiplier / max(report.scale_multiplier, 1e-30), 1e-10)

    return records


# ---------------------------------------------------------------------------
# shared wave ensemble (serves the cross-mode sweep and the limit comparison)
# ---------------------------------------------------------------------------

def _test_functions(grid: Grid, eps: float, cfg: dict) -> dict[str, np.ndarray]:
    """Smooth periodic-in-x, rapidly decaying-in-xi test functions on the
    full Wigner phase-space lattice."""
    p0 = cfg["packet"]["momentum"]
    L = grid.lengths[2]
    x = grid.axis_coords(2)
    xi = grid.wigner_xi(eps, 2)
    xc = cfg["packet"]["center"]
    fx1 = np.exp(4.0 * (np.cos(2 * np.pi * (x - xc) / L) - 1.0))
    fxi1 = np.exp(-((xi - p0) ** 2) / (2 * 0.2**2))
    fx2 = np.exp(2.0 * (np.cos(2 * np.pi * (x - xc) / L) - 1.0))
    fxi2 = (1.0 + 0.5 * (xi - p0)) * np.exp(-((xi - p0) ** 2) / (2 * 0.3**2))
    shape = (1, 1, len(x), 1, 1, len(xi))
    return {
        "f1": (fx1[:, None] * fxi1[None, :]).reshape(shape),
        "f2": (fx2[:, None] * fxi2[None, :]).reshape(shape),
    }


def _ball_mask(grid: Grid, eps: float, radius: float) -> np.ndarray:
    """Indicator of |xi| <= radius on the Wigner lattice; the wave-side
    density pairings use exactly the transport solver's momentum ball so the
    two sides integrate over the identical lattice set."""
    mesh = np.meshgrid(*(grid.wigner_xi(eps, a) for a in range(3)), indexing="ij")
    xi2 = sum(m * m for m in mesh)
    return (xi2 <= radius**2).astype(float).reshape((1, 1, 1) + xi2.shape)


def _snapshot_times(cfg: dict, eps: float, consts: PhysicalConstants) -> np.ndarray:
    """Output cadence resolving the cross-mode oscillation 2 c lambda / eps."""
    horizon = cfg["horizon"]
    lam_max = float(lambda_plus(np.array([0.0, 0.0, cfg["ball_radius"]]), consts))
    omega = 2 * consts.c * lam_max / eps
    per_period = cfg.get("samples_per_period", 8)
    n = max(24, int(np.ceil(horizon * omega * per_period / (2 * np.pi))))
    return np.linspace(0.0, horizon, n + 1)


def run_wave_member(cfg: dict, eps: float, member_seed: int) -> dict:
    """One realization: random field path, packet propagation, per-snapshot
    cross-mode and density pairings.  Pure function of its arguments."""
    grid = _grid(cfg)
    consts = _consts(cfg)
    spec = _spectrum(cfg)
    lattice = mode_lattice(grid, eps, spec.band_limit)
    horizon = cfg["horizon"]
    alpha_t = cfg.get("alpha_time", 1.0)
    path = evolve_jump_path(spec, lattice, horizon / eps**alpha_t * 1.001 + 1e-9,
                            member_seed, grid.d_eff)
    pk = cfg["packet"]
    psi0 = make_wavepacket((0.0, 0.0, pk["center"]), (0.0, 0.0, pk["momentum"]),
                           pk["width"], pk["branch"], pk["polarization"],
                           grid, eps, consts)
    fs = _test_functions(grid, eps, cfg)
    mask = _ball_mask(grid, eps, cfg["ball_radius"])
    fs_masked = {name: f * mask for name, f in fs.items()}
    times = _snapshot_times(cfg, eps, consts)
    out = {"times": times, "c": {k: [] for k in fs}, "d": {k: [] for k in fs},
           "alpha_plus": {k: [] for k in fs}, "mass_plus": [], "mass_minus": []}

    def observer(t, state: SpinorField):
        wd = wigner_transform(state)
        md = mode_decompose(wd)
        cell = md.phase_space_cell
        for name, f in fs.items():
            out["c"][name].append(np.einsum("xyzMNPij,xyzMNP->ij", md.c, f) * cell)
            out["d"][name].append(np.einsum("xyzMNPij,xyzMNP->ij", md.d, f) * cell)
            out["alpha_plus"][name].append(
                float(np.sum(md.alpha_plus * fs_masked[name]) * cell))
        out["mass_plus"].append(float(md.alpha_plus.sum() * cell))
        out["mass_minus"].append(float(md.alpha_minus.sum() * cell))

    cfgrun = SolverConfig(dt=eps / cfg.get("steps_per_eps", 8), alpha_time=alpha_t)
    run(psi0, cfgrun, path, horizon, observers={"phase": observer},
        output_times=times, store_states=False)

    # time-integrated cross pairings per test function
    summary = {"times": times}
    for name in fs:
        c_arr = np.asarray(out["c"][name])          # (nt, 2, 2)
        d_arr = np.asarray(out["d"][name])
        total = 0.0
        for i in range(2):
            for j in range(2):
                total += abs(np.trapezoid(c_arr[:, i, j], times))
                total += abs(np.trapezoid(d_arr[:, i, j], times))
        summary[f"cross_{name}"] = float(total)
        summary[f"alpha_series_{name}"] = np.asarray(out["alpha_plus"][name])
        summary[f"cross_t0_{name}"] = float(np.abs(c_arr[0]).sum() + np.abs(d_arr[0]).sum())
    summary["mass_plus"] = np.asarray(out["mass_plus"])
    summary["mass_minus"] = np.asarray(out["mass_minus"])
    return summary


def _ensemble_cache_key(cfg: dict) -> str:
    keys = ["seed", "grid", "constants", "eps_list", "ensemble", "horizon",
            "steps_per_eps", "samples_per_period", "spectrum", "packet",
            "ball_radius", "alpha_time"]
    return config_hash({k: cfg[k] for k in keys})


_ENSEMBLE_CACHE: dict = {}


def _member_task(args):
    cfg, eps, seed = args
    return run_wave_member(cfg, eps, seed)


def run_wave_ensemble(cfg: dict) -> dict:
    """All (eps, member) wave runs; cached in-process per config."""
    key = _ensemble_cache_key(cfg)
    if key in _ENSEMBLE_CACHE:
        return _ENSEMBLE_CACHE[key]
    result = {}
    threads = cfg.get("threads", 1)
    for eps in cfg["eps_list"]:
        seeds = _member_seeds(cfg["seed"], f"sweep-eps-{eps!r}", cfg["ensemble"])
        tasks = [(cfg, eps, s) for s in seeds]
        if threads > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                members = list(pool.map(_member_task, tasks))
        else:
            members = [_member_task(t) for t in tasks]
        result[eps] = {"seeds": seeds, "members": members}
    _ENSEMBLE_CACHE[key] = result
    return result


# ---------------------------------------------------------------------------
# cross-mode sweep
# ---------------------------------------------------------------------------

def run_cross_mode_sweep(config: dict) -> tuple[list[ResultRecord], dict]:
    """Ensemble means of the time-integrated cross-mode pairings per eps,
    the log-log slope fit, and the bounded-ratio verdict."""
    if len(config["eps_list"]) < 3:
        raise ConfigError("cross-mode sweep needs at least 3 eps values")
    if config["ensemble"] < 8:
        raise ConfigError("cross-mode sweep needs ensemble >= 8")
    t_start = time.perf_counter()
    data = run_wave_ensemble(config)
    records = []
    seed = config["seed"]
    eps_arr = np.asarray(config["eps_list"], dtype=float)
    fnames = ["f1", "f2"]
    fit = {}

    # t = 0 purity on exactly branch-pure (plane-wave) data
    grid = _grid(config)
    consts = _consts(config)
    eps0 = config["eps_list"][0]
    pk = config["packet"]
    plane = make_wavepacket((0, 0, pk["center"]), (0, 0, pk["momentum"]), np.inf,
                            pk["branch"], pk["polarization"], grid, eps0, consts)
    md0 = mode_decompose(wigner_transform(plane))
    fs = _test_functions(grid, eps0, config)
    cell = md0.phase_space_cell
    t0_val = 0.0
    for f in fs.values():
        t0_val += float(np.abs(np.einsum("xyzMNPij,xyzMNP->ij", md0.c, f) * cell).sum())
    records.append(ResultRecord(
        metric="cross_mode_initial_pairing", value=t0_val, error=0.0, seed=seed,
        params={"threshold": 1e-10, "eps": eps0},
        wall_time=time.perf_counter() - t_start))

    for fname in fnames:
        means, errs = [], []
        for eps in config["eps_list"]:
            vals = np.asarray([m[f"cross_{fname}"] for m in data[eps]["members"]])
            mean = float(vals.mean())
            err = float(vals.std(ddof=1) / np.sqrt(len(vals)))
            means.append(mean)
            errs.append(err)
            records.append(ResultRecord(
                metric="cross_mode_pairing", value=mean, error=err, seed=seed,
                params={"eps": eps, "f": fname, "ensemble": len(vals)},
                wall_time=time.perf_counter() - t_start))
        means = np.asarray(means)
        errs = np.asarray(errs)
        ratio = means / np.sqrt(eps_arr)
        ratio_err = errs / np.sqrt(eps_arr)
        for e, r, re in zip(eps_arr, ratio, ratio_err):
            records.append(ResultRecord(
                metric="cross_mode_ratio", value=float(r), error=float(re), seed=seed,
                params={"eps": float(e), "f": fname},
                wall_time=time.perf_counter() - t_start))
        slope = float(np.polyfit(np.log(eps_arr), np.log(means), 1)[0])
        fit[fname] = {"slope": slope, "means": means.tolist(), "ratio": ratio.tolist()}
        records.append(ResultRecord(
            metric="cross_mode_loglog_slope", value=slope, error=0.0, seed=seed,
            params={"f": fname, "min_slope": 0.3},
            wall_time=time.perf_counter() - t_start))
        # non-increasing ratio within 1 sigma as eps decreases
        ok = all(ratio[i + 1] <= ratio[i] + np.hypot(ratio_err[i], ratio_err[i + 1])
                 for i in range(len(ratio) - 1))
        records.append(ResultRecord(
            metric="cross_mode_ratio_monotone", value=float(ok), error=0.0, seed=seed,
            params={"f": fname, "expect_true": True},
            wall_time=time.perf_counter() - t_start))
    return records, fit


# ---------------------------------------------------------------------------
# limit comparison
# ---------------------------------------------------------------------------

def transport_reference(cfg: dict, eps: float) -> dict:
    """Kinetic solve on the eps-matched lattice, initialized from the exact
    packet Wigner data; returns pairings against the test functions."""
    grid = _grid(cfg)
    consts = _consts(cfg)
    spec = _spectrum(cfg)
    pk = cfg["packet"]
    psi0 = make_wavepacket((0, 0, pk["center"]), (0, 0, pk["momentum"]), pk["width"],
                           pk["branch"], pk["polarization"], grid, eps, consts)
    md0 = mode_decompose(wigner_transform(psi0))
    ball = momentum_ball(grid, eps, cfg["ball_radius"])
    nx = grid.shape
    ap0 = md0.alpha_plus.reshape(nx + (-1,))[..., ball.wigner_flat_index]
    am0 = md0.alpha_minus.reshape(nx + (-1,))[..., ball.wigner_flat_index]
    state = TransportState(alpha_plus=np.ascontiguousarray(ap0),
                           alpha_minus=np.ascontiguousarray(am0),
                           grid=grid, ball=ball)
    kernels = build_kernels(spec, ball, consts, grid.d_eff)
    times = np.linspace(0.0, cfg["horizon"], cfg.get("n_compare_times", 6) + 1)
    traj = integrate(state, kernels, cfg["transport"]["dt"], cfg["horizon"],
                     mode="inelastic", consts=consts, output_times=times,
                     store_states=True)
    fs = _test_functions(grid, eps, cfg)
    w = grid.cell * ball.weight
    pairings = {}
    for name, f in fs.items():
        fball = f.reshape(nx + (-1,))[..., ball.wigner_flat_index]
        pairings[name] = np.asarray([float(np.sum(s.alpha_plus * fball) * w)
                                     for s in traj.states])
    return {"times": times, "pairings": pairings, "diagnostics": traj.diagnostics}


def run_limit_comparison(config: dict) -> list[ResultRecord]:
    """D(eps) = max_t |ensemble mean pairing - transport pairing| and the
    ensemble variance V(eps), with monotone-trend verdicts."""
    if len(config["eps_list"]) < 3:
        raise ConfigError("limit comparison needs at least 3 eps values")
    t_start = time.perf_counter()
    data = run_wave_ensemble(config)
    records = []
    seed = config["seed"]
    fnames = ["f1", "f2"]
    d_by_f = {f: [] for f in fnames}
    derr_by_f = {f: [] for f in fnames}
    v_by_f = {f: [] for f in fnames}
    verr_by_f = {f: [] for f in fnames}
    n_members = config["ensemble"]

    for eps in config["eps_list"]:
        ref = transport_reference(config, eps)
        fine = data[eps]["members"][0]["times"]
        sel = [int(np.argmin(np.abs(fine - t))) for t in ref["times"]]
        for fname in fnames:
            series = np.stack([m[f"alpha_series_{fname}"][sel]
                               for m in data[eps]["members"]])
            mean = series.mean(axis=0)
            stderr = series.std(axis=0, ddof=1) / np.sqrt(series.shape[0])
            var = series.var(axis=0, ddof=1)
            diff = np.abs(mean - ref["pairings"][fname])
            i_max = int(np.argmax(diff))
            d_val = float(diff[i_max])
            d_err = float(stderr[i_max])
            v_val = float(var.max())
            # sampling error of a variance estimate: s^2 sqrt(2/(n-1))
            v_err = v_val * np.sqrt(2.0 / max(n_members - 1, 1))
            d_by_f[fname].append(d_val)
            derr_by_f[fname].append(d_err)
            v_by_f[fname].append(v_val)
            verr_by_f[fname].append(v_err)
            records.append(ResultRecord(
                metric="limit_discrepancy_D", value=d_val, error=d_err, seed=seed,
                params={"eps": eps, "f": fname},
                wall_time=time.perf_counter() - t_start))
            records.append(ResultRecord(
                metric="limit_variance_V", value=v_val, error=v_err, seed=seed,
                params={"eps": eps, "f": fname},
                wall_time=time.perf_counter() - t_start))
            t0_gap = abs(mean[0] - ref["pairings"][fname][0])
            records.append(ResultRecord(
                metric="limit_initial_match", value=float(t0_gap), error=0.0,
                seed=seed, params={"eps": eps, "f": fname, "threshold": 1e-8},
                wall_time=time.perf_counter() - t_start))

    for fname in fnames:
        d = d_by_f[fname]
        derr = derr_by_f[fname]
        v = v_by_f[fname]
        verr = verr_by_f[fname]
        ok_d = all(d[i + 1] <= d[i] + np.hypot(derr[i], derr[i + 1])
                   for i in range(len(d) - 1))
        ok_v = all(v[i + 1] <= v[i] + np.hypot(verr[i], verr[i + 1])
                   for i in range(len(v) - 1))
        records.append(ResultRecord(
            metric="limit_D_monotone", value=float(ok_d), error=0.0, seed=seed,
            params={"f": fname, "expect_true": True},
            wall_time=time.perf_counter() - t_start))
        records.append(ResultRecord(
            metric="limit_V_monotone", value=float(ok_v), error=0.0, seed=seed,
            params={"f": fname, "expect_true": True},
            wall_time=time.perf_counter() - t_start))
    return records
