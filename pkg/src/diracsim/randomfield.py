"""Stationary mean-zero Markov random electromagnetic field.

The four potential components are synthesized from complex amplitudes on a
finite, Hermitian-symmetric lattice of Fourier modes.  The time dependence is
a pure redraw jump process: after an Exp(rate) holding time the whole
amplitude table is redrawn independently from the invariant measure.  For
that process the temporal autocovariance of any centered functional is
exactly exp(-rate*|t|) times its variance, so the space-time power spectrum
is the Lorentzian

    R_hat_kk(omega, p) = S_k(p) * 2*rate / (rate^2 + omega^2),

with S_k the prescribed spatial spectral factor.  Both the simulated field
and the transport collision kernels consume this one analytic form.

Amplitude scaling: each mode pair (p, -p) carries an independent draw,
uniform on a disc, with E|amp|^2 = S_k(p) * prod(dp) / (2*pi)^d_eff so that
lattice sums converge to the continuum spectrum integrals.  Draws are bounded
by construction (total-variation bound surrogate).

Paths use a counter-based Philox generator keyed per path, so every
realization is reproducible from its 64-bit seed alone.

JSON schema (version 1) for a serialized path:

    {"version": 1,
     "spectrum": {"band_limit": M, "amplitudes": [s0..s3],
                  "corr_length": sigma_p, "jump_rate": nu},
     "mode_indices": [[i,j,k], ...],       # integer lattice coordinates
     "momentum_spacing": [dp1, dp2, dp3],  # physical spacing per axis
     "horizon": T, "seed": n,
     "jump_times": [...],
     "states": [ [ [re, im], ... mode ] ... component ]  per interval}
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .grid import Grid


@dataclass(frozen=True)
class SpectrumDescriptor:
    """Separable prescribed correlation R_tilde_kk(t, p) = exp(-nu|t|) S_k(p).

    S_k(p) = amplitudes[k] * exp(-|p|^2 / (2 corr_width^2)) for |p| <= band_limit,
    0 outside.  Cross spectra (m != n) are identically zero.
    """

    band_limit: float
    amplitudes: tuple[float, float, float, float]
    corr_width: float
    jump_rate: float

    def __post_init__(self):
        if self.band_limit <= 0 or self.corr_width <= 0 or self.jump_rate <= 0:
            raise ValueError("band_limit, corr_width and jump_rate must be positive")
        if len(self.amplitudes) != 4 or any(a < 0 for a in self.amplitudes):
            raise ValueError("amplitudes must be 4 nonnegative numbers")

    def spatial_factor(self, k: int, p) -> np.ndarray:
        """S_k(p) for momenta p of shape (..., 3)."""
        p = np.asarray(p, dtype=float)
        p2 = np.sum(p * p, axis=-1)
        s = self.amplitudes[k] * np.exp(-p2 / (2 * self.corr_width**2))
        return np.where(p2 <= self.band_limit**2, s, 0.0)

    def power_spectrum(self, k: int, omega, p) -> np.ndarray:
        """Space-time Fourier transform R_hat_kk(omega, p)."""
        nu = self.jump_rate
        lorentz = 2 * nu / (nu**2 + np.asarray(omega, dtype=float) ** 2)
        return self.spatial_factor(k, p) * lorentz

    def correlation(self, k: int, t, p) -> np.ndarray:
        """R_tilde_kk(t, p) = exp(-nu |t|) S_k(p)."""
        return self.spatial_factor(k, p) * np.exp(-self.jump_rate * np.abs(np.asarray(t)))

    def to_dict(self) -> dict:
        return {"band_limit": self.band_limit, "amplitudes": list(self.amplitudes),
                "corr_length": self.corr_width, "jump_rate": self.jump_rate}

    @classmethod
    def from_dict(cls, d: dict) -> "SpectrumDescriptor":
        return cls(band_limit=float(d["band_limit"]),
                   amplitudes=tuple(float(a) for a in d["amplitudes"]),
                   corr_width=float(d["corr_length"]),
                   jump_rate=float(d["jump_rate"]))


@dataclass(frozen=True)
class ModeLattice:
    """Finite symmetric lattice of field wavevectors.

    The field is sampled at x/eps, so commensurability with a periodic box of
    size L requires modes p = (2*pi*eps/L) * m with integer m.  The lattice is
    closed under m -> -m; ``conj_index[j]`` points to the partner of mode j.
    """

    indices: np.ndarray          # (n_modes, 3) int
    momentum_spacing: tuple[float, float, float]

    @property
    def n_modes(self) -> int:
        return self.indices.shape[0]

    @property
    def momenta(self) -> np.ndarray:
        return self.indices * np.asarray(self.momentum_spacing)

    @property
    def conj_index(self) -> np.ndarray:
        key = {tuple(m): j for j, m in enumerate(self.indices.tolist())}
        out = np.empty(self.n_modes, dtype=int)
        for j, m in enumerate(self.indices.tolist()):
            out[j] = key[tuple(-x for x in m)]
        return out

    @property
    def mode_volume(self) -> float:
        """Product of momentum spacings over non-degenerate axes (dp for sums)."""
        out = 1.0
        for dp, has in zip(self.momentum_spacing, self._active_axes()):
            if has:
                out *= dp
        return out

    def _active_axes(self):
        return [bool(np.any(self.indices[:, a] != 0)) or False for a in range(3)]


def mode_lattice(grid: Grid, eps: float, band_limit: float) -> ModeLattice:
    """All lattice wavevectors commensurate with (grid, eps) inside |p| <= band_limit.

    Degenerate grid axes contribute only the zero mode on that axis.
    """
    dp = grid.momentum_spacing(eps)
    ranges = []
    for a in range(3):
        if grid.shape[a] == 1:
            ranges.append(np.array([0]))
        else:
            mmax = int(np.floor(band_limit / dp[a]))
            mmax = min(mmax, grid.shape[a] // 2 - 1)
            ranges.append(np.arange(-mmax, mmax + 1))
    mesh = np.meshgrid(*ranges, indexing="ij")
    idx = np.stack([m.ravel() for m in mesh], axis=-1)
    p = idx * np.asarray(dp)
    keep = np.sum(p * p, axis=-1) <= band_limit**2
    idx = idx[keep]
    order = np.lexsort((idx[:, 2], idx[:, 1], idx[:, 0]))
    return ModeLattice(indices=idx[order], momentum_spacing=dp)


def _mode_variances(spec: SpectrumDescriptor, lattice: ModeLattice, d_eff: int) -> np.ndarray:
    """Target E|amp|^2 per (component, mode): S_k(p) dp^d_eff / (2 pi)^d_eff."""
    scale = lattice.mode_volume / (2 * np.pi) ** d_eff
    return np.stack([spec.spatial_factor(k, lattice.momenta) * scale for k in range(4)])


def _pair_structure(lattice: ModeLattice):
    """Indices of self-conjugate modes and of one representative per +-pair."""
    conj = lattice.conj_index
    idx = np.arange(lattice.n_modes)
    self_conj = np.flatnonzero(conj == idx)
    reps = np.flatnonzero(idx < conj)
    return self_conj, reps, conj[reps]


def sample_invariant_measure(spec: SpectrumDescriptor, lattice: ModeLattice,
                             rng: np.random.Generator, d_eff: int) -> np.ndarray:
    """One draw of the (4, n_modes) amplitude table from the invariant measure.

    Per Hermitian mode pair: a complex draw uniform on a disc (bounded, mean
    zero, random phase); the p = 0 mode is real uniform.  The radii are set so
    the per-mode second moment matches the prescribed spatial spectrum.
    """
    var = _mode_variances(spec, lattice, d_eff)
    self_conj, reps, partners = _pair_structure(lattice)
    n = lattice.n_modes
    table = np.zeros((4, n), dtype=complex)
    if reps.size:
        radii = np.sqrt(rng.uniform(size=(4, reps.size))) * np.sqrt(2 * var[:, reps])
        phases = rng.uniform(0, 2 * np.pi, size=(4, reps.size))
        amps = radii * np.exp(1j * phases)
        table[:, reps] = amps
        table[:, partners] = np.conj(amps)
    if self_conj.size:
        table[:, self_conj] = rng.uniform(-1, 1, size=(4, self_conj.size)) \
            * np.sqrt(3 * var[:, self_conj])
    return table


@dataclass
class FieldPath:
    """Piecewise-constant Markov jump trajectory of the amplitude tables.

    ``states[i]`` holds on [t_i, t_{i+1}) with t_0 = 0 and subsequent times in
    ``jump_times``; times are in the field's intrinsic clock.
    """

    spectrum: SpectrumDescriptor
    lattice: ModeLattice
    jump_times: np.ndarray            # (n_jumps,) strictly increasing, < horizon
    states: np.ndarray                # (n_jumps + 1, 4, n_modes) complex
    horizon: float
    seed: int
    d_eff: int

    def state_at(self, t: float) -> np.ndarray:
        """Amplitude table in force at intrinsic time t."""
        if t < 0 or t > self.horizon:
            raise ValueError(f"t={t} outside path horizon [0, {self.horizon}]")
        i = int(np.searchsorted(self.jump_times, t, side="right"))
        return self.states[i]

    def interval_edges(self) -> np.ndarray:
        """Breakpoints 0, t_1, ..., t_n, horizon of the piecewise-constant path."""
        return np.concatenate(([0.0], self.jump_times, [self.horizon]))

    def to_json(self) -> str:
        return json.dumps({
            "version": 1,
            "spectrum": self.spectrum.to_dict(),
            "mode_indices": self.lattice.indices.tolist(),
            "momentum_spacing": list(self.lattice.momentum_spacing),
            "horizon": self.horizon,
            "seed": self.seed,
            "d_eff": self.d_eff,
            "jump_times": self.jump_times.tolist(),
            "states": [[[float(z.real), float(z.imag)] for z in comp]
                       for state in self.states for comp in state],
            "n_intervals": int(self.states.shape[0]),
        })

    @classmethod
    def from_json(cls, text: str) -> "FieldPath":
        d = json.loads(text)
        if d.get("version") != 1:
            raise ValueError(f"unsupported field path schema version: {d.get('version')}")
        lattice = ModeLattice(indices=np.asarray(d["mode_indices"], dtype=int),
                              momentum_spacing=tuple(d["momentum_spacing"]))
        n_int = d["n_intervals"]
        flat = np.asarray(d["states"], dtype=float)
        states = (flat[..., 0] + 1j * flat[..., 1]).reshape(n_int, 4, lattice.n_modes)
        return cls(spectrum=SpectrumDescriptor.from_dict(d["spectrum"]),
                   lattice=lattice,
                   jump_times=np.asarray(d["jump_times"], dtype=float),
                   states=states,
                   horizon=float(d["horizon"]),
                   seed=int(d["seed"]),
                   d_eff=int(d["d_eff"]))


def path_rng(seed: int) -> np.random.Generator:
    """Counter-based generator stream for one path."""
    return np.random.Generator(np.random.Philox(key=seed))


def evolve_jump_path(spec: SpectrumDescriptor, lattice: ModeLattice, horizon: float,
                     seed: int, d_eff: int, rate: float | None = None,
                     initial: np.ndarray | None = None) -> FieldPath:
    """Generate a redraw jump path: Exp(rate) holding times, independent
    redraws of the whole table from the invariant measure.

    ``initial`` defaults to a fresh draw; ``rate`` defaults to the spectrum's
    jump rate.  Deterministic given (spec, lattice, horizon, seed).
    """
    rate = spec.jump_rate if rate is None else rate
    if rate <= 0:
        raise ValueError("jump rate must be positive")
    rng = path_rng(seed)
    if initial is None:
        initial = sample_invariant_measure(spec, lattice, rng, d_eff)
    times = []
    states = [initial]
    t = rng.exponential(1.0 / rate)
    while t < horizon:
        times.append(t)
        states.append(sample_invariant_measure(spec, lattice, rng, d_eff))
        t += rng.exponential(1.0 / rate)
    return FieldPath(spectrum=spec, lattice=lattice,
                     jump_times=np.asarray(times), states=np.asarray(states),
                     horizon=horizon, seed=seed, d_eff=d_eff)


@dataclass(frozen=True)
class FieldSample:
    """The four real potential components on a spatial grid at a fixed time."""

    values: np.ndarray        # (4, n1, n2, n3) float
    t: float
    imag_residue: float       # max |Im| of the complex synthesis, pre-truncation


def synthesize_table(table: np.ndarray, lattice: ModeLattice, grid: Grid) -> tuple[np.ndarray, float]:
    """Inverse discrete Fourier synthesis of one amplitude table onto the grid.

    Mode m sits exactly on grid Fourier bin m (the lattice is commensurate),
    so the synthesis is a plain zero-filled inverse FFT.  Returns the real
    field and the maximum imaginary residue discarded.
    """
    spec_grid = np.zeros((4,) + grid.shape, dtype=complex)
    idx = lattice.indices
    bins = tuple(idx[:, a] % grid.shape[a] for a in range(3))
    for a in range(3):
        if grid.shape[a] == 1 and np.any(idx[:, a] != 0):
            raise ValueError("lattice has modes on a degenerate grid axis")
    for k in range(4):
        np.add.at(spec_grid[k], bins, table[k])
    out = np.fft.ifftn(spec_grid, axes=(1, 2, 3)) * np.prod(grid.shape)
    residue = float(np.abs(out.imag).max())
    return np.ascontiguousarray(out.real), residue


def synthesize_field(path: FieldPath, t: float, grid: Grid) -> FieldSample:
    """Field sample A_k(t, .) on the grid; t in the path's intrinsic clock."""
    table = path.state_at(t)
    values, residue = synthesize_table(table, path.lattice, grid)
    return FieldSample(values=values, t=t, imag_residue=residue)


def estimate_correlation(paths: list[FieldPath], t_lags: np.ndarray,
                         components: list[tuple[int, int]],
                         mode_probe: int | None = None,
                         n_base: int = 8) -> dict:
    """Empirical space-time correlation of the amplitude process.

    For each component pair (m, n) and each time lag, averages
    Re[A~_m(s + t, p*) conj(A~_n(s, p*))] over n_base stationary base times s
    per path and over the ensemble, at the probe mode p* (defaults to the
    mode of largest prescribed spectrum).  Returns per-lag means and standard
    errors, plus the probe's prescribed variance for normalization.
    """
    if len(paths) < 2:
        raise ValueError("need an ensemble of at least 2 paths")
    t_lags = np.asarray(t_lags, dtype=float)
    p0 = paths[0]
    if mode_probe is None:
        s0 = p0.spectrum.spatial_factor(0, p0.lattice.momenta)
        mode_probe = int(np.argmax(s0))
    tmax = t_lags.max()
    result = {}
    for (m, n) in components:
        vals = np.empty((len(paths), len(t_lags)))
        for i, path in enumerate(paths):
            base = np.linspace(0.0, path.horizon - tmax, n_base)
            acc = np.zeros(len(t_lags))
            for s in base:
                a_n = path.state_at(s)[n, mode_probe]
                for j, tl in enumerate(t_lags):
                    a_m = path.state_at(s + tl)[m, mode_probe]
                    acc[j] += (a_m * np.conj(a_n)).real
            vals[i] = acc / n_base
        mean = vals.mean(axis=0)
        stderr = vals.std(axis=0, ddof=1) / np.sqrt(len(paths))
        result[(m, n)] = {"t_lags": t_lags, "mean": mean, "stderr": stderr,
                          "mode": mode_probe}
    return result
