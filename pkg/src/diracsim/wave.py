"""Spectral split-step integrator for the weak-coupling-scaled Dirac system.

Equation of motion (single source of truth for signs and factors of c):

    d/dt psi = -(i c / eps) Q(eps D) psi + (i e / sqrt(eps)) G(t / eps^alpha, x / eps) psi,

with Q the dispersion matrix, G(t, x) = sum_k gamma^0 gamma^k A_k(t, x) the
Hermitian field coupling (the k = 0 term is A_0 * I4), and alpha = 1 for the
baseline scaling.  Both Strang sub-flows are exact matrix exponentials, so
each step is unitary to roundoff:

  * kinetic: Fourier multiplier exp(-i c lambda dt / eps) Pi+ + exp(+...) Pi-;
  * potential: the coupling is block diagonal in the chiral representation,
    G = A0 I4 + diag(-sigma.A, +sigma.A), so the pointwise exponential is a
    phase times a 2x2 Pauli rotation in closed form.

Steps never straddle a field jump; the driver subdivides at jump times, so
the piecewise-constant field is treated exactly within every sub-step.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .algebra import PhysicalConstants, eigenbasis, lambda_plus, projectors
from .grid import Grid
from .randomfield import FieldPath, synthesize_table


@dataclass
class SpinorField:
    """Complex 4-component wave function on a periodic grid."""

    psi: np.ndarray               # (4, n1, n2, n3) complex
    grid: Grid
    eps: float
    consts: PhysicalConstants

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=complex)
        if self.psi.shape != (4,) + self.grid.shape:
            raise ValueError(f"psi shape {self.psi.shape} does not match grid {self.grid.shape}")
        if self.eps <= 0:
            raise ValueError("eps must be positive")

    def norm2(self) -> float:
        """Discrete L2 norm squared, sum |psi|^2 * cell."""
        return float(np.sum(np.abs(self.psi) ** 2) * self.grid.cell)

    def density(self) -> np.ndarray:
        """Position density n = psi^* psi on the grid."""
        return np.sum(np.abs(self.psi) ** 2, axis=0)

    def copy(self) -> "SpinorField":
        return SpinorField(psi=self.psi.copy(), grid=self.grid, eps=self.eps,
                           consts=self.consts)


@dataclass
class SolverConfig:
    """Time stepping parameters.

    ``dt`` is the nominal step (sub-divided at field jumps and output times),
    ``alpha_time`` the temporal scaling exponent of the driving field
    (field argument t / eps^alpha), and ``norm_tol`` the per-unit-time
    relative L2 drift above which the step size is deemed too large.
    """

    dt: float
    alpha_time: float = 1.0
    scheme: str = "strang"
    norm_tol: float = 1e-8

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not (0 < self.alpha_time <= 1):
            raise ValueError("alpha_time must lie in (0, 1]")
        if self.scheme != "strang":
            raise ValueError(f"unknown scheme: {self.scheme}")


def momentum_on_lattice(p0, grid: Grid, eps: float, tol: float = 1e-9) -> bool:
    """True if p0 sits on the eps-scaled momentum lattice of the grid."""
    p0 = np.asarray(p0, dtype=float)
    dp = grid.momentum_spacing(eps)
    for a in range(3):
        if grid.shape[a] == 1:
            if abs(p0[a]) > tol:
                return False
        else:
            m = p0[a] / dp[a]
            if abs(m - round(m)) > tol:
                return False
    return True


def make_wavepacket(center, momentum, width, branch: str, polarization: int,
                    grid: Grid, eps: float,
                    consts: PhysicalConstants = PhysicalConstants()) -> SpinorField:
    """Gaussian envelope times e^{i p0.x/eps} times a band eigenvector.

    ``branch`` selects the electron ('plus') or positron ('minus') band, and
    ``polarization`` (1 or 2) the degenerate eigenvector within it.  The
    envelope is periodized over the box; width = inf gives a plane wave.  The
    result is normalized to ||psi||^2 = eps^(d_eff/2).
    """
    center = np.asarray(center, dtype=float)
    p0 = np.asarray(momentum, dtype=float)
    if branch not in ("plus", "minus"):
        raise ValueError("branch must be 'plus' or 'minus'")
    if polarization not in (1, 2):
        raise ValueError("polarization must be 1 or 2")
    if not momentum_on_lattice(p0, grid, eps):
        raise ValueError(f"momentum {p0.tolist()} is not on the eps-scaled lattice")
    if np.isfinite(width):
        hmax = max(L / n for L, n in zip(grid.lengths, grid.shape) if n > 1)
        if width < 2 * hmax:
            raise ValueError(f"width {width} unresolvable: below twice the grid spacing {hmax}")

    xs = grid.coords()
    env = np.ones(grid.shape)
    if np.isfinite(width):
        # separable Gaussian, periodized axis by axis over a few wraps
        for a in range(3):
            if grid.shape[a] == 1:
                continue
            fa = np.zeros(grid.shape)
            for w in range(-2, 3):
                fa += np.exp(-((xs[a] - center[a] + w * grid.lengths[a]) ** 2) / (2 * width**2))
            env = env * fa

    phase = np.exp(1j * sum(p0[a] * xs[a] for a in range(3)) / eps)
    basis = eigenbasis(p0, consts)
    col = {( "plus", 1): 0, ("plus", 2): 1, ("minus", 1): 2, ("minus", 2): 3}[(branch, polarization)]
    v = basis[:, col]
    psi = v[:, None, None, None] * (env * phase)[None, ...]
    out = SpinorField(psi=psi, grid=grid, eps=eps, consts=consts)
    target = eps ** (grid.d_eff / 2)
    out.psi *= np.sqrt(target / out.norm2())
    return out


def random_band_limited(grid: Grid, eps: float, seed: int, band_fraction: float = 0.2,
                        consts: PhysicalConstants = PhysicalConstants()) -> SpinorField:
    """Random spinor field with Fourier content confined to |m| <= band_fraction * n
    per non-degenerate axis (safe for the half-shift Wigner identities),
    normalized to eps^(d_eff/2)."""
    if not (0 < band_fraction <= 0.25):
        raise ValueError("band_fraction must be in (0, 0.25] to avoid half-shift aliasing")
    rng = np.random.Generator(np.random.Philox(key=seed))
    spec = np.zeros((4,) + grid.shape, dtype=complex)
    slices = []
    for a in range(3):
        n = grid.shape[a]
        if n == 1:
            slices.append(np.array([0]))
        else:
            b = max(1, int(band_fraction * n))
            slices.append(np.arange(-b, b + 1) % n)
    ii, jj, kk = np.meshgrid(*slices, indexing="ij")
    vals = rng.normal(size=(4,) + ii.shape + (2,))
    spec[:, ii, jj, kk] = vals[..., 0] + 1j * vals[..., 1]
    psi = np.fft.ifftn(spec, axes=(1, 2, 3))
    out = SpinorField(psi=psi, grid=grid, eps=eps, consts=consts)
    out.psi *= np.sqrt(eps ** (grid.d_eff / 2) / out.norm2())
    return out


class FreePropagator:
    """Cached Fourier-space propagators exp(-i c Q(xi) dt / eps) for a grid."""

    def __init__(self, grid: Grid, eps: float, consts: PhysicalConstants):
        self.grid = grid
        self.eps = eps
        self.consts = consts
        f1, f2, f3 = grid.freq_mesh()
        xi = eps * np.stack([f1, f2, f3], axis=-1)       # (n1,n2,n3,3)
        self.lam = lambda_plus(xi, consts)
        self.pi_plus, self.pi_minus = projectors(xi, consts)
        self._cache: dict[float, np.ndarray] = {}

    def multiplier(self, dt: float) -> np.ndarray:
        key = float(dt)
        if key not in self._cache:
            ph = np.exp(-1j * self.consts.c * self.lam * dt / self.eps)
            mult = ph[..., None, None] * self.pi_plus \
                + np.conj(ph)[..., None, None] * self.pi_minus
            self._cache[key] = mult
        return self._cache[key]

    def apply(self, psi: np.ndarray, dt: float) -> np.ndarray:
        psihat = np.fft.fftn(psi, axes=(1, 2, 3))
        out = np.einsum("xyzab,bxyz->axyz", self.multiplier(dt), psihat)
        return np.fft.ifftn(out, axes=(1, 2, 3))


def apply_potential_rotation(psi: np.ndarray, a_fields: np.ndarray, theta: float) -> np.ndarray:
    """Pointwise exp(i theta G) psi with G = A0 I4 + diag(-sigma.A, sigma.A).

    Exact: a scalar phase times opposite Pauli rotations on the two 2-spinor
    blocks; handles |A| = 0 smoothly via sinc.
    """
    a0, a1, a2, a3 = a_fields
    r = np.sqrt(a1 * a1 + a2 * a2 + a3 * a3)
    cosr = np.cos(theta * r)
    # sin(theta r)/r, finite at r = 0
    sinc = theta * np.sinc(theta * r / np.pi)
    phase = np.exp(1j * theta * a0)

    u1, u2, l1, l2 = psi
    su1 = a3 * u1 + (a1 - 1j * a2) * u2
    su2 = (a1 + 1j * a2) * u1 - a3 * u2
    sl1 = a3 * l1 + (a1 - 1j * a2) * l2
    sl2 = (a1 + 1j * a2) * l1 - a3 * l2

    out = np.empty_like(psi)
    out[0] = phase * (cosr * u1 - 1j * sinc * su1)
    out[1] = phase * (cosr * u2 - 1j * sinc * su2)
    out[2] = phase * (cosr * l1 + 1j * sinc * sl1)
    out[3] = phase * (cosr * l2 + 1j * sinc * sl2)
    return out


class FieldProvider:
    """Serves grid samples of A(t / eps^alpha, x / eps) per jump interval.

    In solver time the field is constant on [eps^alpha * tau_i, eps^alpha * tau_{i+1});
    samples are synthesized once per interval and cached.
    """

    def __init__(self, path: FieldPath, grid: Grid, eps: float, alpha_time: float = 1.0):
        self.path = path
        self.grid = grid
        self.eps = eps
        self.scale = eps**alpha_time
        self.edges = self.scale * path.interval_edges()   # solver-time breakpoints
        self._cache: dict[int, np.ndarray] = {}

    @property
    def horizon(self) -> float:
        return self.edges[-1]

    def interval_of(self, t: float) -> int:
        if t < 0 or t > self.horizon + 1e-12:
            raise ValueError(f"t={t} beyond scaled field horizon {self.horizon}")
        i = int(np.searchsorted(self.edges, t, side="right")) - 1
        return min(max(i, 0), len(self.edges) - 2)

    def sample(self, t: float) -> np.ndarray:
        i = self.interval_of(t)
        if i not in self._cache:
            values, residue = synthesize_table(self.path.states[i], self.path.lattice, self.grid)
            if residue > 1e-10:
                raise ValueError(f"field synthesis imaginary residue {residue} too large")
            self._cache[i] = values
        return self._cache[i]

    def breakpoints(self) -> np.ndarray:
        return self.edges[1:-1]


class ZeroField:
    """Field provider for free runs."""

    horizon = np.inf

    def __init__(self, grid: Grid):
        self._zero = np.zeros((4,) + grid.shape)

    def sample(self, t: float) -> np.ndarray:
        return self._zero

    def breakpoints(self) -> np.ndarray:
        return np.empty(0)


def step(state: SpinorField, cfg: SolverConfig, provider, propagator: FreePropagator | None = None,
         t: float = 0.0, dt: float | None = None) -> SpinorField:
    """One Strang split step of length dt starting at time t.

    The caller guarantees the interval [t, t + dt] does not straddle a field
    jump; ``run`` arranges this.  The potential factor uses the field sample
    on the step interval (it is constant there).
    """
    dt = cfg.dt if dt is None else dt
    if propagator is None:
        propagator = FreePropagator(state.grid, state.eps, state.consts)
    theta = state.consts.e * dt / np.sqrt(state.eps)
    a_fields = provider.sample(t + dt / 2)
    psi = propagator.apply(state.psi, dt / 2)
    psi = apply_potential_rotation(psi, a_fields, theta)
    psi = propagator.apply(psi, dt / 2)
    return SpinorField(psi=psi, grid=state.grid, eps=state.eps, consts=state.consts)


@dataclass
class Trajectory:
    """Snapshots and observer outputs of one run."""

    times: list[float] = field(default_factory=list)
    states: list[SpinorField] = field(default_factory=list)
    observations: dict = field(default_factory=dict)


def run(initial: SpinorField, cfg: SolverConfig, field_path: FieldPath | None,
        horizon: float, observers: dict | None = None,
        output_times=None, store_states: bool = True) -> Trajectory:
    """Integrate to ``horizon``, emitting snapshots at ``output_times``.

    Steps are subdivided at field jump times and at output times so each
    sub-step sees a constant field.  The L2 norm is monitored; drift beyond
    cfg.norm_tol per unit time raises (the dt-too-large detector).
    """
    observers = observers or {}
    if output_times is None:
        output_times = [horizon]
    output_times = sorted(set(float(t) for t in output_times) | {0.0, float(horizon)})

    if field_path is None:
        provider = ZeroField(initial.grid)
    else:
        provider = FieldProvider(field_path, initial.grid, initial.eps, cfg.alpha_time)
        if provider.horizon < horizon:
            raise ValueError("field path horizon too short for the requested run")

    n_base = max(1, int(np.ceil(horizon / cfg.dt))) if horizon > 0 else 0
    base = np.linspace(0.0, horizon, n_base + 1)
    breaks = provider.breakpoints()
    edges = np.unique(np.concatenate([base, output_times,
                                      breaks[(breaks > 0) & (breaks < horizon)]]))
    edges = edges[(edges >= 0) & (edges <= horizon)]

    propagator = FreePropagator(initial.grid, initial.eps, initial.consts)
    traj = Trajectory(observations={name: [] for name in observers})

    def emit(t, state):
        traj.times.append(t)
        if store_states:
            traj.states.append(state.copy())
        for name, fn in observers.items():
            traj.observations[name].append(fn(t, state))

    state = initial.copy()
    norm0 = state.norm2()
    out_idx = 0
    while out_idx < len(output_times) and output_times[out_idx] <= edges[0] + 1e-15:
        emit(output_times[out_idx], state)
        out_idx += 1

    for i in range(len(edges) - 1):
        t0, t1 = edges[i], edges[i + 1]
        if t1 - t0 <= 1e-15:
            continue
        state = step(state, cfg, provider, propagator, t=t0, dt=t1 - t0)
        while out_idx < len(output_times) and output_times[out_idx] <= t1 + 1e-12:
            emit(output_times[out_idx], state)
            out_idx += 1
        drift = abs(state.norm2() - norm0) / norm0
        if drift > cfg.norm_tol * max(t1, 1.0):
            raise RuntimeError(f"norm drift {drift:.3e} at t={t1:.4f}: dt too large")
    return traj


SNAPSHOT_SCHEMA_VERSION = 1


def save_snapshot(state: SpinorField, t: float) -> str:
    """Serialize a snapshot (versioned JSON, interleaved re/im spinor data)."""
    flat = state.psi.ravel()
    inter = np.empty(2 * flat.size)
    inter[0::2] = flat.real
    inter[1::2] = flat.imag
    return json.dumps({
        "version": SNAPSHOT_SCHEMA_VERSION,
        "t": t,
        "eps": state.eps,
        "grid": state.grid.to_dict(),
        "consts": {"m0": state.consts.m0, "c": state.consts.c, "e": state.consts.e},
        "psi_interleaved": inter.tolist(),
    })


def load_snapshot(text: str) -> tuple[SpinorField, float]:
    d = json.loads(text)
    if d.get("version") != SNAPSHOT_SCHEMA_VERSION:
        raise ValueError(f"unsupported snapshot schema version: {d.get('version')}")
    grid = Grid.from_dict(d["grid"])
    inter = np.asarray(d["psi_interleaved"])
    psi = (inter[0::2] + 1j * inter[1::2]).reshape((4,) + grid.shape)
    consts = PhysicalConstants(**d["consts"])
    return SpinorField(psi=psi, grid=grid, eps=float(d["eps"]), consts=consts), float(d["t"])
