"""Radiative transport system for the band densities (alpha_plus, alpha_minus).

Inelastic regime: gain-loss collision operator

    T(a+, a-)(xi) = e^2/(2 pi)^d [ sum_q (a+(q) - a+(xi)) K-(xi, q) dq
                                 + sum_q (a-(q) - a+(xi)) K+(xi, q) dq ],

with K-(xi, q) = sum_k omega_k(xi, q) R_hat_kk(c lam(q) - c lam(xi), q - xi)
and K+ built from omega_tilde_k and the sum frequency.  Both kernels are
symmetric and nonnegative, which makes the total mass exactly neutral and
the L2 functional dissipative.

Slow-time (elastic) regime: scattering is confined to energy shells of
lambda_plus, uses R_tilde_kk(0, q - xi), and the two bands decouple.  Shells
are tolerance-grouped equal-energy classes of the lattice, so per-shell mass
conservation is exact by construction.

All dimensional factors use d_eff (the number of resolved axes) consistently
with the reduced field construction, so kernel rates match the wave solver's
Born scattering rates on the same lattice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import PhysicalConstants, lambda_plus, scattering_weights
from .grid import Grid
from .randomfield import SpectrumDescriptor


@dataclass(frozen=True)
class MomentumBall:
    """Truncated xi lattice: points, quadrature weight, and (optionally) the
    flat indices of these points inside a Wigner xi mesh."""

    points: np.ndarray                 # (nq, 3)
    weight: float                      # dq^d_eff per point
    wigner_flat_index: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.points.shape[0]


def momentum_ball(grid: Grid, eps: float, radius: float) -> MomentumBall:
    """All Wigner xi lattice points with |xi| <= radius, with their flat
    indices into the (m1, m2, m3) mesh."""
    axes = [grid.wigner_xi(eps, a) for a in range(3)]
    mesh = np.meshgrid(*axes, indexing="ij")
    xi = np.stack(mesh, axis=-1).reshape(-1, 3)
    keep = np.flatnonzero(np.sum(xi * xi, axis=-1) <= radius**2)
    weight = grid.wigner_xi_spacing(eps)
    return MomentumBall(points=xi[keep], weight=weight, wigner_flat_index=keep)


@dataclass
class TransportState:
    """Band densities on (x-grid) x (xi ball)."""

    alpha_plus: np.ndarray            # (n1, n2, n3, nq) real
    alpha_minus: np.ndarray
    grid: Grid
    ball: MomentumBall
    time: float = 0.0

    def mass(self) -> float:
        w = self.grid.cell * self.ball.weight
        return float((self.alpha_plus.sum() + self.alpha_minus.sum()) * w)

    def l2(self) -> float:
        w = self.grid.cell * self.ball.weight
        return float((np.sum(self.alpha_plus**2) + np.sum(self.alpha_minus**2)) * w)

    def copy(self) -> "TransportState":
        return TransportState(alpha_plus=self.alpha_plus.copy(),
                              alpha_minus=self.alpha_minus.copy(),
                              grid=self.grid, ball=self.ball, time=self.time)


@dataclass(frozen=True)
class CollisionKernelCache:
    """Dense symmetric inelastic kernels on the xi ball plus loss rates."""

    k_minus: np.ndarray               # (nq, nq)
    k_plus: np.ndarray
    weight: float
    prefactor: float                  # e^2 / (2 pi)^d_eff

    def max_loss_rate(self) -> float:
        loss = (self.k_minus + self.k_plus).sum(axis=1) * self.weight * self.prefactor
        return float(loss.max())


@dataclass(frozen=True)
class ElasticKernelCache:
    """Shell-confined elastic kernel; scattering only within equal-energy classes."""

    k_el: np.ndarray                  # (nq, nq), zero off shell
    shell_index: np.ndarray           # (nq,) int
    weight: float
    prefactor: float                  # e^2 (the delta absorbs (2 pi)^-d against dq)

    def max_loss_rate(self) -> float:
        loss = self.k_el.sum(axis=1) * self.weight * self.prefactor
        return float(loss.max())


def _weight_tables(ball: MomentumBall, consts: PhysicalConstants):
    xi = ball.points[:, None, :]
    q = ball.points[None, :, :]
    w = scattering_weights(xi, q, consts)
    return w.omega, w.omega_tilde      # (4, nq, nq)


def build_kernels(spec: SpectrumDescriptor, ball: MomentumBall,
                  consts: PhysicalConstants, d_eff: int) -> CollisionKernelCache:
    """Inelastic kernel tables K-(xi, q), K+(xi, q) from the analytic spectrum."""
    omega, omega_tilde = _weight_tables(ball, consts)
    lam = lambda_plus(ball.points, consts)
    dlam_minus = consts.c * (lam[None, :] - lam[:, None])
    dlam_plus = consts.c * (lam[None, :] + lam[:, None])
    dq = ball.points[None, :, :] - ball.points[:, None, :]
    k_minus = np.zeros((ball.n, ball.n))
    k_plus = np.zeros((ball.n, ball.n))
    for k in range(4):
        k_minus += omega[k] * spec.power_spectrum(k, dlam_minus, dq)
        k_plus += omega_tilde[k] * spec.power_spectrum(k, dlam_plus, dq)
    pref = consts.e**2 / (2 * np.pi) ** d_eff
    return CollisionKernelCache(k_minus=k_minus, k_plus=k_plus,
                                weight=ball.weight, prefactor=pref)


def energy_shells(ball: MomentumBall, consts: PhysicalConstants,
                  half_width: float | None = None) -> np.ndarray:
    """Group lattice points into equal-energy shells.

    Default half-width: half the median spacing between distinct lambda_plus
    values (one energy-lattice spacing per bin), which merges exact +-xi
    partners and nothing else on generic lattices.
    """
    lam = lambda_plus(ball.points, consts)
    order = np.argsort(lam)
    sorted_lam = lam[order]
    if half_width is None:
        gaps = np.diff(sorted_lam)
        gaps = gaps[gaps > 1e-12 * max(sorted_lam[-1], 1.0)]
        half_width = 0.5 * float(np.median(gaps)) if gaps.size else 1e-12
    shell_of = np.empty(ball.n, dtype=int)
    current = 0
    shell_of[order[0]] = 0
    anchor = sorted_lam[0]
    for i in range(1, ball.n):
        if sorted_lam[i] - anchor > 2 * half_width:
            current += 1
            anchor = sorted_lam[i]
        shell_of[order[i]] = current
    return shell_of


def build_elastic_kernel(spec: SpectrumDescriptor, ball: MomentumBall,
                         consts: PhysicalConstants,
                         half_width: float | None = None) -> ElasticKernelCache:
    """Elastic kernel K_el(xi, q) = sum_k omega_k R_tilde_kk(0, q - xi),
    restricted to pairs in the same energy shell."""
    omega, _ = _weight_tables(ball, consts)
    dq = ball.points[None, :, :] - ball.points[:, None, :]
    k_el = np.zeros((ball.n, ball.n))
    for k in range(4):
        k_el += omega[k] * spec.spatial_factor(k, dq)
    shells = energy_shells(ball, consts, half_width)
    same = shells[:, None] == shells[None, :]
    k_el = np.where(same, k_el, 0.0)
    return ElasticKernelCache(k_el=k_el, shell_index=shells,
                              weight=ball.weight, prefactor=consts.e**2)


def collision_rhs(state: TransportState, cache: CollisionKernelCache):
    """Inelastic collision parts (d alpha_plus/dt, d alpha_minus/dt)."""
    ap, am = state.alpha_plus, state.alpha_minus
    if ap.shape[-1] != cache.k_minus.shape[0]:
        raise ValueError("state xi lattice does not match kernel cache")
    w, pref = cache.weight, cache.prefactor
    loss_m = cache.k_minus.sum(axis=1) * w
    loss_p = cache.k_plus.sum(axis=1) * w
    gain_pp = np.einsum("...q,pq->...p", ap, cache.k_minus) * w
    gain_pm = np.einsum("...q,pq->...p", am, cache.k_plus) * w
    gain_mm = np.einsum("...q,pq->...p", am, cache.k_minus) * w
    gain_mp = np.einsum("...q,pq->...p", ap, cache.k_plus) * w
    out_p = pref * (gain_pp - ap * loss_m + gain_pm - ap * loss_p)
    out_m = pref * (gain_mm - am * loss_m + gain_mp - am * loss_p)
    return out_p, out_m


def elastic_rhs(state: TransportState, cache: ElasticKernelCache):
    """Elastic collision parts; the two bands are independent."""
    ap, am = state.alpha_plus, state.alpha_minus
    w, pref = cache.weight, cache.prefactor
    loss = cache.k_el.sum(axis=1) * w
    out_p = pref * (np.einsum("...q,pq->...p", ap, cache.k_el) * w - ap * loss)
    out_m = pref * (np.einsum("...q,pq->...p", am, cache.k_el) * w - am * loss)
    return out_p, out_m


def free_streaming_rhs(state: TransportState, consts: PhysicalConstants):
    """Advection parts -v.grad(alpha) with v = +- c xi / lambda_plus.

    Spectral x-derivatives on non-degenerate axes; the positron band streams
    with the opposite velocity (division by lambda_minus < 0, taken
    literally).
    """
    grid = state.grid
    lam = lambda_plus(state.ball.points, consts)
    v = consts.c * state.ball.points / lam[:, None]     # (nq, 3)
    out_p = np.zeros_like(state.alpha_plus)
    out_m = np.zeros_like(state.alpha_minus)
    for a in range(3):
        if grid.shape[a] == 1:
            continue
        ik = 1j * grid.freq(a)
        shape = [1, 1, 1, 1]
        shape[a] = grid.shape[a]
        ik = ik.reshape(shape)
        dp = np.fft.ifft(ik * np.fft.fft(state.alpha_plus, axis=a), axis=a).real
        dm = np.fft.ifft(ik * np.fft.fft(state.alpha_minus, axis=a), axis=a).real
        out_p -= v[:, a] * dp
        out_m -= (-v[:, a]) * dm
    return out_p, out_m


@dataclass
class TransportDiagnostics:
    """Per-output-time conserved/dissipated functionals."""

    times: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    l2: list = field(default_factory=list)
    min_alpha: list = field(default_factory=list)
    shell_mass: list = field(default_factory=list)    # elastic mode only


@dataclass
class TransportTrajectory:
    states: list
    diagnostics: TransportDiagnostics


def integrate(state: TransportState, kernels, dt: float, horizon: float,
              mode: str = "inelastic", consts: PhysicalConstants = PhysicalConstants(),
              streaming: bool = True, output_times=None,
              store_states: bool = True, cfl: float = 0.9) -> TransportTrajectory:
    """Classical RK4 time stepping of streaming + collisions.

    Preconditions checked: advection CFL (dt max|v| / h <= cfl) and collision
    stiffness (dt * max loss rate < 0.5).  Diagnostics (mass, L2, min alpha,
    per-shell mass in elastic mode) are recorded at output times; NaNs raise.
    """
    if mode not in ("inelastic", "elastic"):
        raise ValueError("mode must be 'inelastic' or 'elastic'")
    if dt <= 0:
        raise ValueError("dt must be positive")
    grid = state.grid
    if streaming and grid.d_eff > 0:
        lam = lambda_plus(state.ball.points, consts)
        vmax = float((consts.c * np.abs(state.ball.points) / lam[:, None]).max())
        hmin = min(L / n for L, n in zip(grid.lengths, grid.shape) if n > 1)
        if vmax > 0 and dt * vmax / hmin > cfl:
            raise ValueError(f"CFL violation: dt*vmax/h = {dt * vmax / hmin:.3f} > {cfl}")
    if dt * kernels.max_loss_rate() >= 0.5:
        raise ValueError(f"collision stiffness bound violated: dt*loss = "
                         f"{dt * kernels.max_loss_rate():.3f} >= 0.5")

    if output_times is None:
        output_times = [horizon]
    output_times = sorted(set(float(t) for t in output_times) | {0.0, float(horizon)})

    def rhs(s: TransportState):
        if mode == "inelastic":
            cp, cm = collision_rhs(s, kernels)
        else:
            cp, cm = elastic_rhs(s, kernels)
        if streaming:
            sp, sm = free_streaming_rhs(s, consts)
            return cp + sp, cm + sm
        return cp, cm

    def rk4(s: TransportState, h: float) -> TransportState:
        k1p, k1m = rhs(s)
        s2 = TransportState(s.alpha_plus + 0.5 * h * k1p, s.alpha_minus + 0.5 * h * k1m,
                            grid, s.ball, s.time + 0.5 * h)
        k2p, k2m = rhs(s2)
        s3 = TransportState(s.alpha_plus + 0.5 * h * k2p, s.alpha_minus + 0.5 * h * k2m,
                            grid, s.ball, s.time + 0.5 * h)
        k3p, k3m = rhs(s3)
        s4 = TransportState(s.alpha_plus + h * k3p, s.alpha_minus + h * k3m,
                            grid, s.ball, s.time + h)
        k4p, k4m = rhs(s4)
        return TransportState(
            s.alpha_plus + h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p),
            s.alpha_minus + h / 6 * (k1m + 2 * k2m + 2 * k3m + k4m),
            grid, s.ball, s.time + h)

    diag = TransportDiagnostics()
    traj = TransportTrajectory(states=[], diagnostics=diag)
    shells = kernels.shell_index if mode == "elastic" else None

    def emit(s: TransportState):
        if not np.isfinite(s.alpha_plus).all() or not np.isfinite(s.alpha_minus).all():
            raise FloatingPointError(f"non-finite density at t={s.time}")
        diag.times.append(s.time)
        diag.mass.append(s.mass())
        diag.l2.append(s.l2())
        diag.min_alpha.append(float(min(s.alpha_plus.min(), s.alpha_minus.min())))
        if shells is not None:
            n_sh = shells.max() + 1
            w = s.grid.cell * s.ball.weight
            sm = np.zeros(2 * n_sh)
            for b, alpha in enumerate((s.alpha_plus, s.alpha_minus)):
                per_point = alpha.sum(axis=(0, 1, 2)) * w
                sm[b * n_sh:(b + 1) * n_sh] = np.bincount(shells, weights=per_point,
                                                          minlength=n_sh)
            diag.shell_mass.append(sm)
        if store_states:
            traj.states.append(s.copy())

    # output_times are offsets within [0, horizon] from the state's clock
    s = state.copy()
    t0 = s.time
    emit(s)
    for tau_prev, tau_next in zip(output_times[:-1], output_times[1:]):
        span = tau_next - tau_prev
        if span <= 1e-15:
            continue
        n_sub = max(1, int(np.ceil(span / dt - 1e-12)))
        h = span / n_sub
        for _ in range(n_sub):
            s = rk4(s, h)
        s.time = t0 + tau_next
        emit(s)
    return traj


def write_diagnostics_csv(path: str, diag: TransportDiagnostics,
                          states: list | None = None, dump_path: str | None = None):
    """CSV time series of the conserved/dissipated functionals; per-shell
    mass drift column included in elastic mode.  Optionally dumps the full
    density fields to an npz alongside."""
    have_shells = bool(diag.shell_mass)
    sm0 = np.asarray(diag.shell_mass[0]) if have_shells else None
    with open(path, "w") as fh:
        header = "t,mass,l2,min_alpha"
        if have_shells:
            header += ",shell_mass_drift"
        fh.write(header + "\n")
        for i, t in enumerate(diag.times):
            row = f"{t!r},{diag.mass[i]!r},{diag.l2[i]!r},{diag.min_alpha[i]!r}"
            if have_shells:
                drift = float(np.abs(np.asarray(diag.shell_mass[i]) - sm0).max()
                              / max(np.abs(sm0).max(), 1e-300))
                row += f",{drift!r}"
            fh.write(row + "\n")
    if dump_path is not None and states:
        np.savez_compressed(dump_path,
                            times=np.asarray([s.time for s in states]),
                            alpha_plus=np.stack([s.alpha_plus for s in states]),
                            alpha_minus=np.stack([s.alpha_minus for s in states]))


def save_kernels(path: str, cache: CollisionKernelCache):
    np.savez(path, k_minus=cache.k_minus, k_plus=cache.k_plus,
             weight=cache.weight, prefactor=cache.prefactor)


def load_kernels(path: str) -> CollisionKernelCache:
    d = np.load(path)
    return CollisionKernelCache(k_minus=d["k_minus"], k_plus=d["k_plus"],
                                weight=float(d["weight"]), prefactor=float(d["prefactor"]))
