# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: light
# ---

# # The Markov random field
#
# The driving electromagnetic potential is a redraw jump process on
# band-limited Fourier amplitudes: after an Exp(rate) holding time the whole
# amplitude table is redrawn from the invariant measure.  Its space-time
# power spectrum is therefore an exact Lorentzian-in-frequency times the
# prescribed Gaussian spatial factor, and every realization is real and
# bounded.

# +
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from diracsim import (SpectrumDescriptor, evolve_jump_path, mode_lattice,
                      quasi_1d, synthesize_field)

grid = quasi_1d(256)
eps = 1 / 16
spec = SpectrumDescriptor(band_limit=0.25, amplitudes=(6, 6, 6, 6),
                          corr_width=0.1, jump_rate=1.0)
lattice = mode_lattice(grid, eps, spec.band_limit)
print("modes on the lattice:", lattice.n_modes)
# -

# A single path: piecewise constant in its intrinsic clock, jumping at
# Poisson times.  Snapshots of the scalar potential A_0 before and after a
# jump are completely decorrelated.

# +
path = evolve_jump_path(spec, lattice, horizon=8.0, seed=11, d_eff=grid.d_eff)
print("jump times:", np.round(path.jump_times, 2))

fig, ax = plt.subplots(figsize=(7, 3))
x = grid.axis_coords(2)
for t in (0.0, path.jump_times[0] - 1e-3, path.jump_times[0] + 1e-3):
    sample = synthesize_field(path, t, grid)
    ax.plot(x, sample.values[0, 0, 0, :], label=f"t = {t:.2f}")
    print(f"t = {t:.2f}: imaginary residue {sample.imag_residue:.2e}")
ax.set_xlabel("x")
ax.set_ylabel("A_0")
ax.legend()
fig.savefig("demo_field_snapshots.png", dpi=120)
# -

# The temporal autocovariance of any amplitude decays exactly like
# exp(-rate t); an ensemble estimate recovers the rate.

# +
n_paths = 3000
t_lags = np.linspace(0.0, 2.0, 9)
probe = lattice.n_modes // 2
cov = np.zeros(len(t_lags))
for seed in range(n_paths):
    p = evolve_jump_path(spec, lattice, 4.0, 100 + seed, 1)
    a0 = p.state_at(0.5)[0, probe]
    for j, tl in enumerate(t_lags):
        cov[j] += (p.state_at(0.5 + tl)[0, probe] * np.conj(a0)).real
cov /= n_paths
rate_fit = -np.polyfit(t_lags, np.log(cov), 1)[0]
print(f"fitted decay rate: {rate_fit:.3f} (prescribed {spec.jump_rate})")

fig, ax = plt.subplots(figsize=(5, 3))
ax.semilogy(t_lags, cov / cov[0], "o", label="ensemble estimate")
ax.semilogy(t_lags, np.exp(-spec.jump_rate * t_lags), "-", label="exp(-rate t)")
ax.set_xlabel("time lag")
ax.set_ylabel("autocovariance")
ax.legend()
fig.savefig("demo_field_autocovariance.png", dpi=120)
# -

# The resulting analytic power spectrum that the transport kernels consume:

# +
omega = np.linspace(-6, 6, 200)
p_axis = np.linspace(-0.3, 0.3, 100)
vals = spec.power_spectrum(0, omega[:, None],
                           np.stack([np.zeros_like(p_axis), np.zeros_like(p_axis),
                                     p_axis], axis=-1)[None, :, :])
fig, ax = plt.subplots(figsize=(5, 3))
im = ax.pcolormesh(p_axis, omega, vals, shading="auto")
ax.set_xlabel("p")
ax.set_ylabel("omega")
fig.colorbar(im, label="R_hat(omega, p)")
fig.savefig("demo_field_power_spectrum.png", dpi=120)
print("saved demo_field_*.png")
# -
