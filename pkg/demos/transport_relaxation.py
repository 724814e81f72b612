# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: light
# ---

# # The radiative transport system
#
# The limiting equations advect the band densities at c xi / lambda(xi) and
# couple them through symmetric gain-loss kernels.  Total mass is conserved
# exactly and the L2 functional decreases; in the slow-time (elastic) regime
# scattering is confined to energy shells and the bands decouple.

# +
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from diracsim import (PhysicalConstants, SpectrumDescriptor, TransportState,
                      build_elastic_kernel, build_kernels, integrate,
                      momentum_ball, quasi_1d)

grid = quasi_1d(128)
consts = PhysicalConstants()
spec = SpectrumDescriptor(band_limit=0.25, amplitudes=(6, 6, 6, 6),
                          corr_width=0.1, jump_rate=1.0)
ball = momentum_ball(grid, 1 / 8, radius=0.9)
print("xi lattice points:", ball.n)
# -

# Inelastic regime: an electron bump and a counter-propagating positron bump
# relax toward a common equilibrium while the diagnostics stay conservative.

# +
kernels = build_kernels(spec, ball, consts, grid.d_eff)
x = grid.axis_coords(2)
xi3 = ball.points[:, 2]
bump = np.exp(2 * (np.cos(x - np.pi) - 1))
ap0 = bump[None, None, :, None] * np.exp(-((xi3 - 0.4) ** 2) / 0.02)
am0 = 0.6 * bump[None, None, :, None] * np.exp(-((xi3 + 0.4) ** 2) / 0.02)
state = TransportState(alpha_plus=ap0.copy(), alpha_minus=am0.copy(),
                       grid=grid, ball=ball)

times = np.linspace(0, 2.0, 21)
traj = integrate(state, kernels, dt=0.01, horizon=2.0, consts=consts,
                 output_times=times)
d = traj.diagnostics
print("relative mass drift:", max(abs(m - d.mass[0]) / d.mass[0] for m in d.mass))
print("L2 monotone:", all(b <= a + 1e-12 for a, b in zip(d.l2[:-1], d.l2[1:])))

fig, axes = plt.subplots(1, 2, figsize=(9, 3.2))
order = np.argsort(xi3)
for i in (0, 5, 20):
    axes[0].plot(xi3[order], traj.states[i].alpha_plus.sum(axis=(0, 1, 2))[order],
                 label=f"t={times[i]:.1f}")
axes[0].set_xlabel("xi")
axes[0].set_ylabel("alpha_+ (x-integrated)")
axes[0].legend()
axes[1].plot(d.times, d.l2)
axes[1].set_xlabel("t")
axes[1].set_ylabel("L2 functional")
fig.tight_layout()
fig.savefig("demo_transport_inelastic.png", dpi=120)
# -

# Elastic regime: the kernel only exchanges mass inside equal-energy shells
# (here the +-xi pairs), so each shell's mass is a constant of motion and the
# positron band never feels the electron band.

# +
elastic = build_elastic_kernel(spec, ball, consts)
traj_el = integrate(state, elastic, dt=0.01, horizon=2.0, mode="elastic",
                    consts=consts, output_times=times, store_states=False)
sm = np.asarray(traj_el.diagnostics.shell_mass)
print("number of energy shells:", sm.shape[1] // 2)
print("max per-shell mass drift:", np.abs(sm - sm[0]).max() / np.abs(sm[0]).max())
print("saved demo_transport_inelastic.png")
# -
