# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: light
# ---

# # Spinor algebra identities
#
# The package builds the four Dirac matrices in a representation whose entries
# are all 0, +-1, +-i, so the anticommutation relations hold in exact
# arithmetic.  Everything downstream (dispersion matrix, band projectors,
# scattering weights) is checked here against independent oracles.

# +
import numpy as np

from diracsim import (GAMMA, PhysicalConstants, cancellation_constant,
                      dispersion_matrix, eigensystem, scattering_weights,
                      scattering_weights_trace)
from diracsim.algebra import I4, cancellation_anticommutator

rng = np.random.default_rng(0)
consts = PhysicalConstants()          # m0 = c = e = 1
# -

# The defining relations, evaluated exactly (no tolerance needed):

# +
g = GAMMA.gamma
print("(gamma^0)^2 = I4:", np.array_equal(g[0] @ g[0], I4))
print("gamma^1 gamma^2 + gamma^2 gamma^1 = 0:",
      np.array_equal(g[1] @ g[2] + g[2] @ g[1], np.zeros((4, 4))))
print("(gamma^0 gamma^3)^* = gamma^0 gamma^3:",
      np.array_equal((g[0] @ g[3]).conj().T, g[0] @ g[3]))
# -

# The dispersion matrix Q(xi) is Hermitian with Q^2 = (m0^2 c^2 + |xi|^2) I4.
# Its doubly degenerate eigenvalues +-lambda(xi) are the electron and
# positron band energies; the closed-form eigenvectors diagonalize it to
# machine precision.

# +
xi = np.array([1.0, 2.0, 3.0])
q = dispersion_matrix(xi, consts)
es = eigensystem(xi, consts)
print("lambda_plus:", es.lambda_plus)
print("  eigen residual:", np.abs(q @ es.x1 - es.lambda_plus * es.x1).max())
print("  projector completeness:", np.abs(es.pi_plus + es.pi_minus - I4).max())
# -

# The four scattering weights omega_k(xi, q) weight intra-band transitions;
# their complements omega_tilde_k weight electron-positron conversion.  The
# closed forms match the projector-trace definition at every random pair:

# +
xi_batch = rng.normal(size=(1000, 3)) * 2
q_batch = rng.normal(size=(1000, 3)) * 2
closed = scattering_weights(xi_batch, q_batch, consts)
oracle = scattering_weights_trace(xi_batch, q_batch, consts)
print("closed-form vs trace oracle:", np.abs(closed.omega - oracle.omega).max())
print("omega + omega_tilde = 1:", np.abs(closed.omega + closed.omega_tilde - 1).max())
print("range check [0, 1]:", closed.omega.min(), closed.omega.max())
# -

# The anticommutator g0g^k Q(xi) g0g^k Q(q) + Q(q) g0g^k Q(xi) g0g^k is a
# scalar matrix; this cancellation is what removes all off-diagonal
# coefficients from the limiting equations for the band traces.

# +
for k in range(4):
    xi_s, q_s = rng.normal(size=3), rng.normal(size=3)
    mat = cancellation_anticommutator(k, xi_s, q_s, consts)
    ck = cancellation_constant(k, xi_s, q_s, consts)
    print(f"k={k}: c_k = {ck:+.6f}, off-scalar residual "
          f"{np.abs(mat - ck * I4).max():.2e}")
# -
