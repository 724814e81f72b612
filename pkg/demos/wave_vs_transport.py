# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: light
# ---

# # The kinetic limit: ensemble wave dynamics vs the transport equation
#
# The headline claim: as eps -> 0 the electron-band phase-space density of
# the driven Dirac wave converges to the deterministic transport solution.
# The comparison observable is a weak pairing <f, alpha_+> with a fixed
# smooth test function; D(eps) is the worst-time gap between the ensemble
# mean and the transport prediction, V(eps) the ensemble variance.
#
# This is a scaled-down version of the `compare` experiment (the full
# desk-scale run lives in the acceptance suite); expect a couple of minutes.

# +
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from diracsim import harness

cfg = harness.load_config()
cfg["grid"]["points"] = 128
cfg["eps_list"] = [1 / 8, 1 / 16, 1 / 32]
cfg["ensemble"] = 8
cfg["horizon"] = 0.4
records = harness.run_limit_comparison(cfg)
# -

# Gap and variance per eps:

# +
eps_vals = cfg["eps_list"]
D = {f: [] for f in ("f1", "f2")}
V = {f: [] for f in ("f1", "f2")}
for r in records:
    if r.metric == "limit_discrepancy_D":
        D[r.params["f"]].append(r.value)
    if r.metric == "limit_variance_V":
        V[r.params["f"]].append(r.value)

fig, axes = plt.subplots(1, 2, figsize=(9, 3.4))
for f in ("f1", "f2"):
    axes[0].loglog(eps_vals, D[f], "o-", label=f)
    axes[1].loglog(eps_vals, V[f], "s-", label=f)
axes[0].set_xlabel("eps")
axes[0].set_ylabel("D(eps)")
axes[0].set_title("mean-field gap")
axes[1].set_xlabel("eps")
axes[1].set_ylabel("V(eps)")
axes[1].set_title("ensemble variance (self-averaging)")
for ax in axes:
    ax.legend()
    ax.invert_xaxis()
fig.tight_layout()
fig.savefig("demo_limit_comparison.png", dpi=120)

for f in ("f1", "f2"):
    print(f"{f}: D = {['%.2e' % v for v in D[f]]},  V = {['%.2e' % v for v in V[f]]}")
verdicts = {r.metric: r.value for r in records if "monotone" in r.metric}
print("monotone verdicts:", verdicts)
print("saved demo_limit_comparison.png")
# -
