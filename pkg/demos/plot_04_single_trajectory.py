"""
One electron through the pulse
===============================

Integrate a single injection and watch the averaged momentum respond to the
potential.  q_minus stays fixed, so the energy gain is tied to the polar angle
of the exit momentum.  The electron starts 2.9 degrees off the x axis and is
pushed onto it: its ring azimuth is essentially zero.
"""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from ponderoscatter import PhysicalConfig, derive_initial_state, derive_sim_params
from ponderoscatter.dynamics import ballistic_hit, integrate, theta_from_energy

params = derive_sim_params(PhysicalConfig())
res = integrate(derive_initial_state(params, (5e-6, 2.5e-7, -6.0)), params, record=True)
h = res.history

print(f"W = {res.kinetic_energy:.4f} MeV, theta = {math.degrees(res.polar_angle):.3f} deg")
print(f"theta from W alone: {math.degrees(theta_from_energy(res.kinetic_energy, params.q_minus0)):.3f} deg")
print(f"worst mass-shell residual {res.closure_residual:.1e}")
hit = ballistic_hit(res.exit_state, params)
print("misses the ring" if hit is None else f"hits the ring at alpha = {math.degrees(hit.alpha):.2f} deg")

# %%
fig, axes = plt.subplots(2, 1, sharex=True, figsize=(6, 5), constrained_layout=True)
axes[0].plot(h[:, 0], h[:, 8] * params.mc2_mev)
axes[0].set_ylabel("U [MeV]")
axes[1].plot(h[:, 0], h[:, 4], label="qx")
axes[1].plot(h[:, 0], h[:, 6], label="qz")
axes[1].set_ylabel("q [m c]")
axes[1].set_xlabel("phase phi")
axes[1].legend()
fig.savefig("single_trajectory.png", dpi=120)
