"""
Ponderomotive potential of the focused pulse
=============================================

Transverse maps of U at the focus (z = 0) and pulse peak (phi = 0) for a purely
TEM-like mode mix (mu = 0) and for mu = -1.55.  With mu = 0 the potential is a
single round hill; mu = -1.55 adds two side maxima on the polarization (x) axis
at about 40 % of the central height.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from ponderoscatter import PhysicalConfig, derive_sim_params
from ponderoscatter.experiment import GridSpec, potential_map

# %%
# One grid, two values of mu.  U is returned in units of m c^2.
grid = GridSpec.square(2.0, 201)
x, y = grid.mesh()
maps = {}
for mu in (0.0, -1.55):
    params = derive_sim_params(PhysicalConfig(mu=mu))
    maps[mu] = potential_map(grid, params) * params.mc2_mev

# %%
# Cut along the x axis: the side maximum for mu = -1.55.
row = maps[-1.55][100]
side = np.argmax(np.where(x[100] > 0.5, row, 0))
print(f"side maximum at x = {x[100, side]:.3f} R, {row[side] / row.max():.3f} of the peak")

fig, axes = plt.subplots(1, 2, figsize=(9, 4), constrained_layout=True)
for ax, (mu, u) in zip(axes, maps.items()):
    im = ax.contourf(x, y, u, levels=30, cmap="viridis")
    ax.set_title(f"mu = {mu}")
    ax.set_xlabel("x / R")
    ax.set_ylabel("y / R")
    ax.set_aspect("equal")
fig.colorbar(im, ax=axes, label="U [MeV]")
fig.savefig("potential_maps.png", dpi=120)
