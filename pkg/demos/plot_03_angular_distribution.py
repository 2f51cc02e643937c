"""
Azimuthal distribution on the ring detector
============================================

Monte Carlo over the injection domain with uniform areal density, then a
1 degree histogram of the detector azimuth smoothed over the detector's own
angular size.  The sample size is kept small here; pass a larger number on the
command line for smoother curves.

    python plot_03_angular_distribution.py 3000
"""

import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from ponderoscatter import PhysicalConfig, derive_sim_params
from ponderoscatter.experiment import SamplingConfig, angular_histogram, detected_alpha, run_scatter

per_plane = int(sys.argv[1]) if len(sys.argv) > 1 else 600

fig, ax = plt.subplots(figsize=(6, 4), constrained_layout=True)
for mu in (0.0, -1.55):
    params = derive_sim_params(PhysicalConfig(mu=mu))
    run = run_scatter(params, SamplingConfig(samples_per_plane=per_plane), seed=0)
    rec = run.records
    dist = angular_histogram(detected_alpha(rec), 1.0, params.smoothing_deg)
    print(f"mu = {mu}: {len(rec)} trajectories, {rec.n_detected} detected, "
          f"<n>(0)/<n>(90) = {dist.ratio(0, 90):.3g}")
    ax.plot(dist.centers_deg, dist.smoothed, label=f"mu = {mu}")

# %%
# With mu = -1.55 the detected electrons leave along the polarization axis
# (alpha = 0 and 180 degrees); mu = 0 is flat.
ax.set_xlabel("alpha [deg]")
ax.set_ylabel("normalized <n>")
ax.legend()
fig.savefig("angular_distribution.png", dpi=120)
