"""The standard map as the reference system: four-panel phase portraits and
the chaotic-fraction sweep showing the same flooding trend as the trace map.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from tracelab import maps, orbits

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

rng = np.random.default_rng(1)
fig, axes = plt.subplots(2, 2, figsize=(11, 10))
for ax, k in zip(axes.ravel(), (0.4, 0.8, 1.5, 5.0)):
    seeds = rng.random((100, 2))
    for j, s in enumerate(seeds):
        traj = maps.iterate_map(lambda q: maps.standard_map(q, k), s, 1500)
        ax.plot(traj[:, 0], traj[:, 1], ",", color=plt.cm.tab10(j % 10),
                alpha=0.5)
    ax.set_title(f"k = {k}")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_aspect("equal")
fig.tight_layout()
fig.savefig(OUT / "standard_map_portraits.png", dpi=150)
print("wrote", OUT / "standard_map_portraits.png")

ks = np.linspace(0.0, 2.0, 21)
fractions = [orbits.stdmap_chaos_grid(k, res=60, n=4000).chaotic_fraction
             for k in ks]
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(ks, fractions, "o-")
ax.set_xlabel("kick strength k")
ax.set_ylabel("chaotic fraction of the torus")
fig.tight_layout()
fig.savefig(OUT / "standard_map_fraction.png", dpi=150)
print("wrote", OUT / "standard_map_fraction.png")
