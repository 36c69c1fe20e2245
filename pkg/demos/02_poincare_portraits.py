"""Phase portraits of the trace map on the compact component.

Mirrors the classic four-panel picture: near V = -1 the sphere is laminated
by invariant circles; as V rises toward 0 the stochastic sea floods the
phase space, leaving shrinking island chains.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from tracelab import orbits, surface

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

rng = np.random.default_rng(0)
fig, axes = plt.subplots(2, 2, figsize=(11, 10))
for ax, V in zip(axes.ravel(), (-0.95, -0.7, -0.5, -0.2)):
    pts = surface.sample_compact_component(V, 600)
    seeds = pts[rng.choice(len(pts), 120, replace=False)]
    cloud = orbits.poincare_cloud(V, seeds, 4000)
    colors = cloud.seed_ids % 10
    ax.scatter(cloud.points[:, 0], cloud.points[:, 1], c=colors, s=0.05,
               cmap="tab10", lw=0)
    ax.set_title(f"V = {V}   ({len(cloud.failures)} failed seeds)")
    ax.set_aspect("equal")
fig.suptitle("orthographic (x, y) projection, both sheets overlaid")
fig.tight_layout()
fig.savefig(OUT / "poincare_portraits.png", dpi=150)
print("wrote", OUT / "poincare_portraits.png")
