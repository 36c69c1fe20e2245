"""Level-surface geometry: classification, the two z-sheets, and the
invariant area density.

The cubic I(x, y, z) = x^2 + y^2 + z^2 - 2xyz - 1 has a sphere-like
component inside [-1, 1]^3 for V in [-1, 0).  This script samples it,
shows both sheets of z over the (x, y) shadow, and plots the area density
blowing up toward the conic corners as V approaches 0.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from tracelab import maps, surface

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

for V in (-0.9, -0.5, -0.1):
    print(f"V = {V}: {surface.classify_level(V).value}")

fig, axes = plt.subplots(1, 3, figsize=(13, 4))
for ax, V in zip(axes, (-0.9, -0.5, -0.1)):
    pts = surface.sample_compact_component(V, 40_000)
    upper = pts[:, 2] >= pts[:, 0] * pts[:, 1]
    ax.plot(pts[upper, 0], pts[upper, 1], ",", color="tab:blue", alpha=0.4)
    ax.plot(pts[~upper, 0], pts[~upper, 1], ",", color="tab:orange", alpha=0.4)
    ax.set_title(f"V = {V} shadow (two sheets)")
    ax.set_aspect("equal")
fig.tight_layout()
fig.savefig(OUT / "surface_shadows.png", dpi=150)
print("wrote", OUT / "surface_shadows.png")

# area density along the diagonal toward the corner (1, 1, 1) at V -> 0^-
fig, ax = plt.subplots(figsize=(5, 4))
for V in (-0.5, -0.1, -0.02):
    xs = np.linspace(0.0, np.sqrt(1 - np.sqrt(-V)) - 1e-6, 300)
    dens = []
    for x in xs:
        roots = surface.solve_z(x, x, V)
        dens.append(surface.area_density([x, x, roots[-1]]))
    ax.semilogy(xs, dens, label=f"V = {V}")
ax.set_xlabel("x along the diagonal")
ax.set_ylabel("invariant area density 1/|grad I|")
ax.legend()
fig.tight_layout()
fig.savefig(OUT / "area_density.png", dpi=150)
print("wrote", OUT / "area_density.png")
