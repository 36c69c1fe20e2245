"""Periodic orbits: the closed-form period-two curve, stability along its
continuation in V, and the elliptic transition with its period-doubled
daughter orbit.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from tracelab import periodic

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

Vs = np.linspace(-0.02, -0.95, 120)
traces = []
for V in Vs:
    po = periodic.find_periodic(V, 2, periodic.period_two_point_at_level(V))
    traces.append(po.residual_trace)

fig, ax = plt.subplots(figsize=(7, 4.5))
ax.plot(Vs, traces, lw=1.5)
ax.axhline(-2, color="crimson", ls="--", lw=1, label="parabolic boundary")
ax.axhline(2, color="crimson", ls="--", lw=1)
ax.fill_between(Vs, -2, 2, alpha=0.12, color="green", label="elliptic band")
ax.set_xlabel("V")
ax.set_ylabel("surface trace of the period-2 orbit")
ax.legend()
fig.tight_layout()
fig.savefig(OUT / "period2_trace_vs_V.png", dpi=150)
print("wrote", OUT / "period2_trace_vs_V.png")

start = periodic.find_periodic(-0.5, 2, periodic.period_two_point_at_level(-0.5))
branch = periodic.continue_in_V(start, -0.7, max_step=0.02)
for e in branch.events:
    print(f"event: {e.kind} at V = {e.V:.6f}")
po_ell = branch.orbits[-1]
print(f"endpoint V = {po_ell.V:.3f}: {po_ell.stability.value}, "
      f"t = {po_ell.residual_trace:.4f}")
