"""
Orbits as non-intersecting loops
================================

Every site lies on exactly one cycle of the one-step map.  A random
scatterer field produces tangled loops that wander across many rings; a
structured field produces a handful of very regular ones.
"""

import numpy as np

from ringgas import (
    Geometry, ScattererField, generate_anomalous_field, loop_decomposition,
    period_histogram, ring_span, sample_scatterers,
)

g = Geometry(R=12, N=3)

# %%
# With no scatterers each ring is its own loop of length R.
print("empty      ", period_histogram(loop_decomposition(ScattererField.empty(g))))

# %%
# One isolated scatterer fuses two rings into a single loop of length 2R.
iso = generate_anomalous_field(g, "isolated", k0=4, i0=0)
print("isolated   ", period_histogram(loop_decomposition(iso)))

# %%
# A full row of scatterers blocks itself: every jump gate is closed.
col = generate_anomalous_field(g, "single-column", k0=2)
print("column     ", period_histogram(loop_decomposition(col)))

# %%
# A diagonal staircase gives one ordered loop that sweeps every ring.
diag = loop_decomposition(generate_anomalous_field(g, "diagonal", stride=2))
print("diagonal   ", period_histogram(diag), "spans", [ring_span(o) for o in diag])

# %%
# Random fields: periods always sit between R and R(2N+1) and are multiples of R.
for seed in range(3):
    dec = loop_decomposition(sample_scatterers(g, 0.4, seed))
    spans = [ring_span(o) for o in dec]
    print(f"random {seed}   ", period_histogram(dec), "mean span", np.mean(spans).round(2))
