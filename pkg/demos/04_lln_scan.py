"""
Weak law of large numbers as R grows
====================================

For each ring length R, sample times across [0, R^alpha] and record the
largest frequency with which a ring density strays more than epsilon from
the diffusion solution.  The frequency falls with R; the Chebyshev bound
6 / (epsilon^2 R^(1 - alpha)) is printed alongside.
"""

from ringgas import EnsembleConfig, Geometry, lln_convergence_scan
from ringgas.cli import parse_profile

N = 3
base = EnsembleConfig(
    geometry=Geometry(250, N), mu=0.5,
    initial_profile=tuple(parse_profile("step:0.8,0.2", N)),
    replicas=100, times=(0,), epsilon=0.05, alpha=0.5, master_seed=5,
)
print(f"{'R':>7}  {'max freq':>9}  {'union':>6}  {'envelope':>9}")
for row in lln_convergence_scan(base, [250, 1000, 4000, 16000]):
    print(f"{row.R:7d}  {row.max_freq:9.3f}  {row.max_union_freq:6.3f}  {row.envelope:9.2f}")
