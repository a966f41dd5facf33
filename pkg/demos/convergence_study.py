"""
A small Monte Carlo convergence study
=====================================

Hausdorff distances shrink as n grows, and on every run they stay below
the sup gap d_n between the estimated and true radius functions.
"""

from starshape.pipeline import run_convergence

table = run_convergence("triangle", sizes=[100, 1000, 5000], seeds=range(5), resolution=360)

print(f"{'n':>6} {'seed':>4} {'eta':>8} {'dH':>8} {'d_n':>8}")
for r in table.rows:
    print(f"{r.n:>6} {r.seed:>4} {r.eta:>8.4f} {r.hausdorff_boundary:>8.4f} {r.d_n:>8.4f}")
    assert r.hausdorff_boundary <= r.d_n + 1e-9

for n, m in table.median_by_n().items():
    print(f"median Hausdorff at n = {n}: {m:.4f}")
