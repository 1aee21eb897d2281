"""Walkthrough: how the work scales with the approximation parameter.

Every sink price climbs multiplicatively from eps*min(c/p), so the number of
rises per sink is capped by the profit-rate spread U; halving eps roughly
doubles the rises.  The run counters witness both effects.
"""

import math
from fractions import Fraction

from budget_flow import SolverConfig, diagnostics, generate, solve

instances = [generate(seed=s, n=8, m=8, density=0.6, u_range=(1, 6)) for s in (3, 11, 27)]

print("seed  eps    phases  rises  bound  ops      gap")
for seed, instance in zip((3, 11, 27), instances):
    for eps in (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 16)):
        solution = solve(instance, SolverConfig(epsilon=eps))
        stats = solution.stats
        bound = diagnostics(instance, eps).beta_rise_bound
        gap = solution.certificate.gap_ratio
        gap_text = "vacuous" if gap is None else f"{float(gap):.4f}"
        print(
            f"{seed:>4}  {str(eps):<5}  {stats.get('phases'):>6}  "
            f"{stats.get('beta_rises'):>5}  {bound:>5}  {stats.operations():>7}  {gap_text}"
        )
    print()

print("the rises column stays under its bound; work per rise stays near")
print("n^2 + n*log2(m) =", 8**2 + 8 * math.log2(8), "for these shapes")
