"""Monte Carlo points: the same partition fit, averaged over seeds.

Random points behave like a lattice with fully distinct abscissae but
converge at the slower O(N^-1/2) rate; twenty seeds give the spread.
"""

from qmcmarginal.analysis import run_row
from qmcmarginal.distributions import preset

dist = preset("exp2d")
seeds = range(20)
for N in (10**3, 10**4, 10**5):
    row = run_row(dist, {"kind": "random", "N": N}, "II", 8, seeds=list(seeds))
    cells = "  ".join(f"{e.sup_error:.4f} +- {e.sup_std:.4f}" for e in row.errors)
    print(f"N={N:>6d}  {cells}")
