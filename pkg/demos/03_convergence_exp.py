"""Convergence of Algorithm II on Korobov lattices for a bivariate exponential.

Exp(1) x Exp(1) truncated to [0, 8]^2, n = 8 partitions, N from 2^8 to
2^14. The sup error relative to the peak of each marginal shrinks by
roughly a factor four per step.
"""

import argparse

from qmcmarginal.analysis import convergence_study
from qmcmarginal.distributions import preset

parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
parser.add_argument("--partitions", type=int, default=8)
parser.add_argument("--csv", default=None, help="write the report here")
args = parser.parse_args()

schedule = [{"kind": "korobov", "N": 2**k} for k in (8, 10, 12, 14)]
report = convergence_study(preset("exp2d"), schedule, algorithm="II", partitions=args.partitions)

print("     N  alpha   rel sup error per axis")
for row, rel in zip(report.rows, report.sup_errors(relative=True)):
    print(f"{row.N:6d}  {row.params['alpha']:5d}   " + "  ".join(f"{v:.4f}" for v in rel))
print("decreasing within 10%:", report.trend_flags())

if args.csv:
    report.write_csv(args.csv)
