"""Point sets and their projections.

A regular grid repeats every abscissa many times; a rank-1 lattice with
coprime generating vector never does. Maximal rank lattices sit in between.
The multiplicity ``m`` of the projected abscissae decides which algorithm
applies: point-wise means need ``m > 1``, partitions work for any set.
"""

import argparse
import os

from qmcmarginal.pointset import (
    grid_points,
    korobov_lattice,
    korobov_search,
    maximal_rank_lattice,
    projection_profile,
    random_points,
    write_points_csv,
)


def summary(ps):
    prof = projection_profile(ps, 0)
    m = prof.m if prof.m is not None else "varies"
    return f"{ps.describe():45s} n={prof.n:<5d} m={m}"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default=None, help="directory for point CSV files")
    args = parser.parse_args()

    alpha = korobov_search(32, 2)
    sets = {
        "grid5": grid_points(5, 2),
        "korobov32": korobov_lattice(32, alpha, 2),
        "maximal": maximal_rank_lattice(5, 2, (1, 2)),
        "random": random_points(32, 2, seed=1),
    }
    for name, ps in sets.items():
        print(f"{name:10s} {summary(ps)}")
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            write_points_csv(ps, os.path.join(args.out, f"{name}.csv"))

    # exact rational coordinates make coincident abscissae unambiguous
    lat = sets["maximal"]
    print("first maximal-rank point:", [str(lat.fraction(0, j)) for j in range(lat.s)])


if __name__ == "__main__":
    main()
