"""Tabulate the cut bound and the arrival relaxation bound for every node of a topology."""

import argparse

from rwnca.model import DesignSpec
from rwnca.planner import arrival_bound
from rwnca.topology import Instance, all_to_one, cost239, cut_lower_bound, read_topology


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--topology")
    args = ap.parse_args()
    t = read_topology(args.topology) if args.topology else cost239()

    print("| dest | degree | cut (coding) | cut (none) | " + " | ".join(f"D{d} (W, client)" for d in range(1, 6)) + " |")
    print("|" + "---|" * 9)
    for dest in t.nodes:
        demands = all_to_one(t, dest)
        inst = Instance.create(t, demands, 1)
        row = [dest, t.degree(dest), cut_lower_bound(inst, True), cut_lower_bound(inst, False)]
        for design in range(1, 6):
            b = arrival_bound(t, demands, DesignSpec.for_design(design, len(demands)), 2 * len(demands))
            w = b.min_wavelengths
            row.append(f"({w}, {b.min_client_side.get(w, '-')})")
        print("| " + " | ".join(str(c) for c in row) + " |")


if __name__ == "__main__":
    main()
