"""Compare closed-form formulas for the catalog examples with values derived
from the definitions, including the commonly quoted variants that disagree."""

import argparse
import json

from amdkit import closed_forms as cf


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=None, help="write JSON here as well as printing it")
    args = ap.parse_args()
    audit = {
        "catenoid_bundle": cf.compare_catenoid_bundle(),
        "borisenko_catenoid": cf.compare_borisenko_catenoid(),
        "clifford_cone_normal": cf.compare_clifford_cone_normal(),
        "clifford_cone_hyperplane_x1_x2": cf.clifford_cone_hyperplane_defect(1.0, -0.5, "first"),
        "clifford_cone_hyperplane_x3_x4": cf.clifford_cone_hyperplane_defect(0.3, 1.0, "second"),
        "zw2_fan_edge": cf.fan_edge_relations(),
    }
    text = json.dumps(audit, indent=2, sort_keys=True)
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")


if __name__ == "__main__":
    main()
