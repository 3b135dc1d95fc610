"""Coefficient norm of the summed rotated calibrations for k = 2..8.

Rows compare the planes under which the sum cancels with a control plane
for which it does not.
"""

import argparse

import numpy as np

from amdkit.complexgeo import Codim2Plane, ComplexStructure, kahler_form, rotated_calibration_family, sl_form


def unit(n, i):
    e = np.zeros(n)
    e[i] = 1.0
    return e


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kmax", type=int, default=8)
    args = ap.parse_args()

    cs3, cs2 = ComplexStructure.standard(3), ComplexStructure.standard(2)
    rows = [
        ("SL on C^3, P = {x3 = y3 = 0}", sl_form(cs3), Codim2Plane(np.array([unit(6, 2), unit(6, 5)]))),
        ("Kahler on R^4, P = span(e1, e2)", kahler_form(cs2), Codim2Plane(np.array([unit(4, 2), unit(4, 3)]))),
        ("SL on C^3, P = {x1 = x2 = 0} (control)", sl_form(cs3), Codim2Plane(np.array([unit(6, 0), unit(6, 1)]))),
        ("Kahler on R^4, complex P (control)", kahler_form(cs2), Codim2Plane(np.array([unit(4, 1), unit(4, 3)]))),
    ]
    ks = range(2, args.kmax + 1)
    print(f"{'':42s}" + "".join(f"{'k=' + str(k):>11s}" for k in ks))
    for label, w, P in rows:
        norms = [rotated_calibration_family(w, P, k, comass_trials=10)[1].value("sum_norm") for k in ks]
        print(f"{label:42s}" + "".join(f"{x:11.2e}" for x in norms))


if __name__ == "__main__":
    main()
