"""Interval toolbox tour
=======================

Boxes, weighted widths, matrix measures, and box subdivision: the small
set of primitives everything else is built from.

Run: python demos/01_interval_toolbox.py
"""

import numpy as np

from nncreach import (
    IntervalVector,
    ToleranceVector,
    interval_hull,
    matrix_measure_inf,
    uniform_divide,
    weighted_inf_norm,
)


def main():
    print("=" * 60)
    print("Boxes")
    print("=" * 60)
    box = IntervalVector(np.array([2.5, -0.25]), np.array([3.0, 0.25]))
    print("box:      ", box)
    print("width:    ", box.width)
    print("center:   ", box.center)

    print()
    print("Subdividing bisects every axis at its midpoint:")
    kids = uniform_divide(box)
    for k, kid in enumerate(kids):
        print(f"  child {k}: {kid}")
    print("hull of the children reassembles the box exactly:")
    print("  ", interval_hull(kids))

    print()
    print("=" * 60)
    print("Weighted widths")
    print("=" * 60)
    eps = ToleranceVector(np.array([0.1, np.inf]))
    print("tolerances:", eps.eps)
    w = weighted_inf_norm(box.width, eps)
    print(f"weighted width of the box: {w:.3f}")
    print("  > 1 means some finite-tolerance axis is wider than its target;")
    print("  the infinite entry removes the second axis from the check.")

    print()
    print("=" * 60)
    print("Matrix measures")
    print("=" * 60)
    A = np.array([[-2.0, 1.0], [0.0, -3.0]])
    print("A =", A.tolist())
    print(f"max-norm matrix measure: {matrix_measure_inf(A):.3f}")
    print("  negative values certify contraction of the flow of xdot = A x;")
    print(f"  here the widths shrink at least like exp({matrix_measure_inf(A):.0f} t).")


if __name__ == "__main__":
    main()
