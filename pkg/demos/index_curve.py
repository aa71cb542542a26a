"""Index of conditional expectations and the minimal one.

M_2 ⊂ M_2 ⊕ M_2 (diagonal embedding) has a one-parameter family of
expectations E_w(y ⊕ z) = w y + (1 - w) z. Its index is max(1/w, 1/(1 - w)),
minimized at the trace-preserving choice w = 1/2 with value 2.

Run: python3 demos/index_curve.py
"""

import numpy as np

from chanthermo.algebra import MultiMatrixAlgebra
from chanthermo.index import InclusionData, certify_minimality, index_curve, minimal_expectation

diag = InclusionData(MultiMatrixAlgebra((1, 1)), np.array([[1], [1]]))  # C ⊕ C ⊂ M_2
dual = diag.dual()                                                      # M_2 ⊂ M_2 ⊕ M_2
for w in (0.1, 0.25, 0.5, 0.75, 0.9):
    print(f"w = {w:4.2f}  index = {index_curve(dual, w):.4f}")

# For an inclusion with matrix [[1, 2], [1, 1]] the minimal index is the squared
# Perron-Frobenius norm; random perturbations of the minimal expectation never do better.
inc = InclusionData(MultiMatrixAlgebra((1, 2)), np.array([[1, 2], [1, 1]]))
me = minimal_expectation(inc)
best = certify_minimality(me, np.random.default_rng(1), trials=100)
print(f"\nminimal index {me.index:.6f} (closed form {me.closed_form:.6f}); best of 100 perturbations {best:.6f}")
