"""Smoothed min- and max-relative entropies of two-use strategies.

Growing the smoothing radius can only raise ``D_min`` and lower ``D_max``.
The ``ε = 0`` max-relative entropy is then rebuilt as an explicit comb, which
is positive at the optimal ``λ`` and loses positivity just below it.
"""
import numpy as np

from qstrat import comb as C
from qstrat import programs as P

a = C.n_fold_sequential_choi(C.gadc_choi((0.2, 0.2)), 2)
b = C.n_fold_sequential_choi(C.gadc_choi((0.2, 0.3)), 2)

for eps in (0.0, 0.01, 0.05, 0.1):
    dmax = P.evaluate("dmax", a, b, eps).value
    line = f"eps {eps:.2f}: dmax {dmax:.6f}"
    if eps > 0:
        line += f"  dmin {P.evaluate('dmin', a, b, eps).value:.6f}"
    print(line)

lam = P.evaluate("dmax", a, b, 0.0).value
print("min eigenvalue at lambda       ", np.linalg.eigvalsh(P.exact_cost_comb(a, b, lam).op.matrix)[0])
print("min eigenvalue at lambda - 1e-3", np.linalg.eigvalsh(P.exact_cost_comb(a, b, lam - 1e-3).op.matrix)[0])
