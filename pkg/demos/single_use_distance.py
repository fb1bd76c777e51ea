"""Single-use discrimination of two damping channels.

The SDP value is compared against the best trace distance found over random
pure inputs on system plus reference, which can only approach it from below.
"""
import numpy as np

from qstrat import comb as C
from qstrat import programs as P

a = C.n_fold_sequential_choi(C.gadc_choi((0.2, 0.1)), 1)
b = C.n_fold_sequential_choi(C.gadc_choi((0.3, 0.1)), 1)

r = P.evaluate("distance", a, b)
print(f"SDP distance {r.value:.8f}  (primal {r.primal_value:.10f}, dual {r.dual_value:.10f})")

# brute force over random pure inputs psi on reference x input
rng = np.random.default_rng(1)
psi = rng.standard_normal((5000, 2, 2)) + 1j * rng.standard_normal((5000, 2, 2))
psi /= np.linalg.norm(psi.reshape(5000, -1), axis=1)[:, None, None]
lift = np.einsum("sri,bc->srbic", psi, np.eye(2)).reshape(5000, 4, 4)
out = lift @ (a.op.matrix - b.op.matrix) @ lift.conj().transpose(0, 2, 1)
best = 0.5 * np.abs(np.linalg.eigvalsh(out)).sum(axis=1).max()
print(f"best of 5000 random inputs {best:.8f}")
