"""Two uses of a damping channel: adaptive versus parallel strategies.

For noiseless damping the adaptive strategy distance exceeds the parallel one,
so feeding the first output back into the second use helps.
"""
from qstrat import comb as C
from qstrat import programs as P

for noise in (0.0, 0.2, 0.5):
    a = C.n_fold_sequential_choi(C.gadc_choi((0.2, noise)), 2)
    b = C.n_fold_sequential_choi(C.gadc_choi((0.3, noise)), 2)
    ad = P.evaluate("distance", a, b, mode="adaptive").value
    pa = P.evaluate("distance", a, b, mode="parallel").value
    print(f"noise {noise:.1f}: adaptive {ad:.6f}  parallel {pa:.6f}  gap {ad - pa:.2e}")
