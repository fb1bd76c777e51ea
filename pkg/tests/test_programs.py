import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qstrat import comb as C
from qstrat import programs as P
from qstrat.errors import DomainError
from qstrat.tensor import LabeledOperator

from conftest import random_density


def channel(gamma, noise, n=1):
    return C.n_fold_sequential_choi(C.gadc_choi((gamma, noise)), n)


def random_channel(seed, n=1):
    return C.n_fold_sequential_choi(C.random_channel_choi(2, 2, seed), n)


def pauli_x_channel():
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    vec = np.kron(np.eye(2), x) @ np.eye(2).reshape(-1)
    rounds = C.simple_rounds([2], [2])
    return C.StrategyChoi(rounds, LabeledOperator(rounds.order, np.outer(vec, vec)), unit=None)


def test_distance_identical_is_zero():
    a = random_channel(5, 2)
    r = P.evaluate("distance", a, a)
    assert abs(r.value) <= 1e-7


def test_identity_versus_flip():
    ident = C.identity_choi(2)
    flip = pauli_x_channel()
    assert P.evaluate("distance", ident, flip).value == pytest.approx(1.0, abs=1e-7)
    gw, rep, _ = P.solve_problem(P.build_distance_gw(ident, flip))
    assert rep.status == "optimal"
    assert gw == pytest.approx(2.0, abs=1e-6)


def test_gw_identical_is_zero():
    a = channel(0.2, 0.4)
    gw, rep, _ = P.solve_problem(P.build_distance_gw(a, a))
    assert abs(gw) <= 1e-7


def chain_dual_point(a, b):
    """A feasible point of the distance dual built greedily along the chain."""
    flat = list(a.op.dims)
    dims = list(zip(flat[0::2], flat[1::2]))
    w, v = np.linalg.eigh(a.op.matrix - b.op.matrix)
    y = (v * np.maximum(w, 0)) @ v.conj().T
    for i in range(len(dims) - 1, -1, -1):
        d_a, d_b = dims[i]
        keep = y.shape[0] // d_b
        tr = np.einsum("atbt->ab", y.reshape(keep, d_b, keep, d_b))
        top = np.linalg.eigvalsh(tr)[-1]
        y = top * np.eye(keep // d_a)
    return float(y[0, 0])


def co_strategy_point(rng, n):
    """Product co-strategy ``rho_1^T ⊗ I ⊗ rho_2^T ⊗ ... ⊗ P`` with ``0 <= P <= I``."""
    s = np.ones((1, 1))
    for i in range(n):
        s = np.kron(s, random_density(rng, 2).T)
        if i < n - 1:
            s = np.kron(s, np.eye(2))
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    w, v = np.linalg.eigh(g + g.conj().T)
    p = (v * (0.5 + 0.5 * np.tanh(w))) @ v.conj().T
    return np.kron(s, p)


@pytest.mark.parametrize("n", [1, 2])
def test_weak_duality_on_feasible_points(n, rng):
    a, b = random_channel(21, n), random_channel(22, n)
    value = P.evaluate("distance", a, b).value
    assert chain_dual_point(a, b) >= value - 1e-7
    for _ in range(20):
        s = co_strategy_point(rng, n)
        obj = float(np.real(np.trace(s @ (a.op.matrix - b.op.matrix))))
        assert obj <= value + 1e-7


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_weak_duality_property(seed):
    rng = np.random.default_rng(seed)
    a, b = random_channel(seed), random_channel(seed + 1)
    r = P.evaluate("distance", a, b)
    assert chain_dual_point(a, b) >= r.dual_value - 1e-7
    s = co_strategy_point(rng, 1)
    assert float(np.real(np.trace(s @ (a.op.matrix - b.op.matrix)))) <= r.primal_value + 1e-7
    # smoothing monotonicity
    lo, hi = (P.evaluate("dmin", a, b, e).value for e in (0.02, 0.1))
    assert hi >= lo - 1e-7


def test_dmin_identical():
    a = channel(0.2, 0.3, 2)
    r = P.evaluate("dmin", a, a, 0.05)
    assert r.value == pytest.approx(-math.log2(0.95), abs=1e-6)
    r0 = P.evaluate("dmin", a, a, 0.0)
    assert r0.dual_value == pytest.approx(1.0, abs=1e-6)


def test_state_box_bits():
    zero = C.preparation_choi(C.basis_state(4, 0))
    mixed = C.preparation_choi(np.eye(4) / 4)
    r = P.evaluate("dmin", zero, mixed, 0.0)
    assert r.value == pytest.approx(2.0, abs=1e-6)


def test_dmax_identical_and_full_ball():
    a, b = channel(0.2, 0.2), channel(0.2, 0.3)
    assert abs(P.evaluate("dmax", a, a, 0.05).value) <= 1e-6
    assert abs(P.evaluate("dmax", a, b, 1.0).value) <= 1e-6


def test_dmax_eigenvalue_oracle():
    a, b = random_channel(31), random_channel(32)
    gm = b.op.matrix
    w, v = np.linalg.eigh(gm)
    inv_sqrt = (v / np.sqrt(w)) @ v.conj().T
    oracle = math.log2(np.linalg.eigvalsh(inv_sqrt @ a.op.matrix @ inv_sqrt)[-1])
    assert P.evaluate("dmax", a, b, 0.0).value == pytest.approx(oracle, abs=1e-6)


def test_dmax_outside_support_is_infinite():
    # noiseless damping channels have Choi matrices of different rank-one supports
    a, b = channel(0.2, 0.0), channel(0.3, 0.0)
    r = P.evaluate("dmax", a, b, 0.0)
    assert r.value == math.inf
    # a large enough smoothing ball reaches a comb inside the support
    assert math.isfinite(P.evaluate("dmax", a, b, 0.5).value)


def test_support_basis():
    assert P.support_basis(np.eye(3)) is None
    v = P.support_basis(np.diag([1.0, 0.0, 2.0]))
    assert v.shape == (3, 2)
    assert np.allclose(v.conj().T @ v, np.eye(2))


def test_n1_modes_coincide():
    a, b = random_channel(41), random_channel(42)
    for q in P.QUANTITIES:
        ad = P.evaluate(q, a, b, 0.05, "adaptive").value
        pa = P.evaluate(q, a, b, 0.05, "parallel").value
        assert ad == pytest.approx(pa, abs=1e-7)


def test_adaptive_at_least_parallel_n2():
    a, b = channel(0.2, 0.0, 2), channel(0.3, 0.0, 2)
    ad = P.evaluate("distance", a, b, mode="adaptive").value
    pa = P.evaluate("distance", a, b, mode="parallel").value
    assert ad >= pa - 1e-7
    assert ad - pa > 1e-4


def test_distance_grows_with_uses():
    values = [P.evaluate("distance", channel(0.2, 0.1, n), channel(0.3, 0.1, n)).value
              for n in (1, 2)]
    assert values[1] >= values[0] - 1e-7


def test_domain_errors():
    a, b = channel(0.2, 0.2), channel(0.3, 0.2)
    with pytest.raises(DomainError):
        P.evaluate("dmin", a, b, 1.0)
    with pytest.raises(DomainError):
        P.evaluate("dmax", a, b, 1.5)
    with pytest.raises(DomainError):
        P.evaluate("entropy", a, b)
    with pytest.raises(DomainError):
        P.evaluate("distance", a, b, mode="serial")
    with pytest.raises(DomainError):
        P.build_distance_primal(a, channel(0.3, 0.2, 2))
    # parallel mode needs n-fold combs of a channel
    comb2 = channel(0.2, 0.2, 2)
    generic = C.StrategyChoi(comb2.rounds, comb2.op)
    with pytest.raises(DomainError):
        P.evaluate("distance", generic, generic, mode="parallel")


def test_result_json():
    a, b = channel(0.2, 0.2), channel(0.3, 0.2)
    r = P.evaluate("dmin", a, b, 0.05)
    obj = json.loads(r.to_json())
    assert obj["quantity"] == "dmin" and obj["mode"] == "adaptive"
    assert obj["value"] == r.value
    assert obj["gap"] <= P.GAP_TOLERANCE * (1 + abs(r.primal_value))
    assert obj["value"] == pytest.approx(-math.log2(0.5 * (r.primal_value + r.dual_value)))
    inf = P.evaluate("dmax", channel(0.2, 0.0), channel(0.3, 0.0), 0.0)
    assert json.loads(inf.to_json())["value"] == "inf"


def test_exact_cost_comb():
    a, b = channel(0.2, 0.2), channel(0.3, 0.4)
    lam = P.evaluate("dmax", a, b, 0.0).value
    out = P.exact_cost_comb(a, b)
    assert C.verify_comb(out, tol=1e-7).passed
    low = np.linalg.eigvalsh(P.exact_cost_comb(a, b, lam).op.matrix)[0]
    high = np.linalg.eigvalsh(P.exact_cost_comb(a, b, lam + 1).op.matrix)[0]
    below = np.linalg.eigvalsh(P.exact_cost_comb(a, b, lam - 1e-3).op.matrix)[0]
    assert high > low
    assert below < 0
    with pytest.raises(DomainError):
        P.exact_cost_comb(a, a)
