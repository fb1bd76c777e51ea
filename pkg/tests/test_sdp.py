import json

import numpy as np
import pytest
import scipy.sparse as sp

from qstrat import comb as C
from qstrat import programs as P
from qstrat import tensor as T
from qstrat.errors import BuildError
from qstrat.maps import (Composed, Congruence, Identity, PartialTraceTail, ScalarTimes,
                         TensorIdentityTail, TraceWith, hs_inner)
from qstrat.sdp import SdpProblem, herm_basis, lower_to_standard
from qstrat.solver import solve

from conftest import random_hermitian


def gadc_pair(n=1, noise=0.2):
    a = C.n_fold_sequential_choi(C.gadc_choi((0.2, noise)), n)
    b = C.n_fold_sequential_choi(C.gadc_choi((0.3, noise)), n)
    return a, b


def random_pair(n=1, seed=3):
    a = C.n_fold_sequential_choi(C.random_channel_choi(2, 2, seed), n)
    b = C.n_fold_sequential_choi(C.random_channel_choi(2, 2, seed + 100), n)
    return a, b


def all_programs(a, b):
    support = P.support_basis(b.op.matrix)
    if support is None:
        # force a reduced-support build as well by projecting off one direction
        w, v = np.linalg.eigh(b.op.matrix)
        support = v[:, 1:]
    progs = [
        P.build_distance_primal(a, b), P.build_distance_dual(a, b), P.build_distance_gw(a, b),
        P.build_dmin_primal(a, b, 0.05), P.build_dmin_dual(a, b, 0.05),
        P.build_dmax_primal(a, b, 0.05), P.build_dmax_primal(a, b, 0.0),
        P.build_dmax_primal(a, b, 0.05, support), P.build_dmax_dual(a, b, 0.05),
        P.build_smoothing_reach(a, b, support),
    ]
    return progs


# ---------------------------------------------------------------------------
# maps


def sample_maps(rng):
    v = rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3))
    return [
        Identity(3),
        PartialTraceTail(4, 3),
        TensorIdentityTail(4, 2),
        TraceWith(random_hermitian(rng, 4)),
        ScalarTimes(random_hermitian(rng, 3)),
        Congruence(v),
        -2.5 * PartialTraceTail(4, 2),
        Composed(PartialTraceTail(4, 3), TensorIdentityTail(4, 3)),
    ]


def test_map_adjoint_and_matrix(rng):
    for phi in sample_maps(rng):
        for _ in range(20):
            x = random_hermitian(rng, phi.d_in)
            y = random_hermitian(rng, phi.d_out)
            lhs = hs_inner(y, phi.apply(x))
            rhs = hs_inner(phi.adjoint(y), x)
            assert abs(lhs - rhs) <= 1e-10 * (1 + abs(lhs))
            vec = phi.matrix() @ x.reshape(-1)
            assert np.allclose(vec.reshape(phi.d_out, phi.d_out), phi.apply(x), atol=1e-12)


def test_map_examples():
    x = np.arange(16.0).reshape(4, 4)
    x = x + x.T
    # tracing the trailing qubit of a two-qubit operator
    tr = PartialTraceTail(2, 2).apply(x)
    assert np.allclose(tr, [[x[0, 0] + x[1, 1], x[0, 2] + x[1, 3]],
                            [x[2, 0] + x[3, 1], x[2, 2] + x[3, 3]]])
    lift = TensorIdentityTail(2, 2).apply(np.eye(2))
    assert np.allclose(lift, np.eye(4))
    assert np.allclose(TraceWith(np.eye(4)).apply(x), np.trace(x))


@pytest.mark.parametrize("pair", [gadc_pair(1), gadc_pair(2), random_pair(1), random_pair(2)],
                         ids=["gadc-n1", "gadc-n2", "random-n1", "random-n2"])
def test_adjoint_identity_every_program_map(pair, rng):
    a, b = pair
    for prob in all_programs(a, b):
        for cname, var, phi in prob.constraint_maps():
            for _ in range(100):
                x = random_hermitian(rng, phi.d_in)
                y = random_hermitian(rng, phi.d_out)
                lhs = hs_inner(y, phi.apply(x))
                rhs = hs_inner(phi.adjoint(y), x)
                assert abs(lhs - rhs) <= 1e-10, (prob.name, cname, var)


# ---------------------------------------------------------------------------
# lowering


def encode(std, values):
    """Standard-form coordinates of problem-variable values (slacks zero)."""
    xs = [np.zeros((s, s)) for s in std.psd_sides]
    xl = np.zeros(std.n_nonneg)
    xf = np.zeros(std.n_free)
    for name, info in std.layout.items():
        if name not in values:
            continue
        x = np.asarray(values[name], dtype=complex)
        if info.kind == "psd":
            xs[info.index] = x.real if std.real_field else T.realify(x)
        elif info.kind == "nonneg":
            xl[info.index] = x[0, 0].real
        elif info.basis is None:
            xf[info.index] = x[0, 0].real
        else:
            coords = info.basis.conj().T @ x.reshape(-1)
            xf[info.index:info.index + info.count] = np.real(coords)
    return xs, xl, xf


def random_values(prob, rng, real):
    out = {}
    for v in prob.variables.values():
        h = random_hermitian(rng, v.side)
        out[v.name] = h.real.astype(complex) if real else h
    return out


@pytest.mark.parametrize("pair", [gadc_pair(1), random_pair(1), gadc_pair(2)],
                         ids=["gadc-n1", "random-n1", "gadc-n2"])
def test_lowered_rows_reproduce_constraint_maps(pair, rng):
    a, b = pair
    for prob in all_programs(a, b):
        std = lower_to_standard(prob)
        vals = random_values(prob, rng, std.real_field)
        xs, xl, xf = encode(std, vals)
        ax = sum((blk @ x.reshape(-1) for blk, x in zip(std.a_psd, xs)), np.zeros(std.m))
        ax = ax + std.a_nonneg @ xl + std.a_free @ xf
        expect = []
        for c in prob.constraints:
            lhs = sum(phi.apply(vals[var]) for var, phi in c.terms)
            basis = herm_basis(c.side, std.real_field)
            expect.append(np.real(basis.conj().T @ lhs.reshape(-1)))
        assert np.allclose(ax, np.concatenate(expect), atol=1e-10), prob.name
        # objective
        pobj = sum(float(np.sum(c * x)) for c, x in zip(std.c_psd, xs))
        pobj += float(std.c_nonneg @ xl) + float(std.c_free @ xf)
        assert pobj * std.objective_sign == pytest.approx(prob.objective_value(vals), abs=1e-9)


def test_toy_scalar_program():
    prob = SdpProblem("min")
    prob.add_variable("x", 1)
    prob.add_objective("x", 1.0)
    prob.add_constraint("lower", [("x", Identity(1))], ">=", 1.0)
    val, rep, std = P.solve_problem(prob)
    assert rep.status == "optimal"
    assert val == pytest.approx(1.0, abs=1e-8)


def test_alternate_lowering_path_agrees():
    a, b = gadc_pair(1, noise=0.1)
    for prob in (P.build_distance_primal(a, b), P.build_dmin_dual(*random_pair(1), 0.05)):
        vals = []
        for path in ("primary", "alternate"):
            std = lower_to_standard(prob, path=path)
            rep = solve(std)
            assert rep.status == "optimal"
            vals.append(std.objective_sign * rep.primal_value)
        assert vals[0] == pytest.approx(vals[1], abs=1e-8)


def test_real_and_complex_fields_agree():
    a, b = gadc_pair(1, noise=0.3)
    prob = P.build_distance_dual(a, b)
    assert prob.is_real()
    vals = [P.solve_problem(prob, field=f)[0] for f in ("real", "complex")]
    assert vals[0] == pytest.approx(vals[1], abs=1e-8)


def test_real_field_rejects_complex_data():
    a, b = random_pair(1)
    prob = P.build_distance_primal(a, b)
    assert not prob.is_real()
    with pytest.raises(BuildError):
        lower_to_standard(prob, field="real")


def test_herm_basis_orthonormal():
    for real in (False, True):
        basis = herm_basis(3, real).toarray()
        gram = basis.conj().T @ basis
        assert np.allclose(gram, np.eye(basis.shape[1]))
        assert basis.shape[1] == (6 if real else 9)


def test_build_errors():
    prob = SdpProblem("max")
    prob.add_variable("X", 2)
    with pytest.raises(BuildError):
        prob.add_variable("X", 2)
    with pytest.raises(BuildError):
        prob.add_variable("s", 2, "nonneg")
    with pytest.raises(BuildError):
        prob.add_objective("Y", np.eye(2))
    with pytest.raises(BuildError):
        prob.add_constraint("c", [("X", Identity(3))], "==", np.eye(3))
    with pytest.raises(BuildError):
        prob.add_constraint("c", [("X", Identity(2))], "~", np.eye(2))
    with pytest.raises(BuildError):
        prob.add_objective("X", np.array([[0, 1], [0, 0]]))
    with pytest.raises(BuildError):
        SdpProblem("maximize")


def test_standard_form_json_dump():
    a, b = gadc_pair(1)
    std = lower_to_standard(P.build_distance_primal(a, b))
    obj = json.loads(std.to_json())
    assert obj["psd_sides"] == list(std.psd_sides)
    assert len(obj["b"]) == std.m
    assert obj["objective_sign"] == -1.0
    # triplets rebuild the sparse rows exactly
    trip = np.array(obj["a_psd"][0])
    s = std.psd_sides[0]
    rebuilt = sp.csr_matrix((trip[:, 2], (trip[:, 0].astype(int), trip[:, 1].astype(int))),
                            shape=(std.m, s * s))
    assert abs(rebuilt - std.a_psd[0]).max() == 0
