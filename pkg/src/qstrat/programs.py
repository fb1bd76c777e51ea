"""SDPs for strategy distinguishability and the evaluators built on them.

Notation for an ``n``-round pair with input dims ``a_i`` and output dims
``b_i`` (all operators in interleaved order):

* ``Q_i = prod_{j<=i} a_j b_j`` is the side of an operator on rounds ``1..i``;
* ``P_i = Q_{i-1} a_i`` is the side after adding round ``i``'s input only.

Every subsystem map acts on the trailing factor, so ``Tr_{A_i}`` of a
``P_i``-sided operator and ``X ⊗ I_{B_i}`` of a ``P_i``-sided operator are
plain tail maps.

Quantities:

* ``distance``: the normalized strategy distance, i.e. the largest success
  bias ``Tr[S(Γ^N - Γ^M)]`` over sub-co-strategies ``S``.
* ``dmin``: ``-log2`` of the smallest ``Tr[S Γ^M]`` subject to
  ``Tr[S Γ^N] >= 1 - ε`` (smooth min-relative entropy).
* ``dmax``: ``log2`` of the smallest ``λ`` with an ε-close comb ``Ñ <= λ Γ^M``
  (smooth max-relative entropy).
"""
from dataclasses import dataclass
import json
import math

import numpy as np

from . import comb as C
from .errors import DomainError, SolverStatusError
from .maps import Congruence, Identity, PartialTraceTail, ScalarTimes, TensorIdentityTail, TraceWith
from .sdp import SdpProblem, lower_to_standard
from .solver import SolverOptions, solve

QUANTITIES = ("distance", "dmin", "dmax")
MODES = ("adaptive", "parallel")
GAP_TOLERANCE = 1e-6
DMIN_FLOOR = 1e-12
DMAX_CEILING = 1e12
REACH_MARGIN = 1e-7
# exact costs at or below this many bits are solver noise around zero
DEGENERATE_BITS = 1e-7


def _dims(n_choi, m_choi):
    r1, r2 = n_choi.rounds, m_choi.rounds
    d1 = [(r1.input_dim(i), r1.output_dim(i)) for i in range(r1.n)]
    d2 = [(r2.input_dim(i), r2.output_dim(i)) for i in range(r2.n)]
    if d1 != d2:
        raise DomainError(f"round structures differ: {d1} vs {d2}")
    return d1


def _sides(dims):
    q = [1]
    p = []
    for a, b in dims:
        p.append(q[-1] * a)
        q.append(q[-1] * a * b)
    return q, p


def _check_eps(eps, closed=True):
    eps = float(eps)
    ok = 0.0 <= eps <= 1.0 if closed else 0.0 <= eps < 1.0
    if not ok:
        raise DomainError(f"epsilon must lie in [0, 1{']' if closed else ')'}, got {eps!r}")
    return eps


def _sub_co_strategy(prob, dims, top="S"):
    """Declare ``S_[1..n]`` and the normalization chain; ``top`` must then be
    tied to ``S_[n] ⊗ I_{B_n}`` by the caller."""
    q, p = _sides(dims)
    n = len(dims)
    for i in range(1, n + 1):
        prob.add_variable(f"S{i}", p[i - 1], "psd")
    for i in range(n, 1, -1):
        a_i, b_prev = dims[i - 1][0], dims[i - 2][1]
        prob.add_constraint(
            f"chain{i}",
            [(f"S{i}", PartialTraceTail(q[i - 1], a_i)),
             (f"S{i - 1}", -1.0 * TensorIdentityTail(p[i - 2], b_prev))],
            "==", np.zeros((q[i - 1], q[i - 1])))
    prob.add_constraint("normalization", [("S1", TraceWith(np.eye(p[0])))], "==", 1.0)
    return TensorIdentityTail(p[n - 1], dims[n - 1][1])


def _y_chain(prob, dims, first_term):
    """Declare ``Y_1..Y_n`` (``Y_n`` PSD, the rest Hermitian) and the chain
    ``Y_{i-1} ⊗ I_{A_i} >= Tr_{B_i} Y_i``. ``first_term`` is the (var, map)
    pair on the left of the last link ``… >= Tr_{B_1} Y_1`` and may be None,
    in which case the right-hand side is returned for the caller."""
    q, p = _sides(dims)
    n = len(dims)
    for i in range(1, n + 1):
        prob.add_variable(f"Y{i}", q[i], "psd" if i == n else "herm")
    for i in range(n, 1, -1):
        a_i, b_i = dims[i - 1]
        prob.add_constraint(
            f"ychain{i}",
            [(f"Y{i - 1}", TensorIdentityTail(q[i - 1], a_i)),
             (f"Y{i}", -1.0 * PartialTraceTail(p[i - 1], b_i))],
            ">=", np.zeros((p[i - 1], p[i - 1])))
    return PartialTraceTail(p[0], dims[0][1])


def build_distance_primal(n_choi, m_choi):
    """Maximize ``Tr[S(Γ^N - Γ^M)]`` over sub-co-strategies."""
    dims = _dims(n_choi, m_choi)
    q, _ = _sides(dims)
    diff = n_choi.op.matrix - m_choi.op.matrix
    prob = SdpProblem("max", "distance_primal")
    prob.add_variable("S", q[-1], "psd")
    prob.add_objective("S", diff)
    lift = _sub_co_strategy(prob, dims)
    prob.add_constraint("dominated", [(f"S{len(dims)}", lift), ("S", -1.0 * Identity(q[-1]))],
                        ">=", np.zeros((q[-1], q[-1])))
    return prob


def build_distance_dual(n_choi, m_choi):
    """Minimize ``μ`` with ``Y_n >= Γ^N - Γ^M``, the Y-chain and ``μ I >= Tr_{B_1} Y_1``."""
    dims = _dims(n_choi, m_choi)
    q, p = _sides(dims)
    n = len(dims)
    diff = n_choi.op.matrix - m_choi.op.matrix
    prob = SdpProblem("min", "distance_dual")
    last = _y_chain(prob, dims, None)
    prob.add_variable("mu", 1, "free")
    prob.add_objective("mu", 1.0)
    prob.add_constraint("top", [(f"Y{n}", Identity(q[-1]))], ">=", diff)
    prob.add_constraint("ychain1", [("mu", ScalarTimes(np.eye(p[0]))), ("Y1", -1.0 * last)],
                        ">=", np.zeros((p[0], p[0])))
    return prob


def build_distance_gw(n_choi, m_choi):
    """Two-outcome measuring co-strategy form; its optimum is twice the
    normalized distance."""
    dims = _dims(n_choi, m_choi)
    q, _ = _sides(dims)
    diff = n_choi.op.matrix - m_choi.op.matrix
    prob = SdpProblem("max", "distance_gw")
    prob.add_variable("T0", q[-1], "psd")
    prob.add_variable("T1", q[-1], "psd")
    prob.add_objective("T0", diff)
    prob.add_objective("T1", -diff)
    lift = _sub_co_strategy(prob, dims)
    prob.add_constraint("outcomes", [("T0", Identity(q[-1])), ("T1", Identity(q[-1])),
                                     (f"S{len(dims)}", -1.0 * lift)],
                        "==", np.zeros((q[-1], q[-1])))
    return prob


def build_dmin_primal(n_choi, m_choi, epsilon):
    """Minimize ``Tr[S Γ^M]`` subject to ``Tr[S Γ^N] >= 1 - ε``."""
    eps = _check_eps(epsilon, closed=False)
    dims = _dims(n_choi, m_choi)
    q, _ = _sides(dims)
    prob = SdpProblem("min", "dmin_primal")
    prob.add_variable("S", q[-1], "psd")
    prob.add_objective("S", m_choi.op.matrix)
    lift = _sub_co_strategy(prob, dims)
    prob.add_constraint("dominated", [(f"S{len(dims)}", lift), ("S", -1.0 * Identity(q[-1]))],
                        ">=", np.zeros((q[-1], q[-1])))
    prob.add_constraint("success", [("S", TraceWith(n_choi.op.matrix))], ">=", 1.0 - eps)
    return prob


def build_dmin_dual(n_choi, m_choi, epsilon):
    """Maximize ``(1-ε) μ1 - μ2`` with ``Y_n >= μ1 Γ^N - Γ^M`` and the Y-chain."""
    eps = _check_eps(epsilon, closed=False)
    dims = _dims(n_choi, m_choi)
    q, p = _sides(dims)
    n = len(dims)
    prob = SdpProblem("max", "dmin_dual")
    last = _y_chain(prob, dims, None)
    prob.add_variable("mu1", 1, "nonneg")
    prob.add_variable("mu2", 1, "free")
    prob.add_objective("mu1", 1.0 - eps)
    prob.add_objective("mu2", -1.0)
    prob.add_constraint("top", [(f"Y{n}", Identity(q[-1])),
                                ("mu1", -1.0 * ScalarTimes(n_choi.op.matrix))],
                        ">=", -m_choi.op.matrix)
    prob.add_constraint("ychain1", [("mu2", ScalarTimes(np.eye(p[0]))), ("Y1", -1.0 * last)],
                        ">=", np.zeros((p[0], p[0])))
    return prob


def support_basis(mat, tol=1e-10):
    """Orthonormal columns spanning the support of a PSD matrix, or None when
    it has full rank. Real data gives real columns."""
    mat = np.asarray(mat)
    real = not np.any(mat.imag)
    vals, vecs = np.linalg.eigh(mat.real if real else mat)
    keep = vals > tol * max(float(vals[-1]), 1.0)
    if np.all(keep):
        return None
    return vecs[:, keep]


def whitening_factor(mat, support=None):
    """``V`` with ``V V^† = mat`` restricted to ``support`` (all of ``mat`` when
    None), as ``U diag(sqrt(w))`` over eigenpairs. Returns ``(V, V^+)``.

    Writing a comb dominated by ``λ mat`` as ``V R V^†`` turns the domination
    into ``R <= λ I``, which keeps the program well conditioned when ``mat``
    has small eigenvalues.
    """
    mat = np.asarray(mat)
    real = not np.any(mat.imag)
    if real:
        mat = mat.real
    u = np.eye(mat.shape[0]) if support is None else np.asarray(support)
    w, q = np.linalg.eigh(u.conj().T @ mat @ u)
    if w[0] <= 0:
        raise DomainError("matrix is not positive definite on the given support")
    basis = u @ q
    root = np.sqrt(w)
    return basis * root, (basis / root).conj().T


def _smoothed_comb(prob, n_choi, dims, support):
    """Declare a comb ``Ñ`` (as ``V R V^†`` when ``support`` is given), its
    lower levels, and the Y-chain bounding its distance to ``Γ^N``. Returns
    the map ``R -> Ñ`` and the right side ``Tr_{B_1} Y_1`` of the last link."""
    q, p = _sides(dims)
    n = len(dims)
    if support is None:
        embed = Identity(q[-1])
        prob.add_variable("Nt", q[-1], "psd")
    else:
        embed = Congruence(support)
        prob.add_variable("Nt", support.shape[1], "psd")
    last = _y_chain(prob, dims, None)
    prob.add_constraint("top", [(f"Y{n}", Identity(q[-1])), ("Nt", embed)],
                        ">=", n_choi.op.matrix)
    names = {n: "Nt"}
    for i in range(1, n):
        names[i] = f"N{i}"
        prob.add_variable(names[i], q[i], "psd")
    for i in range(n, 1, -1):
        a_i, b_i = dims[i - 1]
        tr = PartialTraceTail(p[i - 1], b_i)
        prob.add_constraint(
            f"comb{i}",
            [(names[i], tr @ embed if i == n else tr),
             (names[i - 1], -1.0 * TensorIdentityTail(q[i - 1], a_i))],
            "==", np.zeros((p[i - 1], p[i - 1])))
    tr = PartialTraceTail(p[0], dims[0][1])
    prob.add_constraint("comb1", [(names[1], tr @ embed if n == 1 else tr)], "==", np.eye(p[0]))
    return embed, last


def build_dmax_primal(n_choi, m_choi, epsilon, support="auto"):
    """Minimize ``λ`` over combs ``Ñ <= λ Γ^M`` within smoothing ``ε`` of ``Γ^N``.

    The top-level comb operator of the chain is ``Ñ`` itself, so only the
    lower levels ``N_[1..n-1]`` are separate variables. ``Ñ`` is written as
    ``V R V^†`` with ``V`` the whitening factor of ``Γ^M`` on its support, so
    the domination reads ``R <= λ I``; on a rank-deficient ``Γ^M`` this also
    keeps the program strictly feasible.
    """
    eps = _check_eps(epsilon)
    dims = _dims(n_choi, m_choi)
    _, p = _sides(dims)
    if isinstance(support, str):
        support = support_basis(m_choi.op.matrix)
    v, v_pinv = whitening_factor(m_choi.op.matrix, support)
    k = v.shape[1]
    prob = SdpProblem("min", "dmax_primal")
    prob.add_variable("lam", 1, "nonneg")
    prob.add_objective("lam", 1.0)
    if eps == 0.0:
        # no smoothing forces Ñ = Γ^N, which leaves the chain without interior
        gn = Congruence(v_pinv).apply(n_choi.op.matrix)
        prob.add_constraint("dominated", [("lam", ScalarTimes(np.eye(k)))], ">=", 0.5 * (gn + gn.conj().T))
        return prob
    _, last = _smoothed_comb(prob, n_choi, dims, v)
    prob.add_constraint("dominated", [("lam", ScalarTimes(np.eye(k))), ("Nt", -1.0 * Identity(k))],
                        ">=", np.zeros((k, k)))
    prob.add_constraint("ychain1", [("Y1", -1.0 * last)], ">=", -eps * np.eye(p[0]))
    return prob


def build_smoothing_reach(n_choi, m_choi, support):
    """Minimize the strategy distance from ``Γ^N`` to combs supported on the
    columns of ``support``; ``dmax`` is finite exactly when ``ε`` reaches it."""
    dims = _dims(n_choi, m_choi)
    _, p = _sides(dims)
    prob = SdpProblem("min", "smoothing_reach")
    prob.add_variable("t", 1, "nonneg")
    prob.add_objective("t", 1.0)
    _, last = _smoothed_comb(prob, n_choi, dims, support)
    prob.add_constraint("ychain1", [("t", ScalarTimes(np.eye(p[0]))), ("Y1", -1.0 * last)],
                        ">=", np.zeros((p[0], p[0])))
    return prob


def build_dmax_dual(n_choi, m_choi, epsilon, support="auto"):
    """Maximize ``Tr[Γ^N W_{n+1}] - ε Tr[W_1] + Tr[X_1]`` (the W/X program).

    The top variable is held in whitened form ``Ω = V^† W_{n+2} V`` with
    ``V V^† = Γ^M``, so the budget ``Tr[W_{n+2} Γ^M] <= 1`` reads ``Tr Ω <= 1``
    and the split constraint is taken under the congruence ``V^† (.) V``.
    This is the conic dual of the whitened primal; ``W_{n+2}`` itself can
    reach ``1/λ_min(Γ^M)`` while the objective stays of order ``λ``.
    """
    eps = _check_eps(epsilon)
    dims = _dims(n_choi, m_choi)
    q, p = _sides(dims)
    n = len(dims)
    if isinstance(support, str):
        support = support_basis(m_choi.op.matrix)
    v, _ = whitening_factor(m_choi.op.matrix, support)
    k = v.shape[1]
    whiten = Congruence(v.conj().T)
    prob = SdpProblem("max", "dmax_dual")
    top = q[-1]
    prob.add_variable(f"W{n + 2}", k, "psd")
    prob.add_variable(f"W{n + 1}", top, "psd")
    for i in range(1, n + 1):
        prob.add_variable(f"W{i}", p[i - 1], "psd")
        prob.add_variable(f"X{i}", p[i - 1], "herm")
    prob.add_objective(f"W{n + 1}", n_choi.op.matrix)
    prob.add_objective("W1", -eps * np.eye(p[0]))
    prob.add_objective("X1", np.eye(p[0]))
    prob.add_constraint("budget", [(f"W{n + 2}", TraceWith(np.eye(k)))], "<=", 1.0)
    b_n = dims[n - 1][1]
    prob.add_constraint("split", [(f"W{n + 2}", Identity(k)), (f"W{n + 1}", -1.0 * whiten),
                                  (f"X{n}", -1.0 * (whiten @ TensorIdentityTail(p[n - 1], b_n)))],
                        ">=", np.zeros((k, k)))
    prob.add_constraint("cap", [(f"W{n}", TensorIdentityTail(p[n - 1], b_n)),
                                (f"W{n + 1}", -1.0 * Identity(top))],
                        ">=", np.zeros((top, top)))
    for i in range(n, 1, -1):
        a_i, b_prev = dims[i - 1][0], dims[i - 2][1]
        tr = PartialTraceTail(q[i - 1], a_i)
        lift = TensorIdentityTail(p[i - 2], b_prev)
        zero = np.zeros((q[i - 1], q[i - 1]))
        prob.add_constraint(f"wchain{i}", [(f"W{i - 1}", lift), (f"W{i}", -1.0 * tr)], ">=", zero)
        prob.add_constraint(f"xchain{i}", [(f"X{i}", tr), (f"X{i - 1}", -1.0 * lift)], ">=", zero)
    return prob


BUILDERS = {
    "distance": (build_distance_primal, build_distance_dual),
    "dmin": (build_dmin_primal, build_dmin_dual),
    "dmax": (build_dmax_primal, build_dmax_dual),
}


def solve_problem(prob, options=None, field="auto"):
    """Lower and solve; returns ``(problem-sense value, report, standard form)``."""
    std = lower_to_standard(prob, field=field)
    report = solve(std, options)
    return std.objective_sign * report.primal_value, report, std


def _num17(v):
    return v if not isinstance(v, float) or not math.isfinite(v) else float("%.17g" % v)


@dataclass
class QuantityResult:
    """Certified value of one quantity for one pair of strategies.

    ``primal_value`` and ``dual_value`` are the raw optima of the two
    programs (linear scale); ``value`` is their midpoint, mapped to bits for
    ``dmin`` (``-log2``) and ``dmax`` (``log2``). Infinite values are the
    documented sentinels.
    """

    value: float
    primal_value: float
    dual_value: float
    gap: float
    solver: object
    mode: str
    quantity: str
    epsilon: float
    dual_solver: object = None
    status: str = "optimal"

    @property
    def iterations(self):
        total = self.solver.iterations if self.solver is not None else 0
        if self.dual_solver is not None:
            total += self.dual_solver.iterations
        return total

    def to_dict(self):
        return {
            "value": self.value, "primal_value": self.primal_value,
            "dual_value": self.dual_value, "gap": self.gap,
            "solver": self.solver.summary() if self.solver is not None else None,
            "mode": self.mode, "quantity": self.quantity, "epsilon": self.epsilon,
            "status": self.status, "iterations": self.iterations,
        }

    def to_json(self):
        def fmt(o):
            if isinstance(o, dict):
                return "{" + ", ".join(f"{json.dumps(k)}: {fmt(v)}" for k, v in o.items()) + "}"
            if isinstance(o, bool) or o is None or isinstance(o, (int, str)):
                return json.dumps(o)
            if isinstance(o, float):
                if math.isinf(o):
                    return json.dumps("inf" if o > 0 else "-inf")
                if math.isnan(o):
                    return json.dumps("nan")
                return "%.17g" % o
            return json.dumps(o)
        return fmt(self.to_dict())


def _as_parallel(s):
    if s.n == 1:
        return s
    if s.unit is None:
        raise DomainError("parallel mode needs an n-fold comb of a one-round channel")
    return C.tensor_power_choi(s.unit, s.n)


def prepare_pair(n_choi, m_choi, mode):
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "parallel":
        return _as_parallel(n_choi), _as_parallel(m_choi)
    return n_choi, m_choi


def evaluate(quantity, n_choi, m_choi, epsilon=0.0, mode="adaptive", options=None, field="auto"):
    """Solve the primal and dual programs of a quantity and certify the gap.

    Raises :class:`SolverStatusError` when either solve is not optimal or the
    two optima disagree by more than ``GAP_TOLERANCE`` (relative). The
    ``dmax`` program may instead return ``+inf`` when ``Γ^M`` cannot dominate
    any admissible comb (diverging ``λ``).
    """
    if quantity not in QUANTITIES:
        raise DomainError(f"quantity must be one of {QUANTITIES}, got {quantity!r}")
    eps = float(epsilon)
    if quantity == "dmin":
        _check_eps(eps, closed=False)
    elif quantity == "dmax":
        _check_eps(eps)
    a, b = prepare_pair(n_choi, m_choi, mode)
    primal_builder, dual_builder = BUILDERS[quantity]
    args = (a, b) if quantity == "distance" else (a, b, eps)
    if quantity == "dmax":
        support = support_basis(b.op.matrix)
        if support is not None:
            _, rrep, _ = solve_problem(build_smoothing_reach(a, b, support), options, field)
            if not rrep.usable:
                raise SolverStatusError(f"smoothing reach solve ended with status {rrep.status}", rrep)
            # the dual value is a certified lower bound on the reach
            if rrep.dual_value > eps + REACH_MARGIN:
                return QuantityResult(math.inf, math.inf, math.inf, 0.0, rrep, mode, quantity, eps)
        pval, prep, _ = solve_problem(build_dmax_primal(a, b, eps, support), options, field)
    else:
        pval, prep, _ = solve_problem(primal_builder(*args), options, field)

    if quantity == "dmax" and (prep.status == "infeasible_certificate" or
                               (math.isfinite(pval) and pval > DMAX_CEILING)):
        return QuantityResult(math.inf, math.inf, math.inf, 0.0, prep, mode, quantity, eps)
    if not prep.usable:
        raise SolverStatusError(f"{quantity} primal solve ended with status {prep.status}", prep)
    dval, drep, _ = solve_problem(dual_builder(*args), options, field)
    if not drep.usable:
        raise SolverStatusError(f"{quantity} dual solve ended with status {drep.status}", drep)
    gap = abs(pval - dval)
    result = QuantityResult(math.nan, pval, dval, gap, prep, mode, quantity, eps, dual_solver=drep)
    if gap > GAP_TOLERANCE * (1.0 + abs(pval)):
        result.status = "gap_exceeded"
        raise SolverStatusError(
            f"{quantity}: primal {pval!r} and dual {dval!r} differ by {gap:.3e}", prep,
            status="gap_exceeded")
    mid = 0.5 * (pval + dval)
    if quantity == "distance":
        result.value = mid
    elif quantity == "dmin":
        result.value = math.inf if mid < DMIN_FLOOR else -math.log2(mid)
    else:
        result.value = math.log2(mid) if mid > 0 else -math.inf
    return result


def exact_cost_comb(n_choi, m_choi, lam_bits=None, options=None):
    """The comb ``(2^λ Γ^M - Γ^N)/(2^λ - 1)`` used to simulate ``N`` from ``M``
    plus λ bits of asymmetric distinguishability.

    ``lam_bits`` defaults to the upper certificate of the exact (ε = 0)
    max-relative entropy program.
    """
    _dims(n_choi, m_choi)
    if lam_bits is None:
        pval, rep, _ = solve_problem(build_dmax_primal(n_choi, m_choi, 0.0), options)
        if not rep.usable or not math.isfinite(pval) or pval > DMAX_CEILING:
            raise SolverStatusError("exact max-relative entropy solve failed", rep)
        lam_bits = math.log2(pval) if pval > 0 else 0.0
    scale = 2.0 ** lam_bits
    if not lam_bits > DEGENERATE_BITS or scale - 1.0 <= 0:
        raise DomainError("exact cost is zero: the two strategies coincide, no simulating comb")
    mat = (scale * m_choi.op.matrix - n_choi.op.matrix) / (scale - 1.0)
    return C.StrategyChoi(m_choi.rounds, C.LabeledOperator(m_choi.rounds.order, mat))
