"""Structured SDP descriptions and their lowering to real standard conic form.

A problem has Hermitian matrix variables (PSD or unconstrained), scalar
variables (nonnegative or free), a linear objective ``sum_k Tr[C_k X_k]`` and
affine constraints ``sum_k Phi_k(X_k)  (==, >=, <=)  B``.

The standard form solved by :mod:`qstrat.solver` is

    minimize  <C, x>   subject to  A x = b,  x in K,

with ``K`` a product of real PSD blocks, a nonnegative orthant and free
scalars. Complex PSD variables of side ``d`` become real PSD blocks of side
``2d`` through ``[[Re, -Im], [Im, Re]]``; as that embedding doubles inner
products, their coefficients carry a factor 1/2. When every piece of data is
real the variables can be restricted to real symmetric matrices without
changing the optimum (average any solution with its conjugate), which is what
``field="real"`` does.
"""
from dataclasses import dataclass, field
import json
import math

import numpy as np
import scipy.sparse as sp

from .errors import BuildError
from .maps import Identity, LinearMap

CONES = ("psd", "herm", "nonneg", "free")
KINDS = ("==", ">=", "<=")


@dataclass(frozen=True)
class Variable:
    name: str
    side: int
    cone: str


@dataclass
class Constraint:
    name: str
    terms: list
    kind: str
    rhs: np.ndarray

    @property
    def side(self):
        return self.rhs.shape[0]


class SdpProblem:
    """Builder-style SDP description; see the module docstring."""

    def __init__(self, sense, name=""):
        if sense not in ("max", "min"):
            raise BuildError(f"sense must be 'max' or 'min', got {sense!r}")
        self.sense = sense
        self.name = name
        self.variables = {}
        self.objective = []
        self.constraints = []

    def add_variable(self, name, side, cone="psd"):
        if name in self.variables:
            raise BuildError(f"duplicate variable {name!r}")
        if cone not in CONES:
            raise BuildError(f"unknown cone {cone!r}")
        side = int(side)
        if side < 1:
            raise BuildError(f"variable {name!r} needs a positive side")
        if cone in ("nonneg", "free") and side != 1:
            raise BuildError(f"scalar variable {name!r} must have side 1")
        self.variables[name] = Variable(name, side, cone)
        return name

    def add_objective(self, var, coeff):
        """Add ``Tr[coeff · var]`` to the objective."""
        v = self._var(var)
        c = _as_square(coeff)
        if c.shape[0] != v.side:
            raise BuildError(f"objective coefficient side {c.shape[0]} != side {v.side} of {var!r}")
        _check_hermitian(c, f"objective coefficient of {var!r}")
        self.objective.append((var, c))

    def add_constraint(self, name, terms, kind, rhs):
        """Add ``sum(map(var) for var, map in terms)  kind  rhs``."""
        if kind not in KINDS:
            raise BuildError(f"constraint kind must be one of {KINDS}")
        rhs = _as_square(rhs)
        _check_hermitian(rhs, f"right-hand side of {name!r}")
        if not terms:
            raise BuildError(f"constraint {name!r} has no terms")
        checked = []
        for var, phi in terms:
            v = self._var(var)
            if not isinstance(phi, LinearMap):
                raise BuildError(f"term on {var!r} in {name!r} is not a LinearMap")
            if phi.d_in != v.side or phi.d_out != rhs.shape[0]:
                raise BuildError(
                    f"map {phi!r} in {name!r} is {phi.d_in}->{phi.d_out}, "
                    f"expected {v.side}->{rhs.shape[0]}")
            checked.append((var, phi))
        self.constraints.append(Constraint(name, checked, kind, rhs))

    def _var(self, name):
        try:
            return self.variables[name]
        except KeyError:
            raise BuildError(f"undeclared variable {name!r}") from None

    def constraint_maps(self):
        """``(constraint name, variable name, map)`` for every term."""
        return [(c.name, var, phi) for c in self.constraints for var, phi in c.terms]

    def is_real(self):
        data = [c for _, c in self.objective] + [c.rhs for c in self.constraints]
        if any(np.any(np.imag(d)) for d in data):
            return False
        return all(phi.is_real() for _, _, phi in self.constraint_maps())

    def objective_value(self, values):
        """Objective at a dict of variable values (matrices or scalars)."""
        total = 0.0
        for var, c in self.objective:
            x = _as_square(values[var])
            total += float(np.real(np.sum(c.T * x)))
        return total

    def violations(self, values):
        """Per-constraint violation: max-abs residual for ``==``, minus the
        smallest eigenvalue of the slack for inequalities (<= 0 when satisfied)."""
        out = {}
        for c in self.constraints:
            lhs = sum(phi.apply(_as_square(values[var])) for var, phi in c.terms)
            diff = lhs - c.rhs
            if c.kind == "==":
                out[c.name] = float(np.abs(diff).max())
            else:
                slack = diff if c.kind == ">=" else -diff
                slack = 0.5 * (slack + slack.conj().T)
                out[c.name] = float(-np.linalg.eigvalsh(slack)[0])
        return out


def _as_square(x):
    a = np.asarray(x, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise BuildError(f"expected a square matrix or scalar, got shape {a.shape}")
    return a


def _check_hermitian(a, what):
    if a.size and np.abs(a - a.conj().T).max() > 1e-12 * max(1.0, np.abs(a).max()):
        raise BuildError(f"{what} is not Hermitian")


def herm_basis(d, real=False, normalized=True):
    """Basis of Hermitian (or real symmetric) ``d x d`` matrices.

    Returns a sparse ``(d^2, k)`` matrix whose columns are row-major
    vectorized basis elements: diagonal units first, then for each ``p < q``
    the symmetric pair and (unless ``real``) the antisymmetric imaginary pair.
    Normalized elements are orthonormal under ``Tr[A B]``.
    """
    rows, cols, vals = [], [], []
    k = 0
    for p in range(d):
        rows.append(p * d + p)
        cols.append(k)
        vals.append(1.0)
        k += 1
    s = 1.0 / math.sqrt(2.0) if normalized else 1.0
    for p in range(d):
        for q in range(p + 1, d):
            rows += [p * d + q, q * d + p]
            cols += [k, k]
            vals += [s, s]
            k += 1
            if not real:
                rows += [p * d + q, q * d + p]
                cols += [k, k]
                vals += [1j * s, -1j * s]
                k += 1
    return sp.csc_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(d * d, k))


@dataclass
class BlockInfo:
    """Where a problem variable lives in the standard form."""

    kind: str            # "psd", "nonneg" or "free"
    index: int           # block index (psd) or offset into the scalar vector
    count: int           # block side (psd) or number of scalars
    side: int            # side of the original complex variable
    basis: object = None  # coordinate basis for Hermitian-free variables


@dataclass
class StandardSdp:
    """``min <C, x>  s.t.  A x = b,  x in PSD blocks × R_+^l × R^f``.

    PSD coefficients are stored as sparse rows over the row-major
    vectorization of each block (symmetric matrices, both triangles).
    """

    psd_sides: list
    n_nonneg: int
    n_free: int
    c_psd: list
    c_nonneg: np.ndarray
    c_free: np.ndarray
    a_psd: list
    a_nonneg: sp.csr_matrix
    a_free: sp.csr_matrix
    b: np.ndarray
    objective_sign: float = 1.0
    real_field: bool = False
    layout: dict = field(default_factory=dict)
    row_names: list = field(default_factory=list)

    @property
    def m(self):
        return self.b.shape[0]

    def validate(self):
        m = self.m
        if len(self.c_psd) != len(self.psd_sides) or len(self.a_psd) != len(self.psd_sides):
            raise BuildError("PSD block lists have inconsistent lengths")
        for s, c, a in zip(self.psd_sides, self.c_psd, self.a_psd):
            if s < 1 or c.shape != (s, s) or a.shape != (m, s * s):
                raise BuildError(f"PSD block of side {s} has inconsistent data")
        if self.a_nonneg.shape != (m, self.n_nonneg) or self.c_nonneg.shape != (self.n_nonneg,):
            raise BuildError("nonnegative part has inconsistent data")
        if self.a_free.shape != (m, self.n_free) or self.c_free.shape != (self.n_free,):
            raise BuildError("free part has inconsistent data")

    def to_json(self):
        """Debug dump: sparse rows as (row, col, value) triplets."""
        def triplets(a):
            a = a.tocoo()
            return [[int(r), int(c), float(v)] for r, c, v in zip(a.row, a.col, a.data)]
        obj = {
            "psd_sides": list(self.psd_sides),
            "n_nonneg": self.n_nonneg,
            "n_free": self.n_free,
            "c_psd": [c.reshape(-1).tolist() for c in self.c_psd],
            "c_nonneg": self.c_nonneg.tolist(),
            "c_free": self.c_free.tolist(),
            "a_psd": [triplets(a) for a in self.a_psd],
            "a_nonneg": triplets(self.a_nonneg),
            "a_free": triplets(self.a_free),
            "b": self.b.tolist(),
            "objective_sign": self.objective_sign,
        }
        return json.dumps(obj)

    def decode(self, report):
        """Map a solver report's primal blocks back to problem variables."""
        out = {}
        for name, info in self.layout.items():
            if info.kind == "psd":
                blk = report.X[info.index]
                if self.real_field:
                    out[name] = np.array(blk, dtype=complex)
                else:
                    d = info.side
                    out[name] = 0.5 * (blk[:d, :d] + blk[d:, d:]) + 0.5j * (blk[d:, :d] - blk[:d, d:])
            elif info.kind == "nonneg":
                out[name] = np.array([[report.x_nonneg[info.index]]], dtype=complex)
            elif info.side == 1:
                out[name] = np.array([[report.x_free[info.index]]], dtype=complex)
            else:
                coords = report.x_free[info.index:info.index + info.count]
                vec = info.basis @ coords
                out[name] = np.asarray(vec).reshape(info.side, info.side)
        return out


def _realify_coo(k, d, real_field):
    """Coefficient rows for a PSD variable from complex columns ``k`` (d^2 × r).

    Returns a ``(r, s^2)`` sparse matrix of the standard-form coefficients.
    """
    k = sp.coo_matrix(k)
    a, b = np.divmod(k.row, d)
    r = k.col
    v = k.data
    if real_field:
        return sp.csr_matrix((v.real, (r, a * d + b)), shape=(k.shape[1], d * d))
    s = 2 * d
    re = 0.5 * v.real
    im = 0.5 * v.imag
    rows = np.concatenate([r, r, r, r])
    cols = np.concatenate([a * s + b, (d + a) * s + (d + b), a * s + (d + b), (d + a) * s + b])
    vals = np.concatenate([re, re, -im, im])
    out = sp.csr_matrix((vals, (rows, cols)), shape=(k.shape[1], s * s))
    out.eliminate_zeros()
    return out


def lower_to_standard(prob, field="auto", path="primary"):
    """Lower an :class:`SdpProblem` to a :class:`StandardSdp`.

    ``field`` is "complex", "real" or "auto" (real when all data is real).
    ``path="alternate"`` builds an equivalent but differently arranged form
    (variables reversed, slack blocks first, negated rows, unnormalized
    bases); comparing optima of both paths checks the lowering itself.
    """
    if path not in ("primary", "alternate"):
        raise BuildError(f"unknown lowering path {path!r}")
    if field == "auto":
        real_field = prob.is_real()
    elif field in ("real", "complex"):
        real_field = field == "real"
        if real_field and not prob.is_real():
            raise BuildError("problem has complex data; real lowering is not value-preserving")
    else:
        raise BuildError(f"unknown field {field!r}")
    alt = path == "alternate"
    normalized = not alt

    variables = list(prob.variables.values())
    slacks = []
    for c in prob.constraints:
        if c.kind != "==":
            cone = "psd" if c.side > 1 else "nonneg"
            slacks.append((c, Variable(f"slack:{c.name}", c.side, cone)))
    if alt:
        ordered = [v for _, v in slacks] + variables[::-1]
    else:
        ordered = variables + [v for _, v in slacks]

    layout = {}
    psd_sides = []
    n_nonneg = 0
    n_free = 0
    for v in ordered:
        if v.cone == "psd" and v.side > 1:
            layout[v.name] = BlockInfo("psd", len(psd_sides), v.side * (1 if real_field else 2), v.side)
            psd_sides.append(layout[v.name].count)
        elif v.cone in ("psd", "nonneg"):
            layout[v.name] = BlockInfo("nonneg", n_nonneg, 1, 1)
            n_nonneg += 1
        elif v.side == 1:
            layout[v.name] = BlockInfo("free", n_free, 1, 1)
            n_free += 1
        else:
            basis = herm_basis(v.side, real_field, normalized)
            layout[v.name] = BlockInfo("free", n_free, basis.shape[1], v.side, basis)
            n_free += basis.shape[1]

    # terms per constraint including slacks
    slack_of = {c.name: v for c, v in slacks}
    row_blocks = []
    for c in prob.constraints:
        terms = list(c.terms)
        if c.kind == ">=":
            terms.append((slack_of[c.name].name, -1.0 * Identity(c.side)))
        elif c.kind == "<=":
            terms.append((slack_of[c.name].name, Identity(c.side)))
        row_blocks.append((c, terms))
    if alt:
        row_blocks = row_blocks[::-1]

    psd_parts = [[] for _ in psd_sides]
    nonneg_parts = []
    free_parts = []
    b_parts = []
    row_names = []
    row0 = 0
    for c, terms in row_blocks:
        basis_out = herm_basis(c.side, real_field, normalized)
        nb = basis_out.shape[1]
        sign = -1.0 if alt else 1.0
        rhs_vec = c.rhs.reshape(-1)
        b_parts.append(sign * np.real(basis_out.conj().T @ rhs_vec))
        row_names += [f"{c.name}[{i}]" for i in range(nb)]
        for var, phi in terms:
            info = layout[var]
            # columns: vec(Phi^†(E_i)) for every output basis element
            k = (phi.matrix().conj().T @ basis_out).tocsc() * sign
            if info.kind == "psd":
                coeff = _realify_coo(k, info.side, real_field)
                psd_parts[info.index].append((row0, coeff))
            else:
                if info.basis is not None:
                    coeff = sp.csr_matrix(np.real((info.basis.conj().T @ k).toarray()).T)
                else:
                    coeff = sp.csr_matrix(np.real(k.toarray()).reshape(1, -1).T)
                target = nonneg_parts if info.kind == "nonneg" else free_parts
                target.append((row0, info.index, coeff))
        row0 += nb
    m = row0

    def stack_psd(parts, s):
        rows, cols, vals = [], [], []
        for r0, coeff in parts:
            coo = coeff.tocoo()
            rows.append(coo.row + r0)
            cols.append(coo.col)
            vals.append(coo.data)
        if not rows:
            return sp.csr_matrix((m, s * s))
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(m, s * s))

    a_psd = [stack_psd(parts, s) for parts, s in zip(psd_parts, psd_sides)]

    def stack_scalar(parts, n):
        rows, cols, vals = [], [], []
        for r0, c0, coeff in parts:
            coo = coeff.tocoo()
            rows.append(coo.row + r0)
            cols.append(coo.col + c0)
            vals.append(coo.data)
        if not rows:
            return sp.csr_matrix((m, n))
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(m, n))

    a_nonneg = stack_scalar(nonneg_parts, n_nonneg)
    a_free = stack_scalar(free_parts, n_free)
    b = np.concatenate(b_parts) if b_parts else np.zeros(0)

    objective_sign = -1.0 if prob.sense == "max" else 1.0
    c_psd = [np.zeros((s, s)) for s in psd_sides]
    c_nonneg = np.zeros(n_nonneg)
    c_free = np.zeros(n_free)
    for var, coeff in prob.objective:
        info = layout[var]
        vec = sp.csc_matrix(coeff.reshape(-1, 1)) * objective_sign
        if info.kind == "psd":
            c_psd[info.index] += _realify_coo(vec, info.side, real_field).toarray().reshape(info.count, info.count)
        elif info.kind == "nonneg":
            c_nonneg[info.index] += float(np.real(coeff[0, 0])) * objective_sign
        elif info.basis is not None:
            c_free[info.index:info.index + info.count] += (info.basis.conj().T @ vec).toarray().real.ravel()
        else:
            c_free[info.index] += float(np.real(coeff[0, 0])) * objective_sign

    std = StandardSdp(psd_sides, n_nonneg, n_free, c_psd, c_nonneg, c_free,
                      a_psd, a_nonneg, a_free, b, objective_sign, real_field, layout, row_names)
    std.validate()
    return std
