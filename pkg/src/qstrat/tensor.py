"""Labeled tensor-product operators and the dense linear algebra on them.

An operator carries an ordered list of named subsystems; its matrix index is
the mixed-radix number formed from the subsystem indices in that order (first
system most significant, as in ``numpy.kron``).
"""
from dataclasses import dataclass
import json
import math

import numpy as np

from .eig import hermitian_eig
from .errors import LabelingError, NumericContractError

HERMITIAN_TOL = 1e-12
KERNEL_TOL = 1e-10


@dataclass(frozen=True)
class SystemLabel:
    """A named subsystem of fixed dimension."""

    name: str
    dim: int

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise LabelingError(f"system name must be a non-empty string, got {self.name!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise LabelingError(f"system {self.name!r} needs a positive integer dim, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))


def _check_systems(systems):
    systems = tuple(systems)
    for s in systems:
        if not isinstance(s, SystemLabel):
            raise LabelingError(f"expected SystemLabel, got {type(s).__name__}")
    names = [s.name for s in systems]
    if len(set(names)) != len(names):
        raise LabelingError(f"duplicate system names in {names}")
    return systems


@dataclass(frozen=True, eq=False)
class LabeledOperator:
    """Complex square matrix over an ordered list of labeled subsystems.

    The stored matrix is a read-only copy, so instances can be shared freely.
    """

    systems: tuple
    matrix: np.ndarray

    def __post_init__(self):
        systems = _check_systems(self.systems)
        mat = np.array(self.matrix, dtype=complex, copy=True)
        side = math.prod(s.dim for s in systems)
        if mat.shape != (side, side):
            raise LabelingError(
                f"matrix shape {mat.shape} does not match system dims {[s.dim for s in systems]}")
        mat.setflags(write=False)
        object.__setattr__(self, "systems", systems)
        object.__setattr__(self, "matrix", mat)

    @property
    def names(self):
        return tuple(s.name for s in self.systems)

    @property
    def dims(self):
        return tuple(s.dim for s in self.systems)

    @property
    def side(self):
        return self.matrix.shape[0]

    def dim_of(self, name):
        for s in self.systems:
            if s.name == name:
                return s.dim
        raise LabelingError(f"unknown system {name!r}; have {list(self.names)}")

    def trace(self):
        return complex(np.trace(self.matrix))

    def is_hermitian(self, tol=HERMITIAN_TOL):
        m = self.matrix
        return m.size == 0 or float(np.abs(m - m.conj().T).max()) <= tol

    def dagger(self):
        return LabeledOperator(self.systems, self.matrix.conj().T)

    def __add__(self, other):
        _require_same_systems(self, other)
        return LabeledOperator(self.systems, self.matrix + other.matrix)

    def __sub__(self, other):
        _require_same_systems(self, other)
        return LabeledOperator(self.systems, self.matrix - other.matrix)

    def __mul__(self, scalar):
        return LabeledOperator(self.systems, self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return LabeledOperator(self.systems, -self.matrix)

    def __repr__(self):
        sys = ", ".join(f"{s.name}:{s.dim}" for s in self.systems)
        return f"LabeledOperator([{sys}], side={self.side})"


def _require_same_systems(a, b):
    if a.systems != b.systems:
        raise LabelingError(f"system lists differ: {list(a.names)} vs {list(b.names)}")


def _indices(m, names):
    names = [names] if isinstance(names, str) else list(names)
    idx = []
    for n in names:
        if n not in m.names:
            raise LabelingError(f"unknown system {n!r}; have {list(m.names)}")
        idx.append(m.names.index(n))
    if len(set(idx)) != len(idx):
        raise LabelingError(f"repeated system in {names}")
    return idx


def identity(systems):
    """Identity operator on the given systems."""
    systems = _check_systems(systems)
    return LabeledOperator(systems, np.eye(math.prod(s.dim for s in systems)))


def max_entangled(a, b):
    """Unnormalized maximally entangled projector ``|Γ⟩⟨Γ|`` on ``a ⊗ b``."""
    if a.dim != b.dim:
        raise LabelingError(f"dims differ: {a.dim} vs {b.dim}")
    vec = np.eye(a.dim).reshape(-1)
    return LabeledOperator((a, b), np.outer(vec, vec))


def kron(a, b):
    """Tensor product; systems of ``b`` are appended after those of ``a``."""
    return LabeledOperator(a.systems + b.systems, np.kron(a.matrix, b.matrix))


def relabel(m, mapping):
    """Rename systems according to ``mapping`` (old name to new name)."""
    unknown = set(mapping) - set(m.names)
    if unknown:
        raise LabelingError(f"unknown systems {sorted(unknown)}")
    systems = tuple(SystemLabel(mapping.get(s.name, s.name), s.dim) for s in m.systems)
    return LabeledOperator(systems, m.matrix)


def permute_systems(m, order):
    """Reorder the subsystems of ``m``.

    ``order`` lists either system names or integer positions; the new system
    list is ``[m.systems[k] for k in order]``.
    """
    order = list(order)
    if all(isinstance(k, str) for k in order):
        perm = _indices(m, order)
    else:
        perm = [int(k) for k in order]
    if sorted(perm) != list(range(len(m.systems))):
        raise LabelingError(f"{order} is not a permutation of {list(m.names)}")
    if perm == list(range(len(perm))):
        return m
    dims = m.dims
    k = len(dims)
    t = m.matrix.reshape(dims + dims)
    t = t.transpose(perm + [k + p for p in perm])
    return LabeledOperator(tuple(m.systems[p] for p in perm), t.reshape(m.side, m.side))


def partial_trace(m, over):
    """Trace out the named systems; the rest keep their relative order."""
    idx = _indices(m, over)
    if not idx:
        return m
    dims = m.dims
    k = len(dims)
    keep = [i for i in range(k) if i not in idx]
    t = m.matrix.reshape(dims + dims)
    # move traced axes to the back, then contract them pairwise
    t = t.transpose(keep + [k + i for i in keep] + idx + [k + i for i in idx])
    dk = math.prod(dims[i] for i in keep)
    dt = math.prod(dims[i] for i in idx)
    t = t.reshape(dk, dk, dt, dt)
    out = np.einsum("abii->ab", t)
    return LabeledOperator(tuple(m.systems[i] for i in keep), out)


def partial_transpose(m, over):
    """Transpose only the listed tensor factors."""
    idx = _indices(m, over)
    if not idx:
        return m
    dims = m.dims
    k = len(dims)
    axes = list(range(2 * k))
    for i in idx:
        axes[i], axes[k + i] = axes[k + i], axes[i]
    t = m.matrix.reshape(dims + dims).transpose(axes)
    return LabeledOperator(m.systems, t.reshape(m.side, m.side))


def _as_matrix(h):
    return h.matrix if isinstance(h, LabeledOperator) else np.asarray(h, dtype=complex)


def _require_hermitian(mat, tol=KERNEL_TOL):
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise NumericContractError(f"expected a square matrix, got shape {mat.shape}")
    if mat.size and float(np.abs(mat - mat.conj().T).max()) > tol:
        raise NumericContractError("operator is not Hermitian within tolerance")


def eigh(h):
    """Eigenvalues (ascending) and unitary eigenvectors of a Hermitian operator."""
    mat = _as_matrix(h)
    _require_hermitian(mat)
    return hermitian_eig(0.5 * (mat + mat.conj().T))


def trace_norm(h):
    """Sum of absolute eigenvalues of a Hermitian operator."""
    w, _ = eigh(h)
    return float(np.abs(w).sum())


def realify(h):
    """Real symmetric embedding ``[[Re H, -Im H], [Im H, Re H]]``."""
    mat = _as_matrix(h)
    _require_hermitian(mat)
    return np.block([[mat.real, -mat.imag], [mat.imag, mat.real]])


def unrealify(x):
    """Inverse of :func:`realify` for a matrix of that block structure.

    Off-structure parts are averaged away, so this also projects an arbitrary
    real symmetric matrix onto the image of the embedding.
    """
    x = np.asarray(x, dtype=float)
    d = x.shape[0] // 2
    re = 0.5 * (x[:d, :d] + x[d:, d:])
    im = 0.5 * (x[d:, :d] - x[:d, d:])
    return re + 1j * im


def to_json_dict(m):
    """Serializable dict: systems plus row-major real and imaginary parts."""
    return {
        "systems": [{"name": s.name, "dim": s.dim} for s in m.systems],
        "re": [float(v) for v in m.matrix.real.reshape(-1)],
        "im": [float(v) for v in m.matrix.imag.reshape(-1)],
    }


def from_json_dict(obj):
    try:
        systems = tuple(SystemLabel(s["name"], s["dim"]) for s in obj["systems"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise LabelingError(f"malformed operator object: {exc}") from exc
    side = math.prod(s.dim for s in systems)
    if re.size != side * side or im.size != side * side:
        raise LabelingError(f"expected {side * side} entries for dims {[s.dim for s in systems]}")
    return LabeledOperator(systems, (re + 1j * im).reshape(side, side))


def _num(v):
    v = float(v)
    if not math.isfinite(v):
        raise NumericContractError("non-finite entry cannot be serialized")
    return "%.17g" % v


def dumps(m):
    """Operator to JSON text, every number with 17 significant digits."""
    systems = json.dumps([{"name": s.name, "dim": s.dim} for s in m.systems])
    re = ", ".join(_num(v) for v in m.matrix.real.reshape(-1))
    im = ", ".join(_num(v) for v in m.matrix.imag.reshape(-1))
    return f'{{"systems": {systems}, "re": [{re}], "im": [{im}]}}'


def loads(text):
    return from_json_dict(json.loads(text))
