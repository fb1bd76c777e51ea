"""Choi operators of multi-round strategies, the link product, and a small
channel library (generalized amplitude damping, identity, preparations,
random channels).

Strategy Chois are stored in interleaved order ``A1 B1 A2 B2 ... An Bn``.
A round may carry a group of systems on either side; a one-round strategy
whose input is ``(A1, ..., An)`` and output ``(B1, ..., Bn)`` is how a
parallel use of a channel is represented.
"""
from dataclasses import dataclass
import json
import math

import numpy as np

from . import tensor as T
from .errors import DomainError, LabelingError
from .tensor import LabeledOperator, SystemLabel

PSD_TOL = 1e-9
RESIDUAL_TOL = 1e-9


def _group(x):
    if isinstance(x, SystemLabel):
        return (x,)
    x = tuple(x)
    if not x or not all(isinstance(s, SystemLabel) for s in x):
        raise LabelingError("a round side must be a SystemLabel or a non-empty tuple of them")
    return x


@dataclass(frozen=True)
class RoundStructure:
    """Which systems enter and leave in each round.

    ``inputs[i]`` and ``outputs[i]`` are tuples of :class:`SystemLabel`; a
    bare label is promoted to a 1-tuple.
    """

    inputs: tuple
    outputs: tuple

    def __post_init__(self):
        inputs = tuple(_group(x) for x in self.inputs)
        outputs = tuple(_group(x) for x in self.outputs)
        if not inputs or len(inputs) != len(outputs):
            raise LabelingError("need n >= 1 rounds with one input and one output group each")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)
        T._check_systems(self.order)

    @property
    def n(self):
        return len(self.inputs)

    @property
    def order(self):
        """Systems in interleaved canonical order."""
        out = []
        for a, b in zip(self.inputs, self.outputs):
            out.extend(a)
            out.extend(b)
        return tuple(out)

    def input_names(self, i):
        return [s.name for s in self.inputs[i]]

    def output_names(self, i):
        return [s.name for s in self.outputs[i]]

    def input_dim(self, i):
        return math.prod(s.dim for s in self.inputs[i])

    def output_dim(self, i):
        return math.prod(s.dim for s in self.outputs[i])


def simple_rounds(in_dims, out_dims):
    """Rounds named ``A1, B1, ..., An, Bn`` with single systems each."""
    return RoundStructure(
        tuple(SystemLabel(f"A{i + 1}", d) for i, d in enumerate(in_dims)),
        tuple(SystemLabel(f"B{i + 1}", d) for i, d in enumerate(out_dims)))


@dataclass(frozen=True, eq=False)
class StrategyChoi:
    """A strategy's Choi operator together with its round structure.

    ``unit`` optionally records the one-round channel this strategy was built
    from by repetition; the parallel evaluation mode needs it.
    """

    rounds: RoundStructure
    op: LabeledOperator
    unit: "StrategyChoi | None" = None

    def __post_init__(self):
        if self.op.systems != self.rounds.order:
            raise LabelingError(
                f"operator systems {list(self.op.names)} do not follow the interleaved "
                f"round order {[s.name for s in self.rounds.order]}")

    @property
    def n(self):
        return self.rounds.n


@dataclass(frozen=True)
class GadcParams:
    """Damping ``gamma`` and noise ``noise`` of a generalized amplitude damping channel."""

    gamma: float
    noise: float

    def __post_init__(self):
        for name in ("gamma", "noise"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v!r}")
            object.__setattr__(self, name, v)


def _one_round(op_matrix, din, dout):
    rounds = simple_rounds([din], [dout])
    return StrategyChoi(rounds, LabeledOperator(rounds.order, op_matrix))


def gadc_choi(p):
    """Choi operator of the qubit generalized amplitude damping channel."""
    if not isinstance(p, GadcParams):
        p = GadcParams(*p)
    g, n = p.gamma, p.noise
    c = math.sqrt(1.0 - g)
    mat = np.array([
        [1.0 - g * n, 0.0, 0.0, c],
        [0.0, g * n, 0.0, 0.0],
        [0.0, 0.0, g * (1.0 - n), 0.0],
        [c, 0.0, 0.0, 1.0 - g * (1.0 - n)],
    ])
    return _one_round(mat, 2, 2)


def identity_choi(d):
    """Choi operator ``|Γ⟩⟨Γ|`` of the identity channel on dimension ``d``."""
    if int(d) != d or d < 1:
        raise DomainError(f"dimension must be a positive integer, got {d!r}")
    d = int(d)
    vec = np.eye(d).reshape(-1)
    return _one_round(np.outer(vec, vec), d, d)


def preparation_choi(state, tol=1e-10):
    """One-round strategy with trivial input that prepares ``state``."""
    rho = np.asarray(state.matrix if isinstance(state, LabeledOperator) else state, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 1:
        raise DomainError("state must be a square matrix")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise DomainError("state is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise DomainError(f"state trace is {np.trace(rho).real!r}, expected 1")
    if T.eigh(rho)[0][0] < -tol:
        raise DomainError("state is not positive semi-definite")
    return _one_round(rho, 1, rho.shape[0])


def reference_state(m):
    """Diagonal qubit state ``diag(1/M, 1 - 1/M)`` carrying log2(M) bits of asymmetry."""
    if m < 1:
        raise DomainError(f"M must be >= 1, got {m!r}")
    return np.diag([1.0 / m, 1.0 - 1.0 / m])


def basis_state(d, k):
    if not 0 <= k < d:
        raise DomainError(f"basis index {k} out of range for dimension {d}")
    rho = np.zeros((d, d))
    rho[k, k] = 1.0
    return rho


def random_channel_choi(d_in, d_out, seed):
    """Choi operator of a channel from a seeded random isometry.

    The isometry ``C^{d_in} -> C^{d_out} ⊗ C^{d_in d_out}`` is the Q factor of
    a complex Gaussian matrix drawn from numpy's PCG64 generator.
    """
    if d_in < 1 or d_out < 1:
        raise DomainError("dimensions must be >= 1")
    d_env = d_in * d_out
    rng = np.random.Generator(np.random.PCG64(seed))
    g = rng.standard_normal((d_out * d_env, d_in)) + 1j * rng.standard_normal((d_out * d_env, d_in))
    q, r = np.linalg.qr(g)
    # fix column phases so Q does not depend on the QR sign convention
    q = q * (np.diag(r) / np.abs(np.diag(r))).conj()
    v = q.reshape(d_out, d_env, d_in)
    choi = np.einsum("bei,cej->ibjc", v, v.conj()).reshape(d_in * d_out, d_in * d_out)
    return _one_round(choi, d_in, d_out)


def _unit_check(channel):
    if channel.n != 1 or len(channel.rounds.inputs[0]) != 1 or len(channel.rounds.outputs[0]) != 1:
        raise DomainError("expected a one-round channel with single input and output systems")


def n_fold_sequential_choi(channel, n):
    """``n`` uses of a channel as an ``n``-round strategy (interleaved order)."""
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    _unit_check(channel)
    din, dout = channel.op.dims
    mat = channel.op.matrix
    for _ in range(int(n) - 1):
        mat = np.kron(mat, channel.op.matrix)
    rounds = simple_rounds([din] * n, [dout] * n)
    return StrategyChoi(rounds, LabeledOperator(rounds.order, mat), unit=channel)


def tensor_power_choi(channel, n):
    """``channel^{⊗n}`` as a one-round strategy ``A1..An -> B1..Bn``."""
    seq = n_fold_sequential_choi(channel, n)
    ins = tuple(g[0] for g in seq.rounds.inputs)
    outs = tuple(g[0] for g in seq.rounds.outputs)
    rounds = RoundStructure((ins,), (outs,))
    op = T.permute_systems(seq.op, [s.name for s in rounds.order])
    return StrategyChoi(rounds, op, unit=channel)


def link_product(a, b):
    """Link product of two operators; systems shared by name are contracted.

    Equals ``Tr_S[(I ⊗ b^{T_S})(a ⊗ I)]`` with ``S`` the shared systems; the
    result lives on ``a``'s remaining systems followed by ``b``'s.
    """
    shared = [s for s in a.systems if s.name in b.names]
    for s in shared:
        if b.dim_of(s.name) != s.dim:
            raise LabelingError(f"system {s.name!r} has dim {s.dim} vs {b.dim_of(s.name)}")
    sn = [s.name for s in shared]
    a_only = [s for s in a.systems if s.name not in sn]
    b_only = [s for s in b.systems if s.name not in sn]
    a2 = T.permute_systems(a, [s.name for s in a_only] + sn)
    b2 = T.permute_systems(b, sn + [s.name for s in b_only])
    dx = math.prod(s.dim for s in a_only)
    ds = math.prod(s.dim for s in shared)
    dy = math.prod(s.dim for s in b_only)
    at = a2.matrix.reshape(dx, ds, dx, ds)
    bt = b2.matrix.reshape(ds, dy, ds, dy)
    out = np.einsum("xtzs,tysw->xyzw", at, bt).reshape(dx * dy, dx * dy)
    return LabeledOperator(tuple(a_only + b_only), out)


@dataclass
class CombReport:
    """Outcome of :func:`verify_comb`; index 0 is round 1."""

    passed: bool
    residuals: list
    min_eigenvalues: list

    def to_dict(self):
        return {"pass": self.passed, "residuals": self.residuals,
                "min_eigenvalues": self.min_eigenvalues}


def verify_comb(s, tol=RESIDUAL_TOL, psd_tol=None):
    """Check positivity and the causal normalization chain of a strategy Choi.

    Starting from the full operator, round ``i`` is peeled off by tracing its
    outputs; the previous-level operator is recovered by averaging over the
    round's inputs, and the residual is the max-abs distance between the
    traced operator and that average tensored with the identity.
    """
    psd_tol = tol if psd_tol is None else psd_tol
    level = s.op
    residuals = [0.0] * s.n
    min_eigs = [0.0] * s.n
    for i in reversed(range(s.n)):
        min_eigs[i] = float(T.eigh(level)[0][0]) if level.side else 0.0
        traced = T.partial_trace(level, s.rounds.output_names(i))
        din = s.rounds.input_dim(i)
        prev = T.partial_trace(traced, s.rounds.input_names(i)) * (1.0 / din)
        expected = np.kron(prev.matrix, np.eye(din))
        if i == 0:
            expected = np.eye(din)
        residuals[i] = float(np.abs(traced.matrix - expected).max())
        level = prev
    passed = all(r <= tol for r in residuals) and all(e >= -psd_tol for e in min_eigs)
    return CombReport(passed, residuals, min_eigs)


def _sys_json(group):
    items = [{"name": s.name, "dim": s.dim} for s in group]
    return items[0] if len(items) == 1 else items


def _sys_from_json(obj):
    if isinstance(obj, list):
        return tuple(SystemLabel(o["name"], o["dim"]) for o in obj)
    return SystemLabel(obj["name"], obj["dim"])


def strategy_dumps(s):
    """StrategyChoi to JSON text (round structure plus operator object)."""
    rounds = json.dumps({"n": s.n,
                         "inputs": [_sys_json(g) for g in s.rounds.inputs],
                         "outputs": [_sys_json(g) for g in s.rounds.outputs]})
    return f'{{"rounds": {rounds}, "op": {T.dumps(s.op)}}}'


def strategy_loads(text):
    obj = json.loads(text) if isinstance(text, str) else text
    try:
        r = obj["rounds"]
        rounds = RoundStructure(tuple(_sys_from_json(x) for x in r["inputs"]),
                                tuple(_sys_from_json(x) for x in r["outputs"]))
        if "n" in r and int(r["n"]) != rounds.n:
            raise LabelingError(f"round count {r['n']} does not match {rounds.n} input groups")
        op = T.from_json_dict(obj["op"])
    except (KeyError, TypeError) as exc:
        raise LabelingError(f"malformed strategy object: {exc}") from exc
    return StrategyChoi(rounds, op)


def build_channel(kind, args):
    """Construct a one-round channel from a spec kind and numeric arguments.

    Kinds: ``gadc`` (gamma, noise), ``identity`` (d), ``replace`` (d, k:
    prepare basis state k from a trivial input), ``random`` (dA, dB, seed).
    """
    if kind == "gadc":
        return gadc_choi(GadcParams(*args))
    if kind == "identity":
        return identity_choi(args[0])
    if kind == "replace":
        d, k = args
        return preparation_choi(basis_state(int(d), int(k)))
    if kind == "random":
        d_in, d_out, seed = (int(x) for x in args)
        return random_channel_choi(d_in, d_out, seed)
    raise DomainError(f"unknown channel kind {kind!r}")
