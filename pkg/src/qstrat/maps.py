"""Linear maps between operator spaces used in the constraint chains.

Every map acts on square matrices, ``apply`` takes a ``d_in x d_in`` array to a
``d_out x d_out`` array and ``adjoint`` goes back with respect to the
Hilbert-Schmidt inner product ``<A, B> = Tr[A^† B]``. ``matrix()`` returns the
same action as a sparse ``(d_out^2, d_in^2)`` matrix on row-major vectorized
operators; it is built from index arithmetic rather than from ``apply`` so the
two can be checked against each other.

Subsystem maps always act on the *trailing* tensor factor, which is all the
interleaved round ordering ever needs.
"""
import numpy as np
import scipy.sparse as sp


class LinearMap:
    d_in: int
    d_out: int

    def apply(self, x):
        raise NotImplementedError

    def adjoint(self, y):
        raise NotImplementedError

    def matrix(self):
        raise NotImplementedError

    def is_real(self):
        """True when the map commutes with entrywise complex conjugation."""
        m = self.matrix()
        return not np.any(np.imag(m.data))

    def __rmul__(self, c):
        return Scaled(c, self)

    def __neg__(self):
        return Scaled(-1.0, self)

    def __matmul__(self, inner):
        return Composed(self, inner)


class Identity(LinearMap):
    def __init__(self, d):
        self.d_in = self.d_out = int(d)

    def apply(self, x):
        return np.asarray(x)

    def adjoint(self, y):
        return np.asarray(y)

    def matrix(self):
        return sp.identity(self.d_in * self.d_in, dtype=complex, format="csr")

    def __repr__(self):
        return f"Identity({self.d_in})"


class PartialTraceTail(LinearMap):
    """Trace out the trailing factor of dimension ``traced``."""

    def __init__(self, keep, traced):
        self.keep, self.traced = int(keep), int(traced)
        self.d_in = self.keep * self.traced
        self.d_out = self.keep

    def apply(self, x):
        k, t = self.keep, self.traced
        return np.einsum("atbt->ab", np.asarray(x).reshape(k, t, k, t))

    def adjoint(self, y):
        return np.kron(np.asarray(y), np.eye(self.traced))

    def matrix(self):
        k, t = self.keep, self.traced
        a, b, s = np.meshgrid(np.arange(k), np.arange(k), np.arange(t), indexing="ij")
        rows = (a * k + b).ravel()
        cols = ((a * t + s) * (k * t) + (b * t + s)).ravel()
        data = np.ones(rows.size, dtype=complex)
        return sp.csr_matrix((data, (rows, cols)), shape=(k * k, (k * t) ** 2))

    def __repr__(self):
        return f"PartialTraceTail(keep={self.keep}, traced={self.traced})"


class TensorIdentityTail(LinearMap):
    """``X -> X ⊗ I_extra``."""

    def __init__(self, d, extra):
        self.d, self.extra = int(d), int(extra)
        self.d_in = self.d
        self.d_out = self.d * self.extra

    def apply(self, x):
        return np.kron(np.asarray(x), np.eye(self.extra))

    def adjoint(self, y):
        d, e = self.d, self.extra
        return np.einsum("atbt->ab", np.asarray(y).reshape(d, e, d, e))

    def matrix(self):
        return PartialTraceTail(self.d, self.extra).matrix().T.tocsr()

    def __repr__(self):
        return f"TensorIdentityTail(d={self.d}, extra={self.extra})"


class TraceWith(LinearMap):
    """``X -> Tr[G X]`` into a 1x1 output, ``G`` Hermitian."""

    def __init__(self, g):
        self.g = np.asarray(g, dtype=complex)
        self.d_in = self.g.shape[0]
        self.d_out = 1

    def apply(self, x):
        return np.array([[np.sum(self.g.T * np.asarray(x))]])

    def adjoint(self, y):
        return np.asarray(y).reshape(()) * self.g

    def matrix(self):
        return sp.csr_matrix(self.g.T.reshape(1, -1))

    def __repr__(self):
        return f"TraceWith(side={self.d_in})"


class ScalarTimes(LinearMap):
    """``x -> x G`` from a 1x1 input, ``G`` Hermitian."""

    def __init__(self, g):
        self.g = np.asarray(g, dtype=complex)
        self.d_in = 1
        self.d_out = self.g.shape[0]

    def apply(self, x):
        return np.asarray(x).reshape(()) * self.g

    def adjoint(self, y):
        return np.array([[np.sum(self.g.T * np.asarray(y))]])

    def matrix(self):
        return sp.csr_matrix(self.g.reshape(-1, 1))

    def __repr__(self):
        return f"ScalarTimes(side={self.d_out})"


class Congruence(LinearMap):
    """``X -> V X V^†`` for an isometry-like ``V`` of shape ``(d_out, d_in)``."""

    def __init__(self, v):
        self.v = np.asarray(v)
        self.d_out, self.d_in = self.v.shape

    def apply(self, x):
        return self.v @ np.asarray(x) @ self.v.conj().T

    def adjoint(self, y):
        return self.v.conj().T @ np.asarray(y) @ self.v

    def matrix(self):
        # row-major vec(V X V^†) = (V ⊗ conj V) vec(X)
        k = np.kron(self.v, self.v.conj()).astype(complex)
        k[np.abs(k) < 1e-15 * np.abs(k).max(initial=0.0)] = 0.0
        return sp.csr_matrix(k)

    def __repr__(self):
        return f"Congruence({self.d_out}x{self.d_in})"


class Scaled(LinearMap):
    def __init__(self, c, inner):
        self.c = float(c)
        self.inner = inner
        self.d_in, self.d_out = inner.d_in, inner.d_out

    def apply(self, x):
        return self.c * self.inner.apply(x)

    def adjoint(self, y):
        return self.c * self.inner.adjoint(y)

    def matrix(self):
        return (self.c * self.inner.matrix()).tocsr()

    def __repr__(self):
        return f"{self.c:g}*{self.inner!r}"


class Composed(LinearMap):
    """``outer ∘ inner``."""

    def __init__(self, outer, inner):
        if outer.d_in != inner.d_out:
            raise ValueError(f"cannot compose {outer!r} after {inner!r}")
        self.outer, self.inner = outer, inner
        self.d_in, self.d_out = inner.d_in, outer.d_out

    def apply(self, x):
        return self.outer.apply(self.inner.apply(x))

    def adjoint(self, y):
        return self.inner.adjoint(self.outer.adjoint(y))

    def matrix(self):
        return (self.outer.matrix() @ self.inner.matrix()).tocsr()

    def __repr__(self):
        return f"({self.outer!r} @ {self.inner!r})"


def hs_inner(a, b):
    """Hilbert-Schmidt inner product ``Tr[a^† b]``."""
    return complex(np.vdot(np.asarray(a), np.asarray(b)))
