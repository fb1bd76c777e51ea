"""Dense symmetric eigensolver: Householder tridiagonalization + implicit QL.

Only plain array arithmetic is used here (no LAPACK eigen-routines), so the
results are reproducible and independent of the BLAS vendor's eigensolver.
Complex Hermitian problems are solved through their real embedding
``[[Re H, -Im H], [Im H, Re H]]``, whose spectrum is the Hermitian one with
every eigenvalue doubled.
"""
import math

import numpy as np

_EPS = np.finfo(float).eps


def tridiagonalize(a):
    """Reduce a real symmetric matrix to tridiagonal form.

    Returns ``(d, e, q)`` with ``q.T @ a @ q`` tridiagonal, diagonal ``d`` and
    sub-diagonal ``e``.
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    q = np.eye(n)
    for k in range(n - 2):
        x = a[k + 1:, k]
        sigma = math.sqrt(float(x @ x))
        if sigma == 0.0:
            continue
        alpha = -sigma if x[0] >= 0 else sigma
        v = x.copy()
        v[0] -= alpha
        vnorm = math.sqrt(float(v @ v))
        if vnorm == 0.0:
            continue
        v /= vnorm
        a[k + 1:, k:] -= 2.0 * np.outer(v, v @ a[k + 1:, k:])
        a[k:, k + 1:] -= 2.0 * np.outer(a[k:, k + 1:] @ v, v)
        q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v)
    return np.diag(a).copy(), np.diag(a, -1).copy(), q


def tridiagonal_ql(d, e, z=None, max_sweeps=60):
    """Implicit-shift QL iteration on a symmetric tridiagonal matrix.

    ``d`` is the diagonal (length n), ``e`` the sub-diagonal (length n-1). If
    ``z`` is given, its columns are rotated along, so passing the Householder
    basis from :func:`tridiagonalize` yields eigenvectors of the original
    matrix. Returns unsorted ``(eigenvalues, vectors)``.
    """
    d = np.array(d, dtype=float, copy=True)
    n = d.shape[0]
    e = np.append(np.array(e, dtype=float, copy=True), 0.0)
    # rows of zt are the columns of z; row slicing keeps the rotations contiguous
    zt = None if z is None else np.array(z, dtype=float, copy=True).T.copy()
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                raise ArithmeticError("tridiagonal QL failed to converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if zt is not None:
                    upper = zt[i + 1].copy()
                    zt[i + 1] = s * zt[i] + c * upper
                    zt[i] = c * zt[i] - s * upper
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d, (None if zt is None else zt.T)


def symmetric_eig(a):
    """Eigen-decomposition of a real symmetric matrix, eigenvalues ascending."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0))
    if n == 1:
        return a.diagonal().copy(), np.ones((1, 1))
    d, e, q = tridiagonalize(a)
    w, v = tridiagonal_ql(d, e, q)
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def _jacobi_hermitian(k, max_sweeps=50):
    """Cyclic complex Jacobi for a small Hermitian matrix."""
    k = np.array(k, dtype=complex, copy=True)
    c = k.shape[0]
    v = np.eye(c, dtype=complex)
    scale = max(np.abs(k).max(), 1e-300)
    for _ in range(max_sweeps):
        off = np.abs(k - np.diag(np.diag(k))).max()
        if off <= 1e-15 * scale:
            break
        for p in range(c - 1):
            for q in range(p + 1, c):
                b = k[p, q]
                mag = abs(b)
                if mag <= 1e-300:
                    continue
                phase = b / mag
                theta = (k[q, q].real - k[p, p].real) / (2.0 * mag)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                cs = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * cs
                g = np.eye(c, dtype=complex)
                g[p, p] = cs
                g[p, q] = sn
                g[q, p] = -sn * np.conj(phase)
                g[q, q] = cs * np.conj(phase)
                k = g.conj().T @ k @ g
                v = v @ g
    return np.real(np.diag(k)), v


def hermitian_eig(h, cluster_tol=1e-10):
    """Eigen-decomposition of a complex Hermitian matrix via its real embedding.

    Each eigenvalue of the embedding appears twice; the two real eigenvectors
    ``[u; v]`` and ``[-v; u]`` map to the same complex line ``u + iv``. Nearly
    equal eigenvalues are grouped, the complex span of each group is
    orthonormalized by SVD and resolved by a small Jacobi diagonalization.
    """
    h = np.asarray(h, dtype=complex)
    d = h.shape[0]
    emb = np.block([[h.real, -h.imag], [h.imag, h.real]])
    w, vecs = symmetric_eig(emb)
    cand = vecs[:d, :] + 1j * vecs[d:, :]
    scale = max(1.0, float(np.abs(w).max())) if w.size else 1.0
    groups = []
    start = 0
    for i in range(1, 2 * d + 1):
        if i == 2 * d or w[i] - w[i - 1] > cluster_tol * scale:
            if (i - start) % 2 == 0:
                groups.append((start, i))
                start = i
    if start != 2 * d:
        groups.append((start, 2 * d))
    values = []
    vectors = []
    for lo, hi in groups:
        c = (hi - lo) // 2
        u, _, _ = np.linalg.svd(cand[:, lo:hi], full_matrices=False)
        basis = u[:, :c]
        if c == 1:
            values.append(np.array([0.5 * (w[lo] + w[lo + 1])]))
            vectors.append(basis)
            continue
        proj = basis.conj().T @ h @ basis
        kw, kv = _jacobi_hermitian(0.5 * (proj + proj.conj().T))
        values.append(kw)
        vectors.append(basis @ kv)
    values = np.concatenate(values)
    vectors = np.concatenate(vectors, axis=1)
    order = np.argsort(values, kind="stable")
    return values[order], vectors[:, order]
