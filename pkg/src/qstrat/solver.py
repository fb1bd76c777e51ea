"""Primal-dual interior-point method for :class:`~qstrat.sdp.StandardSdp`.

Solves ``min <C, x>  s.t.  A x = b,  x in K`` together with its dual
``max b.y  s.t.  A^T y + z = C,  z in K*`` where ``K`` is a product of real
PSD blocks, a nonnegative orthant and free scalars (whose dual slack is zero).

Search directions use Nesterov-Todd scaling with a Mehrotra
predictor-corrector. The Newton system is reduced to the Schur complement
``M = A (W ⊗ W) A^T`` which is formed densely and Cholesky-factored; free
variables are eliminated through a small bordered system. Dense linear
algebra inside the iteration (Cholesky, SVD, symmetric eigenvalues) is
delegated to LAPACK.
"""
from dataclasses import dataclass, field
import json
import math
import os
import sys

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import BuildError, NumericContractError

STATUSES = ("optimal", "max_iters", "numerical_failure", "infeasible_certificate")
DIVERGENCE = 1e12
# a stalled run whose best iterate is within this factor of the tolerances is
# still usable by callers that certify the result independently
REDUCED_ACCURACY = 100.0
FREE_REG = 1e-10
# rounds of iterative refinement of a search direction, while each halves the error
REFINE_SWEEPS = 10
# start-point scales tried in turn while a solve stalls short of usable accuracy
RESTART_SCALES = (1.0, 10.0, 100.0, 1e4)
PRESOLVE_TOL = 1e-10


@dataclass
class SolverOptions:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iters: int = 200
    step_fraction: float = 0.98
    verbose: bool = False

    def __post_init__(self):
        if not (self.gap_tol > 0 and self.feas_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.step_fraction < 1:
            raise ValueError("step_fraction must lie in (0, 1)")
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be >= 1")

    def with_overrides(self, overrides):
        vals = dict(self.__dict__)
        for k, v in (overrides or {}).items():
            if k not in vals:
                raise ValueError(f"unknown solver option {k!r}")
            vals[k] = v
        return SolverOptions(**vals)


@dataclass
class SolveReport:
    """Final iterate and certificates of one solve (standard-form, min sense)."""

    status: str
    primal_value: float
    dual_value: float
    gap: float
    primal_residual: float
    dual_residual: float
    iterations: int
    X: list = None
    x_nonneg: np.ndarray = None
    x_free: np.ndarray = None
    y: np.ndarray = None
    Z: list = None
    z_nonneg: np.ndarray = None
    history: list = field(default_factory=list)
    message: str = ""
    merit: float = math.nan

    @property
    def usable(self):
        """Optimal, or stalled at a point within ``REDUCED_ACCURACY`` of the
        tolerances once residuals are measured against the iterate's size."""
        if self.status == "optimal":
            return True
        return self.status == "numerical_failure" and self.merit <= REDUCED_ACCURACY

    def summary(self):
        return {k: getattr(self, k) for k in (
            "status", "primal_value", "dual_value", "gap", "primal_residual",
            "dual_residual", "iterations", "message", "merit")}

    def to_json(self):
        obj = self.summary()
        obj["history"] = self.history
        return json.dumps(obj, default=float)


# ---------------------------------------------------------------------------
# Linear operators of the standard form


class _Problem:
    """Row-restricted view with helpers for ``A x`` and ``A^T y``."""

    def __init__(self, p, rows=None):
        if rows is None:
            rows = np.arange(p.m)
        self.sides = list(p.psd_sides)
        self.a = [a[rows] for a in p.a_psd]
        self.at = [a.T.tocsr() for a in self.a]
        self.al = p.a_nonneg[rows]
        self.af = p.a_free[rows]
        self.c = [np.asarray(c, dtype=float) for c in p.c_psd]
        self.cl = np.asarray(p.c_nonneg, dtype=float)
        self.cf = np.asarray(p.c_free, dtype=float)
        self.b = np.asarray(p.b, dtype=float)[rows]
        self.m = self.b.shape[0]
        self.nl = p.n_nonneg
        self.nf = p.n_free
        self.anorm = max([sp.linalg.norm(a) for a in self.a] + [sp.linalg.norm(self.al), sp.linalg.norm(self.af)])

    def apply(self, xs, xl, xf):
        out = np.zeros(self.m)
        for a, x in zip(self.a, xs):
            out += a @ x.reshape(-1)
        if self.nl:
            out += self.al @ xl
        if self.nf:
            out += self.af @ xf
        return out

    def adjoint(self, y):
        zs = []
        for at, s in zip(self.at, self.sides):
            g = (at @ y).reshape(s, s)
            zs.append(0.5 * (g + g.T))
        return zs, self.al.T @ y, self.af.T @ y


def _kkt(p, xs, xl, xf, y, zs, zl):
    """Residuals and objective values of an iterate against the full problem."""
    b = np.asarray(p.b, dtype=float)
    rp = b.copy()
    for a, x in zip(p.a_psd, xs):
        rp -= a @ x.reshape(-1)
    if p.n_nonneg:
        rp -= p.a_nonneg @ xl
    if p.n_free:
        rp -= p.a_free @ xf
    rd2 = 0.0
    cnorm2 = 0.0
    pobj = 0.0
    for a, c, x, z, s in zip(p.a_psd, p.c_psd, xs, zs, p.psd_sides):
        g = (a.T @ y).reshape(s, s)
        rd = c - 0.5 * (g + g.T) - z
        rd2 += float(np.sum(rd * rd))
        cnorm2 += float(np.sum(c * c))
        pobj += float(np.sum(c * x))
    if p.n_nonneg:
        rd = p.c_nonneg - p.a_nonneg.T @ y - zl
        rd2 += float(rd @ rd)
        cnorm2 += float(p.c_nonneg @ p.c_nonneg)
        pobj += float(p.c_nonneg @ xl)
    if p.n_free:
        rd = p.c_free - p.a_free.T @ y
        rd2 += float(rd @ rd)
        cnorm2 += float(p.c_free @ p.c_free)
        pobj += float(p.c_free @ xf)
    dobj = float(b @ y)
    return {
        "primal_value": pobj,
        "dual_value": dobj,
        "gap": abs(pobj - dobj),
        "primal_residual": float(np.linalg.norm(rp)) / (1.0 + float(np.linalg.norm(b))),
        "dual_residual": math.sqrt(rd2) / (1.0 + math.sqrt(cnorm2)),
    }


def check_kkt(p, r):
    """Recompute objective values and residuals of a report from scratch."""
    if r.X is None or r.y is None or r.Z is None:
        raise NumericContractError("report carries no solution blocks")
    return _kkt(p, r.X, r.x_nonneg, r.x_free, r.y, r.Z, r.z_nonneg)


# ---------------------------------------------------------------------------
# Presolve


def _presolve(p):
    """Drop numerically dependent equality rows.

    Pivoted Cholesky of the Gram matrix ``A A^T`` reveals the rank; rows whose
    pivot falls below ``PRESOLVE_TOL`` times the largest are removed. Returns
    the kept row indices and whether the dropped right-hand sides are
    consistent with the kept ones.
    """
    m = p.m
    if m == 0:
        return np.arange(0), True
    full = sp.hstack(list(p.a_psd) + [p.a_nonneg, p.a_free]).tocsr()
    gram = (full @ full.T).toarray()
    diag = np.diag(gram)
    tiny = diag <= 1e-24 * diag.max(initial=0.0)
    if np.any(tiny):
        bad = np.abs(np.asarray(p.b)[tiny]).max()
        if bad > 1e-12:
            return np.flatnonzero(~tiny), False
        return _presolve_rows(gram, p.b, np.flatnonzero(~tiny))
    return _presolve_rows(gram, p.b, np.arange(m))


def _presolve_rows(gram, b, rows):
    m = rows.size
    gram = gram[np.ix_(rows, rows)]
    diag = np.diag(gram)
    scale = 1.0 / np.sqrt(diag)
    g = gram * scale[:, None] * scale[None, :]
    c, piv, rank, info = sla.lapack.dpstrf(g, lower=1, tol=PRESOLVE_TOL)
    if rank == m:
        return rows, True
    piv = piv[:rank] - 1
    keep = np.sort(piv)
    drop = np.setdiff1d(np.arange(m), keep)
    b = np.asarray(b, dtype=float)[rows]
    gk = gram[np.ix_(keep, keep)]
    coef = np.linalg.solve(gk, b[keep])
    predicted = gram[np.ix_(drop, keep)] @ coef
    consistent = np.abs(predicted - b[drop]).max() <= 1e-8 * (1.0 + np.abs(b).max())
    return rows[keep], bool(consistent)


# ---------------------------------------------------------------------------
# Schur complement


class _SchurPlan:
    """Per-block row layout for forming ``A (W ⊗ W) A^T`` from sparse rows."""

    CHUNK = 4_000_000

    def __init__(self, a, s):
        self.a = a
        self.s = s
        nnz = np.diff(a.indptr)
        self.dense_rows = np.flatnonzero(nnz > s)
        self.buckets = []
        sparse_rows = np.flatnonzero((nnz > 0) & (nnz <= s))
        if sparse_rows.size:
            width = 1 << np.ceil(np.log2(np.maximum(nnz[sparse_rows], 1))).astype(int)
            for w in np.unique(width):
                rows = sparse_rows[width == w]
                pidx = np.zeros((rows.size, w), dtype=np.intp)
                qidx = np.zeros((rows.size, w), dtype=np.intp)
                vals = np.zeros((rows.size, w))
                for j, r in enumerate(rows):
                    lo, hi = a.indptr[r], a.indptr[r + 1]
                    cols = a.indices[lo:hi]
                    pidx[j, :hi - lo], qidx[j, :hi - lo] = np.divmod(cols, s)
                    vals[j, :hi - lo] = a.data[lo:hi]
                self.buckets.append((rows, pidx, qidx, vals))

    def accumulate(self, w, out):
        s = self.s
        a = self.a
        step = max(1, self.CHUNK // (s * s))
        for rows, pidx, qidx, vals in self.buckets:
            for lo in range(0, rows.size, step):
                sl = slice(lo, lo + step)
                left = w[:, pidx[sl]] * vals[sl][None, :, :]     # (s, r, k)
                right = w[qidx[sl], :]                            # (r, k, s)
                prod = np.matmul(left.transpose(1, 0, 2), right)  # (r, s, s)
                out[:, rows[sl]] += a @ prod.reshape(prod.shape[0], -1).T
        for lo in range(0, self.dense_rows.size, step):
            rows = self.dense_rows[lo:lo + step]
            blocks = a[rows].toarray().reshape(-1, s, s)
            prod = np.matmul(np.matmul(w[None], blocks), w[None])
            out[:, rows] += a @ prod.reshape(rows.size, -1).T


# ---------------------------------------------------------------------------
# Main loop


class _Failure(Exception):
    pass


def _nt_scaling(x, z):
    try:
        l1 = np.linalg.cholesky(x)
        l2 = np.linalg.cholesky(z)
    except np.linalg.LinAlgError as exc:
        raise _Failure("iterate left the cone interior") from exc
    u, sv, vt = np.linalg.svd(l2.T @ l1)
    if sv.min() <= 0:
        raise _Failure("degenerate scaling")
    r = (l1 @ vt.T) / np.sqrt(sv)[None, :]
    rinv = (np.sqrt(sv)[:, None] * vt) @ sla.solve_triangular(l1, np.eye(x.shape[0]), lower=True)
    return r, rinv, sv


def _max_step_psd(lam, d):
    sq = 1.0 / np.sqrt(lam)
    mat = d * sq[:, None] * sq[None, :]
    emin = float(np.linalg.eigvalsh(0.5 * (mat + mat.T))[0])
    return math.inf if emin >= 0 else -1.0 / emin


def _interior_step(blocks, steps, alpha, shrink=0.8, tries=20):
    """Largest ``alpha * shrink^k`` keeping every updated block Cholesky-factorable.

    The eigenvalue step bound is exact in exact arithmetic; near the boundary
    rounding in ``X + alpha dX`` can still lose definiteness.
    """
    for _ in range(tries):
        try:
            for x, dx in zip(blocks, steps):
                np.linalg.cholesky(x + alpha * dx)
            return alpha
        except np.linalg.LinAlgError:
            alpha *= shrink
    return 0.0


def _max_step_lp(x, dx):
    neg = dx < 0
    if not np.any(neg):
        return math.inf
    return float(np.min(-x[neg] / dx[neg]))


def solve(p, options=None):
    """Solve a standard-form SDP; see :class:`SolveReport` for the outcome.

    Infeasible-start interior-point runs stall when the cold start is small
    next to the solution, so a stalled run is restarted from larger
    multiples of the start point and the most accurate report is returned.
    """
    o = options or SolverOptions()
    p.validate()
    best = None
    for scale in RESTART_SCALES:
        rep = _solve_from(p, o, scale)
        if rep.status in ("optimal", "infeasible_certificate", "max_iters"):
            return rep
        if best is None or rep.merit < best.merit:
            best = rep
        if rep.usable:
            break
    return best


def _solve_from(p, o, start_scale):
    trace = o.verbose or os.environ.get("QSTRAT_SOLVER_TRACE") == "1"
    keep, consistent = _presolve(p)
    if not consistent:
        return _empty_report(p, "infeasible_certificate", "inconsistent equality constraints")
    q = _Problem(p, keep)
    sides = q.sides
    nl, nf, m = q.nl, q.nf, q.m
    nu = sum(sides) + nl
    plans = [_SchurPlan(a, s) for a, s in zip(q.a, sides)]

    # cold start scaled to the data
    row_norm = [np.sqrt(np.asarray(a.multiply(a).sum(axis=1)).ravel()) for a in q.a]
    xs, zs = [], []
    for a_norm, c, s in zip(row_norm, q.c, sides):
        xi = max(10.0, math.sqrt(s), s * float(np.max((1.0 + np.abs(q.b)) / (1.0 + a_norm), initial=0.0)))
        eta = max(10.0, math.sqrt(s), float(np.max(a_norm, initial=0.0)), float(np.linalg.norm(c)))
        xs.append(start_scale * xi * np.eye(s))
        zs.append(eta * np.eye(s))
    if nl:
        al_norm = np.sqrt(np.asarray(q.al.multiply(q.al).sum(axis=1)).ravel())
        xi = max(10.0, float(np.max((1.0 + np.abs(q.b)) / (1.0 + al_norm), initial=0.0)))
        eta = max(10.0, float(np.max(al_norm, initial=0.0)), float(np.linalg.norm(q.cl)))
        xl = np.full(nl, start_scale * xi)
        zl = np.full(nl, eta)
    else:
        xl = np.zeros(0)
        zl = np.zeros(0)
    xf = np.zeros(nf)
    y = np.zeros(m)

    history = []
    status = "max_iters"
    message = ""
    it = 0
    bnorm = 1.0 + float(np.linalg.norm(q.b))
    cnorm = 1.0 + math.sqrt(sum(float(np.sum(c * c)) for c in q.c) + float(q.cl @ q.cl) + float(q.cf @ q.cf))
    stalls = 0
    best = None
    best_merit = math.inf
    final_merit = math.nan
    since_best = 0
    best_farkas = math.inf
    try:
        for it in range(int(o.max_iters) + 1):
            ax = q.apply(xs, xl, xf)
            rp = q.b - ax
            aty, atyl, atyf = q.adjoint(y)
            rd = [c - g - z for c, g, z in zip(q.c, aty, zs)]
            rdl = q.cl - atyl - zl
            rf = q.cf - atyf
            pobj = sum(float(np.sum(c * x)) for c, x in zip(q.c, xs)) + float(q.cl @ xl) + float(q.cf @ xf)
            dobj = float(q.b @ y)
            xz = sum(float(np.sum(x * z)) for x, z in zip(xs, zs)) + float(xl @ zl)
            mu = xz / nu if nu else 0.0
            pres = float(np.linalg.norm(rp)) / bnorm
            dres = math.sqrt(sum(float(np.sum(r * r)) for r in rd) + float(rdl @ rdl) + float(rf @ rf)) / cnorm
            gap = abs(pobj - dobj)
            rel = max(gap, xz) / (1.0 + abs(pobj))
            entry = {"iter": it, "primal": pobj, "dual": dobj, "gap": gap, "xz": xz,
                     "primal_residual": pres, "dual_residual": dres}
            if history:
                entry.update(alpha_p=history[-1].get("next_alpha_p"), alpha_d=history[-1].get("next_alpha_d"))
            history.append(entry)
            if trace:
                print(f"iter {it:3d} pobj {pobj: .10e} dobj {dobj: .10e} gap {gap:.2e} "
                      f"pres {pres:.2e} dres {dres:.2e} "
                      f"ap {entry.get('alpha_p') or 0:.3f} ad {entry.get('alpha_d') or 0:.3f}",
                      file=sys.stderr)
            merit = max(rel / o.gap_tol, pres / o.feas_tol, dres / o.feas_tol)
            final_merit = merit
            if merit <= 1.0:
                status = "optimal"
                best = None
                break
            # Farkas ratios: a growing dual objective with bounded A^T y + Z
            # certifies primal infeasibility, and symmetrically for the dual
            farkas = math.inf
            if dobj > 0:
                ray = math.sqrt(sum(float(np.sum((g + z) ** 2)) for g, z in zip(aty, zs))
                                + float((atyl + zl) @ (atyl + zl)) + float(atyf @ atyf))
                farkas = ray / dobj
                if farkas < o.feas_tol:
                    status = "infeasible_certificate"
                    message = "primal infeasible (dual ray)"
                    break
            if pobj < 0:
                dray = float(np.linalg.norm(ax)) / -pobj
                farkas = min(farkas, dray)
                if dray < o.feas_tol:
                    status = "infeasible_certificate"
                    message = "dual infeasible (primal ray)"
                    break
            # progress and the fallback iterate are judged on the size-aware measure
            smerit = _scaled_merit(q, o, xs, xl, xf, y, zs, zl)
            if smerit < 0.9 * best_merit or farkas < 0.9 * best_farkas:
                since_best = 0
            else:
                since_best += 1
            best_farkas = min(best_farkas, farkas)
            if smerit < best_merit:
                best_merit = smerit
                best = (it, xs, xl, xf, y, zs, zl)
            if since_best >= 8:
                status = "numerical_failure"
                message = "no progress in the last 8 iterations"
                break
            xnorm = max([np.abs(x).max() for x in xs] + [np.abs(xl).max(initial=0), np.abs(xf).max(initial=0)])
            if xnorm > DIVERGENCE or np.abs(y).max(initial=0) > DIVERGENCE:
                status = "infeasible_certificate"
                message = "iterates diverged"
                break
            if it == o.max_iters:
                break

            scal = [_nt_scaling(x, z) for x, z in zip(xs, zs)]
            ws = [r @ r.T for r, _, _ in scal]
            hl = xl / zl if nl else xl

            schur = np.zeros((m, m))
            for plan, w in zip(plans, ws):
                plan.accumulate(w, schur)
            if nl:
                schur += (q.al @ sp.diags(hl) @ q.al.T).toarray()
            schur = 0.5 * (schur + schur.T)
            solve_y = _factor(schur, q.af)

            def direction(rcs, rcl):
                # rcs: scaled complementarity targets for each block (matrices)
                rc_x = []
                for (r, _, lam), rc in zip(scal, rcs):
                    u = 2.0 * rc / (lam[:, None] + lam[None, :])
                    rc_x.append(r @ u @ r.T)
                rc_xl = rcl / zl if nl else rcl
                tmp = [rcx - w @ d @ w for rcx, w, d in zip(rc_x, ws, rd)]
                tmpl = rc_xl - hl * rdl
                ry = rp - q.apply(tmp, tmpl, np.zeros(nf))
                dy, dxf = solve_y(ry, rf)
                target = 1e-3 * float(np.linalg.norm(rp)) + 1e-15 * bnorm
                best_dir, best_err = None, math.inf
                for _ in range(REFINE_SWEEPS):
                    gz, gzl, _ = q.adjoint(dy)
                    dzs = [d - g for d, g in zip(rd, gz)]
                    dzl = rdl - gzl
                    dxs = [rcx - w @ dz @ w for rcx, w, dz in zip(rc_x, ws, dzs)]
                    dxs = [0.5 * (d + d.T) for d in dxs]
                    dxl = rc_xl - hl * dzl
                    # the primal equation measured through A itself, not through M
                    err = rp - q.apply(dxs, dxl, dxf)
                    err_norm = float(np.linalg.norm(err))
                    if err_norm >= 0.5 * best_err:
                        break
                    best_dir, best_err = (dxs, dxl, dxf, dy, dzs, dzl), err_norm
                    if err_norm <= target:
                        break
                    cy, cf = solve_y(err, np.zeros(nf))
                    dy = dy + cy
                    dxf = dxf + cf
                return best_dir

            def steps(dxs, dxl, dzs, dzl):
                ap = ad = math.inf
                scaled = []
                for (r, rinv, lam), dx, dz in zip(scal, dxs, dzs):
                    dxt = rinv @ dx @ rinv.T
                    dzt = r.T @ dz @ r
                    ap = min(ap, _max_step_psd(lam, dxt))
                    ad = min(ad, _max_step_psd(lam, dzt))
                    scaled.append((dxt, dzt))
                if nl:
                    ap = min(ap, _max_step_lp(xl, dxl))
                    ad = min(ad, _max_step_lp(zl, dzl))
                return ap, ad, scaled

            # predictor
            rcs = [-np.diag(lam * lam) for _, _, lam in scal]
            rcl = -xl * zl
            dxs, dxl, dxf, dy, dzs, dzl = direction(rcs, rcl)
            ap, ad, scaled = steps(dxs, dxl, dzs, dzl)
            ap, ad = min(1.0, ap), min(1.0, ad)
            if nu:
                xz_aff = sum(float(np.sum((x + ap * dx) * (z + ad * dz)))
                             for x, dx, z, dz in zip(xs, dxs, zs, dzs))
                xz_aff += float((xl + ap * dxl) @ (zl + ad * dzl))
                sigma = min(1.0, max(0.0, (xz_aff / xz) ** 3)) if xz > 0 else 0.0
            else:
                sigma = 0.0

            # corrector
            rcs = []
            for (_, _, lam), (dxt, dzt) in zip(scal, scaled):
                cross = dxt @ dzt
                rcs.append(sigma * mu * np.eye(lam.size) - np.diag(lam * lam) - 0.5 * (cross + cross.T))
            rcl = sigma * mu - xl * zl - dxl * dzl
            dxs, dxl, dxf, dy, dzs, dzl = direction(rcs, rcl)
            ap, ad, _ = steps(dxs, dxl, dzs, dzl)
            ap = _interior_step(xs, dxs, min(1.0, o.step_fraction * ap))
            ad = _interior_step(zs, dzs, min(1.0, o.step_fraction * ad))
            history[-1].update(next_alpha_p=ap, next_alpha_d=ad, sigma=sigma,
                               min_scaling=min([float(lam.min()) for _, _, lam in scal], default=None))

            xs = [x + ap * dx for x, dx in zip(xs, dxs)]
            xl = xl + ap * dxl
            xf = xf + ap * dxf
            y = y + ad * dy
            zs = [z + ad * dz for z, dz in zip(zs, dzs)]
            zl = zl + ad * dzl
            zs = [0.5 * (z + z.T) for z in zs]
            if max(ap, ad) < 1e-9:
                stalls += 1
                if stalls >= 3:
                    status = "numerical_failure"
                    message = "step lengths collapsed"
                    break
            else:
                stalls = 0
    except (_Failure, np.linalg.LinAlgError, FloatingPointError) as exc:
        status = "numerical_failure"
        message = str(exc)

    if status != "optimal" and best is not None:
        # fall back to the most accurate iterate seen
        best_it, xs, xl, xf, y, zs, zl = best
        message = (message + f"; returning iterate {best_it}").lstrip("; ")
        final_merit = best_merit
    yfull = np.zeros(p.m)
    yfull[keep] = y
    kkt = _kkt(p, xs, xl, xf, yfull, zs, zl)
    return SolveReport(status=status, iterations=it, X=xs, x_nonneg=xl, x_free=xf, y=yfull,
                       Z=zs, z_nonneg=zl, history=history, message=message, merit=final_merit, **kkt)


def _scaled_merit(q, o, xs, xl, xf, y, zs, zl):
    """Accuracy of an iterate with residuals measured against its own size.

    Equality residuals cannot fall much below ``‖A‖ ‖x‖`` times the accuracy
    of the Newton solves, so an iterate of magnitude 1e6 with right-hand side
    of order one is judged against ``‖b‖ + ‖A‖ ‖x‖`` rather than ``1 + ‖b‖``.
    The gap stays relative to the objective.
    """
    anorm = q.anorm
    xnorm = math.sqrt(sum(float(np.sum(x * x)) for x in xs) + float(xl @ xl) + float(xf @ xf))
    ynorm = float(np.linalg.norm(y))
    rp = q.b - q.apply(xs, xl, xf)
    aty, atyl, atyf = q.adjoint(y)
    rd2 = sum(float(np.sum((c - g - z) ** 2)) for c, g, z in zip(q.c, aty, zs))
    rdl = q.cl - atyl - zl
    rf = q.cf - atyf
    rd2 += float(rdl @ rdl) + float(rf @ rf)
    cnorm = math.sqrt(sum(float(np.sum(c * c)) for c in q.c) + float(q.cl @ q.cl) + float(q.cf @ q.cf))
    pobj = sum(float(np.sum(c * x)) for c, x in zip(q.c, xs)) + float(q.cl @ xl) + float(q.cf @ xf)
    dobj = float(q.b @ y)
    xz = sum(float(np.sum(x * z)) for x, z in zip(xs, zs)) + float(xl @ zl)
    rel = max(abs(pobj - dobj), xz) / (1.0 + abs(pobj))
    pres = float(np.linalg.norm(rp)) / (1.0 + float(np.linalg.norm(q.b)) + anorm * xnorm)
    dres = math.sqrt(rd2) / (1.0 + cnorm + anorm * ynorm)
    return max(rel / o.gap_tol, pres / o.feas_tol, dres / o.feas_tol)


def _factor(schur, af):
    """Return a solver for ``[[M, A_f], [A_f^T, 0]] [dy; dxf] = [ry; rf]``.

    Cholesky of ``M`` plus block elimination of the free variables, with a
    few rounds of iterative refinement against the unregularized system; LU
    on the bordered matrix if ``M`` is not numerically positive definite.
    """
    m = schur.shape[0]
    nf = af.shape[1]
    afd = af.toarray() if nf else np.zeros((m, 0))
    base = _eliminated_solver(schur, afd)
    if base is None:
        kkt = np.block([[schur, afd], [afd.T, np.zeros((nf, nf))]])
        reg = FREE_REG * max(1.0, float(np.abs(np.diag(schur)).max(initial=1.0)))
        kkt[m:, m:] -= reg * np.eye(nf)
        lu = sla.lu_factor(kkt, check_finite=False)

        def base(ry, rf):
            sol = sla.lu_solve(lu, np.concatenate([ry, rf]), check_finite=False)
            return sol[:m], sol[m:]

    def refined(ry, rf):
        dy, dxf = base(ry, rf)
        scale = 1.0 + max(np.abs(ry).max(initial=0.0), np.abs(rf).max(initial=0.0))
        for _ in range(3):
            e1 = ry - schur @ dy - afd @ dxf
            e2 = rf - afd.T @ dy
            err = max(np.abs(e1).max(initial=0.0), np.abs(e2).max(initial=0.0))
            if err <= 1e-15 * scale:
                break
            cy, cf = base(e1, e2)
            dy = dy + cy
            dxf = dxf + cf
        return dy, dxf
    return refined


def _eliminated_solver(schur, afd):
    m, nf = afd.shape
    diag = np.diag(schur)
    if m and not diag.min() > 0:
        return None
    # symmetric diagonal equilibration: factor D M D, which has unit diagonal
    dsc = 1.0 / np.sqrt(diag)
    scaled = schur * dsc[:, None] * dsc[None, :]
    cho = None
    for reg in (0.0, 1e-14, 1e-12):
        try:
            cho = sla.cho_factor(scaled + reg * np.eye(m), lower=True, check_finite=False)
            break
        except (np.linalg.LinAlgError, sla.LinAlgError):
            cho = None
    if cho is None:
        return None

    def minv(r):
        if r.ndim == 1:
            return dsc * sla.cho_solve(cho, dsc * r, check_finite=False)
        return dsc[:, None] * sla.cho_solve(cho, dsc[:, None] * r, check_finite=False)

    if not nf:
        return lambda ry, rf: (minv(ry), np.zeros(0))
    minv_af = minv(afd)
    border = afd.T @ minv_af
    border = 0.5 * (border + border.T)
    bscale = max(1e-300, float(np.abs(np.diag(border)).max(initial=0.0)))
    bcho = None
    for reg in (0.0, 1e-14, 1e-12, FREE_REG):
        try:
            bcho = sla.cho_factor(border + reg * bscale * np.eye(nf), lower=True, check_finite=False)
            break
        except (np.linalg.LinAlgError, sla.LinAlgError):
            bcho = None
    if bcho is None:
        return None

    def solve_y(ry, rf):
        minv_ry = minv(ry)
        dxf = sla.cho_solve(bcho, afd.T @ minv_ry - rf, check_finite=False)
        return minv_ry - minv_af @ dxf, dxf
    return solve_y


def _empty_report(p, status, message):
    return SolveReport(status=status, primal_value=math.nan, dual_value=math.nan, gap=math.nan,
                       primal_residual=math.nan, dual_residual=math.nan, iterations=0,
                       message=message)
