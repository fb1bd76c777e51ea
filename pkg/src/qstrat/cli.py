"""Command-line front end.

Channel specs are colon-separated strings such as ``gadc:0.2:0.3``. A sweep
evaluates every (grid point, n, mode, quantity) cell of a JSON config and keeps
the results in a CSV that is rewritten atomically, in sorted key order, after
each finished cell; ``--resume`` skips cells already present. ``plot`` draws
the adaptive-minus-parallel gap of one quantity as an SVG line plot.
"""
import argparse
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, fields
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import comb as C
from .errors import DomainError, ParseError, QStratError, RenderError, SolverStatusError
from .programs import MODES, QUANTITIES, evaluate
from .solver import SolverOptions

CSV_HEADER = ("gamma1", "noise1", "gamma2", "noise2", "n", "epsilon",
              "mode", "quantity", "value", "gap", "iterations", "status")
KEY_COLUMNS = CSV_HEADER[:8]
SWEEP_PARAMS = ("noise", "gamma", "noise_a", "noise_b", "gamma_a", "gamma_b", "epsilon")

_INT = int


def _real(tok):
    return float(tok)


# (name, parser, check, message) per argument of each channel kind
_KINDS = {
    "gadc": [("gamma", _real, lambda v, a: 0.0 <= v <= 1.0, "must lie in [0, 1]"),
             ("noise", _real, lambda v, a: 0.0 <= v <= 1.0, "must lie in [0, 1]")],
    "identity": [("d", _INT, lambda v, a: v >= 1, "must be >= 1")],
    "random": [("d_in", _INT, lambda v, a: v >= 1, "must be >= 1"),
               ("d_out", _INT, lambda v, a: v >= 1, "must be >= 1"),
               ("seed", _INT, lambda v, a: v >= 0, "must be >= 0")],
    "replace": [("d", _INT, lambda v, a: v >= 1, "must be >= 1"),
                ("k", _INT, lambda v, a: 0 <= v < a[0], "must lie in [0, d)")],
}


@dataclass(frozen=True)
class ChannelSpec:
    """Parsed channel descriptor; ``build()`` gives the one-round Choi operator."""

    kind: str
    args: tuple

    def build(self):
        return C.build_channel(self.kind, self.args)

    @property
    def gadc_params(self):
        """``(gamma, noise)`` for GADC-family channels, else ``(nan, nan)``.

        The qubit identity is the undamped GADC.
        """
        if self.kind == "gadc":
            return float(self.args[0]), float(self.args[1])
        if self.kind == "identity" and self.args[0] == 2:
            return 0.0, 0.0
        return math.nan, math.nan

    def with_param(self, name, value):
        if self.kind != "gadc":
            raise DomainError(f"cannot sweep {name!r} of a {self.kind!r} channel")
        gamma, noise = self.args
        if name == "gamma":
            gamma = value
        else:
            noise = value
        C.GadcParams(gamma, noise)
        return ChannelSpec("gadc", (float(gamma), float(noise)))

    def __str__(self):
        return ":".join([self.kind] + ["%.12g" % a if isinstance(a, float) else str(a) for a in self.args])


def parse_channel_spec(s):
    """Parse ``kind:arg:...`` into a :class:`ChannelSpec`.

    Raises :class:`ParseError` carrying the offset of the offending token.
    """
    if not isinstance(s, str):
        raise ParseError("channel spec must be a string", 0)
    tokens, starts, pos = s.split(":"), [], 0
    for tok in tokens:
        starts.append(pos)
        pos += len(tok) + 1
    kind = tokens[0].strip().lower()
    if kind not in _KINDS:
        raise ParseError(f"unknown channel kind {tokens[0]!r}, expected one of {sorted(_KINDS)}", 0)
    expected = _KINDS[kind]
    if len(tokens) - 1 != len(expected):
        at = starts[len(expected) + 1] if len(tokens) > len(expected) + 1 else len(s)
        raise ParseError(f"{kind} takes {len(expected)} argument(s), got {len(tokens) - 1}", at)
    args = []
    for (name, conv, check, msg), tok, at in zip(expected, tokens[1:], starts[1:]):
        try:
            val = conv(tok.strip())
        except ValueError:
            raise ParseError(f"{kind} argument {name}={tok!r} is not a valid "
                             f"{'integer' if conv is _INT else 'number'}", at) from None
        if conv is _real and not math.isfinite(val):
            raise ParseError(f"{kind} argument {name} must be finite", at)
        if not check(val, args):
            raise ParseError(f"{kind} argument {name}={tok} {msg}", at)
        args.append(val)
    return ChannelSpec(kind, tuple(args))


def strategy_for(spec, n):
    """``n`` sequential uses of the channel; parallel combs are derived at evaluation."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return C.n_fold_sequential_choi(spec.build(), int(n))


# ---------------------------------------------------------------------------
# Results


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return "%.12g" % v


def _round12(v):
    v = float(v)
    return float("%.12g" % v) if math.isfinite(v) else v


@dataclass(eq=False)
class ResultRow:
    """One evaluated sweep cell; reals are held at the 12 digits the CSV keeps."""

    gamma1: float
    noise1: float
    gamma2: float
    noise2: float
    n: int
    epsilon: float
    mode: str
    quantity: str
    value: float
    gap: float
    iterations: int
    status: str

    def __post_init__(self):
        for f in ("gamma1", "noise1", "gamma2", "noise2", "epsilon", "value", "gap"):
            setattr(self, f, _round12(getattr(self, f)))
        self.n = int(self.n)
        self.iterations = int(self.iterations)

    def cells(self):
        return tuple(_fmt(getattr(self, f)) for f in CSV_HEADER)

    def key(self):
        return self.cells()[:len(KEY_COLUMNS)]

    def sort_key(self):
        return (self.gamma1, self.noise1, self.gamma2, self.noise2, self.n, self.epsilon,
                self.mode, self.quantity)

    def __eq__(self, other):
        return isinstance(other, ResultRow) and self.cells() == other.cells()

    def __hash__(self):
        return hash(self.cells())


def emit_csv(rows):
    """CSV text with the fixed header, rows sorted by key."""
    lines = [",".join(CSV_HEADER)]
    for r in sorted(rows, key=ResultRow.sort_key):
        lines.append(",".join(r.cells()))
    return "\n".join(lines) + "\n"


def parse_csv(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty CSV", 0)
    if tuple(lines[0].split(",")) != CSV_HEADER:
        raise ParseError(f"unexpected CSV header {lines[0]!r}", 0)
    rows = []
    offset = len(lines[0]) + 1
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(CSV_HEADER):
            raise ParseError(f"expected {len(CSV_HEADER)} columns, got {len(cells)}", offset)
        try:
            vals = {}
            for name, cell in zip(CSV_HEADER, cells):
                if name in ("n", "iterations"):
                    vals[name] = int(cell)
                elif name in ("mode", "quantity", "status"):
                    vals[name] = cell
                else:
                    vals[name] = float(cell)
        except ValueError:
            raise ParseError(f"bad value in row {ln!r}", offset) from None
        rows.append(ResultRow(**vals))
        offset += len(ln) + 1
    return rows


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        return parse_csv(fh.read())


def write_csv_atomic(path, rows):
    text = emit_csv(rows)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        # mkstemp creates the file private; give it the usual umask mode
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# Sweeps


@dataclass
class SweepConfig:
    channel_a: str
    channel_b: str
    n_values: list
    epsilon: float = 0.0
    sweep_param: str = "noise"
    grid: list = field(default_factory=list)
    quantities: list = field(default_factory=lambda: ["distance"])
    modes: list = field(default_factory=lambda: list(MODES))
    output_path: str = "results.csv"
    solver: dict = field(default_factory=dict)

    def __post_init__(self):
        self.spec_a = parse_channel_spec(self.channel_a)
        self.spec_b = parse_channel_spec(self.channel_b)
        if not self.n_values or any(int(n) != n or n < 1 for n in self.n_values):
            raise DomainError(f"n_values must be integers >= 1, got {self.n_values}")
        self.n_values = [int(n) for n in self.n_values]
        if self.sweep_param not in SWEEP_PARAMS:
            raise DomainError(f"sweep_param must be one of {SWEEP_PARAMS}, got {self.sweep_param!r}")
        if not self.grid:
            raise DomainError("grid must not be empty")
        for g in self.grid:
            if not 0.0 <= float(g) <= 1.0:
                raise DomainError(f"grid values must lie in [0, 1], got {g}")
        self.grid = [float(g) for g in self.grid]
        self.epsilon = float(self.epsilon)
        bad = set(self.quantities) - set(QUANTITIES)
        if bad or not self.quantities:
            raise DomainError(f"quantities must be a non-empty subset of {QUANTITIES}")
        bad = set(self.modes) - set(MODES)
        if bad or not self.modes:
            raise DomainError(f"modes must be a non-empty subset of {MODES}")
        self.options()
        self.cells()  # range-checks the swept channel parameters

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ParseError(f"unknown config field(s) {sorted(unknown)}", 0)
        return cls(**d)

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.pos) from None
        if not isinstance(d, dict):
            raise ParseError("config must be a JSON object", 0)
        return cls.from_dict(d)

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def options(self):
        return SolverOptions().with_overrides(self.solver)

    def point(self, g):
        """Channel specs and epsilon at grid value ``g``."""
        a, b, eps = self.spec_a, self.spec_b, self.epsilon
        p = self.sweep_param
        if p == "epsilon":
            eps = g
        elif p in ("noise", "gamma"):
            a, b = a.with_param(p, g), b.with_param(p, g)
        elif p.endswith("_a"):
            a = a.with_param(p[:-2], g)
        else:
            b = b.with_param(p[:-2], g)
        return a, b, eps

    def cells(self):
        out = []
        for g in self.grid:
            a, b, eps = self.point(g)
            for n in self.n_values:
                for mode in self.modes:
                    for q in self.quantities:
                        out.append(Cell(str(a), str(b), n, eps, mode, q))
        return out


@dataclass(frozen=True)
class Cell:
    channel_a: str
    channel_b: str
    n: int
    epsilon: float
    mode: str
    quantity: str

    def stub(self):
        g1, n1 = parse_channel_spec(self.channel_a).gadc_params
        g2, n2 = parse_channel_spec(self.channel_b).gadc_params
        return dict(gamma1=g1, noise1=n1, gamma2=g2, noise2=n2, n=self.n,
                    epsilon=self.epsilon, mode=self.mode, quantity=self.quantity)

    def key(self):
        return ResultRow(**self.stub(), value=0.0, gap=0.0, iterations=0, status="").key()


def evaluate_cell(cell, solver_overrides=None):
    """Evaluate one cell; solver failures become the row status."""
    stub = cell.stub()
    options = SolverOptions().with_overrides(solver_overrides or {})
    try:
        a = strategy_for(parse_channel_spec(cell.channel_a), cell.n)
        b = strategy_for(parse_channel_spec(cell.channel_b), cell.n)
        r = evaluate(cell.quantity, a, b, cell.epsilon, cell.mode, options)
        return ResultRow(**stub, value=r.value, gap=r.gap, iterations=r.iterations, status=r.status)
    except SolverStatusError as exc:
        rep = exc.report
        status = exc.status
        its = rep.iterations if rep is not None else 0
        return ResultRow(**stub, value=math.nan, gap=math.nan, iterations=its, status=status)
    except DomainError:
        return ResultRow(**stub, value=math.nan, gap=math.nan, iterations=0, status="domain_error")


def run_sweep(config, jobs=1, resume=False, progress=None):
    """Evaluate all cells of ``config`` and keep ``config.output_path`` current.

    With ``resume`` the rows already in the CSV are kept and their cells
    skipped. Returns all rows, sorted.
    """
    path = config.output_path
    rows = {}
    if resume and os.path.exists(path):
        for r in read_csv(path):
            rows[r.key()] = r
    todo = [c for c in config.cells() if c.key() not in rows]
    # duplicates can arise when a sweep leaves the channels unchanged
    seen, pending = set(), []
    for c in todo:
        if c.key() not in seen:
            seen.add(c.key())
            pending.append(c)
    if not pending:
        current = None
        if os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                current = fh.read()
        if current != emit_csv(rows.values()):
            write_csv_atomic(path, rows.values())
        return sorted(rows.values(), key=ResultRow.sort_key)

    def record(row):
        rows[row.key()] = row
        write_csv_atomic(path, rows.values())
        if progress:
            progress(row, len(rows))

    if jobs <= 1:
        for c in pending:
            record(evaluate_cell(c, config.solver))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(evaluate_cell, c, config.solver) for c in pending]
            for fut in as_completed(futures):
                record(fut.result())
    return sorted(rows.values(), key=ResultRow.sort_key)


_FIG3_GRID = [round(0.05 * i, 2) for i in range(21)]
_SMOOTHING_GRID = [0.0, 0.01, 0.02, 0.05, 0.1, 0.2]
# hypothesis testing needs a nonzero type-I budget
_OPEN_SMOOTHING_GRID = _SMOOTHING_GRID[1:]

PRESETS = {
    "fig3": dict(channel_a="gadc:0.2:0", channel_b="gadc:0.3:0", n_values=[1, 2, 3],
                 epsilon=0.0, sweep_param="noise", grid=_FIG3_GRID,
                 quantities=["distance"], modes=["adaptive", "parallel"],
                 output_path="results/fig3.csv"),
    "fig4": dict(channel_a="gadc:0.2:0.2", channel_b="gadc:0.2:0.3", n_values=[1, 2, 3],
                 epsilon=0.05, sweep_param="epsilon", grid=_OPEN_SMOOTHING_GRID,
                 quantities=["dmin"], modes=["adaptive", "parallel"],
                 output_path="results/fig4.csv"),
    "fig5": dict(channel_a="gadc:0.2:0.2", channel_b="gadc:0.2:0.3", n_values=[1, 2, 3],
                 epsilon=0.05, sweep_param="epsilon", grid=_SMOOTHING_GRID,
                 quantities=["dmax"], modes=["adaptive", "parallel"],
                 output_path="results/fig5.csv"),
}


def preset(name, **overrides):
    if name not in PRESETS:
        raise DomainError(f"unknown preset {name!r}, expected one of {sorted(PRESETS)}")
    d = dict(PRESETS[name])
    d.update(overrides)
    return SweepConfig.from_dict(d)


# ---------------------------------------------------------------------------
# Plots

_X_CANDIDATES = ("noise1", "gamma1", "noise2", "gamma2", "epsilon")
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def gap_series(rows, quantity):
    """``{n: [(x, adaptive - parallel), ...]}`` and the x column name."""
    rows = [r for r in rows if r.quantity == quantity]
    if not rows:
        raise RenderError(f"no rows for quantity {quantity!r}")
    varying = [c for c in _X_CANDIDATES if len({getattr(r, c) for r in rows}) > 1]
    xcol = varying[0] if varying else "noise1"
    label = xcol
    if xcol in ("noise1", "gamma1"):
        other = xcol[:-1] + "2"
        if all(getattr(r, xcol) == getattr(r, other) for r in rows):
            label = xcol[:-1]
    by_key = {}
    for r in rows:
        k = r.key()
        by_key[(k[:6], r.mode)] = r
    base_keys = sorted({k for k, _ in by_key}, key=lambda k: tuple(float(v) for v in k))
    missing = []
    series = {}
    for k in base_keys:
        ra, rp = by_key.get((k, "adaptive")), by_key.get((k, "parallel"))
        if ra is None or rp is None:
            missing.append(",".join(k) + ("," + ("parallel" if ra is not None else "adaptive")))
            continue
        if not (math.isfinite(ra.value) and math.isfinite(rp.value)):
            continue
        n = int(k[4])
        x = getattr(ra, xcol)
        series.setdefault(n, []).append((x, ra.value - rp.value))
    if missing:
        raise RenderError(f"missing {quantity} rows for cells: " + "; ".join(missing))
    for n in series:
        series[n].sort()
    return series, label


def render_svg(series, quantity, xlabel, width=640, height=400):
    left, right, top, bottom = 80, 120, 30, 55
    pw, ph = width - left - right, height - top - bottom
    pts = [p for s in series.values() for p in s]
    xs = [p[0] for p in pts] or [0.0, 1.0]
    ys = [p[1] for p in pts] or [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(min(ys), 0.0), max(max(ys), 0.0)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def sx(x):
        return left + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return top + (y1 - y) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for i in range(6):
        xv = x0 + (x1 - x0) * i / 5
        yv = y0 + (y1 - y0) * i / 5
        out.append(f'<line x1="{sx(xv):.2f}" y1="{top + ph}" x2="{sx(xv):.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{sx(xv):.2f}" y="{top + ph + 18}" text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<line x1="{left - 5}" y1="{sy(yv):.2f}" x2="{left}" y2="{sy(yv):.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{sy(yv) + 4:.2f}" text-anchor="end">{yv:.3g}</text>')
    if y0 < 0 < y1:
        out.append(f'<line x1="{left}" y1="{sy(0):.2f}" x2="{left + pw}" y2="{sy(0):.2f}" '
                   f'stroke="#999999" stroke-dasharray="4,3"/>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 15}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="20" y="{top + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 20 {top + ph / 2:.2f})">{quantity}: adaptive - parallel</text>')
    for i, n in enumerate(sorted(series)):
        color = _PALETTE[i % len(_PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in series[n])
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        ly = top + 15 + 18 * i
        out.append(f'<line x1="{left + pw + 10}" y1="{ly}" x2="{left + pw + 30}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{left + pw + 35}" y="{ly + 4}">n = {n}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_plot(csv_path, quantity, out_svg):
    rows = read_csv(csv_path)
    series, label = gap_series(rows, quantity)
    text = render_svg(series, quantity, label)
    d = os.path.dirname(os.path.abspath(out_svg))
    os.makedirs(d, exist_ok=True)
    with open(out_svg, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return out_svg


# ---------------------------------------------------------------------------
# Entry point


def _parser():
    p = argparse.ArgumentParser(prog="qstrat", description="Strategy discrimination SDPs.")
    sub = p.add_subparsers(dest="command", required=True)
    for q in QUANTITIES:
        s = sub.add_parser(q, help=f"evaluate {q} between two n-use strategies")
        s.add_argument("--a", required=True, help="channel spec of the first strategy")
        s.add_argument("--b", required=True, help="channel spec of the second strategy")
        s.add_argument("--n", type=int, default=1)
        s.add_argument("--epsilon", type=float, default=0.0)
        s.add_argument("--mode", choices=MODES, default="adaptive")
        s.add_argument("--json", action="store_true")
    s = sub.add_parser("sweep", help="run a parameter sweep into a CSV")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="path to a JSON sweep config")
    src.add_argument("--preset", choices=sorted(PRESETS))
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--resume", action="store_true")
    s.add_argument("--output", help="override the config's output_path")
    s.add_argument("--n-values", help="comma-separated override of n_values")
    s = sub.add_parser("plot", help="render the adaptive-minus-parallel gap")
    s.add_argument("--csv", required=True)
    s.add_argument("--quantity", choices=QUANTITIES, required=True)
    s.add_argument("--out", required=True)
    s = sub.add_parser("verify", help="check the comb conditions of a saved strategy")
    s.add_argument("--comb", required=True)
    s.add_argument("--tol", type=float, default=C.RESIDUAL_TOL)
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        if args.command in QUANTITIES:
            if args.n < 1:
                raise DomainError(f"--n must be >= 1, got {args.n}")
            a = strategy_for(parse_channel_spec(args.a), args.n)
            b = strategy_for(parse_channel_spec(args.b), args.n)
            r = evaluate(args.command, a, b, args.epsilon, args.mode)
            print(r.to_json() if args.json else _fmt(r.value))
            return 0
        if args.command == "sweep":
            if args.config:
                with open(args.config, encoding="utf-8") as fh:
                    cfg_text = fh.read()
                cfg = SweepConfig.from_json(cfg_text).to_dict()
            else:
                cfg = dict(PRESETS[args.preset])
            if args.output:
                cfg["output_path"] = args.output
            if args.n_values:
                cfg["n_values"] = [int(v) for v in args.n_values.split(",")]
            config = SweepConfig.from_dict(cfg)

            def progress(row, done):
                print(f"[{done}] n={row.n} {row.mode} {row.quantity} eps={_fmt(row.epsilon)} "
                      f"noise=({_fmt(row.noise1)},{_fmt(row.noise2)}) value={_fmt(row.value)} "
                      f"{row.status}", file=sys.stderr)

            rows = run_sweep(config, jobs=args.jobs, resume=args.resume, progress=progress)
            print(f"{len(rows)} rows in {config.output_path}")
            return 0
        if args.command == "plot":
            print(render_plot(args.csv, args.quantity, args.out))
            return 0
        if args.command == "verify":
            with open(args.comb, encoding="utf-8") as fh:
                s = C.strategy_loads(fh.read())
            rep = C.verify_comb(s, tol=args.tol)
            print(json.dumps(rep.to_dict(), sort_keys=True))
            return 0 if rep.passed else 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, DomainError, RenderError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QStratError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 2


if __name__ == "__main__":
    sys.exit(main())
