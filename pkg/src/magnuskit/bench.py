"""Benchmark harness: config parsing, run grids, CSV records, order tables and
the invariant check suite used by the command line."""

from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass, fields

import numpy as np

from . import problems as P
from .eigensolve import SLProblem, find_eigenvalue, scan_eigenvalues, shoot
from .errors import ConfigError, MagnusError, StructureError
from .linalg import det_defect, frobenius_norm, unitarity_defect
from .nonlinear import NonlinearProblem, integrate_nonlinear
from .splitting import (
    SeparableFlow,
    get_split_method,
    integrate_split,
    magnus_split_step,
    split_step,
    step_jacobian,
    symplecticity_defect,
)
from .steppers import LinearProblem, get_method, integrate, step_costs
from .quadrature import GL2

# -- config -------------------------------------------------------------------


def _floats(v):
    return [float(x) for x in v.split(",") if x.strip()]


def _ints(v):
    return [int(float(x)) for x in v.split(",") if x.strip()]


def _names(v):
    return [x.strip() for x in v.split(",") if x.strip()]


def _fraction(v):
    v = v.strip()
    if "/" in v:
        num, den = v.split("/", 1)
        return float(num) / float(den)
    return float(v)


CONFIG_KEYS = {
    "problem": str.strip,
    "methods": _names,
    "steps": _ints,
    "checkpoints": _ints,
    "h": _fraction,
    "t0": _fraction,
    "tf": _fraction,
    "gamma": _fraction,
    "xi": _fraction,
    "window": _fraction,
    "alpha": _fraction,
    "beta": _fraction,
    "scale": _fraction,
    "seed": int,
    "dim": int,
    "N": int,
    "ref_h": _fraction,
    "eps": _fraction,
    "delta": _fraction,
    "omega": _fraction,
    "q0": _fraction,
    "p0": _fraction,
    "potential": str.strip,
    "a": _fraction,
    "b": _fraction,
    "order": int,
    "lambda_min": _fraction,
    "lambda_max": _fraction,
    "scan_step": _fraction,
}

# config keys forwarded to each problem constructor
PROBLEM_PARAMS = {
    "rect-step": ("gamma", "xi"),
    "rosen-zener": ("gamma", "xi", "window"),
    "example1": (),
    "bch-pair": ("alpha", "beta", "seed", "dim", "scale"),
    "skew-a": ("N", "tf", "ref_h"),
    "skew-b": ("N", "tf", "ref_h"),
    "duffing": ("eps", "delta", "omega", "q0", "p0", "tf"),
    "double-bracket": ("dim", "seed", "tf"),
    "sl-well": ("potential", "a", "b", "N", "order"),
}


def parse_config(text: str) -> dict:
    """``key = value`` lines, ``#`` comments, comma-separated lists."""
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (x.strip() for x in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            cfg[key] = CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {value!r}") from exc
    cfg.setdefault("seed", 42)
    return cfg


def load_config(path) -> dict:
    with open(path) as fh:
        return parse_config(fh.read())


def build_problem(cfg: dict):
    name = cfg.get("problem")
    if name is None:
        raise ConfigError("config needs a 'problem' key")
    if name not in PROBLEM_PARAMS:
        raise ConfigError(f"unknown problem {name!r}; catalog: {', '.join(P.CATALOG)}")
    params = {}
    for key in PROBLEM_PARAMS[name]:
        if key in cfg:
            params[key] = cfg[key]
    return P.make_problem(name, **params)


# -- records --------------------------------------------------------------------


@dataclass(frozen=True)
class BenchmarkRecord:
    problem: str
    method: str
    h: float
    steps: int
    a_evals: int
    exps: int
    error: float
    unitarity_defect: float
    det_defect: float
    wall_ns: int

    def __post_init__(self):
        if not self.error >= 0 or self.a_evals < 0 or self.exps < 0:
            raise MagnusError("benchmark record must have non-negative error and counters")


CSV_HEADER = [f.name for f in fields(BenchmarkRecord)]


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([_fmt(v) for v in astuple(r)])
    return buf.getvalue()


def worker_count() -> int:
    env = os.environ.get("MAGNUSKIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"MAGNUSKIT_THREADS must be an integer, got {env!r}") from None
    return min(4, os.cpu_count() or 1)


# -- cells ------------------------------------------------------------------------


def _step_counts(cfg, t0, tf):
    if "steps" in cfg:
        steps = cfg["steps"]
    elif "h" in cfg:
        steps = [max(1, int(round((tf - t0) / cfg["h"])))]
    else:
        raise ConfigError("config needs 'steps' or 'h'")
    if not steps:
        raise ConfigError("step list is empty")
    return steps


def _linear_cell(prob: LinearProblem, method: str, t0, tf, n, checkpoints):
    spec = get_method(method)
    try:
        stats = integrate(spec, prob, t0, tf, n, checkpoints=checkpoints)
    except StructureError as exc:
        return [], f"{method}: skipped ({exc})"
    ne, _ = step_costs(spec)
    h = (tf - t0) / n
    # a_evals at a checkpoint k: the same per-step pattern, so scale linearly
    per_step = stats.a_evaluations / n
    out = []
    marks = sorted(set(checkpoints) & set(range(1, n + 1))) or [n]
    if n not in marks:
        marks.append(n)
    for k in marks:
        Y = stats.Y if k == n else stats.checkpoints[k]
        t = t0 + k * h if k != n else tf
        if k == n and prob.exact_observable is not None and prob.observable is not None:
            err = abs(prob.observable(Y) - prob.exact_observable)
        else:
            err = frobenius_norm(Y - prob.solution(t))
        udef = prob.structure.group_defect(Y) if prob.structure.kind != "none" else unitarity_defect(Y)
        ddef = det_defect(Y)
        evals = stats.a_evaluations if k == n else int(round(per_step * k + (stats.a_evaluations - per_step * n)))
        wall = stats.wall_ns if k == n else int(stats.wall_ns * k / n)
        out.append(BenchmarkRecord(prob.label, method, h, k, evals, ne * k, err, udef, ddef, wall))
    return out, None


def _split_cell(flow: SeparableFlow, method: str, t0, tf, n):
    coeffs = get_split_method(method)
    start = time.perf_counter_ns()
    x, evals = integrate_split(coeffs, flow, t0, tf, n)
    wall = time.perf_counter_ns() - start
    err = float(np.linalg.norm(x - flow.reference(t0, tf, flow.x0)))
    h = (tf - t0) / n

    def one(x0):
        if coeffs.layout == "AB":
            return split_step(coeffs, flow, t0, h, x0)
        return magnus_split_step(coeffs, flow, GL2, t0, h, x0)

    M = step_jacobian(one, flow.x0)
    return [
        BenchmarkRecord(
            flow.label, method, h, n, evals, 0, err, symplecticity_defect(M), float(abs(np.linalg.det(M) - 1.0)), wall
        )
    ], None


_NL_METHODS = {"ISO2": ("isospectral", 2, 2, 2), "ISO3": ("isospectral", 3, 5, 2), "NLM2": ("group", 2, 2, 2)}


def _nonlinear_cell(prob: NonlinearProblem, method: str, t0, tf, n):
    try:
        variant, order, evals, exps = _NL_METHODS[method]
    except KeyError:
        raise ConfigError(f"unknown nonlinear method {method!r}; known: {', '.join(_NL_METHODS)}") from None
    if variant != prob.variant:
        return [], f"{method}: skipped (problem is {prob.variant})"
    start = time.perf_counter_ns()
    Y = integrate_nonlinear(prob, t0, tf, n, order)
    wall = time.perf_counter_ns() - start
    ref = integrate_nonlinear(prob, t0, tf, 16 * n, 3 if variant == "isospectral" else 2)
    err = frobenius_norm(Y - ref)
    sym = frobenius_norm(Y - Y.T)
    ddef = float(abs(np.linalg.det(Y) - np.linalg.det(prob.Y0)))
    return [BenchmarkRecord(prob.label, method, (tf - t0) / n, n, evals * n, exps * n, err, sym, ddef, wall)], None


def run_benchmark(cfg: dict, log=None):
    """One record per (method, steps) cell, plus any checkpoint rows.

    Cells run concurrently (MAGNUSKIT_THREADS caps the pool); records keep
    config order.  Incompatible (method, problem) pairs are skipped with a
    reason passed to ``log``.
    """
    methods = cfg.get("methods")
    if not methods:
        raise ConfigError("config needs a non-empty 'methods' list")
    prob = build_problem(cfg)
    if isinstance(prob, SLProblem):
        raise ConfigError("sl-well is an eigenvalue problem; use the eigen command")
    t0 = cfg.get("t0", prob.t0)
    tf = cfg.get("tf", prob.tf)
    steps = _step_counts(cfg, t0, tf)
    checkpoints = tuple(cfg.get("checkpoints", ()))

    def cell(args):
        m, n = args
        if isinstance(prob, LinearProblem):
            return _linear_cell(prob, m, t0, tf, n, checkpoints)
        if isinstance(prob, SeparableFlow):
            return _split_cell(prob, m, t0, tf, n)
        return _nonlinear_cell(prob, m, t0, tf, n)

    grid = [(m, n) for m in methods for n in steps]
    for m in methods:
        # fail fast on unknown names before spending time
        if isinstance(prob, LinearProblem):
            get_method(m)
        elif isinstance(prob, SeparableFlow):
            get_split_method(m)
    if isinstance(prob, LinearProblem) and prob.reference is not None:
        # warm the shared reference cache serially; cells then only read it
        for k in sorted(set(checkpoints) | set(steps)):
            for n in steps:
                if k <= n:
                    prob.solution(t0 + k * (tf - t0) / n if k != n else tf)
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(cell, grid))
    records = []
    for recs, note in results:
        records.extend(recs)
        if note and log:
            log(note)
    return records


# -- eigenvalues ------------------------------------------------------------------


def run_eigen(cfg: dict):
    """Eigenvalue table rows (n, lambda, residual, exact, error) and, when
    analytic values exist and errors are resolvable, the log-log slope of
    error against lambda."""
    if cfg.get("problem", "sl-well") != "sl-well":
        raise ConfigError("eigen runs need problem = sl-well")
    cfg = dict(cfg, problem="sl-well")
    prob = build_problem(cfg)
    lo = cfg.get("lambda_min", 0.5)
    hi = cfg.get("lambda_max", 30.0)
    step = cfg.get("scan_step", 0.5)
    lams = scan_eigenvalues(prob, lo, hi, step)
    analytic = cfg.get("potential", "zero") == "zero"
    rows = []
    for k, lam in enumerate(lams, 1):
        resid = abs(shoot(prob, lam)[0])
        exact = None
        if analytic:
            n = int(round(np.sqrt(lam) * (prob.b - prob.a) / np.pi))
            exact = (n * np.pi / (prob.b - prob.a)) ** 2
        err = abs(lam - exact) if exact is not None else float("nan")
        rows.append((k, lam, resid, exact if exact is not None else float("nan"), err))
    slope = None
    errs = np.array([r[4] for r in rows])
    if analytic and len(rows) >= 3 and np.all(errs > 1e-12 * np.array([r[1] for r in rows])):
        slope = float(np.polyfit(np.log([r[1] for r in rows]), np.log(errs), 1)[0])
    return rows, slope


def eigen_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "lambda", "residual", "exact", "error"])
    for r in rows:
        w.writerow([_fmt(v) if not isinstance(v, int) else str(v) for v in r])
    return buf.getvalue()


# -- order tables -----------------------------------------------------------------


def order_table(cfg: dict):
    """(method, slope) pairs: least-squares slope of log(error) vs log(h)."""
    methods = cfg.get("methods")
    if not methods:
        raise ConfigError("config needs a non-empty 'methods' list")
    steps = cfg.get("steps")
    if not steps or len(steps) < 3:
        raise ConfigError("order needs at least three step counts")
    cfg = {k: v for k, v in cfg.items() if k != "checkpoints"}
    out = []
    for m in methods:
        recs = run_benchmark(dict(cfg, methods=[m]))
        if not recs:
            out.append((m, float("nan")))
            continue
        hs = np.array([r.h for r in recs])
        errs = np.array([r.error for r in recs])
        if np.any(errs == 0):
            out.append((m, float("nan")))
            continue
        out.append((m, float(np.polyfit(np.log(hs), np.log(errs), 1)[0])))
    return out


# -- invariant checks ---------------------------------------------------------------


def _check_suite(seed: int = 42):
    from .expansion import bch_terms, magnus_terms
    from .linalg import commutator, expm, pade_lie_map
    from .nonlinear import double_bracket_problem

    rng = np.random.default_rng(seed)

    def rand(n, scale=1.0):
        M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        return scale * M / np.linalg.norm(M)

    def jacobi():
        A, B, C = rand(4), rand(4), rand(4)
        J = commutator(A, commutator(B, C)) + commutator(B, commutator(C, A)) + commutator(C, commutator(A, B))
        return frobenius_norm(J), 1e-12

    def exp_inverse():
        A = rand(4, 5.0)
        return frobenius_norm(expm(A) @ expm(-A) - np.eye(4)), 1e-12

    def det_trace():
        A = rand(4, 2.0)
        return abs(np.linalg.det(expm(A)) / np.exp(np.trace(A)) - 1), 1e-10

    def pade_orthogonal():
        S = rng.standard_normal((4, 4))
        S = 0.3 * (S - S.T)
        M = pade_lie_map(S, 3)
        return frobenius_norm(M.T @ M - np.eye(4)), 1e-12

    def unitarity():
        prob = P.rosen_zener(10.0, 0.3)
        st = integrate(get_method("M4GL"), prob, prob.t0, prob.tf, 50)
        return prob.structure.group_defect(st.Y), 50 * 1e-12

    def bch():
        prob = P.bch_pair(seed=seed)
        mt = magnus_terms(prob.A, 0.0, 2.0, 4, 256, prob.breakpoints)
        ref = bch_terms(prob.data["X1"], prob.data["X2"], 4)
        return max(frobenius_norm(a - b) for a, b in zip(mt.terms, ref)), 1e-8

    def order4():
        from .steppers import empirical_order

        prob = P.example1()
        return abs(empirical_order(get_method("M4GL"), prob, 0.0, 1.0, [8, 16, 32]) - 4.0), 0.2

    def isospectral():
        M = rng.standard_normal((3, 3))
        prob = double_bracket_problem(np.diag([1.0, 2.0, 3.0]), (M + M.T) / 2)
        ev0 = np.linalg.eigvalsh(prob.Y0.real)
        Y = integrate_nonlinear(prob, 0.0, 1.0, 100, 2)
        return float(np.max(np.abs(np.linalg.eigvalsh(((Y + Y.conj().T) / 2).real) - ev0))), 1e-10

    def symplectic():
        flow = P.duffing()
        coeffs = get_split_method("MN64")
        M = step_jacobian(lambda x: magnus_split_step(coeffs, flow, GL2, 0.3, 0.1, x), flow.x0)
        return symplecticity_defect(M), 1e-8

    def eigen():
        prob = SLProblem(lambda x: 0.0, 0.0, np.pi, 200, 4)
        return abs(find_eigenvalue(prob, 0.8) - 1.0), 1e-9

    return [
        ("commutator-jacobi", jacobi),
        ("expm-inverse", exp_inverse),
        ("expm-det-trace", det_trace),
        ("pade-orthogonal", pade_orthogonal),
        ("unitarity-rosen-zener", unitarity),
        ("bch-recurrence", bch),
        ("order-example1-m4", order4),
        ("isospectral-drift", isospectral),
        ("symplectic-mn64", symplectic),
        ("eigen-zero-potential", eigen),
    ]


def run_checks(seed: int = 42):
    """[(name, ok, value, bound)] for the invariant suite."""
    out = []
    for name, fn in _check_suite(seed):
        try:
            value, bound = fn()
            out.append((name, bool(value <= bound), float(value), bound))
        except MagnusError as exc:
            out.append((name, False, float("nan"), str(exc)))
    return out
