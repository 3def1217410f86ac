"""Ollivier Ricci flow on edge lengths and constant-curvature metrics on cycles."""
from __future__ import annotations

import csv
import io
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .curvature import ollivier_primal
from .exact import fmt_rational, nullspace
from .graph_core import (
    Edge,
    Metric,
    Model,
    PreconditionError,
    combinatorial_lengths,
    path_metric,
)

log = logging.getLogger(__name__)


class FlowError(RuntimeError):
    """The flow produced a non-positive length (step too large)."""


@dataclass(frozen=True)
class FlowConfig:
    alpha: Fraction = Fraction(1, 10)
    tol: float = 1e-8
    max_iter: int = 10_000
    normalize: bool = True
    # Lengths are rounded to this denominator bound after every step; None keeps
    # the raw exact update (denominators then grow geometrically).
    round_denominator: int | None = 10**12

    def __post_init__(self):
        a = Fraction(self.alpha)
        if not 0 < a < 1:
            raise ValueError("flow step alpha must lie strictly between 0 and 1")
        object.__setattr__(self, "alpha", a)
        if self.max_iter < 0 or self.tol < 0:
            raise ValueError("max_iter and tol must be non-negative")


@dataclass
class FlowState:
    model: Model
    lengths: dict[Edge, Fraction]
    metric: Metric
    kappa: dict[Edge, Fraction]
    iteration: int = 0
    shortcuts: list[tuple[int, Edge]] = field(default_factory=list)
    rounding: list[float] = field(default_factory=list)

    @property
    def spread(self) -> Fraction:
        vals = self.kappa.values()
        return max(vals) - min(vals)


@dataclass
class FlowResult:
    converged: bool
    state: FlowState
    spread: float
    iterations: int
    ratio_trace: list[float]
    kappa_trace: list[tuple[float, float]]
    monotonicity_violations: list[int]
    trace_rows: list[list] = field(default_factory=list)

    @property
    def metric(self) -> Metric:
        return self.state.metric

    @property
    def kappa(self) -> dict[Edge, Fraction]:
        return self.state.kappa

    def to_json(self) -> dict:
        st = self.state
        g = st.model
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "spread": float(f"{self.spread:.15g}"),
            "kappa_min": float(f"{float(min(st.kappa.values())):.15g}"),
            "kappa_max": float(f"{float(max(st.kappa.values())):.15g}"),
            "lengths": {g.label(e): float(f"{float(v):.15g}") for e, v in st.lengths.items()},
            "kappa": {g.label(e): float(f"{float(v):.15g}") for e, v in st.kappa.items()},
            "shortcut_events": [[k, g.label(e)] for k, e in st.shortcuts],
            "monotonicity_violations": self.monotonicity_violations,
            "max_distance_ratio": float(f"{max(self.ratio_trace):.15g}"),
        }

    def trace_csv(self) -> str:
        g = self.state.model
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        edges = list(self.state.lengths)
        wr.writerow(["iteration"] + [f"len[{g.label(e)}]" for e in edges]
                    + [f"kappa[{g.label(e)}]" for e in edges] + ["spread"])
        wr.writerows(self.trace_rows)
        return buf.getvalue()


# ---------------------------------------------------------------- curvature kernel


def _degree2_kappa(g: Model, d, x0: int, y0: int) -> Fraction | None:
    """Closed form of the Lipschitz LP when x0 and y0 both have degree 2.

    With f(x0) = 0, f(y0) = d the only free values are a = f(x') and
    b = f(y') at the far neighbours. The objective is increasing in a and
    decreasing in b, so each sits at its tightest bound unless the coupling
    constraint b - a <= d(x', y') binds, in which case the cheaper of the
    two is moved along that line.
    """
    nx, ny = g.nbrs[x0], g.nbrs[y0]
    if len(nx) != 2 or len(ny) != 2:
        return None
    xp = nx[0] if nx[1] == y0 else nx[1]
    yp = ny[0] if ny[1] == x0 else ny[1]
    if xp == yp or y0 not in nx:
        return None
    d0 = d[x0][y0]
    p1, pxy = g.rate(x0, xp), g.rate(x0, y0)
    p2, pyx = g.rate(y0, yp), g.rate(y0, x0)
    lo_a = max(-d[xp][x0], d0 - d[xp][y0])
    hi_b = min(d0 + d[y0][yp], d[x0][yp])
    gap = d[xp][yp]
    a, b = lo_a, hi_b
    if b - a > gap:
        if p1 >= p2:
            b = a + gap
        else:
            a = b - gap
    return (p1 * a + pxy * d0 + pyx * d0 - p2 * (b - d0)) / d0


def edge_curvatures(g: Model, metric: Metric, fast: bool = True) -> dict[Edge, Fraction]:
    """kappa on every undirected edge (the definition is symmetric in x, y)."""
    out = {}
    for e in g.edges:
        k = _degree2_kappa(g, metric.d, *e) if fast else None
        out[e] = ollivier_primal(g, metric, *e) if k is None else k
    return out


# ---------------------------------------------------------------- flow


def initial_state(g: Model, lengths=None, cfg: FlowConfig = FlowConfig()) -> FlowState:
    lengths = dict(combinatorial_lengths(g) if lengths is None else lengths)
    lengths = {e: Fraction(v) for e, v in lengths.items()}
    if cfg.normalize:
        m = path_metric(g, lengths)
        diam = m.diameter()
        lengths = {e: v / diam for e, v in lengths.items()}
    m = path_metric(g, lengths)
    return FlowState(g, lengths, m, edge_curvatures(g, m))


def flow_step(s: FlowState, cfg: FlowConfig) -> FlowState:
    g = s.model
    new = {}
    for e, ln in s.lengths.items():
        v = ln * (1 - cfg.alpha * s.kappa[e])
        if v <= 0:
            raise FlowError(
                f"length of {g.label(e)} became non-positive at iteration {s.iteration + 1}"
            )
        new[e] = v
    if cfg.normalize:
        diam = path_metric(g, new).diameter()
        new = {e: v / diam for e, v in new.items()}
    rounding = list(s.rounding)
    if cfg.round_denominator:
        err = 0.0
        for e, v in new.items():
            r = v.limit_denominator(cfg.round_denominator)
            err = max(err, abs(float(r - v)))
            new[e] = r
        rounding.append(err)
    m = path_metric(g, new)
    shortcuts = list(s.shortcuts) + [(s.iteration + 1, e) for e in m.shortcuts]
    return FlowState(g, new, m, edge_curvatures(g, m), s.iteration + 1, shortcuts, rounding)


def _ratio(m: Metric, g: Model) -> float:
    return float(m.diameter() / min(m.d[i][j] for i, j in g.edges))


def run_flow(g: Model, init=None, cfg: FlowConfig = FlowConfig(), trace: bool = False) -> FlowResult:
    s = initial_state(g, init, cfg)
    ratios = [_ratio(s.metric, g)]
    ktrace = [(float(min(s.kappa.values())), float(max(s.kappa.values())))]
    rows = []
    violations = []

    def record(st):
        if trace:
            edges = list(st.lengths)
            rows.append([st.iteration] + [f"{float(st.lengths[e]):.15g}" for e in edges]
                        + [f"{float(st.kappa[e]):.15g}" for e in edges] + [f"{float(st.spread):.15g}"])

    record(s)
    while float(s.spread) >= cfg.tol and s.iteration < cfg.max_iter:
        prev_lo, prev_hi = min(s.kappa.values()), max(s.kappa.values())
        s = flow_step(s, cfg)
        lo, hi = min(s.kappa.values()), max(s.kappa.values())
        # Slack covers the per-step rounding of lengths.
        slack = 1e-9 if cfg.round_denominator else 0
        if float(hi - prev_hi) > slack or float(prev_lo - lo) > slack:
            violations.append(s.iteration)
        ratios.append(_ratio(s.metric, g))
        ktrace.append((float(lo), float(hi)))
        record(s)
    if violations:
        log.info("kappa extrema not monotone at %d iterations", len(violations))
    spread = float(s.spread)
    return FlowResult(spread < cfg.tol, s, spread, s.iteration, ratios, ktrace, violations, rows)


# ---------------------------------------------------------------- cycles


def _require_cycle(g: Model, min_n: int = 5):
    if g.n < min_n:
        raise PreconditionError(f"constant-curvature metrics need a cycle with n >= {min_n}")
    if any(len(nb) != 2 for nb in g.nbrs):
        raise PreconditionError("model is not a cycle")


def random_lengths(g: Model, seed: int) -> dict[Edge, Fraction]:
    rng = random.Random(seed)
    return {e: Fraction(rng.randint(50, 200), 100) for e in g.edges}


class UniquenessError(RuntimeError):
    pass


@dataclass
class CycleResult:
    primary: FlowResult
    secondary: FlowResult
    max_difference: float

    @property
    def converged(self) -> bool:
        return self.primary.converged and self.secondary.converged


def constant_curvature_cycle(g: Model, cfg: FlowConfig = FlowConfig(), seed: int = 0,
                             trace: bool = False, agree_tol: float = 1e-7) -> CycleResult:
    """Flow from the unit metric and from a random metric; limits must agree.

    The gap between two stopped runs scales with ``cfg.tol`` (roughly 10x on
    slowly mixing kernels), so ``agree_tol`` should sit well above that.
    """
    _require_cycle(g)
    first = run_flow(g, None, cfg, trace=trace)
    second = run_flow(g, random_lengths(g, seed), cfg)
    d1, d2 = first.metric.d, second.metric.d
    diff = max(abs(float(d1[i][j] - d2[i][j])) for i in range(g.n) for j in range(g.n))
    res = CycleResult(first, second, diff)
    if res.converged and diff > agree_tol:
        raise UniquenessError(f"normalized limits differ by {diff:.3g} > {agree_tol:.3g}")
    return res


# ---------------------------------------------------------------- equivalence


def _snap_zero_metric(g: Model, metric: Metric) -> dict[Edge, Fraction] | None:
    """Exact zero-curvature lengths near ``metric``, if the local linear model has one.

    For a fixed optimal plan rho_e, kappa(e) d(e) = sum rho_e(a,b) (d(e) - d(a,b))
    is linear in the distances; with the geodesics of ``metric`` fixed, every
    distance is linear in the edge lengths. Setting all of these to zero
    and fixing the scale gives a linear system in the lengths.
    """
    from .curvature import transport_plan

    edges = list(g.edges)
    col = {e: k for k, e in enumerate(edges)}
    d = metric.d

    def geodesic(a, b):
        # edge-count vector of one shortest a-b path in ``metric``
        vec = [Fraction(0)] * len(edges)
        cur = a
        while cur != b:
            nxt = next(
                k for k in g.nbrs[cur]
                if metric.lengths[(min(cur, k), max(cur, k))] + d[k][b] == d[cur][b]
            )
            vec[col[(min(cur, nxt), max(cur, nxt))]] += 1
            cur = nxt
        return vec

    cache = {}

    def dist_vec(a, b):
        if (a, b) not in cache:
            cache[(a, b)] = cache[(b, a)] = geodesic(a, b) if a != b else [Fraction(0)] * len(edges)
        return cache[(a, b)]

    rows = []
    for e in edges:
        plan = transport_plan(g, metric, *e)
        de = dist_vec(*e)
        row = [Fraction(0)] * len(edges)
        for (a, b), r in plan.items():
            dab = dist_vec(a, b)
            for k in range(len(edges)):
                row[k] += r * (de[k] - dab[k])
        rows.append(row)
    # lengths that are not geodesic in ``metric`` must stay at their distance
    for e in edges:
        if metric.lengths[e] != d[e[0]][e[1]]:
            return None
    basis = nullspace(rows, len(edges))
    if len(basis) != 1:
        return None
    v = basis[0]
    if all(x <= 0 for x in v):
        v = [-x for x in v]
    if any(x <= 0 for x in v):
        return None
    lengths = {e: v[col[e]] for e in edges}
    diam = path_metric(g, lengths).diameter()
    return {e: x / diam for e, x in lengths.items()}


@dataclass
class EquivalenceReport:
    zero_curvature: bool | None
    no_two_cells: bool | None
    betti_sharp: bool | None
    float_zero: bool
    exact_source: str
    exact_kappa: dict
    betti: int | None
    deg_min: int
    agree: bool
    inconclusive: bool
    notes: list[str] = field(default_factory=list)

    def to_json(self, g: Model) -> dict:
        return {
            "zero_curvature": self.zero_curvature,
            "no_two_cells": self.no_two_cells,
            "betti_sharp": self.betti_sharp,
            "float_zero_curvature": self.float_zero,
            "exact_metric": self.exact_source,
            "exact_kappa": {g.label(e): fmt_rational(v) for e, v in self.exact_kappa.items()},
            "betti1": self.betti,
            "deg_min": self.deg_min,
            "agree": self.agree,
            "inconclusive": self.inconclusive,
            "notes": self.notes,
        }


def zero_curvature_equivalence(g: Model, result: FlowResult, tol: float = 1e-8,
                               denominator: int = 10**6) -> EquivalenceReport:
    """Evaluate kappa == 0, X2 == {} and Betti sharpness on the flow limit.

    The limit is rationalised (continued fractions, bounded denominators)
    and all three predicates are decided exactly on that metric. When the
    floating verdict is "zero curvature" but the rounded metric is not
    exactly flat, an exact zero-curvature metric is solved for from the
    local linear structure before giving up as inconclusive.
    """
    from .complex import build_complex
    from .homology import betti1, betti1_markov
    from .graph_core import degree_stats

    _require_cycle(g)
    notes = []
    float_zero = max(abs(float(k)) for k in result.kappa.values()) <= tol
    lengths = {e: Fraction(v).limit_denominator(denominator) for e, v in result.state.lengths.items()}
    m = path_metric(g, lengths)
    kap = {e: ollivier_primal(g, m, *e) for e in g.edges}
    source = f"rounded (denominator <= {denominator})"
    exact_zero = all(k == 0 for k in kap.values())
    if float_zero and not exact_zero:
        snapped = _snap_zero_metric(g, m)
        if snapped is not None:
            m2 = path_metric(g, snapped)
            kap2 = {e: ollivier_primal(g, m2, *e) for e in g.edges}
            close = max(abs(float(m2.d[i][j] - m.d[i][j])) for i in range(g.n) for j in range(g.n))
            if all(k == 0 for k in kap2.values()) and close <= 1e-4:
                m, kap, exact_zero = m2, kap2, True
                source = "solved exact zero-curvature metric"
                notes.append(f"rounded metric not exactly flat; exact flat metric within {close:.2g}")
    inconclusive = False
    if float_zero != exact_zero:
        inconclusive = True
        notes.append("floating and exact curvature verdicts differ")
    if any(k < 0 for k in kap.values()) and not float_zero:
        notes.append("negative exact curvature on the rounded limit")
    cx = build_complex(g, m)
    beta = betti1(cx) if g.reversible else betti1_markov(cx, g)
    dmin, dmax, _ = degree_stats(g)
    no_cells = len(cx.cells) == 0
    nonneg = all(k >= 0 for k in kap.values())
    sharp = nonneg and 2 * beta == dmax
    zero = exact_zero
    agree = (zero == no_cells == sharp) and not inconclusive
    return EquivalenceReport(
        None if inconclusive else zero, no_cells, sharp, float_zero, source, kap, beta, dmin,
        agree, inconclusive, notes,
    )
