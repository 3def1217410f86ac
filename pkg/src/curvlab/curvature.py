"""Ollivier curvature (transport and Lipschitz forms) and idleness curvature."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .exact import fmt_rational
from .graph_core import Metric, Model, PreconditionError
from .lp import OPTIMAL, LpProblem, solve_lp

Edge = tuple[int, int]


class CurvatureLPError(RuntimeError):
    """A curvature LP that should always be feasible and bounded was not."""


def _primal_problem(g: Model, metric: Metric, x0: int, y0: int):
    d = metric.d
    d0 = d[x0][y0]
    bx, by = g.ball(x0), g.ball(y0)
    pairs = [(a, b) for a in bx for b in by if not (a == x0 and b == y0)]
    obj = [1 - d[a][b] / d0 for a, b in pairs]
    cons = []
    for a in g.nbrs[x0]:
        cons.append(([Fraction(int(pa == a)) for pa, _ in pairs], "=", g.rate(x0, a)))
    for b in g.nbrs[y0]:
        cons.append(([Fraction(int(pb == b)) for _, pb in pairs], "=", g.rate(y0, b)))
    return pairs, LpProblem(obj, cons, "max")


def ollivier_primal(g: Model, metric: Metric, x0: int, y0: int, warm=None, with_basis=False):
    """Transport-plan form of kappa(x0, y0).

    Maximises sum rho(x,y) [1 - d(x,y)/d(x0,y0)] over rho >= 0 on
    B1(x0) x B1(y0) with row sums prescribed on S1(x0) and column sums on
    S1(y0); rho(x0, y0) is fixed at zero.
    """
    if x0 == y0:
        raise ValueError("curvature needs two distinct vertices")
    _, prob = _primal_problem(g, metric, x0, y0)
    sol = solve_lp(prob, warm_basis=warm)
    if sol.status != OPTIMAL:
        raise CurvatureLPError(f"transport LP {sol.status} on {g.label((x0, y0))}")
    return (sol.value, sol.basis) if with_basis else sol.value


def transport_plan(g: Model, metric: Metric, x0: int, y0: int) -> dict[tuple[int, int], Fraction]:
    """An optimal plan of the primal LP (nonzero entries only)."""
    pairs, prob = _primal_problem(g, metric, x0, y0)
    sol = solve_lp(prob)
    if sol.status != OPTIMAL:
        raise CurvatureLPError(sol.status)
    return {pr: v for pr, v in zip(pairs, sol.x) if v}


def ollivier_dual(g: Model, metric: Metric, x0: int, y0: int) -> Fraction:
    """Lipschitz form: inf of grad_{x0 y0} Laplace f over 1-Lipschitz f with
    f(y0) - f(x0) = d(x0, y0), with f restricted to B1(x0) u B1(y0)."""
    if x0 == y0:
        raise ValueError("curvature needs two distinct vertices")
    d = metric.d
    d0 = d[x0][y0]
    u = sorted(set(g.ball(x0)) | set(g.ball(y0)))
    pos = {v: k for k, v in enumerate(u)}
    # f(x0) = 0 removes the additive constant; every other value is free.
    k = len(u)
    obj = [Fraction(0)] * k
    for y in g.nbrs[x0]:
        r = g.rate(x0, y)
        obj[pos[y]] += r
        obj[pos[x0]] -= r
    for y in g.nbrs[y0]:
        r = g.rate(y0, y)
        obj[pos[y]] -= r
        obj[pos[y0]] += r
    obj = [c / d0 for c in obj]
    cons = []
    for i, a in enumerate(u):
        for b in u[i + 1:]:
            row = [Fraction(0)] * k
            row[pos[a]], row[pos[b]] = Fraction(1), Fraction(-1)
            cons.append((row, "<=", d[a][b]))
            cons.append(([-v for v in row], "<=", d[a][b]))
    row = [Fraction(0)] * k
    row[pos[y0]], row[pos[x0]] = Fraction(1), Fraction(-1)
    cons.append((row, "=", d0))
    row = [Fraction(0)] * k
    row[pos[x0]] = Fraction(1)
    cons.append((row, "=", Fraction(0)))
    sol = solve_lp(LpProblem(obj, cons, "min", free=[True] * k))
    if sol.status != OPTIMAL:
        raise CurvatureLPError(f"Lipschitz LP {sol.status} on {g.label((x0, y0))}")
    return sol.value


def ollivier(g: Model, metric: Metric, x0: int, y0: int) -> Fraction:
    return ollivier_primal(g, metric, x0, y0)


def wasserstein(support_a, mass_a, support_b, mass_b, metric: Metric) -> Fraction:
    """W1 between two finitely supported probability vectors (exact LP).

    For a metric cost W1 only sees the signed difference of the measures,
    so mass common to both is cancelled before the LP.
    """
    d = metric.d
    net: dict[int, Fraction] = {}
    for a, ma in zip(support_a, mass_a):
        net[a] = net.get(a, 0) + ma
    for b, mb in zip(support_b, mass_b):
        net[b] = net.get(b, 0) - mb
    src = [(v, m) for v, m in net.items() if m > 0]
    dst = [(v, -m) for v, m in net.items() if m < 0]
    if not src:
        return Fraction(0)
    pairs = [(a, b) for a, _ in src for b, _ in dst]
    obj = [d[a][b] for a, b in pairs]
    cons = []
    for a, ma in src:
        cons.append(([Fraction(int(pa == a)) for pa, _ in pairs], "=", ma))
    for b, mb in dst:
        cons.append(([Fraction(int(pb == b)) for _, pb in pairs], "=", mb))
    sol = solve_lp(LpProblem(obj, cons, "min"))
    if sol.status != OPTIMAL:
        raise CurvatureLPError(f"coupling LP {sol.status}")
    return sol.value


def lazy_measure(g: Model, x: int, eps: Fraction):
    support = g.ball(x)
    mass = [1 - eps] + [eps * g.rate(x, y) for y in g.nbrs[x]]
    return support, mass


def kappa_eps(g: Model, metric: Metric, x: int, y: int, eps) -> Fraction:
    """1 - W(m_x^eps, m_y^eps) / d(x, y) for the eps-lazy walk."""
    eps = Fraction(eps)
    if not 0 <= eps <= 1:
        raise ValueError("idleness parameter must lie in [0, 1]")
    if not g.stochastic:
        raise PreconditionError(
            "idleness curvature needs sum_y w(x,y) = mu(x) at every vertex"
        )
    sa, ma = lazy_measure(g, x, eps)
    sb, mb = lazy_measure(g, y, eps)
    return 1 - wasserstein(sa, ma, sb, mb, metric) / metric.d[x][y]


# ---------------------------------------------------------------- reports


@dataclass
class CurvatureReport:
    kind: str
    values: dict  # (x, y) -> value; x, y vertex indices (or a vertex for Bakry-Emery)
    labels: dict = field(default_factory=dict)
    exact: bool = True

    @property
    def minimum(self):
        return min(self.values.values()) if self.values else None

    @property
    def maximum(self):
        return max(self.values.values()) if self.values else None

    def counts(self, tol=0) -> dict[str, int]:
        vals = list(self.values.values())
        return {
            "negative": sum(1 for v in vals if v < -tol),
            "zero": sum(1 for v in vals if -tol <= v <= tol),
            "positive": sum(1 for v in vals if v > tol),
        }

    def to_json(self) -> dict:
        if self.exact:
            fmt = fmt_rational
            tol = 0
        else:
            fmt = lambda v: float(f"{v:.15g}") if v not in (float("inf"), float("-inf")) else str(v)  # noqa: E731
            tol = 1e-9
        return {
            "kind": self.kind,
            "values": {self.labels[k]: fmt(v) for k, v in self.values.items()},
            "summary": {
                "min": fmt(self.minimum) if self.values else None,
                "max": fmt(self.maximum) if self.values else None,
                **self.counts(tol),
            },
        }


def thread_count(threads: int | None = None) -> int:
    if threads:
        return max(1, threads)
    env = os.environ.get("CURVLAB_THREADS")
    return max(1, int(env)) if env else 1


def _sweep(fn: Callable, items, threads: int | None):
    t = thread_count(threads)
    if t == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(t) as ex:
        return list(ex.map(fn, items))


def edge_pairs(g: Model) -> list[Edge]:
    """Undirected edges once for reversible models, both directions otherwise."""
    if g.reversible:
        return list(g.edges)
    return [pr for i, j in g.edges for pr in ((i, j), (j, i))]


def curvature_report(g: Model, metric: Metric, kind: str = "ollivier", eps=None, dim=None,
                     threads: int | None = None, tol: float = 1e-9) -> CurvatureReport:
    """Per-edge sweep (per-vertex for Bakry-Emery).

    ``kind`` is one of ``ollivier``, ``idle`` (needs ``eps``) or
    ``bakry-emery`` (``dim`` is the dimension parameter, None for infinity).
    """
    if kind == "ollivier":
        pairs = edge_pairs(g)
        vals = _sweep(lambda e: ollivier_primal(g, metric, *e), pairs, threads)
        if g.reversible:
            back = _sweep(lambda e: ollivier_primal(g, metric, e[1], e[0]), pairs, threads)
            for e, a, b in zip(pairs, vals, back):
                if a != b:
                    raise AssertionError(f"asymmetric curvature on {g.label(e)}")
        labels = {e: f"{g.vertices[e[0]]}~{g.vertices[e[1]]}" for e in pairs}
        return CurvatureReport("ollivier", dict(zip(pairs, vals)), labels)
    if kind == "idle":
        if eps is None:
            raise ValueError("idleness curvature needs eps")
        if not g.stochastic:
            raise PreconditionError("idleness curvature needs a stochastic model")
        pairs = edge_pairs(g)
        vals = _sweep(lambda e: kappa_eps(g, metric, e[0], e[1], eps), pairs, threads)
        labels = {e: f"{g.vertices[e[0]]}~{g.vertices[e[1]]}" for e in pairs}
        return CurvatureReport(f"idle(eps={fmt_rational(Fraction(eps))})", dict(zip(pairs, vals)), labels)
    if kind == "bakry-emery":
        from .bakry_emery import bakry_emery

        verts = list(range(g.n))
        res = _sweep(lambda x: bakry_emery(g, x, dim, tol=tol), verts, threads)
        labels = {x: g.vertices[x] for x in verts}
        return CurvatureReport(
            f"bakry-emery(N={'inf' if dim is None else fmt_rational(Fraction(dim))})",
            {x: r.K for x, r in zip(verts, res)},
            labels,
            exact=False,
        )
    raise ValueError(f"unknown curvature kind {kind!r}")
