"""Small exact MILP engine: bounded-variable simplex plus best-bound branching.

Models are always maximised. Variables carry finite bounds and are either
binary or continuous. ``milp_solve`` accepts a lazy-constraint callback that
sees every integer-feasible candidate and may return globally valid rows;
those rows are appended to the model and the node is re-solved.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix

INT_TOL = 1e-6
FEAS_TOL = 1e-7
GAP_TOL = 1e-6
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
TIE_TOL = 1e-9
REFACTOR_EVERY = 50

SENSES = ("<=", ">=", "==")


@dataclass
class Constraint:
    coefs: dict[int, float]
    sense: str
    rhs: float
    name: str = ""

    def activity(self, values) -> float:
        return sum(c * values[j] for j, c in self.coefs.items())

    def violation(self, values) -> float:
        """Amount by which ``values`` breaks the row (0 when satisfied)."""
        lhs = self.activity(values)
        if self.sense == "<=":
            return max(0.0, lhs - self.rhs)
        if self.sense == ">=":
            return max(0.0, self.rhs - lhs)
        return abs(lhs - self.rhs)


class MilpModel:
    """Mixed-binary linear program with a maximisation objective."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.names: list[str] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.binary: list[bool] = []
        self.obj: list[float] = []
        self.constraints: list[Constraint] = []
        self._index: dict[str, int] = {}
        self._dense_cache = None
        self._highs_cache = None

    @property
    def n_vars(self) -> int:
        return len(self.names)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    def add_var(self, name: str, lb: float = 0.0, ub: float = 1.0, binary: bool = False, obj: float = 0.0) -> int:
        if name in self._index:
            raise ValueError(f"duplicate variable {name}")
        if not (math.isfinite(lb) and math.isfinite(ub)) or lb > ub:
            raise ValueError(f"variable {name} needs finite bounds with lb <= ub")
        if binary and (lb < 0 or ub > 1):
            raise ValueError(f"binary variable {name} must have bounds within [0, 1]")
        j = len(self.names)
        self.names.append(name)
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.binary.append(bool(binary))
        self.obj.append(float(obj))
        self._index[name] = j
        return j

    def index(self, name: str) -> int:
        return self._index[name]

    def has_var(self, name: str) -> bool:
        return name in self._index

    def add_constraint(self, coefs: Mapping[int, float], sense: str, rhs: float, name: str = "") -> int:
        if sense not in SENSES:
            raise ValueError(f"unknown relation {sense!r}")
        row = {}
        for j, c in coefs.items():
            if not 0 <= j < self.n_vars:
                raise ValueError(f"constraint {name or len(self.constraints)} references unknown variable {j}")
            if c != 0:
                row[j] = row.get(j, 0.0) + float(c)
        self.constraints.append(Constraint(row, sense, float(rhs), name or f"c{len(self.constraints)}"))
        return len(self.constraints) - 1

    def add_named_constraint(self, coefs: Mapping[str, float], sense: str, rhs: float, name: str = "") -> int:
        return self.add_constraint({self._index[k]: v for k, v in coefs.items()}, sense, rhs, name)

    def objective_value(self, values) -> float:
        return float(np.dot(self.obj, values))

    def violations(self, values, tol: float = FEAS_TOL) -> list[str]:
        """Rows and bounds broken by ``values`` beyond ``tol``."""
        out = []
        for j, v in enumerate(values):
            if v < self.lb[j] - tol or v > self.ub[j] + tol:
                out.append(f"{self.names[j]}={v} outside [{self.lb[j]}, {self.ub[j]}]")
        for con in self.constraints:
            if con.violation(values) > tol * max(1.0, abs(con.rhs)):
                out.append(f"{con.name} violated by {con.violation(values):.3g}")
        return out

    def is_integral(self, values, tol: float = INT_TOL) -> bool:
        return all(abs(v - round(v)) <= tol for v, b in zip(values, self.binary) if b)

    def dense(self):
        """Constraint matrix, senses and right-hand sides as arrays (treat as read-only)."""
        key = (self.n_vars, self.n_constraints)
        cached = self._dense_cache
        if cached is not None and cached[0] == key:
            return cached[1]
        A = np.zeros((self.n_constraints, self.n_vars))
        for i, con in enumerate(self.constraints):
            for j, c in con.coefs.items():
                A[i, j] = c
        senses = np.array([c.sense for c in self.constraints], dtype=object)
        rhs = np.array([c.rhs for c in self.constraints], dtype=float)
        self._dense_cache = (key, (A, senses, rhs))
        return A, senses, rhs


# ---------------------------------------------------------------------------
# LP relaxation


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded | numeric_failure
    x: np.ndarray | None = None
    objective: float | None = None
    basis: list[int] | None = None
    duals: np.ndarray | None = None
    iterations: int = 0


class _Simplex:
    """Revised primal simplex for  max c.x  s.t.  A x (<=,>=,==) b,  l <= x <= u.

    Column layout: structurals, one slack per row, one artificial per row.
    The basis inverse is kept dense and refreshed every REFACTOR_EVERY pivots.
    """

    def __init__(self, A, senses, b, c, lb, ub):
        self.A = A
        self.At = csr_matrix(A.T)
        self.m, self.n = A.shape
        m, n = self.m, self.n
        self.b = b
        self.N = n + 2 * m
        self.L = np.empty(self.N)
        self.U = np.empty(self.N)
        self.L[:n], self.U[:n] = lb, ub
        for i, s in enumerate(senses):
            k = n + i
            if s == "<=":
                self.L[k], self.U[k] = 0.0, math.inf
            elif s == ">=":
                self.L[k], self.U[k] = -math.inf, 0.0
            else:
                self.L[k], self.U[k] = 0.0, 0.0
        self.L[n + m:], self.U[n + m:] = 0.0, math.inf
        self.c_struct = c
        self.sign = np.ones(m)
        self.x = np.zeros(self.N)
        self.x[:n] = lb
        self.state = np.ones(self.N, dtype=np.int8)  # 0 basic, 1 at lower, 2 at upper
        self.basis = np.empty(m, dtype=int)
        self.iterations = 0
        self.degenerate_run = 0
        self.bland = False

        r = b - A @ self.x[:n] if n else b.copy()
        for i in range(m):
            k = n + i
            lo, hi = self.L[k], self.U[k]
            if lo - FEAS_TOL <= r[i] <= hi + FEAS_TOL:
                self.basis[i] = k
                self.state[k] = 0
                self.x[k] = r[i]
                self.x[n + m + i] = 0.0
            else:
                s = min(max(r[i], lo), hi)
                self.x[k] = s
                self.state[k] = 1 if s == lo else 2
                a = n + m + i
                self.sign[i] = 1.0 if r[i] - s > 0 else -1.0
                self.basis[i] = a
                self.state[a] = 0
                self.x[a] = abs(r[i] - s)
        self.Binv = np.diag(1.0 / np.array([self._col_sign(k) for k in self.basis])) if m else np.zeros((0, 0))
        self.pivots_since_refactor = 0

    def _col_sign(self, k: int) -> float:
        # only valid for slack/artificial columns
        n, m = self.n, self.m
        return 1.0 if k < n + m else self.sign[k - n - m]

    def column(self, k: int) -> np.ndarray:
        n, m = self.n, self.m
        if k < n:
            return self.A[:, k]
        col = np.zeros(m)
        if k < n + m:
            col[k - n] = 1.0
        else:
            col[k - n - m] = self.sign[k - n - m]
        return col

    def _ftran(self, k: int) -> np.ndarray:
        if k >= self.n:
            return self.Binv @ self.column(k)
        col = self.A[:, k]
        nz = np.flatnonzero(col)
        return self.Binv[:, nz] @ col[nz]

    def refactor(self) -> bool:
        if self.m == 0:
            return True
        B = np.column_stack([self.column(k) for k in self.basis])
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            return False
        if not np.all(np.isfinite(self.Binv)):
            return False
        nb = self.state != 0
        xn = np.where(nb, self.x, 0.0)
        n, m = self.n, self.m
        resid = self.b - self.A @ xn[:n] - xn[n:n + m] - self.sign * xn[n + m:]
        self.x[self.basis] = self.Binv @ resid
        self.pivots_since_refactor = 0
        return True

    def reduced_costs(self, cost):
        n, m = self.n, self.m
        cb = cost[self.basis]
        nz = np.flatnonzero(cb)
        pi = cb[nz] @ self.Binv[nz] if m else np.zeros(0)
        d = np.empty(self.N)
        d[:n] = cost[:n] - (self.At @ pi if m else 0.0)
        d[n:n + m] = cost[n:n + m] - pi
        d[n + m:] = cost[n + m:] - self.sign * pi
        d[self.basis] = 0.0
        return pi, d

    def run(self, cost, max_iter: int) -> str:
        """Iterate to optimality for ``cost``; returns optimal/unbounded/numeric_failure/iteration_limit."""
        n, m = self.n, self.m
        degenerate_limit = 10 * (m + n)
        while True:
            if self.iterations >= max_iter:
                return "iteration_limit"
            pi, d = self.reduced_costs(cost)
            movable = self.U > self.L
            up = (self.state == 1) & (d > OPT_TOL) & movable
            down = (self.state == 2) & (d < -OPT_TOL) & movable
            eligible = up | down
            if not eligible.any():
                return "optimal"
            if self.bland:
                q = int(np.flatnonzero(eligible)[0])
            else:
                score = np.where(eligible, np.abs(d), -1.0)
                q = int(np.argmax(score))
            direction = 1.0 if up[q] else -1.0
            alpha = self._ftran(q) if m else np.zeros(0)
            rate = -direction * alpha  # change of basic values per unit step
            xb = self.x[self.basis]
            lb_b = self.L[self.basis]
            ub_b = self.U[self.basis]
            # min-ratio test; among near-ties take the largest pivot, then the
            # lowest variable index
            limits = np.full(m, math.inf)
            dec = rate < -PIVOT_TOL
            inc = rate > PIVOT_TOL
            with np.errstate(invalid="ignore", divide="ignore"):
                limits[dec] = (xb[dec] - lb_b[dec]) / (-rate[dec])
                limits[inc] = (ub_b[inc] - xb[inc]) / rate[inc]
            limits = np.maximum(limits, 0.0)
            t_flip = self.U[q] - self.L[q]
            t_basis = limits.min() if m else math.inf
            if not math.isfinite(t_basis) and not math.isfinite(t_flip):
                return "unbounded"
            self.iterations += 1
            if t_flip <= t_basis:
                t = t_flip
                self.x[q] = self.U[q] if direction > 0 else self.L[q]
                self.state[q] = 2 if direction > 0 else 1
                self.x[self.basis] = xb + t * rate
            else:
                t = t_basis
                cand = np.flatnonzero(limits <= t_basis + TIE_TOL)
                mags = np.abs(rate[cand])
                best = cand[mags >= mags.max() * (1 - 1e-12)]
                r = int(best[np.argmin(self.basis[best])])
                leaving = int(self.basis[r])
                self.x[self.basis] = xb + t * rate
                self.x[q] += direction * t
                if rate[r] < 0:
                    self.x[leaving], self.state[leaving] = self.L[leaving], 1
                else:
                    self.x[leaving], self.state[leaving] = self.U[leaving], 2
                piv = alpha[r]
                row = self.Binv[r] / piv
                touched = np.flatnonzero(alpha)
                self.Binv[touched] -= np.outer(alpha[touched], row)
                self.Binv[r] = row
                self.basis[r] = q
                self.state[q] = 0
                self.pivots_since_refactor += 1
                if self.pivots_since_refactor >= REFACTOR_EVERY and not self.refactor():
                    return "numeric_failure"
            if t <= 1e-12:
                self.degenerate_run += 1
                if self.degenerate_run > degenerate_limit:
                    self.bland = True
            else:
                self.degenerate_run = 0

    def dual_bound(self, cost) -> float:
        """Lagrangian bound pi.b + max over the box of the reduced-cost term."""
        pi, d = self.reduced_costs(cost)
        total = float(pi @ self.b) if self.m else 0.0
        for j in np.flatnonzero(np.abs(d) > OPT_TOL):
            bound = self.U[j] if d[j] > 0 else self.L[j]
            if not math.isfinite(bound):
                return math.inf
            total += d[j] * bound
        return total


def _simplex_solve(model: MilpModel, lb, ub) -> LpSolution:
    A, senses, b = model.dense()
    c = np.asarray(model.obj, dtype=float)
    sx = _Simplex(A, senses, b, c, np.asarray(lb, float), np.asarray(ub, float))
    n, m = sx.n, sx.m
    max_iter = 50 * (m + n) + 1000

    phase1 = np.zeros(sx.N)
    phase1[n + m:] = -1.0
    if m:
        status = sx.run(phase1, max_iter)
        if status != "optimal":
            return LpSolution("numeric_failure", iterations=sx.iterations)
        if sx.x[n + m:].sum() > FEAS_TOL * max(1.0, np.abs(b).max(initial=0.0)):
            return LpSolution("infeasible", iterations=sx.iterations)
    sx.U[n + m:] = 0.0
    art_basic = sx.basis >= n + m
    sx.x[sx.basis[art_basic]] = 0.0
    sx.x[n + m:][sx.state[n + m:] != 0] = 0.0
    sx.state[n + m:][sx.state[n + m:] == 2] = 1
    sx.bland = False
    sx.degenerate_run = 0

    cost = np.zeros(sx.N)
    cost[:n] = c
    for attempt in range(2):
        status = sx.run(cost, max_iter)
        if status == "unbounded":
            return LpSolution("unbounded", iterations=sx.iterations)
        if status != "optimal" or not sx.refactor():
            return LpSolution("numeric_failure", iterations=sx.iterations)
        x = np.clip(sx.x[:n], sx.L[:n], sx.U[:n])
        primal = float(c @ x)
        dual = sx.dual_bound(cost)
        if abs(primal - dual) <= 1e-6 * max(1.0, abs(primal)):
            pi, _ = sx.reduced_costs(cost)
            return LpSolution("optimal", x, primal, [int(k) for k in sx.basis], pi, sx.iterations)
    return LpSolution("numeric_failure", iterations=sx.iterations)


def _highs_arrays(model: MilpModel):
    # rows are only ever appended, so (vars, rows) identifies the matrix
    key = (model.n_vars, model.n_constraints)
    cached = model._highs_cache
    if cached is not None and cached[0] == key:
        return cached[1]
    rows_ub, rhs_ub, rows_eq, rhs_eq = [], [], [], []
    for con in model.constraints:
        if con.sense == "<=":
            rows_ub.append(con.coefs), rhs_ub.append(con.rhs)
        elif con.sense == ">=":
            rows_ub.append({j: -v for j, v in con.coefs.items()}), rhs_ub.append(-con.rhs)
        else:
            rows_eq.append(con.coefs), rhs_eq.append(con.rhs)

    def sparse(rows):
        if not rows:
            return None
        data, ri, ci = [], [], []
        for i, row in enumerate(rows):
            for j, v in row.items():
                ri.append(i), ci.append(j), data.append(v)
        return csr_matrix((data, (ri, ci)), shape=(len(rows), model.n_vars))

    arrays = (sparse(rows_ub), rhs_ub or None, sparse(rows_eq), rhs_eq or None)
    model._highs_cache = (key, arrays)
    return arrays


def _highs_solve(model: MilpModel, lb, ub) -> LpSolution:
    from scipy.optimize import linprog

    A_ub, b_ub, A_eq, b_eq = _highs_arrays(model)
    res = linprog(
        -np.asarray(model.obj, dtype=float),
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=np.column_stack([lb, ub]),
        method="highs",
    )
    if res.status == 2:
        return LpSolution("infeasible")
    if res.status == 3:
        return LpSolution("unbounded")
    if res.status != 0:
        return LpSolution("numeric_failure")
    x = np.clip(res.x, lb, ub)
    return LpSolution("optimal", x, float(np.dot(model.obj, x)), None, None, int(getattr(res, "nit", 0)))


LP_BACKENDS = {"simplex": _simplex_solve, "highs": _highs_solve}


def lp_solve(model: MilpModel, lb: Sequence[float] | None = None, ub: Sequence[float] | None = None,
             backend: str = "simplex") -> LpSolution:
    """Solve the LP relaxation of ``model`` (optionally under tightened bounds).

    ``backend="simplex"`` is the built-in bounded-variable simplex; ``"highs"``
    delegates to scipy's HiGHS for models too large for the dense code.
    """
    lb = model.lb if lb is None else lb
    ub = model.ub if ub is None else ub
    return LP_BACKENDS[backend](model, lb, ub)


# ---------------------------------------------------------------------------
# branch and bound


LazyCallback = Callable[[np.ndarray], Sequence[Constraint]]


@dataclass
class Limits:
    time_limit: float | None = None
    node_limit: int | None = None
    lp_backend: str = "simplex"


@dataclass
class MilpResult:
    status: str  # optimal | infeasible | limit
    x: np.ndarray | None
    objective: float | None
    bound: float
    nodes: int = 0
    cuts_added: int = 0
    wall_time: float = 0.0
    bound_history: list[float] = field(default_factory=list)


def _gap(incumbent: float) -> float:
    if not math.isfinite(incumbent):
        return 0.0
    return max(GAP_TOL, GAP_TOL * abs(incumbent))


def _most_fractional(model: MilpModel, x) -> int | None:
    best, best_j = INT_TOL, None
    for j, is_bin in enumerate(model.binary):
        if is_bin:
            frac = abs(x[j] - round(x[j]))
            if frac > best + 1e-12:
                best, best_j = frac, j
    return best_j


def milp_solve(model: MilpModel, callback: LazyCallback | None = None, limits: Limits | None = None) -> MilpResult:
    """Best-bound branch and bound with lazy constraints.

    Rows returned by ``callback`` are appended to ``model`` itself and apply to
    every open node. Each returned row must cut off the candidate it was
    generated from.
    """
    limits = limits or Limits()
    start = time.perf_counter()
    counter = itertools.count()
    version = 0
    cuts_added = 0
    nodes = 0
    incumbent, inc_obj = None, -math.inf
    history: list[float] = []

    def solve(lb, ub):
        return lp_solve(model, lb, ub, backend=limits.lp_backend)

    def hit_limit() -> bool:
        if limits.node_limit is not None and nodes >= limits.node_limit:
            return True
        return limits.time_limit is not None and time.perf_counter() - start > limits.time_limit

    def finish(status, bound):
        return MilpResult(status, incumbent, None if incumbent is None else inc_obj, bound,
                          nodes, cuts_added, time.perf_counter() - start, history)

    root = solve(list(model.lb), list(model.ub))
    if root.status == "infeasible":
        return finish("infeasible", -math.inf)
    if root.status != "optimal":
        raise RuntimeError(f"root LP failed: {root.status}")
    # heap entries: (-bound, seq, lb, ub, lp, version)
    heap = [(-root.objective, next(counter), list(model.lb), list(model.ub), root, version)]

    def best_bound() -> float:
        return max(inc_obj, -heap[0][0]) if heap else inc_obj

    while heap:
        history.append(best_bound())
        if hit_limit():
            return finish("limit", best_bound())
        neg_bound, _, lb, ub, lp, ver = heapq.heappop(heap)
        bound = -neg_bound
        if bound <= inc_obj + _gap(inc_obj):
            heap.clear()
            break
        if ver != version:
            lp = solve(lb, ub)
            if lp.status == "optimal":
                heapq.heappush(heap, (-min(lp.objective, bound), next(counter), lb, ub, lp, version))
            continue
        nodes += 1
        x = lp.x
        j = _most_fractional(model, x)
        if j is None:
            cand = np.array(x, dtype=float)
            for k, is_bin in enumerate(model.binary):
                if is_bin:
                    cand[k] = round(cand[k])
            cuts = list(callback(cand)) if callback is not None else []
            if cuts:
                for cut in cuts:
                    if cut.violation(cand) <= FEAS_TOL:
                        raise RuntimeError(f"lazy row {cut.name} does not cut off the candidate")
                    model.add_constraint(cut.coefs, cut.sense, cut.rhs, cut.name)
                cuts_added += len(cuts)
                version += 1
                lp = solve(lb, ub)
                if lp.status == "optimal":
                    heapq.heappush(heap, (-min(lp.objective, bound), next(counter), lb, ub, lp, version))
                continue
            obj = model.objective_value(cand)
            if obj > inc_obj:
                incumbent, inc_obj = cand, obj
            continue
        for fix in (1.0, 0.0):
            clb, cub = list(lb), list(ub)
            clb[j] = cub[j] = fix
            child = solve(clb, cub)
            if child.status == "optimal":
                cb = min(child.objective, bound)
                if cb > inc_obj + _gap(inc_obj):
                    heapq.heappush(heap, (-cb, next(counter), clb, cub, child, version))
    history.append(inc_obj)
    if incumbent is None:
        return finish("infeasible", -math.inf)
    return finish("optimal", inc_obj)
