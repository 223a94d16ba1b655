import itertools
import logging
from typing import List, Tuple

import numpy as np

from .classes import Cut, LpSolution, RelaxedModel
from .milp import objective_value

PIVOT_TOL = 1e-9
COST_TOL = 1e-9
FRAC_TOL = 1e-6
MAX_VERTEX_DIM = 12


def _solve(B: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    if B.shape[0] == 0:
        return np.zeros(0)
    return np.linalg.solve(B, rhs)


class BoundedSimplex:
    """
    Primal simplex over [A | I] with slack columns bounded in [0, inf) and
    structural columns bounded by the instance bounds. Nonbasic columns rest
    on a finite bound, or at zero when free. Entering and leaving choices
    follow Bland's rule; a bound flip is taken when it is no longer than the
    shortest ratio step.

    Phase 1 appends one artificial column per row whose slack would start
    negative. In phase 2 the artificials are fixed to zero.

    :param model: the relaxation to solve
    :type model: RelaxedModel
    :param max_iter: pivot limit per phase. Default value = 20000
    :type max_iter: int

    """

    def __init__(self, model: RelaxedModel, max_iter: int = 20000) -> None:
        self.model = model
        self.max_iter = max_iter
        inst = model.instance
        A, b = model.rows()
        self.A = A
        self.b = b
        self.n = inst.n
        self.m = A.shape[0]

        self.M = np.hstack([A, np.eye(self.m)])
        self.lo = np.concatenate([inst.lower, np.zeros(self.m)])
        self.hi = np.concatenate([inst.upper, np.full(self.m, np.inf)])
        self.cost = np.concatenate([inst.c, np.zeros(self.m)])
        self.iterations = 0

    def _start(self) -> Tuple[np.ndarray, List[int]]:
        n, m = self.n, self.m
        x = np.zeros(n + m)
        for j in range(n):
            if np.isfinite(self.lo[j]):
                x[j] = self.lo[j]
            elif np.isfinite(self.hi[j]):
                x[j] = self.hi[j]
        residual = self.b - self.A @ x[:n]
        basis = list(range(n, n + m))

        # Rows starting infeasible get an artificial column with coefficient -1
        need = [i for i in range(m) if residual[i] < -PIVOT_TOL]
        if need:
            art = np.zeros((m, len(need)))
            for k, i in enumerate(need):
                art[i, k] = -1.0
                basis[i] = n + m + k
            self.M = np.hstack([self.M, art])
            self.lo = np.concatenate([self.lo, np.zeros(len(need))])
            self.hi = np.concatenate([self.hi, np.full(len(need), np.inf)])
            self.cost = np.concatenate([self.cost, np.zeros(len(need))])
            x = np.concatenate([x, np.zeros(len(need))])
        self.n_art = len(need)
        x = self._basic_values(x, basis)
        return x, basis

    def _basic_values(self, x: np.ndarray, basis: List[int]) -> np.ndarray:
        nonbasic = np.ones(self.M.shape[1], dtype=bool)
        nonbasic[basis] = False
        rhs = self.b - self.M[:, nonbasic] @ x[nonbasic]
        x = x.copy()
        x[basis] = _solve(self.M[:, basis], rhs)
        return x

    def _iterate(
        self, cost: np.ndarray, x: np.ndarray, basis: List[int]
    ) -> Tuple[str, np.ndarray, List[int]]:
        ncol = self.M.shape[1]
        for _ in range(self.max_iter):
            self.iterations += 1
            B = self.M[:, basis]
            y = _solve(B.T, cost[basis])
            reduced = cost - self.M.T @ y

            is_basic = np.zeros(ncol, dtype=bool)
            is_basic[basis] = True
            entering, direction = -1, 0
            for j in range(ncol):
                if is_basic[j] or self.lo[j] == self.hi[j]:
                    continue
                if reduced[j] < -COST_TOL and x[j] < self.hi[j] - PIVOT_TOL:
                    entering, direction = j, 1
                    break
                if reduced[j] > COST_TOL and x[j] > self.lo[j] + PIVOT_TOL:
                    entering, direction = j, -1
                    break
            if entering < 0:
                return "optimal", x, basis

            w = _solve(B, self.M[:, entering])
            delta = -direction * w
            step = self.hi[entering] - self.lo[entering]
            leave_row = -1
            for i, var in enumerate(basis):
                if delta[i] < -PIVOT_TOL and np.isfinite(self.lo[var]):
                    t = (x[var] - self.lo[var]) / -delta[i]
                elif delta[i] > PIVOT_TOL and np.isfinite(self.hi[var]):
                    t = (self.hi[var] - x[var]) / delta[i]
                else:
                    continue
                t = max(t, 0.0)
                if t < step - PIVOT_TOL or (
                    leave_row >= 0 and abs(t - step) <= PIVOT_TOL and var < basis[leave_row]
                ):
                    step, leave_row = t, i
            if not np.isfinite(step):
                return "unbounded", x, basis

            x = x.copy()
            x[entering] += direction * step
            if leave_row < 0:
                logging.debug(f"Bound flip of column {entering}")
            else:
                leaving = basis[leave_row]
                x[leaving] = self.lo[leaving] if delta[leave_row] < 0 else self.hi[leaving]
                basis = basis.copy()
                basis[leave_row] = entering
                logging.debug(f"Pivot: column {entering} enters, {leaving} leaves")
            x = self._basic_values(x, basis)
        raise RuntimeError(f"Simplex exceeded {self.max_iter} iterations.")

    def solve(self) -> LpSolution:
        n, m = self.n, self.m
        x, basis = self._start()
        if self.n_art:
            phase1 = np.zeros(self.M.shape[1])
            phase1[n + m:] = 1.0
            status, x, basis = self._iterate(phase1, x, basis)
            infeas = float(np.sum(x[n + m:]))
            if infeas > 1e-7:
                return LpSolution("infeasible", x[:n], np.nan, iterations=self.iterations)
            self.hi[n + m:] = 0.0
            x[n + m:] = 0.0
            x = self._basic_values(x, basis)

        status, x, basis = self._iterate(self.cost, x, basis)
        if status != "optimal":
            return LpSolution(status, x[:n], -np.inf, iterations=self.iterations)

        tableau = _solve(self.M[:, basis], self.M[:, : n + m]) if m else np.zeros((0, n))
        is_basic = np.zeros(n + m, dtype=bool)
        is_basic[[j for j in basis if j < n + m]] = True
        at_upper = (
            ~is_basic
            & np.isfinite(self.hi[: n + m])
            & (self.lo[: n + m] != self.hi[: n + m])
            & (np.abs(x[: n + m] - self.hi[: n + m]) <= PIVOT_TOL)
        )
        point = x[:n].copy()
        return LpSolution(
            "optimal",
            point,
            objective_value(self.model.instance, point),
            basis=tuple(basis),
            tableau=tableau,
            x_full=x[: n + m].copy(),
            at_upper=at_upper,
            iterations=self.iterations,
        )


def solve_lp(model: RelaxedModel, max_iter: int = 20000) -> LpSolution:
    """
    Solves the LP relaxation with the bounded simplex.

    :param model: relaxation, cuts included
    :type model: RelaxedModel

    :return: the solution; infeasible and unbounded are encoded in status
    :rtype: LpSolution
    """
    return BoundedSimplex(model, max_iter=max_iter).solve()


def _halfspaces(model: RelaxedModel) -> Tuple[np.ndarray, np.ndarray]:
    A, b = model.rows()
    inst = model.instance
    G, h = [A], [b]
    for j in range(inst.n):
        e = np.zeros((1, inst.n))
        e[0, j] = 1.0
        if np.isfinite(inst.lower[j]):
            G.append(-e)
            h.append(np.array([-inst.lower[j]]))
        if np.isfinite(inst.upper[j]):
            G.append(e)
            h.append(np.array([inst.upper[j]]))
    return np.vstack(G), np.concatenate(h)


def vertex_enumerate(model: RelaxedModel, tol: float = 1e-8) -> List[np.ndarray]:
    """
    Every vertex of the relaxation polytope, by solving each choice of n
    active constraints and keeping the feasible, distinct solutions.
    """
    n = model.n
    if n > MAX_VERTEX_DIM:
        raise ValueError(
            f"Vertex enumeration supports n <= {MAX_VERTEX_DIM}, model has {n}."
        )
    G, h = _halfspaces(model)
    if G.shape[0] < n:
        return []
    combos = np.array(list(itertools.combinations(range(G.shape[0]), n)))
    systems = G[combos]
    dets = np.linalg.det(systems)
    keep = np.abs(dets) > 1e-12
    if not np.any(keep):
        return []
    points = np.linalg.solve(systems[keep], h[combos][keep][..., None])[..., 0]

    slack = points @ G.T - h
    feasible = np.all(slack <= 1e-9 * (1.0 + np.abs(h)), axis=1)
    vertices: List[np.ndarray] = []
    for p in points[feasible]:
        if not any(np.max(np.abs(p - v)) <= tol for v in vertices):
            vertices.append(p)
    vertices.sort(key=tuple)
    return vertices


def _integer_slacks(model: RelaxedModel) -> np.ndarray:
    A, b = model.rows()
    mask = model.instance.integer_mask
    flags = np.zeros(A.shape[0], dtype=bool)
    for i in range(A.shape[0]):
        row = A[i]
        nz = row != 0
        if np.any(nz & ~mask):
            continue
        if np.allclose(row[nz], np.round(row[nz]), atol=1e-9) and abs(
            b[i] - round(b[i])
        ) <= 1e-9:
            flags[i] = True
    return flags


def _frac(v: float) -> float:
    f = v - np.floor(v)
    return 0.0 if f < 1e-9 or f > 1 - 1e-9 else f


def gomory_cuts(model: RelaxedModel, sol: LpSolution) -> List[Cut]:
    """
    Gomory mixed-integer cuts from the optimal tableau, one per basic integer
    variable with fractional value. Nonbasic columns at their upper bound are
    complemented; rows touching a free nonbasic column are skipped. For pure
    integer rows the cut coincides with the fractional Gomory cut.

    :param model: the relaxation sol was computed on
    :type model: RelaxedModel
    :param sol: an optimal solution carrying its tableau
    :type sol: LpSolution

    :return: cuts in "<=" form over the structural variables
    :rtype: list
    """
    if not sol.optimal or sol.tableau is None:
        raise ValueError("Gomory cuts need an optimal solution with its tableau.")
    inst = model.instance
    n = inst.n
    A, b = model.rows()
    m = A.shape[0]
    lo = np.concatenate([inst.lower, np.zeros(m)])
    hi = np.concatenate([inst.upper, np.full(m, np.inf)])
    int_col = np.concatenate([inst.integer_mask, _integer_slacks(model)])
    x = sol.x_full
    at_upper = sol.at_upper
    basic = set(sol.basis)

    cuts = []
    for row, var in enumerate(sol.basis):
        if var >= n or not inst.integer_mask[var]:
            continue
        f0 = _frac(float(x[var]))
        if f0 <= FRAC_TOL or f0 >= 1 - FRAC_TOL:
            continue

        coeffs = np.zeros(n)
        const = 0.0
        usable = True
        for j in range(n + m):
            if j in basic:
                continue
            a = float(sol.tableau[row, j])
            if abs(a) <= 1e-12:
                continue
            upper = bool(at_upper[j])
            bound = hi[j] if upper else lo[j]
            if not np.isfinite(bound):
                usable = False
                break
            a_hat = -a if upper else a
            if int_col[j] and abs(bound - round(bound)) <= 1e-9:
                fj = _frac(a_hat)
                g = fj / f0 if fj <= f0 else (1 - fj) / (1 - f0)
            else:
                g = a_hat / f0 if a_hat >= 0 else -a_hat / (1 - f0)
            if g == 0.0:
                continue
            sign = -1.0 if upper else 1.0
            if j < n:
                coeffs[j] += sign * g
                const -= sign * g * bound
            else:
                coeffs -= g * A[j - n]
                const += g * b[j - n]
        if not usable:
            logging.debug(f"Row of variable {var} touches a free nonbasic column.")
            continue
        coeffs[np.abs(coeffs) <= 1e-12] = 0.0
        if not np.any(coeffs != 0):
            continue
        cuts.append(Cut(-coeffs, const - 1.0, label="gomory"))
    logging.debug(f"Generated {len(cuts)} Gomory cuts")
    return cuts
