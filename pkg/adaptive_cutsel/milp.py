import itertools
import logging
from typing import Any, Iterable, List, Optional, Tuple

import numpy as np

from .classes import Cut, MilpInstance, RelaxedModel

FEAS_TOL = 1e-6


def _as_point(inst: MilpInstance, p: Any) -> np.ndarray:
    x = np.asarray(p, dtype=float)
    if x.shape != (inst.n,):
        raise ValueError(
            f"Point has shape {x.shape}, instance {inst.name} has {inst.n} variables."
        )
    return x


def objective_value(inst: MilpInstance, p: Any) -> float:
    """
    Evaluates c^T p, summed in index order.

    :param inst: the instance
    :type inst: MilpInstance
    :param p: a point of length n
    :type p: numpy.ndarray

    :return: the objective value
    :rtype: float
    """
    x = _as_point(inst, p)
    total = 0.0
    for ci, xi in zip(inst.c, x):
        total += float(ci) * float(xi)
    return total


def row_activities(inst: MilpInstance, p: Any) -> np.ndarray:
    x = _as_point(inst, p)
    return np.asarray(inst.sparse_A().tocsr() @ x).ravel()


def is_integer_feasible(inst: MilpInstance, p: Any, tol: float = FEAS_TOL) -> bool:
    """
    Checks rows, bounds and integrality of p within tol.

    :param inst: the instance
    :type inst: MilpInstance
    :param p: a point of length n
    :type p: numpy.ndarray
    :param tol: absolute tolerance, must be positive. Default value = 1e-6
    :type tol: float

    :return: True if p is feasible for the MILP
    :rtype: bool
    """
    if tol <= 0:
        raise ValueError("Tolerance must be positive.")
    x = _as_point(inst, p)
    if inst.m > 0 and np.any(row_activities(inst, x) > inst.b + tol):
        return False
    if np.any(x < inst.lower - tol) or np.any(x > inst.upper + tol):
        return False
    mask = inst.integer_mask
    return bool(np.all(np.abs(x[mask] - np.round(x[mask])) <= tol))


def cut_is_valid_for(cut: Cut, points: Iterable[Any], tol: float = FEAS_TOL) -> bool:
    """
    A cut is valid for a point set when no point violates it by more than tol.
    """
    for p in points:
        x = np.asarray(p, dtype=float)
        if x.shape != cut.coeffs.shape:
            raise ValueError("Point and cut differ in length.")
        if cut.activity(x) > cut.rhs + tol:
            return False
    return True


def integer_boxes(inst: MilpInstance, max_points: int = 200000) -> List[np.ndarray]:
    """
    Lists the integer values each integer variable can take. All integer
    variables must have finite bounds.

    :return: one array of candidate values per integer variable, in index order
    :rtype: list
    """
    boxes = []
    count = 1
    for j in np.flatnonzero(inst.integer_mask):
        lo, hi = inst.lower[j], inst.upper[j]
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise ValueError(
                f"Integer variable {j} of {inst.name} is unbounded, cannot enumerate."
            )
        values = np.arange(np.ceil(lo - FEAS_TOL), np.floor(hi + FEAS_TOL) + 1)
        boxes.append(values)
        count *= max(len(values), 1)
    if count > max_points:
        raise ValueError(
            f"Integer box of {inst.name} has {count} points, more than {max_points}."
        )
    return boxes


def enumerate_integer_points(
    inst: MilpInstance, max_points: int = 200000
) -> List[np.ndarray]:
    """
    Brute-force integer-feasible points of a pure integer instance.
    Continuous variables are not allowed here.
    """
    if not np.all(inst.integer_mask):
        raise ValueError("Integer enumeration needs every variable to be integer.")
    feasible = []
    for values in itertools.product(*integer_boxes(inst, max_points)):
        x = np.array(values, dtype=float)
        if is_integer_feasible(inst, x):
            feasible.append(x)
    return feasible


def reference_optimum(
    inst: MilpInstance, max_points: int = 200000
) -> Tuple[Optional[float], Optional[np.ndarray]]:
    """
    Optimum of a desk-scale MILP by enumerating the integer variables and
    solving one LP over the continuous ones per assignment.

    :return: (objective, point), or (None, None) if infeasible
    :rtype: tuple
    """
    from .simplex import solve_lp

    mask = inst.integer_mask
    int_idx = np.flatnonzero(mask)
    best_val: Optional[float] = None
    best_x: Optional[np.ndarray] = None
    for values in itertools.product(*integer_boxes(inst, max_points)):
        fixed = np.array(values, dtype=float)
        if np.all(mask):
            x = fixed
            if not is_integer_feasible(inst, x):
                continue
            val = objective_value(inst, x)
        else:
            lower = inst.lower.copy()
            upper = inst.upper.copy()
            lower[int_idx] = fixed
            upper[int_idx] = fixed
            sub = MilpInstance(
                inst.name,
                inst.n,
                inst.m,
                inst.c,
                inst.A,
                inst.b,
                lower,
                upper,
                tuple("continuous" for _ in inst.vtype),
                inst.ctype,
            )
            sol = solve_lp(RelaxedModel(sub))
            if not sol.optimal:
                continue
            x, val = sol.x, sol.objective
        if best_val is None or val < best_val - 1e-12:
            best_val, best_x = val, x
    logging.debug(f"Reference optimum of {inst.name}: {best_val}")
    return best_val, best_x
