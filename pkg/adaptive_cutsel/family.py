"""
The parametric family P(a,d): three variables, four rows, and three
families of valid cuts whose scores under the simple rule decide whether a
pure cutting plane loop terminates after one round or never.

    minimize   x1 - (10 + d) x2 - a x3
    subject to       - 1/2 x2 + 3 x3   <= 0
                               - x3    <= 0
               - 1/2 x1 + 1/2 x2 - 7/2 x3 <= 0
                 1/2 x1         + 3/2 x3 <= 1/2
               x1 integer, x2 continuous, x3 binary

Cuts: GC = (-10, 10, 1 | 0), ISC^n = (-1, 0, 1 | 1 - eps_n),
OPC^n = (-1, 10, 0 | 61/2 - eps_n), widened to 61/2 - 31 eps_{n-1} right
after an ISC round.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .classes import Cut, FamilyParams, GoodCutInterval, MilpInstance, RelaxedModel, SimOutcome
from .milp import cut_is_valid_for, is_integer_feasible
from .scoring import simple_score
from .simplex import solve_lp

INTEGER_POINTS = (
    np.array([0.0, 0.0, 0.0]),
    np.array([1.0, 0.0, 0.0]),
    np.array([1.0, 1.0, 0.0]),
)
FRACTIONAL_VERTEX = np.array([-0.5, 3.0, 0.5])
CUT_TYPES = ("GC", "ISC", "OPC")

CHECK_TOL = 1e-7
SEPARATION_TOL = 1e-12
MAX_A_BRACKET = (0.0, 10.0)

_S20301 = np.sqrt(20301.0)
_S402 = np.sqrt(402.0)


def make_instance(p: FamilyParams) -> MilpInstance:
    return MilpInstance(
        name=f"P(a={p.a!r},d={p.d!r})",
        n=3,
        m=4,
        c=[1.0, -(10.0 + p.d), -p.a],
        A=[
            (0, 1, -0.5),
            (0, 2, 3.0),
            (1, 2, -1.0),
            (2, 0, -0.5),
            (2, 1, 0.5),
            (2, 2, -3.5),
            (3, 0, 0.5),
            (3, 2, 1.5),
        ],
        b=[0.0, 0.0, 0.0, 0.5],
        lower=[-np.inf, -np.inf, 0.0],
        upper=[np.inf, np.inf, 1.0],
        vtype=("integer", "continuous", "binary"),
        ctype=("linear",) * 4,
    )


def epsilon(n: int) -> float:
    """
    Depth schedule of the ISC and OPC families: strictly increasing, below
    0.1, with supremum 0.1.
    """
    if n < 1:
        raise ValueError(f"Schedule index {n} must be at least 1.")
    return 0.1 * (1.0 - 2.0 ** (-n))


def candidate_cuts(n: int, last_applied: Optional[str] = None) -> List[Cut]:
    """
    The three round-n candidates, GC first so that it wins score ties.

    :param n: round number, at least 1
    :type n: int
    :param last_applied: type of the cut applied in round n-1, if any
    :type last_applied: str

    :return: [GC, ISC^n, OPC^n] with OPC widened after an ISC round
    :rtype: list
    """
    eps = epsilon(n)
    if last_applied == "ISC":
        if n < 2:
            raise ValueError("An ISC round cannot precede round 1.")
        opc_rhs = 30.5 - 31.0 * epsilon(n - 1)
    elif last_applied in (None, "OPC", "GC"):
        opc_rhs = 30.5 - eps
    else:
        raise NotImplementedError(f"Unknown cut type {last_applied}.")
    return [
        Cut([-10.0, 10.0, 1.0], 0.0, label="GC"),
        Cut([-1.0, 0.0, 1.0], 1.0 - eps, label="ISC"),
        Cut([-1.0, 10.0, 0.0], opc_rhs, label="OPC"),
    ]


def objective_parallelisms(a: float, d: float) -> Tuple[float, float, float]:
    """
    obp of GC, ISC and OPC against the objective of P(a,d).
    """
    norm = np.sqrt(1.0 + a * a + (10.0 + d) ** 2)
    o_gc = (110.0 + a + 10.0 * d) / (np.sqrt(201.0) * norm)
    o_isc = (1.0 + a) / (np.sqrt(2.0) * norm)
    o_opc = (101.0 + 10.0 * d) / (np.sqrt(101.0) * norm)
    return float(o_gc), float(o_isc), float(o_opc)


def raw_bounds(a: float, d: float) -> Tuple[float, float]:
    """
    Bounds on lambda from comparing the simple scores directly: GC beats
    OPC for lambda >= lb and beats ISC for lambda <= ub.
    """
    o_gc, o_isc, o_opc = objective_parallelisms(a, d)
    x = o_gc - o_isc
    y = o_opc - o_gc
    ub = x / (x + 1.0 / 3.0)
    lb = y / (y + 1.0 / 6.0) if y > 0 else 0.0
    return lb, ub


def _lambda_lb_closed(a: float, d: float) -> float:
    s = _S20301
    l1 = s * np.sqrt(a * a + d * (d + 20.0) + 101.0)
    l2 = 101.0 * a * a + a * (-20.0 * (s - 101.0) * d - 202.0 * (s - 110.0))
    l3 = (
        20.0 * d * (-10.0 * (s - 151.0) * d - 211.0 * s + 31411.0)
        - 22220.0 * s
        + 3272501.0
    )
    l4 = -606.0 * a * a + 12.0 * a * (10.0 * (s - 101.0) * d + 101.0 * (s - 110.0))
    l5 = 120.0 * d * (10.0 * (s - 151.0) * d + 211.0 * s - 31411.0) + 606.0 * (
        220.0 * s - 32401.0
    )
    l6 = 5555.0 * a * a + 24.0 * a * (10.0 * (s - 101.0) * d + 101.0 * (s - 110.0))
    l7 = d * ((2400.0 * s - 355633.0) * d + 50640.0 * s - 7403300.0) + 505.0 * (
        528.0 * s - 76409.0
    )
    return float(2.0 * (l1 * np.sqrt(max(l2 + l3, 0.0)) + l4 + l5) / (l6 + l7))


def _lambda_ub_closed(a: float, d: float) -> float:
    r = _S402
    u1 = -(a * a + d * (d + 20.0) + 101.0)
    u2 = (
        (2.0 * r - 203.0) * a * a
        + a * (20.0 * (r - 2.0) * d + 222.0 * r - 842.0)
        + 20.0 * d * (-10.0 * d + r - 220.0)
        + 220.0 * r
        - 24401.0
    )
    u3 = (
        (6.0 * r - 609.0) * a * a
        + 6.0 * a * (10.0 * (r - 2.0) * d + 111.0 * r - 421.0)
        + 60.0 * d * (-10.0 * d + r - 220.0)
        + 660.0 * r
        - 73203.0
    )
    u4 = (
        (6.0 * r - 475.0) * a * a
        + 6.0 * a * (10.0 * (r - 2.0) * d + 111.0 * r - 421.0)
        + 2.0 * d * (-233.0 * d + 30.0 * r - 5260.0)
        + 660.0 * r
        - 59669.0
    )
    return float((r * np.sqrt(max(u1 * u2, 0.0)) + u3) / u4)


def _max_a_closed(d: float) -> float:
    s2, s101, s201 = np.sqrt(2.0), np.sqrt(101.0), np.sqrt(201.0)
    num = (
        -2680.0 * s101 * d
        + 2020.0 * s201 * d
        - 6767.0 * s2
        - 27068.0 * s101
        + 22220.0 * s201
    )
    return float(num / (6767.0 * s2 - 202.0 * s201))


def _check_d(d: float) -> None:
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"d = {d} must lie in [0, 1].")


def max_a_oracle(d: float) -> float:
    """
    Largest a for which GC can still score at least as high as both other
    cuts, found by root-finding on the raw bound difference.
    """
    _check_d(d)

    def gap(a: float) -> float:
        lb, ub = raw_bounds(a, d)
        return ub - lb

    return float(brentq(gap, *MAX_A_BRACKET, xtol=1e-15, rtol=1e-15, maxiter=500))


def max_a(d: float) -> float:
    """
    Closed form of the largest a in R_GC for the given d.

    :param d: objective shift in [0, 1]
    :type d: float

    :return: max_a(d), cross-checked against max_a_oracle within 1e-7
    :rtype: float
    """
    _check_d(d)
    value = _max_a_closed(d)
    oracle = max_a_oracle(d)
    if abs(value - oracle) > CHECK_TOL:
        raise RuntimeError(
            f"max_a closed form {value} disagrees with oracle {oracle} at d={d}."
        )
    return max(value, 0.0)


def region_bounds(a: float, d: float) -> Tuple[float, float]:
    """
    Closed forms of lambda_lb(a,d) and lambda_ub(a,d), the range of lambda
    for which GC scores at least as high as ISC and OPC.

    :param a: objective weight of x3, 0 <= a <= max_a(d)
    :type a: float
    :param d: objective shift in [0, 1]
    :type d: float

    :return: (lambda_lb, lambda_ub)
    :rtype: Tuple[float, float]
    """
    _check_d(d)
    if a < 0:
        raise ValueError(f"a = {a} must be nonnegative.")
    limit = max_a(d)
    if a > limit + 1e-9:
        raise ValueError(f"(a={a}, d={d}) is outside R_GC (max_a = {limit}).")
    lb = _lambda_lb_closed(a, d)
    ub = _lambda_ub_closed(a, d)
    raw_lb, raw_ub = raw_bounds(a, d)
    if abs(lb - raw_lb) > CHECK_TOL or abs(ub - raw_ub) > CHECK_TOL:
        raise RuntimeError(
            f"Closed form bounds ({lb}, {ub}) disagree with direct scores "
            + f"({raw_lb}, {raw_ub}) at a={a}, d={d}."
        )
    lb = min(max(lb, 0.0), 1.0)
    ub = min(max(ub, 0.0), 1.0)
    return lb, ub


def _lambda_at_max_a(d: float) -> float:
    return region_bounds(max_a(d), d)[1]


def achievable_range() -> Tuple[float, float]:
    """
    Values lambda_ub(max_a(d), d) takes at d = 0 and d = 1.
    """
    lo, hi = _lambda_at_max_a(0.0), _lambda_at_max_a(1.0)
    return min(lo, hi), max(lo, hi)


def good_cut_interval(d: float, eps_hat: float) -> GoodCutInterval:
    _check_d(d)
    limit = max_a(d)
    if not 0.0 < eps_hat <= limit:
        raise ValueError(f"eps_hat = {eps_hat} must lie in (0, {limit}].")
    a = limit - eps_hat
    lb, ub = region_bounds(a, d)
    if ub - lb <= 0:
        raise ValueError(f"Interval at a={a}, d={d} is empty in floating point.")
    return GoodCutInterval(lb, ub, a, d)


def find_d_for_lambda(lam_target: float, tol: float = 1e-9) -> float:
    """
    Finds d' in [0, 1] with lambda_ub(max_a(d'), d') = lam_target by
    bisection on a sign change. Any root is accepted.

    :param lam_target: target inside the achievable range
    :type lam_target: float

    :return: d'
    :rtype: float
    """
    f0 = _lambda_at_max_a(0.0) - lam_target
    f1 = _lambda_at_max_a(1.0) - lam_target
    if abs(f0) <= tol:
        return 0.0
    if abs(f1) <= tol:
        return 1.0
    if f0 * f1 > 0:
        lo, hi = achievable_range()
        raise ValueError(
            f"lambda = {lam_target} is outside the achievable range [{lo}, {hi}]."
        )
    d = float(
        brentq(
            lambda t: _lambda_at_max_a(t) - lam_target,
            0.0,
            1.0,
            xtol=1e-14,
            maxiter=200,
        )
    )
    residual = abs(_lambda_at_max_a(d) - lam_target)
    if residual > tol:
        raise RuntimeError(f"Root search for lambda = {lam_target} left residual {residual}.")
    return d


def _gaps(grid: Sequence[float]) -> List[Tuple[float, float]]:
    edges = [-np.inf] + list(grid) + [np.inf]
    return [(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]


def construct_adversarial(
    grid: Sequence[float], max_halvings: int = 60
) -> Tuple[FamilyParams, GoodCutInterval]:
    """
    Builds P(a,d) whose good lambda interval avoids every grid value.

    The widest gap of the grid meeting the achievable range is targeted at
    the midpoint of that intersection. d' is found for the midpoint, then
    a = max_a(d') - eps_hat with eps_hat halved from max_a(d')/2 until the
    interval fits strictly inside the gap.

    :param grid: finite discretisation of lambda in [0, 1]
    :type grid: Sequence[float]
    :param max_halvings: limit on eps_hat halvings. Default value = 60
    :type max_halvings: int

    :return: the instance parameters and its good interval
    :rtype: Tuple[FamilyParams, GoodCutInterval]
    """
    values = sorted(set(float(v) for v in grid))
    if any(v < 0.0 or v > 1.0 for v in values):
        raise ValueError("Grid values must lie in [0, 1].")
    r_lo, r_hi = achievable_range()

    best: Optional[Tuple[float, float, float, float]] = None
    for g_lo, g_hi in _gaps(values):
        lo, hi = max(g_lo, r_lo), min(g_hi, r_hi)
        if hi - lo > 0 and (best is None or hi - lo > best[1] - best[0]):
            best = (lo, hi, g_lo, g_hi)
    if best is None:
        raise ValueError("discretisation covers achievable range")
    lo, hi, g_lo, g_hi = best
    target = 0.5 * (lo + hi)
    d_prime = find_d_for_lambda(target)
    logging.info(f"Targeting lambda = {target} in gap ({g_lo}, {g_hi}), d' = {d_prime}")

    eps_hat = max_a(d_prime) / 2.0
    for _ in range(max_halvings):
        interval = good_cut_interval(d_prime, eps_hat)
        if g_lo < interval.lb and interval.ub < g_hi:
            return FamilyParams(interval.a, d_prime), interval
        eps_hat /= 2.0
    raise RuntimeError(
        f"No eps_hat fitting gap ({g_lo}, {g_hi}) after {max_halvings} halvings."
    )


def construct_unsolvable(d: float, eps_tilde: float) -> FamilyParams:
    """
    P(a,d) just outside R_GC: no lambda makes GC the top scored cut.
    """
    if not 0.0 < eps_tilde <= 0.1:
        raise ValueError(f"eps_tilde = {eps_tilde} must lie in (0, 0.1].")
    return FamilyParams(max_a(d) + eps_tilde, d)


def lemma_vertex_sets(n: int) -> Tuple[List[np.ndarray], List[np.ndarray], List[np.ndarray]]:
    """
    Vertex sets of the relaxation after adding GC, ISC^n and OPC^n.

    :return: (GC_X, ISC_X^n, OPC_X^n), integer points first
    :rtype: tuple
    """
    eps = epsilon(n)
    base = [p.copy() for p in INTEGER_POINTS]
    gc = base + [np.array([61.0 / 91.0, 60.0 / 91.0, 10.0 / 91.0])]
    isc = base + [
        np.array([-0.5 + 3.0 * eps / 4.0, 3.0 - 3.0 * eps / 2.0, 0.5 - eps / 4.0]),
        np.array([-0.5 + 3.0 * eps / 4.0, 3.0 - eps, 0.5 - eps / 4.0]),
        np.array([-0.5 + eps / 2.0, 3.0 - 3.0 * eps, 0.5 - eps / 2.0]),
    ]
    opc = base + [
        np.array([-0.5 + eps / 21.0, 3.0 - 2.0 * eps / 21.0, 0.5 - eps / 63.0]),
        np.array([-0.5 + 3.0 * eps / 43.0, 3.0 - 4.0 * eps / 43.0, 0.5 - eps / 43.0]),
        np.array([-0.5 + eps / 61.0, 3.0 - 6.0 * eps / 61.0, 0.5 - eps / 61.0]),
    ]
    return gc, isc, opc


def apply_cut(model: RelaxedModel, cut: Cut) -> RelaxedModel:
    """
    Appends cut, replacing an applied cut with the same coefficients since
    the tighter of two such rows makes the other redundant.
    """
    kept = []
    for old in model.cuts:
        if np.array_equal(old.coeffs, cut.coeffs):
            if old.rhs <= cut.rhs:
                return model
            continue
        kept.append(old)
    return RelaxedModel(model.instance, tuple(kept) + (cut,))


def simulate_pure_cutting(p: FamilyParams, lam: float, max_rounds: int = 1000) -> SimOutcome:
    """
    Pure cutting plane loop on P(a,d) with one cut per round, picked by the
    simple rule among GC, ISC and OPC.

    Once the picked cut no longer separates the LP point in floating point
    the loop has reached a fixed point and stops: rounds_run counts the
    rounds that applied a cut and stalled_round is the round that found
    none.

    :param p: family parameters
    :type p: FamilyParams
    :param lam: simple rule weight in [0, 1]
    :type lam: float
    :param max_rounds: round limit, at least 1. Default value = 1000
    :type max_rounds: int

    :return: the trajectory
    :rtype: SimOutcome
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1.")
    inst = make_instance(p)
    model = RelaxedModel(inst)
    sol = solve_lp(model)
    if not sol.optimal:
        raise RuntimeError(f"LP of {inst.name} is {sol.status}.")

    types: List[str] = []
    objectives: List[float] = []
    last: Optional[str] = None
    for rnd in range(1, max_rounds + 1):
        cuts = candidate_cuts(rnd, last)
        scores = [simple_score(lam, cut, inst.c, inst.vtype) for cut in cuts]
        cut = cuts[int(np.argmax(scores))]
        if not cut_is_valid_for(cut, INTEGER_POINTS, tol=1e-9):
            raise RuntimeError(f"{cut.label} of round {rnd} cuts off an integer point.")
        if cut.violation(sol.x) <= SEPARATION_TOL:
            logging.debug(f"{cut.label} stopped separating at round {rnd}")
            return SimOutcome(
                "NotSolved",
                rnd - 1,
                tuple(types),
                tuple(objectives),
                sol.x,
                stalled_round=rnd,
            )

        model = apply_cut(model, cut)
        sol = solve_lp(model)
        if not sol.optimal:
            raise RuntimeError(f"LP after round {rnd} is {sol.status}.")
        types.append(cut.label)
        objectives.append(sol.objective)
        last = cut.label
        if is_integer_feasible(inst, sol.x, tol=1e-6):
            if cut.label != "GC":
                raise RuntimeError(f"Integer point reached by {cut.label} at round {rnd}.")
            logging.debug(f"Solved by GC at round {rnd}")
            return SimOutcome(
                "SolvedByGC", rnd, tuple(types), tuple(objectives), sol.x, solved_round=rnd
            )
    return SimOutcome("NotSolved", max_rounds, tuple(types), tuple(objectives), sol.x)
