from dataclasses import InitVar, asdict, dataclass, field
from typing import Any, Optional, Tuple

import numpy as np
from scipy import sparse

VTYPES = ("binary", "integer", "continuous", "implicit-integer")
CTYPES = ("linear", "logicor", "knapsack", "setppc", "varbound")
INTEGER_VTYPES = ("binary", "integer", "implicit-integer")


@dataclass(frozen=True, eq=False)
class MilpInstance:
    """
    A minimisation MILP with all rows in "<=" form.

    :param name: instance name, used as the id in reports
    :type name: str
    :param n: number of variables
    :type n: int
    :param m: number of constraints
    :type m: int
    :param c: objective coefficients, length n
    :type c: numpy.ndarray
    :param A: constraint nonzeros as (row, col, coeff) triplets
    :type A: tuple
    :param b: right hand sides, length m
    :type b: numpy.ndarray
    :param lower: lower bounds, -inf when unbounded
    :type lower: numpy.ndarray
    :param upper: upper bounds, +inf when unbounded
    :type upper: numpy.ndarray
    :param vtype: one of VTYPES per variable
    :type vtype: tuple
    :param ctype: one of CTYPES per constraint
    :type ctype: tuple

    """

    name: str
    n: int
    m: int
    c: np.ndarray = field(repr=False)
    A: Tuple[Tuple[int, int, float], ...] = field(repr=False)
    b: np.ndarray = field(repr=False)
    lower: np.ndarray = field(repr=False)
    upper: np.ndarray = field(repr=False)
    vtype: Tuple[str, ...] = field(repr=False)
    ctype: Tuple[str, ...] = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
        object.__setattr__(
            self, "A", tuple((int(i), int(j), float(v)) for i, j, v in self.A)
        )
        object.__setattr__(self, "vtype", tuple(self.vtype))
        object.__setattr__(self, "ctype", tuple(self.ctype))

        if self.n < 1:
            raise ValueError(f"Instance {self.name} has no variables.")
        for arr, size, label in [
            (self.c, self.n, "c"),
            (self.lower, self.n, "lower"),
            (self.upper, self.n, "upper"),
            (self.b, self.m, "b"),
        ]:
            if arr.shape != (size,):
                raise ValueError(f"Field {label} must have length {size}.")
        if len(self.vtype) != self.n or len(self.ctype) != self.m:
            raise ValueError("vtype/ctype lengths do not match n/m.")
        for t in self.vtype:
            if t not in VTYPES:
                raise NotImplementedError(f"Variable type {t} is not supported.")
        for t in self.ctype:
            if t not in CTYPES:
                raise NotImplementedError(f"Constraint type {t} is not supported.")

        seen = set()
        for i, j, _ in self.A:
            if not (0 <= i < self.m and 0 <= j < self.n):
                raise ValueError(f"Triplet ({i}, {j}) is out of range.")
            if (i, j) in seen:
                raise ValueError(f"Duplicate triplet ({i}, {j}).")
            seen.add((i, j))

        both = np.isfinite(self.lower) & np.isfinite(self.upper)
        if np.any(self.lower[both] > self.upper[both]):
            raise ValueError("Some variable has lower > upper.")
        for k, t in enumerate(self.vtype):
            if t == "binary" and (self.lower[k] < 0 or self.upper[k] > 1):
                raise ValueError(f"Binary variable {k} has bounds outside [0, 1].")

    @property
    def integer_mask(self) -> np.ndarray:
        return np.array([t in INTEGER_VTYPES for t in self.vtype], dtype=bool)

    def sparse_A(self) -> sparse.coo_matrix:
        if len(self.A) == 0:
            return sparse.coo_matrix((self.m, self.n))
        rows, cols, vals = zip(*self.A)
        return sparse.coo_matrix((vals, (rows, cols)), shape=(self.m, self.n))

    def dense_A(self) -> np.ndarray:
        return self.sparse_A().toarray()


@dataclass(frozen=True, eq=False)
class Cut:
    """
    The inequality coeffs . x <= rhs. ``label`` tags cuts of the P(a,d)
    family ("GC", "ISC", "OPC") or their origin ("gomory").
    Pass validate=False to build the zero row in tests.
    """

    coeffs: np.ndarray
    rhs: float
    label: str = ""
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool) -> None:
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        object.__setattr__(self, "rhs", float(self.rhs))
        if validate and not np.any(self.coeffs != 0):
            raise ValueError("A cut needs at least one nonzero coefficient.")

    def activity(self, x: np.ndarray) -> float:
        return float(np.dot(self.coeffs, x))

    def violation(self, x: np.ndarray) -> float:
        return self.activity(x) - self.rhs


@dataclass(frozen=True, eq=False)
class RelaxedModel:
    """
    LP relaxation of ``instance`` with ``cuts`` appended as extra rows, in
    application order.
    """

    instance: MilpInstance
    cuts: Tuple[Cut, ...] = ()

    def with_cuts(self, cuts: Any) -> "RelaxedModel":
        return RelaxedModel(self.instance, self.cuts + tuple(cuts))

    @property
    def n(self) -> int:
        return self.instance.n

    def rows(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Stacked constraint matrix and right hand side, cuts last.

        :return: (A, b) as dense arrays
        :rtype: Tuple[numpy.ndarray, numpy.ndarray]
        """
        A = self.instance.dense_A()
        b = self.instance.b.copy()
        if self.cuts:
            A = np.vstack([A] + [cut.coeffs.reshape(1, -1) for cut in self.cuts])
            b = np.concatenate([b, [cut.rhs for cut in self.cuts]])
        return A, b


@dataclass(frozen=True, eq=False)
class LpSolution:
    """
    Result of one simplex solve.

    ``tableau`` is B^-1 [A | I] over structural and slack columns and
    ``at_upper`` flags nonbasic columns sitting at their upper bound. Both
    are None unless the status is "optimal".
    """

    status: str
    x: np.ndarray
    objective: float
    basis: Tuple[int, ...] = ()
    tableau: Optional[np.ndarray] = field(default=None, repr=False)
    x_full: Optional[np.ndarray] = field(default=None, repr=False)
    at_upper: Optional[np.ndarray] = field(default=None, repr=False)
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


@dataclass(frozen=True)
class ScoringWeights:
    """
    Either the scalar weight of the simple rule or the four weights
    (dcd, eff, isp, obp) of the full rule. Raw weights (policy actions)
    skip the simplex constraint.
    """

    simple: Optional[float] = None
    scip: Optional[Tuple[float, float, float, float]] = None
    normalized: bool = True

    def __post_init__(self) -> None:
        if (self.simple is None) == (self.scip is None):
            raise ValueError("Exactly one of simple / scip weights must be given.")
        if self.simple is not None and not 0.0 <= self.simple <= 1.0:
            raise ValueError(f"Simple weight {self.simple} is outside [0, 1].")
        if self.scip is not None:
            object.__setattr__(self, "scip", tuple(float(w) for w in self.scip))
            if len(self.scip) != 4:  # type: ignore
                raise ValueError("The full rule needs exactly four weights.")
            if self.normalized:
                if min(self.scip) < 0 or abs(sum(self.scip) - 1.0) > 1e-9:  # type: ignore
                    raise ValueError(
                        f"Normalized weights {self.scip} must be nonnegative and sum to 1."
                    )

    @classmethod
    def simple_rule(cls, lam: float) -> "ScoringWeights":
        return cls(simple=float(lam))

    @classmethod
    def scip_rule(cls, weights: Any, normalized: bool = True) -> "ScoringWeights":
        return cls(scip=tuple(float(w) for w in weights), normalized=normalized)  # type: ignore

    def as_array(self) -> np.ndarray:
        if self.scip is None:
            raise ValueError("Simple-rule weights have no four-vector form.")
        return np.array(self.scip, dtype=float)


@dataclass(frozen=True, eq=False)
class SelectionContext:
    c: np.ndarray
    xlp: np.ndarray
    incumbent: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        object.__setattr__(self, "xlp", np.asarray(self.xlp, dtype=float))
        if self.incumbent is not None:
            inc = np.asarray(self.incumbent, dtype=float)
            object.__setattr__(self, "incumbent", inc)
            if inc.shape != self.xlp.shape:
                raise ValueError("Incumbent and LP point differ in length.")
            if np.max(np.abs(inc - self.xlp)) <= 1e-12:
                raise ValueError("Incumbent coincides with the LP point.")


@dataclass(frozen=True, eq=False)
class SelectionResult:
    """
    ``selected`` holds forced cuts first, then greedy picks in pick order.
    ``picked`` are the pool indices of the greedy picks.
    """

    selected: Tuple[Cut, ...]
    n_selected: int
    picked: Tuple[int, ...] = ()


@dataclass(frozen=True)
class FamilyParams:
    a: float
    d: float

    def __post_init__(self) -> None:
        if self.a < 0:
            raise ValueError(f"a = {self.a} must be nonnegative.")
        if not 0.0 <= self.d <= 1.0:
            raise ValueError(f"d = {self.d} must lie in [0, 1].")


@dataclass(frozen=True)
class GoodCutInterval:
    lb: float
    ub: float
    a: float
    d: float

    @property
    def width(self) -> float:
        return self.ub - self.lb

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lb + self.ub)

    def contains(self, lam: float) -> bool:
        return self.lb < lam < self.ub


@dataclass(frozen=True, eq=False)
class SimOutcome:
    """
    Trajectory of the pure cutting plane simulation on P(a,d).

    :param status: "SolvedByGC" or "NotSolved"
    :param solved_round: round in which GC produced the integer point
    :param rounds_run: rounds that applied a cut
    :param stalled_round: round at which the chosen cut no longer separated
                the LP point in floating point; the loop stops there
    """

    status: str
    rounds_run: int
    chosen_types: Tuple[str, ...]
    lp_objectives: Tuple[float, ...]
    final_x: np.ndarray = field(repr=False)
    solved_round: Optional[int] = None
    stalled_round: Optional[int] = None

    @property
    def solved(self) -> bool:
        return self.status == "SolvedByGC"


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    """
    Variable features V (n x 7), constraint features C (m x 7) and one edge
    per nonzero of A stored as parallel arrays.
    """

    V: np.ndarray
    C: np.ndarray
    edge_cons: np.ndarray
    edge_var: np.ndarray
    edge_val: np.ndarray

    @property
    def n_edges(self) -> int:
        return int(self.edge_val.shape[0])


@dataclass(frozen=True, eq=False)
class GaussianAction:
    mu: np.ndarray
    gamma: float
    sample: np.ndarray
    logprob: float


@dataclass(frozen=True)
class RolloutConfig:
    """
    Separation loop settings. Defaults follow the 50 rounds of 10 cuts
    setup; baseline weights are equal weights.
    """

    n_rounds: int = 50
    cuts_per_round: int = 10
    parallel_threshold: float = 0.9
    baseline_weights: ScoringWeights = field(
        default_factory=lambda: ScoringWeights.scip_rule((0.25, 0.25, 0.25, 0.25))
    )
    incumbent: Optional[Tuple[float, ...]] = None
    fill_filtered: bool = False
    clamp_actions: bool = False

    def __post_init__(self) -> None:
        if self.n_rounds < 1 or self.cuts_per_round < 1:
            raise ValueError("n_rounds and cuts_per_round must be at least 1.")
        if not 0.0 < self.parallel_threshold <= 1.0:
            raise ValueError("parallel_threshold must lie in (0, 1].")


@dataclass(frozen=True)
class TrajectorySample:
    instance_id: str
    action: Tuple[float, ...]
    reward: float
    logprob: float


@dataclass
class RunManifest:
    """
    Everything needed to rerun a command. Written before any other output.
    """

    command: str
    parameters: dict
    seeds: dict
    version: str
    outputs: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)
