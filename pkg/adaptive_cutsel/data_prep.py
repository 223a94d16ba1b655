import dataclasses
import logging
import os
from typing import Any, Callable, Dict, List, Sequence

import numpy as np
import pandas as pd

from .classes import FamilyParams, MilpInstance
from .family import make_instance, max_a

MAX_CORPUS_SIZE = 30
INSTANCE_KINDS = ("packing", "covering", "lotsizing", "family")


def logging_basic_config(
    verbose: int = 1, content_only: bool = False, filename: str = ""
) -> Any:
    """
    Basic logging configuration for error exceptions

    :param verbose: input verbose. Default value = 1
    :type verbose: int
    :param content_only: If set to True it will output only the needed content. Default value = False
    :type content_only: bool
    :param filename: input filename. Default value = ''
    :type filename: str

    """
    logging_level = {
        0: logging.WARNING,
        1: logging.INFO,
        2: logging.DEBUG,
        3: logging.ERROR,
        4: logging.CRITICAL,
    }
    if verbose not in logging_level:
        raise ValueError(f"Verbosity {verbose} is not one of {sorted(logging_level)}.")
    fmt = (
        " %(message)s" if content_only else "%(levelname)s (%(funcName)s): %(message)s"
    )
    if filename != "" and filename is not None:
        dirname, _ = os.path.split(filename)
        if dirname != "":
            os.makedirs(dirname, exist_ok=True)
        logging.basicConfig(
            level=logging_level[verbose], format=fmt, force=True, filename=filename
        )
    else:
        logging.basicConfig(level=logging_level[verbose], format=fmt, force=True)
    return logging.getLogger()


def check_instance(inst: MilpInstance, max_size: int = MAX_CORPUS_SIZE) -> str:
    """
    Checks that an instance can be used for training and grid search: the
    brute force reference optimum needs few, bounded integer variables.

    :param inst: the instance
    :type inst: MilpInstance
    :param max_size: limit on both n and m. Default value = 30
    :type max_size: int

    :return: an error message, or "" when the instance is usable
    :rtype: str

    """
    if inst.n > max_size or inst.m > max_size:
        err = f"Instance {inst.name} exceeds {max_size} variables or constraints."
        logging.error(err)
        return err
    mask = inst.integer_mask
    if np.any(~np.isfinite(inst.lower[mask])) or np.any(~np.isfinite(inst.upper[mask])):
        err = f"Instance {inst.name} has unbounded integer variables."
        logging.error(err)
        return err
    if len(inst.A) == 0:
        logging.warning(f"Instance {inst.name} has no constraint nonzeros.")
    return ""


def _triplets(M: np.ndarray) -> List[tuple]:
    rows, cols = np.nonzero(M)
    return [(int(i), int(j), float(M[i, j])) for i, j in zip(rows, cols)]


def generate_packing(rng: np.random.Generator, name: str = "packing") -> MilpInstance:
    """
    Bounded integer packing: maximise v.x under m knapsack rows, written as
    minimisation of -v.x.
    """
    n = int(rng.integers(4, 7))
    m = int(rng.integers(2, 4))
    W = rng.integers(1, 10, size=(m, n)).astype(float)
    W[rng.random((m, n)) < 0.2] = 0.0
    for i in range(m):
        if not np.any(W[i]):
            W[i, rng.integers(n)] = 1.0
    cap = np.floor(W.sum(axis=1) * 1.5) + 1.0
    values = rng.integers(1, 11, size=n).astype(float)
    return MilpInstance(
        name=name,
        n=n,
        m=m,
        c=-values,
        A=_triplets(W),
        b=cap,
        lower=np.zeros(n),
        upper=np.full(n, 3.0),
        vtype=("integer",) * n,
        ctype=("knapsack",) * m,
    )


def generate_covering(rng: np.random.Generator, name: str = "covering") -> MilpInstance:
    """
    Binary set covering: every row asks for at least one chosen column,
    stored as -sum x_j <= -1.
    """
    n = int(rng.integers(5, 9))
    m = int(rng.integers(3, 7))
    S = (rng.random((m, n)) < 0.4).astype(float)
    for i in range(m):
        if S[i].sum() < 2:
            S[i, rng.choice(n, size=2, replace=False)] = 1.0
    cost = rng.integers(1, 11, size=n).astype(float)
    return MilpInstance(
        name=name,
        n=n,
        m=m,
        c=cost,
        A=_triplets(-S),
        b=-np.ones(m),
        lower=np.zeros(n),
        upper=np.ones(n),
        vtype=("binary",) * n,
        ctype=("setppc",) * m,
    )


def generate_lotsizing(rng: np.random.Generator, name: str = "lotsizing") -> MilpInstance:
    """
    Uncapacitated lot sizing over T periods. Variables per period: production
    p_t, stock s_t (continuous) and setup y_t (binary). Flow balance
    s_{t-1} + p_t - s_t = d_t is split into two rows; p_t <= M y_t links
    production to setups.
    """
    T = int(rng.integers(3, 5))
    demand = rng.integers(1, 8, size=T).astype(float)
    big_m = float(demand.sum())
    setup = rng.integers(5, 21, size=T).astype(float)
    hold = rng.integers(1, 4, size=T).astype(float)
    n, m = 3 * T, 3 * T
    P, S, Y = 0, T, 2 * T
    A = np.zeros((m, n))
    b = np.zeros(m)
    for t in range(T):
        # balance as two inequalities
        A[2 * t, P + t] = 1.0
        A[2 * t, S + t] = -1.0
        if t > 0:
            A[2 * t, S + t - 1] = 1.0
        b[2 * t] = demand[t]
        A[2 * t + 1] = -A[2 * t]
        b[2 * t + 1] = -demand[t]
        A[2 * T + t, P + t] = 1.0
        A[2 * T + t, Y + t] = -big_m
    upper = np.concatenate([np.full(T, big_m), np.full(T, big_m), np.ones(T)])
    return MilpInstance(
        name=name,
        n=n,
        m=m,
        c=np.concatenate([np.ones(T), hold, setup]),
        A=_triplets(A),
        b=b,
        lower=np.zeros(n),
        upper=upper,
        vtype=("continuous",) * (2 * T) + ("binary",) * T,
        ctype=("linear",) * (2 * T) + ("varbound",) * T,
    )


def generate_family(rng: np.random.Generator, name: str = "family") -> MilpInstance:
    """
    A random member of P(a,d) inside the region where the good cut interval
    is nonempty. x1 gets the box [-1, 1], which leaves the relaxation unchanged.
    """
    d = float(rng.uniform(0.0, 1.0))
    a = float(rng.uniform(0.0, max_a(d)))
    inst = make_instance(FamilyParams(a, d))
    return dataclasses.replace(
        inst, name=name, lower=[-1.0, -np.inf, 0.0], upper=[1.0, np.inf, 1.0]
    )


GENERATORS: Dict[str, Callable[..., MilpInstance]] = {
    "packing": generate_packing,
    "covering": generate_covering,
    "lotsizing": generate_lotsizing,
    "family": generate_family,
}


def generate_corpus(kind: str, count: int, seed: int = 0) -> List[MilpInstance]:
    """
    Generates count instances of one kind, reproducibly from seed.

    :param kind: one of INSTANCE_KINDS
    :type kind: str
    :param count: number of instances
    :type count: int
    :param seed: seed of the numpy generator. Default value = 0
    :type seed: int

    :return: the instances, named <kind>_<k>
    :rtype: list

    """
    if kind not in GENERATORS:
        raise NotImplementedError(f"Instance kind {kind} is not supported.")
    if count < 1:
        raise ValueError("count must be at least 1.")
    rng = np.random.default_rng(seed)
    return [GENERATORS[kind](rng, name=f"{kind}_{k:03d}") for k in range(count)]


def instance_statistics(instances: Sequence[MilpInstance]) -> pd.DataFrame:
    """
    Per-instance size table plus summary rows (min, max, mean, median).

    :param instances: the corpus
    :type instances: Sequence[MilpInstance]

    :return: columns instance, variables, constraints, nonzeros, density
    :rtype: pandas.DataFrame

    """
    rows = []
    for inst in instances:
        nnz = len(inst.A)
        rows.append(
            {
                "instance": inst.name,
                "variables": inst.n,
                "constraints": inst.m,
                "nonzeros": nnz,
                "density": nnz / (inst.n * inst.m) if inst.m > 0 else 0.0,
            }
        )
    df = pd.DataFrame(rows, columns=["instance", "variables", "constraints", "nonzeros", "density"])
    if df.empty:
        return df
    numeric = df.drop(columns="instance")
    summary = numeric.agg(["min", "max", "mean", "median"]).reset_index()
    summary = summary.rename(columns={"index": "instance"})
    return pd.concat([df, summary], ignore_index=True)
