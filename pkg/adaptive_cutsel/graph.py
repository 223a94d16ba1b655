import logging
from typing import Any

import numpy as np
from sklearn.metrics.pairwise import cosine_similarity
from sklearn.preprocessing import normalize

from .classes import CTYPES, VTYPES, BipartiteGraph, MilpInstance

N_FEATURES = 7
INFINITE_BOUND = 2.0


def _one_hot(values: Any, categories: tuple) -> np.ndarray:
    out = np.zeros((len(values), len(categories)))
    for k, v in enumerate(values):
        out[k, categories.index(v)] = 1.0
    return out


def _bound_features(bounds: np.ndarray, scale: float, sign: float) -> np.ndarray:
    finite = np.isfinite(bounds)
    out = np.full(bounds.shape, sign * INFINITE_BOUND)
    out[finite] = np.clip(bounds[finite] / scale, -1.0, 1.0)
    return out


def encode(inst: MilpInstance) -> BipartiteGraph:
    """
    Builds the constraint-variable bipartite graph of an instance.

    Variable rows of V: objective coefficient over max|c|, lower and upper
    bound features, one-hot variable type. Bounds are divided by
    max(1, largest finite |bound|); infinite bounds become -2 / +2.
    Constraint rows of C: |cos(a_i, c)|, b_i / max(|b_i|, ||a_i||_inf),
    one-hot constraint type. Edge values are a_ij / ||a_i||_inf.

    :param inst: the instance
    :type inst: MilpInstance

    :return: the graph, one edge per nonzero of A in triplet order
    :rtype: BipartiteGraph

    """
    cmax = float(np.max(np.abs(inst.c)))
    if cmax == 0.0:
        logging.warning(f"Instance {inst.name} has a zero objective.")
        obj = np.zeros(inst.n)
    else:
        obj = inst.c / cmax

    finite = np.concatenate(
        [inst.lower[np.isfinite(inst.lower)], inst.upper[np.isfinite(inst.upper)]]
    )
    scale = max(1.0, float(np.max(np.abs(finite)))) if finite.size else 1.0
    V = np.column_stack(
        [
            obj,
            _bound_features(inst.lower, scale, -1.0),
            _bound_features(inst.upper, scale, 1.0),
            _one_hot(inst.vtype, VTYPES),
        ]
    )

    A = inst.dense_A()
    row_inf = np.abs(A).max(axis=1) if inst.m > 0 else np.zeros(0)
    if inst.m > 0 and cmax > 0.0:
        cos = np.abs(cosine_similarity(A, inst.c.reshape(1, -1))[:, 0])
    else:
        cos = np.zeros(inst.m)
    denom = np.maximum(np.abs(inst.b), row_inf)
    rhs = np.divide(inst.b, denom, out=np.zeros(inst.m), where=denom > 0)
    C = np.column_stack([np.clip(cos, 0.0, 1.0), rhs, _one_hot(inst.ctype, CTYPES)])
    C = C.reshape(inst.m, N_FEATURES)

    if inst.A:
        rows, cols, _ = (np.array(t) for t in zip(*inst.A))
        edge_cons = rows.astype(np.int64)
        edge_var = cols.astype(np.int64)
        edge_val = normalize(A, norm="max", axis=1)[edge_cons, edge_var]
    else:
        edge_cons = np.zeros(0, dtype=np.int64)
        edge_var = np.zeros(0, dtype=np.int64)
        edge_val = np.zeros(0)
    return BipartiteGraph(V, C, edge_cons, edge_var, edge_val)


def to_json(g: BipartiteGraph) -> dict:
    return {
        "V": g.V.tolist(),
        "C": g.C.tolist(),
        "E": [
            [int(i), int(j), float(v)]
            for i, j, v in zip(g.edge_cons, g.edge_var, g.edge_val)
        ],
    }
