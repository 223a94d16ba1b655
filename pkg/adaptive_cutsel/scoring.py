import logging
from typing import Any, Sequence, Tuple

import numpy as np

from .classes import INTEGER_VTYPES, Cut, ScoringWeights, SelectionContext

NORM_GUARD = 1e-12


def _norm(v: np.ndarray, what: str) -> float:
    nrm = float(np.linalg.norm(v))
    if nrm < NORM_GUARD:
        raise ValueError(f"{what} has zero norm.")
    return nrm


def _unit_row(cut: Cut) -> Tuple[np.ndarray, float]:
    """
    Coefficients and rhs divided by the coefficient norm.
    """
    nrm = _norm(cut.coeffs, "Cut")
    return cut.coeffs / nrm, cut.rhs / nrm


def integer_mask(vtype: Sequence[Any]) -> np.ndarray:
    """
    Accepts either variable type names or an already computed boolean mask.
    """
    arr = np.asarray(vtype)
    if arr.dtype == bool:
        return arr
    return np.array([t in INTEGER_VTYPES for t in vtype], dtype=bool)


def isp(cut: Cut, vtype: Sequence[Any]) -> float:
    """
    Integer support: share of the cut's nonzeros sitting on integer variables.

    :param cut: the cut
    :type cut: Cut
    :param vtype: variable types, or a boolean integer mask
    :type vtype: Sequence

    :return: value in [0, 1]
    :rtype: float
    """
    nz = cut.coeffs != 0
    total = int(np.count_nonzero(nz))
    if total == 0:
        raise ValueError("Integer support of an all-zero cut is undefined.")
    return int(np.count_nonzero(nz & integer_mask(vtype))) / total


def obp(cut: Cut, c: np.ndarray) -> float:
    """
    Objective parallelism: absolute cosine between the cut and the objective.
    """
    c = np.asarray(c, dtype=float)
    unit, _ = _unit_row(cut)
    return min(abs(float(np.dot(unit, c))) / _norm(c, "Objective"), 1.0)


def efficacy(cut: Cut, xlp: np.ndarray) -> float:
    """
    Signed Euclidean distance from xlp to the cut hyperplane, positive when
    the cut separates xlp.
    """
    unit, rhs = _unit_row(cut)
    return float(np.dot(unit, np.asarray(xlp, dtype=float))) - rhs


def dcd(cut: Cut, xlp: np.ndarray, xhat: np.ndarray) -> float:
    """
    Directed cutoff distance: violation at xlp over |cut . y| where y is the
    unit direction from xlp towards the incumbent xhat.

    :param cut: the cut
    :type cut: Cut
    :param xlp: LP point
    :type xlp: numpy.ndarray
    :param xhat: incumbent, different from xlp
    :type xhat: numpy.ndarray

    :return: the distance, negative for non-separating cuts
    :rtype: float
    """
    xlp = np.asarray(xlp, dtype=float)
    direction = np.asarray(xhat, dtype=float) - xlp
    y = direction / _norm(direction, "Incumbent direction")
    unit, rhs = _unit_row(cut)
    denom = abs(float(np.dot(unit, y)))
    if denom < NORM_GUARD:
        raise ValueError("cut parallel to incumbent direction")
    return (float(np.dot(unit, xlp)) - rhs) / denom


def simple_score(lam: float, cut: Cut, c: np.ndarray, vtype: Sequence[Any]) -> float:
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"Simple rule weight {lam} is outside [0, 1].")
    return lam * isp(cut, vtype) + (1.0 - lam) * obp(cut, c)


def scip_score(
    w: ScoringWeights, cut: Cut, ctx: SelectionContext, vtype: Sequence[Any]
) -> float:
    """
    Weighted sum dcd, eff, isp, obp. Without an incumbent, or when the cut
    is parallel to the incumbent direction, efficacy stands in for dcd.

    :param w: four weights (dcd, eff, isp, obp), raw or normalized
    :type w: ScoringWeights
    :param cut: the cut
    :type cut: Cut
    :param ctx: objective, LP point and optional incumbent
    :type ctx: SelectionContext
    :param vtype: variable types, or a boolean integer mask
    :type vtype: Sequence

    :return: the score
    :rtype: float
    """
    l1, l2, l3, l4 = w.as_array()
    eff = efficacy(cut, ctx.xlp)
    cutoff = eff
    if ctx.incumbent is not None:
        try:
            cutoff = dcd(cut, ctx.xlp, ctx.incumbent)
        except ValueError:
            logging.debug("Cut parallel to incumbent direction, using efficacy.")
    return l1 * cutoff + l2 * eff + l3 * isp(cut, vtype) + l4 * obp(cut, ctx.c)


def score_cut(
    w: ScoringWeights, cut: Cut, ctx: SelectionContext, vtype: Sequence[Any]
) -> float:
    if w.simple is not None:
        return simple_score(w.simple, cut, ctx.c, vtype)
    return scip_score(w, cut, ctx, vtype)


def parallelism(cut1: Cut, cut2: Cut) -> float:
    denom = _norm(cut1.coeffs, "Cut") * _norm(cut2.coeffs, "Cut")
    return min(abs(float(np.dot(cut1.coeffs, cut2.coeffs))) / denom, 1.0)
