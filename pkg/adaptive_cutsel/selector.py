import logging
from typing import Any, List, Sequence

import numpy as np

from .classes import Cut, ScoringWeights, SelectionContext, SelectionResult
from .scoring import parallelism, score_cut

PARALLEL_SLACK = 1e-12


def _too_parallel(cut: Cut, other: Cut, threshold: float) -> bool:
    return parallelism(cut, other) >= threshold - PARALLEL_SLACK


def select_cuts(
    cuts: Sequence[Cut],
    forced: Sequence[Cut],
    max_cuts: int,
    w: ScoringWeights,
    ctx: SelectionContext,
    vtype: Sequence[Any],
    parallel_threshold: float = 0.9,
    fill_filtered: bool = False,
) -> SelectionResult:
    """
    Greedy cut selection with parallelism filtering.

    Pool cuts too parallel to a forced cut are dropped first. Then the best
    scoring cut is taken and every remaining cut too parallel to it is
    dropped, until the pool is empty or max_cuts cuts were picked. Scores are
    computed once against ctx; exact ties go to the lowest pool index.

    :param cuts: candidate pool
    :type cuts: Sequence[Cut]
    :param forced: cuts that are always added
    :type forced: Sequence[Cut]
    :param max_cuts: limit on greedy picks
    :type max_cuts: int
    :param w: scoring weights, simple or full rule
    :type w: ScoringWeights
    :param ctx: objective, LP point and optional incumbent
    :type ctx: SelectionContext
    :param vtype: variable types, or a boolean integer mask
    :type vtype: Sequence
    :param parallel_threshold: cuts with parallelism at or above this are
                filtered. Default value = 0.9
    :type parallel_threshold: float
    :param fill_filtered: after the greedy loop, add the best filtered cuts
                until max_cuts picks are reached. Default value = False
    :type fill_filtered: bool

    :return: forced cuts followed by the picks
    :rtype: SelectionResult

    """
    if not 0.0 < parallel_threshold <= 1.0:
        raise ValueError("parallel_threshold must lie in (0, 1].")
    if max_cuts < 0:
        raise ValueError("max_cuts must be nonnegative.")

    pool: List[int] = []
    filtered: List[int] = []
    for i, cut in enumerate(cuts):
        if any(_too_parallel(cut, f, parallel_threshold) for f in forced):
            filtered.append(i)
        else:
            pool.append(i)

    scores = np.array([score_cut(w, cut, ctx, vtype) for cut in cuts])
    picked: List[int] = []
    while pool and len(picked) < max_cuts:
        best = pool[int(np.argmax(scores[pool]))]
        picked.append(best)
        remaining = []
        for i in pool:
            if i == best:
                continue
            if _too_parallel(cuts[i], cuts[best], parallel_threshold):
                filtered.append(i)
            else:
                remaining.append(i)
        pool = remaining

    if fill_filtered and len(picked) < max_cuts and filtered:
        order = sorted(filtered, key=lambda i: (-scores[i], i))
        extra = order[: max_cuts - len(picked)]
        logging.debug(f"Refilling {len(extra)} cuts filtered for parallelism")
        picked.extend(extra)

    selected = tuple(forced) + tuple(cuts[i] for i in picked)
    return SelectionResult(selected, len(picked), tuple(picked))
