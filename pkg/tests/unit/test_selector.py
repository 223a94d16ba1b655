import unittest

import numpy as np

from adaptive_cutsel.classes import Cut, ScoringWeights, SelectionContext
from adaptive_cutsel.scoring import parallelism, score_cut
from adaptive_cutsel.selector import select_cuts

VTYPE = ("integer", "integer", "continuous", "binary")


def naive_select(cuts, forced, max_cuts, w, ctx, vtype, threshold):
    scores = [score_cut(w, cut, ctx, vtype) for cut in cuts]
    pool = [
        i
        for i in range(len(cuts))
        if all(parallelism(cuts[i], f) < threshold - 1e-12 for f in forced)
    ]
    picked = []
    while pool and len(picked) < max_cuts:
        best = max(pool, key=lambda i: (scores[i], -i))
        picked.append(best)
        pool = [
            i
            for i in pool
            if i != best and parallelism(cuts[i], cuts[best]) < threshold - 1e-12
        ]
    return picked


def random_cut(rng):
    coeffs = np.round(rng.uniform(-3, 3, size=4))
    if not np.any(coeffs):
        coeffs[0] = 1.0
    return Cut(coeffs, float(rng.uniform(-1, 1)))


class CheckSelector(unittest.TestCase):
    def setUp(self):
        self.ctx = SelectionContext(np.array([1.0, -2.0, 0.5, 1.0]), np.array([0.5, 1.5, 0.2, 0.3]))
        self.w = ScoringWeights.scip_rule((0.1, 0.4, 0.2, 0.3))

    def test_against_naive_greedy(self):
        rng = np.random.default_rng(3)
        for _ in range(500):
            cuts = [random_cut(rng) for _ in range(int(rng.integers(0, 21)))]
            forced = [random_cut(rng) for _ in range(int(rng.integers(0, 3)))]
            max_cuts = int(rng.integers(0, 8))
            threshold = float(rng.choice([0.5, 0.9, 1.0]))
            res = select_cuts(cuts, forced, max_cuts, self.w, self.ctx, VTYPE, threshold)
            expected = naive_select(cuts, forced, max_cuts, self.w, self.ctx, VTYPE, threshold)
            self.assertEqual(list(res.picked), expected)
            self.assertEqual(res.n_selected, len(expected))
            self.assertEqual(len(res.selected), len(forced) + len(expected))

    def test_edge_cases(self):
        cut = Cut([1.0, 0.0, 0.0, 0.0], 0.0)
        other = Cut([0.0, 1.0, 0.0, 0.0], 0.0)

        # Test case 1: empty pool keeps only forced cuts
        res = select_cuts([], [cut], 5, self.w, self.ctx, VTYPE)
        self.assertEqual(res.selected, (cut,))
        self.assertEqual(res.n_selected, 0)

        # Test case 2: max_cuts = 0
        res = select_cuts([cut, other], [], 0, self.w, self.ctx, VTYPE)
        self.assertEqual(res.n_selected, 0)

        # Test case 3: identical cuts, only one survives
        res = select_cuts([cut, cut, cut], [], 3, self.w, self.ctx, VTYPE)
        self.assertEqual(res.picked, (0,))

        # Test case 4: a pool cut parallel to a forced cut is dropped
        res = select_cuts([cut, other], [cut], 5, self.w, self.ctx, VTYPE)
        self.assertEqual(res.picked, (1,))

        # Test case 5: bad threshold
        with self.assertRaises(ValueError):
            select_cuts([cut], [], 1, self.w, self.ctx, VTYPE, parallel_threshold=0.0)

    def test_picks_are_pairwise_below_threshold(self):
        rng = np.random.default_rng(5)
        cuts = [random_cut(rng) for _ in range(20)]
        res = select_cuts(cuts, [], 10, self.w, self.ctx, VTYPE, 0.8)
        for k, i in enumerate(res.picked):
            for j in res.picked[k + 1:]:
                self.assertLess(parallelism(cuts[i], cuts[j]), 0.8)

    def test_fill_filtered(self):
        cut = Cut([1.0, 0.0, 0.0, 0.0], 0.0)
        twin = Cut([2.0, 0.0, 0.0, 0.0], 0.0)
        # Test case 1: without refill the twin is dropped
        res = select_cuts([cut, twin], [], 2, self.w, self.ctx, VTYPE)
        self.assertEqual(res.n_selected, 1)

        # Test case 2: with refill it takes the free slot
        res = select_cuts([cut, twin], [], 2, self.w, self.ctx, VTYPE, fill_filtered=True)
        self.assertEqual(res.n_selected, 2)
        self.assertEqual(sorted(res.picked), [0, 1])
