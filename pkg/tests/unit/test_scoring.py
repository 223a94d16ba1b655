import unittest

import numpy as np

from adaptive_cutsel.classes import Cut, ScoringWeights, SelectionContext
from adaptive_cutsel.family import objective_parallelisms
from adaptive_cutsel.scoring import (
    dcd,
    efficacy,
    integer_mask,
    isp,
    obp,
    parallelism,
    scip_score,
    score_cut,
    simple_score,
)

VTYPE = ("integer", "continuous", "binary")


class CheckScoring(unittest.TestCase):
    def test_isp(self):
        # Test case 1: two of three nonzeros on integer variables
        self.assertAlmostEqual(isp(Cut([1.0, 1.0, 1.0], 0.0), VTYPE), 2.0 / 3.0)

        # Test case 2: only the continuous variable
        self.assertEqual(isp(Cut([0.0, 4.0, 0.0], 0.0), VTYPE), 0.0)

        # Test case 3: boolean mask accepted
        self.assertEqual(isp(Cut([1.0, 0.0, 1.0], 0.0), [True, False, True]), 1.0)

        # Test case 4: all-zero cut
        with self.assertRaises(ValueError):
            isp(Cut([0.0, 0.0, 0.0], 0.0, validate=False), VTYPE)

    def test_integer_mask(self):
        self.assertEqual(integer_mask(VTYPE).tolist(), [True, False, True])
        self.assertEqual(integer_mask(("implicit-integer",)).tolist(), [True])

    def test_obp(self):
        # Test case 1: parallel and antiparallel
        self.assertAlmostEqual(obp(Cut([2.0, 0.0], 0.0), np.array([-1.0, 0.0])), 1.0)

        # Test case 2: orthogonal
        self.assertEqual(obp(Cut([0.0, 1.0], 0.0), np.array([1.0, 0.0])), 0.0)

        # Test case 3: family cuts match the closed form values
        a, d = 1.0, 0.5
        c = np.array([1.0, -(10.0 + d), -a])
        expected = objective_parallelisms(a, d)
        for coeffs, value in zip(
            ([-10.0, 10.0, 1.0], [-1.0, 0.0, 1.0], [-1.0, 10.0, 0.0]), expected
        ):
            self.assertAlmostEqual(obp(Cut(coeffs, 0.0), c), value, places=12)

        # Test case 4: zero objective
        with self.assertRaises(ValueError):
            obp(Cut([1.0, 0.0], 0.0), np.zeros(2))

    def test_efficacy(self):
        cut = Cut([3.0, 4.0], 5.0)
        # Test case 1: separating
        self.assertAlmostEqual(efficacy(cut, np.array([3.0, 4.0])), 4.0)

        # Test case 2: not separating gives a negative value
        self.assertAlmostEqual(efficacy(cut, np.zeros(2)), -1.0)

    def test_dcd(self):
        cut = Cut([1.0, 0.0], 1.0)
        xlp = np.array([2.0, 0.0])
        # Test case 1: incumbent straight behind the cut equals efficacy
        self.assertAlmostEqual(dcd(cut, xlp, np.array([0.0, 0.0])), efficacy(cut, xlp))

        # Test case 2: oblique direction gives a longer distance
        value = dcd(cut, xlp, np.array([0.0, 2.0]))
        self.assertAlmostEqual(value, np.sqrt(2.0))

        # Test case 3: direction parallel to the cut hyperplane
        with self.assertRaises(ValueError):
            dcd(cut, xlp, np.array([2.0, 1.0]))

    def test_measures_ignore_cut_scaling(self):
        rng = np.random.default_rng(11)
        checked = 0
        for _ in range(100):
            n = int(rng.integers(2, 7))
            coeffs = rng.integers(-5, 6, size=n).astype(float)
            if not np.any(coeffs):
                coeffs[0] = 1.0
            coeffs[rng.random(n) < 0.3] = 0.0
            if not np.any(coeffs):
                coeffs[-1] = -2.0
            rhs = float(rng.uniform(-5.0, 5.0))
            vtype = rng.random(n) < 0.5
            c = rng.uniform(-5.0, 5.0, size=n)
            xlp = rng.uniform(-5.0, 5.0, size=n)
            xhat = rng.uniform(-5.0, 5.0, size=n)
            cut = Cut(coeffs, rhs)
            direction = xhat - xlp
            cosine = abs(np.dot(coeffs, direction)) / (
                np.linalg.norm(coeffs) * np.linalg.norm(direction)
            )
            for scale in 10.0 ** rng.uniform(-3.0, 3.0, size=5):
                scaled = Cut(scale * coeffs, scale * rhs)
                # Test case 1: the four measures match up to rounding
                self.assertEqual(isp(scaled, vtype), isp(cut, vtype))
                self.assertLessEqual(abs(obp(scaled, c) - obp(cut, c)), 1e-12)
                self.assertLessEqual(abs(efficacy(scaled, xlp) - efficacy(cut, xlp)), 1e-12)
                # Test case 2: dcd matches up to relative rounding
                if cosine < 1e-2:
                    continue
                base = dcd(cut, xlp, xhat)
                value = dcd(scaled, xlp, xhat)
                self.assertLessEqual(abs(value - base), 1e-12 * max(1.0, abs(base)))
                checked += 1
        self.assertGreater(checked, 400)

    def test_simple_score(self):
        cut = Cut([-10.0, 10.0, 1.0], 0.0)
        c = np.array([1.0, -10.5, -1.0])
        o_gc = objective_parallelisms(1.0, 0.5)[0]
        # Test case 1: lambda = 0 is pure objective parallelism
        self.assertAlmostEqual(simple_score(0.0, cut, c, VTYPE), o_gc)

        # Test case 2: lambda = 1 is pure integer support
        self.assertAlmostEqual(simple_score(1.0, cut, c, VTYPE), 2.0 / 3.0)

        # Test case 3: out of range
        with self.assertRaises(ValueError):
            simple_score(1.5, cut, c, VTYPE)

    def test_scip_score(self):
        cut = Cut([1.0, 0.0, 0.0], 1.0)
        c = np.array([-1.0, 0.0, 0.0])
        xlp = np.array([2.0, 0.0, 0.0])

        # Test case 1: no incumbent, efficacy stands in for dcd
        ctx = SelectionContext(c, xlp)
        w = ScoringWeights.scip_rule((0.25, 0.25, 0.25, 0.25))
        expected = 0.25 * 1.0 + 0.25 * 1.0 + 0.25 * 1.0 + 0.25 * 1.0
        self.assertAlmostEqual(scip_score(w, cut, ctx, VTYPE), expected)

        # Test case 2: incumbent, only the dcd weight
        ctx = SelectionContext(c, xlp, np.array([0.0, 2.0, 0.0]))
        w = ScoringWeights.scip_rule((1.0, 0.0, 0.0, 0.0))
        self.assertAlmostEqual(scip_score(w, cut, ctx, VTYPE), np.sqrt(2.0))

        # Test case 3: raw weights may be negative
        w = ScoringWeights.scip_rule((0.0, -2.0, 0.0, 0.0), normalized=False)
        self.assertAlmostEqual(score_cut(w, cut, ctx, VTYPE), -2.0)

        # Test case 4: dispatch of the simple rule
        w = ScoringWeights.simple_rule(1.0)
        self.assertAlmostEqual(score_cut(w, cut, ctx, VTYPE), 1.0)

    def test_parallelism(self):
        # Test case 1: identical direction
        self.assertAlmostEqual(parallelism(Cut([1.0, 1.0], 0.0), Cut([2.0, 2.0], 5.0)), 1.0)

        # Test case 2: orthogonal
        self.assertEqual(parallelism(Cut([1.0, 0.0], 0.0), Cut([0.0, 1.0], 0.0)), 0.0)

        # Test case 3: symmetric
        c1, c2 = Cut([1.0, 2.0], 0.0), Cut([3.0, -1.0], 0.0)
        self.assertEqual(parallelism(c1, c2), parallelism(c2, c1))

    def test_weights_validation(self):
        with self.assertRaises(ValueError):
            ScoringWeights.scip_rule((0.5, 0.5, 0.5, 0.5))
        with self.assertRaises(ValueError):
            ScoringWeights.scip_rule((1.0, 0.0, 0.0))
        with self.assertRaises(ValueError):
            ScoringWeights()
