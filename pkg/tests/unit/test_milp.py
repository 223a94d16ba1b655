import unittest
from pathlib import Path

import numpy as np
import pytest

from adaptive_cutsel.classes import Cut, FamilyParams, MilpInstance
from adaptive_cutsel.family import make_instance
from adaptive_cutsel.milp import (
    cut_is_valid_for,
    enumerate_integer_points,
    integer_boxes,
    is_integer_feasible,
    objective_value,
    reference_optimum,
    row_activities,
)
from adaptive_cutsel.util import load_instance

KNAPSACK = Path(__file__).resolve().parent.parent / "fixtures" / "knapsack.json"


def small_instance(**overrides):
    fields = dict(
        name="small",
        n=2,
        m=1,
        c=[1.0, 2.0],
        A=[(0, 0, 1.0), (0, 1, 1.0)],
        b=[1.0],
        lower=[0.0, 0.0],
        upper=[1.0, 1.0],
        vtype=("binary", "binary"),
        ctype=("setppc",),
    )
    fields.update(overrides)
    return MilpInstance(**fields)


class CheckMilpInstance(unittest.TestCase):
    def test_validation(self):
        # Test case 1: well formed
        inst = small_instance()
        self.assertEqual(inst.dense_A().tolist(), [[1.0, 1.0]])

        # Test case 2: duplicate triplet
        with self.assertRaises(ValueError):
            small_instance(A=[(0, 0, 1.0), (0, 0, 2.0)])

        # Test case 3: triplet out of range
        with self.assertRaises(ValueError):
            small_instance(A=[(1, 0, 1.0)])

        # Test case 4: unknown variable type
        with self.assertRaises(NotImplementedError):
            small_instance(vtype=("binary", "semicontinuous"))

        # Test case 5: lower > upper
        with self.assertRaises(ValueError):
            small_instance(lower=[0.0, 2.0], upper=[1.0, 1.0], vtype=("integer", "integer"))

        # Test case 6: binary with bounds outside [0, 1]
        with self.assertRaises(ValueError):
            small_instance(upper=[1.0, 2.0])

        # Test case 7: wrong length
        with self.assertRaises(ValueError):
            small_instance(c=[1.0])

    def test_family_instance(self):
        inst = make_instance(FamilyParams(1.0, 0.5))
        self.assertEqual((inst.n, inst.m), (3, 4))
        self.assertEqual(len(inst.A), 8)
        self.assertEqual(inst.integer_mask.tolist(), [True, False, True])


class CheckMilpCore(unittest.TestCase):
    def setUp(self):
        self.inst = load_instance(str(KNAPSACK))

    def test_objective_value(self):
        # Test case 1: plain evaluation
        self.assertEqual(objective_value(self.inst, [1.0, 0.0]), -1.0)

        # Test case 2: wrong length
        with self.assertRaises(ValueError):
            objective_value(self.inst, [1.0, 0.0, 0.0])

    def test_row_activities(self):
        self.assertTrue(np.allclose(row_activities(self.inst, [1.0, 0.5]), [3.0]))

    def test_is_integer_feasible(self):
        # Test case 1: feasible integer point
        self.assertTrue(is_integer_feasible(self.inst, [1.0, 0.0]))

        # Test case 2: fractional point
        self.assertFalse(is_integer_feasible(self.inst, [1.5, 0.0]))

        # Test case 3: row violated
        self.assertFalse(is_integer_feasible(self.inst, [1.0, 1.0]))

        # Test case 4: bound violated
        self.assertFalse(is_integer_feasible(self.inst, [-1.0, 0.0]))

        # Test case 5: within tolerance
        self.assertTrue(is_integer_feasible(self.inst, [1.0 + 1e-8, 0.0]))

        # Test case 6: tolerance must be positive
        with self.assertRaises(ValueError):
            is_integer_feasible(self.inst, [1.0, 0.0], tol=0.0)

    def test_cut_is_valid_for(self):
        points = enumerate_integer_points(self.inst)
        # Test case 1: x1 + x2 <= 1 is valid
        self.assertTrue(cut_is_valid_for(Cut([1.0, 1.0], 1.0), points))

        # Test case 2: x1 <= 0 cuts off (1, 0)
        self.assertFalse(cut_is_valid_for(Cut([1.0, 0.0], 0.0), points))

    def test_enumeration(self):
        # Test case 1: integer points of 2 x1 + 2 x2 <= 3
        points = sorted(tuple(p) for p in enumerate_integer_points(self.inst))
        self.assertEqual(points, [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)])

        # Test case 2: unbounded integer variable
        with self.assertRaises(ValueError):
            integer_boxes(make_instance(FamilyParams(1.0, 0.5)))

        # Test case 3: box too large
        with self.assertRaises(ValueError):
            integer_boxes(self.inst, max_points=3)

    def test_reference_optimum(self):
        # Test case 1: pure integer
        value, point = reference_optimum(self.inst)
        self.assertEqual(value, -1.0)
        self.assertTrue(is_integer_feasible(self.inst, point))

        # Test case 2: mixed integer, x2 continuous
        inst = MilpInstance(
            name="mixed",
            n=2,
            m=1,
            c=[-1.0, -1.0],
            A=[(0, 0, 2.0), (0, 1, 2.0)],
            b=[3.0],
            lower=[0.0, 0.0],
            upper=[3.0, 3.0],
            vtype=("integer", "continuous"),
            ctype=("linear",),
        )
        value, point = reference_optimum(inst)
        self.assertAlmostEqual(value, -1.5, places=9)

        # Test case 3: infeasible
        inst = small_instance(b=[-1.0])
        self.assertEqual(reference_optimum(inst), (None, None))


def test_knapsack_fixture(knapsack_fixture):
    value, point = reference_optimum(knapsack_fixture)
    assert value == -1.0
    assert objective_value(knapsack_fixture, point) == -1.0
    assert not is_integer_feasible(knapsack_fixture, [1.5, 0.0])


def test_family_fixture(family_fixture):
    assert (family_fixture.n, family_fixture.m) == (3, 4)
    assert objective_value(family_fixture, np.zeros(3)) == 0.0
    with pytest.raises(ValueError):
        integer_boxes(family_fixture)
