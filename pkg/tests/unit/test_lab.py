import json
import os
import sys
import tempfile
import unittest
from pathlib import Path
from unittest import mock

import numpy as np
import pandas as pd

from adaptive_cutsel.cli import main
from adaptive_cutsel.classes import FamilyParams
from adaptive_cutsel.data_prep import generate_corpus
from adaptive_cutsel.family import make_instance
from adaptive_cutsel.graph import encode
from adaptive_cutsel.lab import (
    THEOREM_COLUMNS,
    run_corollary,
    run_evaluate,
    run_generate,
    run_grid_search,
    run_theorem_demo,
    run_train,
)
from adaptive_cutsel.policy import GCNNPolicy, flat_parameters, forward, load_checkpoint
from adaptive_cutsel.util import load_instance

KNAPSACK = str(Path(__file__).resolve().parent.parent / "fixtures" / "knapsack.json")


class CheckTheorem(unittest.TestCase):
    def test_run_theorem_demo(self):
        # Test case 1: default grid
        res = run_theorem_demo(verbose=0)
        self.assertEqual(res["status_code"], 0)
        table = res["data"]["table"]
        self.assertEqual(list(table.columns), THEOREM_COLUMNS)
        self.assertEqual(len(table), 12)
        self.assertTrue((table["status"].iloc[:11] == "NotSolved").all())
        self.assertEqual(table["status"].iloc[-1], "SolvedByGC")
        self.assertEqual(table["rounds"].iloc[-1], 1)
        self.assertEqual(table["chosen_type_round1"].iloc[-1], "GC")
        self.assertAlmostEqual(table["final_gap"].iloc[-1], 0.0, places=9)
        self.assertTrue(pd.isna(table["stalled_round"].iloc[-1]))

        # Test case 2: stalled rows count only the rounds that applied a cut
        stalled = table[table["stalled_round"].notna()]
        self.assertGreater(len(stalled), 0)
        self.assertTrue((stalled["rounds"] == stalled["stalled_round"] - 1).all())
        self.assertTrue((stalled["rounds"] < 1000).all())

        # Test case 3: certificate keeps the interval away from the grid
        cert = res["data"]["certificate"]
        for lam in cert["grid"]:
            self.assertFalse(cert["lambda_lb"] <= lam <= cert["lambda_ub"])

    def test_outputs_and_overwrite(self):
        with tempfile.TemporaryDirectory() as tmp:
            prefix = os.path.join(tmp, "theorem")
            res = run_theorem_demo("0.2,0.5", output=prefix, verbose=0)
            self.assertEqual(res["status_code"], 0)
            for suffix in (".csv", "_certificate.json", "_manifest.json"):
                self.assertTrue(os.path.exists(prefix + suffix))
            with open(prefix + "_manifest.json") as f:
                manifest = json.load(f)
            self.assertEqual(manifest["command"], "theorem")
            self.assertEqual(len(pd.read_csv(prefix + ".csv")), 3)

            # the second run refuses to overwrite
            res = run_theorem_demo("0.2,0.5", output=prefix, verbose=0)
            self.assertEqual(res["status_code"], 2)
            self.assertTrue("avoid overwrite" in res["status"])

    def test_invalid_grid(self):
        # Test case 1: unparsable
        self.assertEqual(run_theorem_demo("zero:1", verbose=0)["status_code"], 2)

        # Test case 2: outside [0, 1]
        self.assertEqual(run_theorem_demo("0,1.5", verbose=0)["status_code"], 2)

        # Test case 3: bad round limit
        self.assertEqual(run_theorem_demo(max_rounds=0, verbose=0)["status_code"], 2)

    def test_run_corollary(self):
        # Test case 1: coarse grid
        res = run_corollary(grid_spec="0:0.1:1", verbose=0)
        self.assertEqual(res["status_code"], 0)
        self.assertEqual(len(res["data"]["table"]), 11)
        self.assertTrue((res["data"]["table"]["status"] == "NotSolved").all())

        # Test case 2: invalid eps_tilde
        self.assertEqual(run_corollary(eps_tilde=0.0, verbose=0)["status_code"], 2)


class CheckGridSearchRun(unittest.TestCase):
    def test_single_instance(self):
        with tempfile.TemporaryDirectory() as tmp:
            prefix = os.path.join(tmp, "grid")
            res = run_grid_search(
                [KNAPSACK], resolution=2, rounds=2, output=prefix, verbose=0
            )
            self.assertEqual(res["status_code"], 0)
            self.assertTrue(os.path.exists(prefix + ".csv"))
            with open(prefix + "_best.json") as f:
                report = json.load(f)
            self.assertEqual(report["instances"][0]["instance"], "knapsack")
            self.assertAlmostEqual(report["instances"][0]["gap"], 0.0, places=9)
            self.assertEqual(report["instances"][0]["n_best"], 10)
            self.assertEqual(report["improvements"]["count"], 1)

    def test_several_instances(self):
        instances = [load_instance(KNAPSACK)] + generate_corpus("packing", 1, seed=5)
        with tempfile.TemporaryDirectory() as tmp:
            prefix = os.path.join(tmp, "grid")
            res = run_grid_search(instances, resolution=1, rounds=2, output=prefix, verbose=0)
            self.assertEqual(res["status_code"], 0)
            for inst in instances:
                self.assertTrue(os.path.exists(f"{prefix}_{inst.name}.csv"))
                self.assertEqual(len(res["data"]["tables"][inst.name]), 4)

    def test_invalid_input(self):
        # Test case 1: missing file
        res = run_grid_search(["missing.json"], verbose=0)
        self.assertEqual(res["status_code"], 2)

        # Test case 2: unbounded integer variable
        res = run_grid_search([make_instance(FamilyParams(1.0, 0.5))], verbose=0)
        self.assertEqual(res["status_code"], 2)

        # Test case 3: duplicate names
        inst = load_instance(KNAPSACK)
        res = run_grid_search([inst, inst], verbose=0)
        self.assertEqual(res["status_code"], 2)


class CheckTrainAndEvaluate(unittest.TestCase):
    def test_train_then_evaluate(self):
        with tempfile.TemporaryDirectory() as tmp:
            prefix = os.path.join(tmp, "policy")
            res = run_train(
                [KNAPSACK],
                epochs=2,
                samples=2,
                seeds=3,
                rounds=2,
                emb_size=4,
                seed=0,
                output=prefix,
                verbose=0,
            )
            self.assertEqual(res["status_code"], 0)
            self.assertEqual(len(res["data"]["log"]), 2)
            self.assertIn(res["data"]["init_seed"], [0, 1, 2])
            for suffix in (".ckpt", "_log.csv", "_instances.csv", "_manifest.json"):
                self.assertTrue(os.path.exists(prefix + suffix))

            # Test case 2: evaluate the checkpoint
            res = run_evaluate(prefix + ".ckpt", [KNAPSACK], rounds=2, emb_size=4, verbose=0)
            self.assertEqual(res["status_code"], 0)
            table = res["data"]["table"]
            self.assertEqual(
                list(table.columns),
                ["instance", "mu1", "mu2", "mu3", "mu4", "gap", "improvement"],
            )
            self.assertEqual(len(table), 1)
            self.assertTrue(np.isfinite(table["gap"].iloc[0]))
            mu = forward(encode(load_instance(KNAPSACK)), load_checkpoint(prefix + ".ckpt", 4))
            row = table[["mu1", "mu2", "mu3", "mu4"]].iloc[0].to_numpy(dtype=float)
            self.assertTrue(np.array_equal(row, mu))

            # Test case 3: no instances gives an empty table
            res = run_evaluate(prefix + ".ckpt", [], emb_size=4, verbose=0)
            self.assertEqual(res["status_code"], 0)
            self.assertTrue(res["data"]["table"].empty)
            self.assertEqual(res["data"]["summary"]["count"], 0)

            # Test case 4: wrong embedding width
            res = run_evaluate(prefix + ".ckpt", [KNAPSACK], emb_size=8, verbose=0)
            self.assertEqual(res["status_code"], 2)

    def test_zero_epochs_keeps_initialization(self):
        res = run_train([KNAPSACK], epochs=0, seeds=4, emb_size=4, verbose=0)
        self.assertEqual(res["status_code"], 0)
        self.assertTrue(res["data"]["log"].empty)
        init = GCNNPolicy(4, seed=res["data"]["init_seed"])
        self.assertTrue(
            np.array_equal(flat_parameters(res["data"]["policy"]), flat_parameters(init))
        )

    def test_invalid_train_input(self):
        # Test case 1: empty corpus
        self.assertEqual(run_train([], verbose=0)["status_code"], 2)

        # Test case 2: missing checkpoint
        res = run_evaluate("missing.ckpt", [KNAPSACK], verbose=0)
        self.assertEqual(res["status_code"], 2)


class CheckGenerate(unittest.TestCase):
    def test_run_generate(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, "corpus")
            # Test case 1: files and manifest
            res = run_generate("covering", 3, seed=2, output=out, verbose=0)
            self.assertEqual(res["status_code"], 0)
            self.assertEqual(
                sorted(os.listdir(out)),
                ["covering_000.json", "covering_001.json", "covering_002.json", "manifest.json"],
            )
            inst = load_instance(os.path.join(out, "covering_001.json"))
            self.assertEqual(inst.A, res["data"]["instances"][1].A)

            # Test case 2: refuses to overwrite
            res = run_generate("covering", 3, seed=2, output=out, verbose=0)
            self.assertEqual(res["status_code"], 2)

        # Test case 3: unknown kind
        self.assertEqual(run_generate("scheduling", 3, verbose=0)["status_code"], 2)


class CheckCli(unittest.TestCase):
    def _run(self, *args):
        with mock.patch.object(sys, "argv", ["cutsel", *args]):
            with self.assertRaises(SystemExit) as ctx:
                main()
        return ctx.exception.code

    def test_exit_codes(self):
        # Test case 1: theorem on a short grid
        self.assertEqual(self._run("-a", "theorem", "-g", "0.2,0.5", "-v", "0"), 0)

        # Test case 2: malformed grid
        self.assertEqual(self._run("-a", "theorem", "-g", "0:x:1", "-v", "0"), 2)

        # Test case 3: grid needs an input
        with mock.patch("sys.stderr"):
            self.assertEqual(self._run("-a", "grid"), 2)

        # Test case 4: unknown action
        with mock.patch("sys.stderr"):
            self.assertEqual(self._run("-a", "sweep"), 2)
