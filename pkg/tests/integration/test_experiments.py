import os
import tempfile
import unittest

import numpy as np
import pytest

from adaptive_cutsel.family import achievable_range, construct_adversarial
from adaptive_cutsel.lab import (
    run_corollary,
    run_evaluate,
    run_generate,
    run_grid_search,
    run_theorem_demo,
    run_train,
)
from adaptive_cutsel.trainer import train_interval_task


@pytest.mark.slow
class CheckPureCuttingClaims(unittest.TestCase):
    def test_theorem_on_dense_grids(self):
        lo, hi = achievable_range()
        grids = [
            "0:0.1:1",
            "0:0.05:1",
            ",".join(str(v) for v in np.linspace(lo, hi, 7)[1:-1]),
        ]
        for spec in grids:
            res = run_theorem_demo(spec, verbose=0)
            self.assertEqual(res["status_code"], 0, msg=res["status"])

    def test_corollary_on_fine_grid(self):
        res = run_corollary(d=0.5, eps_tilde=0.05, grid_spec="0:0.001:1", verbose=0)
        self.assertEqual(res["status_code"], 0, msg=res["status"])
        self.assertEqual(len(res["data"]["table"]), 1001)

    def test_corollary_other_shifts(self):
        for d in (0.0, 1.0):
            res = run_corollary(d=d, eps_tilde=0.01, grid_spec="0:0.01:1", verbose=0)
            self.assertEqual(res["status_code"], 0, msg=res["status"])


@pytest.mark.slow
class CheckIntervalTraining(unittest.TestCase):
    def test_train_interval_task(self):
        params, interval = construct_adversarial([k / 10 for k in range(11)])
        met = 0
        for seed in range(10):
            out = train_interval_task(params, interval, epochs=200, n_samples=20, seed=seed)
            log = out["log"]
            self.assertEqual(len(log), 200)
            self.assertTrue(((log["in_interval"] >= 0.0) & (log["in_interval"] <= 1.0)).all())
            self.assertAlmostEqual(log["gamma"].iloc[-1], 0.01 - 0.009 * 199 / 200)
            met += int(out["before"] < 0.2 and out["after"] > 0.9)
        self.assertGreaterEqual(met, 8)

    def test_reproducible(self):
        params, interval = construct_adversarial([0.5])
        first = train_interval_task(
            params, interval, epochs=10, n_samples=5, seed=3, n_seeds=20
        )
        second = train_interval_task(
            params, interval, epochs=10, n_samples=5, seed=3, n_seeds=20
        )
        self.assertEqual(first["init_seed"], second["init_seed"])
        self.assertTrue(
            np.array_equal(first["log"]["mean_reward"], second["log"]["mean_reward"])
        )
        self.assertEqual(first["after"], second["after"])


@pytest.mark.slow
class CheckPipeline(unittest.TestCase):
    def test_generate_grid_train_evaluate(self):
        with tempfile.TemporaryDirectory() as tmp:
            corpus = os.path.join(tmp, "corpus")
            res = run_generate("lotsizing", 3, seed=1, output=corpus, verbose=0)
            self.assertEqual(res["status_code"], 0)

            res = run_grid_search(corpus, resolution=4, rounds=3, verbose=0)
            self.assertEqual(res["status_code"], 0, msg=res["status"])
            for entry in res["data"]["report"]["instances"]:
                self.assertGreaterEqual(entry["improvement"], 0.0)

            prefix = os.path.join(tmp, "policy")
            res = run_train(
                corpus, epochs=3, samples=4, seeds=5, rounds=3, emb_size=8,
                output=prefix, verbose=0,
            )
            self.assertEqual(res["status_code"], 0, msg=res["status"])

            res = run_evaluate(prefix + ".ckpt", corpus, rounds=3, emb_size=8, verbose=0)
            self.assertEqual(res["status_code"], 0, msg=res["status"])
            self.assertEqual(len(res["data"]["table"]), 3)
