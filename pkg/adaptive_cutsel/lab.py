import os
from typing import Any, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .classes import FamilyParams, MilpInstance, RolloutConfig, RunManifest, SimOutcome
from .data_prep import (
    check_instance,
    generate_corpus,
    instance_statistics,
    logging_basic_config,
)
from .family import (
    construct_adversarial,
    construct_unsolvable,
    make_instance,
    simulate_pure_cutting,
)
from .graph import encode
from .milp import objective_value
from .policy import (
    GCNNPolicy,
    forward,
    load_checkpoint,
    save_checkpoint,
    seed_search,
)
from .trainer import (
    RolloutReward,
    action_weights,
    grid_search,
    n_best,
    parameter_statistics,
    reference_for,
    relative_improvement,
    rollout,
    summarize_improvements,
    train,
)
from .util import (
    CORPUS_MANIFEST,
    check_file_exists,
    list_instances,
    load_instance,
    output_paths,
    package_version,
    parse_grid,
    resolve_seed,
    save_csv,
    save_instance,
    save_json,
)

THEOREM_COLUMNS = [
    "lambda",
    "status",
    "rounds",
    "final_gap",
    "chosen_type_round1",
    "stalled_round",
]
SOLVED_POINT = np.array([1.0, 1.0, 0.0])


def _result() -> dict:
    return {"status_code": 2, "status": "", "data": None}


def _refuse_overwrite(paths: dict, logger: Any) -> Union[bool, str]:
    for path in paths.values():
        err = check_file_exists(path, logger)
        if err:
            return err
    return False


def _write_manifest(
    path: str, command: str, parameters: dict, seeds: dict, outputs: dict, logger: Any
) -> RunManifest:
    manifest = RunManifest(
        command=command,
        parameters=parameters,
        seeds=seeds,
        version=package_version(),
        outputs=[p for p in outputs.values() if p],
    )
    if path:
        save_json(manifest.to_dict(), path, logger)
    return manifest


def _theorem_row(lam: float, outcome: SimOutcome, d: float) -> dict:
    optimum = -9.0 - d
    final = outcome.lp_objectives[-1] if outcome.lp_objectives else np.nan
    return {
        "lambda": lam,
        "status": outcome.status,
        "rounds": outcome.solved_round if outcome.solved else outcome.rounds_run,
        "final_gap": (optimum - final) / max(abs(optimum), 1e-8),
        "chosen_type_round1": outcome.chosen_types[0] if outcome.chosen_types else "",
        "stalled_round": outcome.stalled_round,
    }


def _simulate_grid(
    p: FamilyParams, grid: Sequence[float], max_rounds: int, logger: Any
) -> List[dict]:
    rows = []
    for lam in grid:
        outcome = simulate_pure_cutting(p, lam, max_rounds)
        if outcome.solved:
            logger.error(f"lambda = {lam} solved P(a,d) at round {outcome.solved_round}")
        elif len(set(outcome.chosen_types)) != 1:
            logger.warning(f"lambda = {lam} changed cut type along the trajectory")
        rows.append(_theorem_row(lam, outcome, p.d))
    return rows


def run_theorem_demo(
    grid_spec: str = "0:0.1:1",
    max_rounds: int = 1000,
    output: str = "",
    verbose: int = 1,
    logs: str = "",
) -> dict:
    """
    Builds P(a,d) whose good interval avoids every lambda of the grid and
    checks the claim by simulation: every grid value cycles without
    solving, the interval midpoint solves with GC in round one.

    :param grid_spec: "start:step:end" or a comma separated list of lambda
                values in [0, 1]. Default value = "0:0.1:1"
    :type grid_spec: str
    :param max_rounds: round limit of each simulation. Default value = 1000
    :type max_rounds: int
    :param output: prefix of the outputs <output>.csv,
                <output>_certificate.json and <output>_manifest.json. If not
                given, nothing will be saved.
    :type output: str
    :param verbose: Verbosity. Default value = 1
    :type verbose: int
    :param logs: Where to save log file. If not given, logs will be printed out.
    :type logs: str

    :return: A dictionary with three keys, 'status_code', 'status' and 'data'.
             'status_code' is 0 when the claim held, 1 when an expectation
             was violated and 2 on input errors. 'data' holds the table and
             the certificate.
    :rtype: dict

    """
    logger = logging_basic_config(verbose, content_only=True, filename=logs)
    res = _result()
    paths = output_paths(
        output,
        {"table": ".csv", "certificate": "_certificate.json", "manifest": "_manifest.json"},
    )
    err = _refuse_overwrite(paths, logger)
    if err:
        res["status"] = err
        return res
    try:
        grid = parse_grid(grid_spec)
        if any(v < 0.0 or v > 1.0 for v in grid):
            raise ValueError("Grid values must lie in [0, 1].")
        if max_rounds < 1:
            raise ValueError("max_rounds must be at least 1.")
    except ValueError as e:
        logger.error(str(e))
        res["status"] = str(e)
        return res

    _write_manifest(
        paths["manifest"],
        "theorem",
        {"grid": grid_spec, "max_rounds": max_rounds},
        {},
        paths,
        logger,
    )
    try:
        p, interval = construct_adversarial(grid)
    except (ValueError, RuntimeError) as e:
        logger.error(str(e))
        res["status"] = str(e)
        res["status_code"] = 1
        return res
    logger.info(
        f"P(a={p.a}, d={p.d}) with good interval ({interval.lb}, {interval.ub})"
    )

    rows = _simulate_grid(p, grid, max_rounds, logger)
    mid = simulate_pure_cutting(p, interval.midpoint, max_rounds)
    rows.append(_theorem_row(interval.midpoint, mid, p.d))
    table = pd.DataFrame(rows, columns=THEOREM_COLUMNS)
    certificate = {
        "d": p.d,
        "a": p.a,
        "lambda_lb": interval.lb,
        "lambda_ub": interval.ub,
        "grid": grid,
    }
    if paths["table"]:
        save_csv(table, paths["table"], logger)
        save_json(certificate, paths["certificate"], logger)

    problems = []
    if any(r["status"] != "NotSolved" for r in rows[:-1]):
        problems.append("some grid lambda solved P(a,d)")
    if not (mid.solved and mid.solved_round == 1):
        problems.append("the interval midpoint did not solve with GC in round 1")
    else:
        if np.max(np.abs(mid.final_x - SOLVED_POINT)) > 1e-6:
            problems.append(f"final point {mid.final_x} is not (1, 1, 0)")
        obj = objective_value(make_instance(p), mid.final_x)
        if abs(obj - (-9.0 - p.d)) > 1e-9:
            problems.append(f"final objective {obj} is not -9 - d")

    res["data"] = {"table": table, "certificate": certificate, "params": p}
    if problems:
        res["status"] = "; ".join(problems)
        res["status_code"] = 1
        logger.error(res["status"])
    else:
        res["status"] = "OK"
        res["status_code"] = 0
    return res


def run_corollary(
    d: float = 0.5,
    eps_tilde: float = 0.05,
    grid_spec: str = "0:0.001:1",
    max_rounds: int = 1000,
    output: str = "",
    verbose: int = 1,
    logs: str = "",
) -> dict:
    """
    P(a,d) with a just beyond max_a(d): no grid lambda solves it.

    :return: A dictionary with three keys, 'status_code', 'status' and
             'data'; status_code 0 iff every lambda gives NotSolved.
    :rtype: dict
    """
    logger = logging_basic_config(verbose, content_only=True, filename=logs)
    res = _result()
    paths = output_paths(output, {"table": ".csv", "manifest": "_manifest.json"})
    err = _refuse_overwrite(paths, logger)
    if err:
        res["status"] = err
        return res
    try:
        grid = parse_grid(grid_spec)
        if any(v < 0.0 or v > 1.0 for v in grid):
            raise ValueError("Grid values must lie in [0, 1].")
        p = construct_unsolvable(d, eps_tilde)
    except ValueError as e:
        logger.error(str(e))
        res["status"] = str(e)
        return res

    _write_manifest(
        paths["manifest"],
        "corollary",
        {"d": d, "eps_tilde": eps_tilde, "grid": grid_spec, "max_rounds": max_rounds},
        {},
        paths,
        logger,
    )
    logger.info(f"P(a={p.a}, d={p.d}) outside the good region")
    table = pd.DataFrame(_simulate_grid(p, grid, max_rounds, logger), columns=THEOREM_COLUMNS)
    if paths["table"]:
        save_csv(table, paths["table"], logger)

    res["data"] = {"table": table, "params": p}
    solved = table.loc[table["status"] != "NotSolved", "lambda"].tolist()
    if solved:
        res["status"] = f"lambda values {solved} solved P(a,d)"
        res["status_code"] = 1
    else:
        res["status"] = "OK"
        res["status_code"] = 0
    return res


def _load_instances(
    source: Union[str, Sequence[Any]], logger: Any
) -> Union[str, List[MilpInstance]]:
    if isinstance(source, MilpInstance):
        source = [source]
    items: List[Any] = []
    for item in [source] if isinstance(source, str) else list(source):
        if isinstance(item, MilpInstance):
            items.append(item)
        else:
            items.extend(list_instances(item))
    instances = []
    for item in items:
        try:
            instances.append(load_instance(item))
        except FileNotFoundError:
            err = f"Instance file {item} does not exist."
            logger.error(err)
            return err
        except (ValueError, KeyError, TypeError, NotImplementedError) as e:
            err = f"Instance {item} is invalid: {e}"
            logger.error(err)
            return err
    return instances


def _usable(instances: List[MilpInstance], logger: Any) -> Union[str, List[MilpInstance]]:
    for inst in instances:
        err = check_instance(inst)
        if err:
            return err
    names = [inst.name for inst in instances]
    if len(set(names)) != len(names):
        err = "Instance names must be unique."
        logger.error(err)
        return err
    return instances


def _rollout_config(
    rounds: int, cuts_per_round: int, parallel_threshold: float
) -> RolloutConfig:
    return RolloutConfig(
        n_rounds=rounds, cuts_per_round=cuts_per_round, parallel_threshold=parallel_threshold
    )


def run_grid_search(
    instances: Union[str, Sequence[Any]],
    resolution: int = 10,
    rounds: int = 10,
    cuts_per_round: int = 5,
    parallel_threshold: float = 0.9,
    output: str = "",
    n_jobs: int = 1,
    verbose: int = 1,
    logs: str = "",
) -> dict:
    """
    Grid search of the four cut scoring weights on each instance.

    :param instances: instance JSON paths, a corpus directory or instances
    :type instances: Union[str, list]
    :param resolution: grid resolution, 10 gives 286 weight vectors.
                Default value = 10
    :type resolution: int
    :param rounds: separation rounds per rollout. Default value = 10
    :type rounds: int
    :param cuts_per_round: cut limit per round. Default value = 5
    :type cuts_per_round: int
    :param parallel_threshold: parallelism filter. Default value = 0.9
    :type parallel_threshold: float
    :param output: prefix of the outputs. One instance writes <output>.csv,
                several write <output>_<instance>.csv; <output>_best.json and
                <output>_manifest.json are always written. If not given,
                nothing will be saved.
    :type output: str
    :param n_jobs: joblib workers for the rollouts. Default value = 1
    :type n_jobs: int
    :param verbose: Verbosity. Default value = 1
    :type verbose: int
    :param logs: Where to save log file. If not given, logs will be printed out.
    :type logs: str

    :return: A dictionary with three keys, 'status_code', 'status' and 'data'.
    :rtype: dict

    """
    logger = logging_basic_config(verbose, content_only=True, filename=logs)
    res = _result()
    loaded = _load_instances(instances, logger)
    if isinstance(loaded, str):
        res["status"] = loaded
        return res
    loaded = _usable(loaded, logger)
    if isinstance(loaded, str):
        res["status"] = loaded
        return res
    if not loaded:
        res["status"] = "No instances given."
        return res
    try:
        cfg = _rollout_config(rounds, cuts_per_round, parallel_threshold)
        if resolution < 1:
            raise ValueError("resolution must be at least 1.")
    except ValueError as e:
        res["status"] = str(e)
        return res

    suffixes = {"best": "_best.json", "manifest": "_manifest.json"}
    if len(loaded) == 1:
        suffixes["table:" + loaded[0].name] = ".csv"
    else:
        for inst in loaded:
            suffixes["table:" + inst.name] = f"_{inst.name}.csv"
    paths = output_paths(output, suffixes)
    err = _refuse_overwrite(paths, logger)
    if err:
        res["status"] = err
        return res
    _write_manifest(
        paths["manifest"],
        "grid",
        {
            "instances": [inst.name for inst in loaded],
            "resolution": resolution,
            "rounds": rounds,
            "cuts_per_round": cuts_per_round,
            "parallel_threshold": parallel_threshold,
        },
        {},
        paths,
        logger,
    )

    summary, tables, best_rows = [], {}, []
    for inst in loaded:
        best, best_gap, table = grid_search(inst, resolution, cfg, n_jobs=n_jobs)
        improvement = float(table["improvement"].max())
        tables[inst.name] = table
        best_rows.append(dict(zip(["l1", "l2", "l3", "l4"], best.scip)))  # type: ignore
        summary.append(
            {
                "instance": inst.name,
                "weights": list(best.scip),  # type: ignore
                "gap": best_gap,
                "improvement": improvement,
                "n_best": n_best(table, best_gap),
            }
        )
        if paths["table:" + inst.name]:
            save_csv(table, paths["table:" + inst.name], logger)

    stats = parameter_statistics(pd.DataFrame(best_rows))
    improvements = summarize_improvements([s["improvement"] for s in summary])
    report = {
        "instances": summary,
        "parameter_statistics": stats.to_dict(orient="records"),
        "improvements": improvements,
    }
    if paths["best"]:
        save_json(report, paths["best"], logger)

    res["data"] = {"tables": tables, "report": report}
    res["status"] = "OK"
    res["status_code"] = 0
    return res


def run_train(
    corpus: Union[str, Sequence[Any]],
    epochs: int = 500,
    samples: int = 20,
    seeds: int = 1000,
    rounds: int = 10,
    cuts_per_round: int = 5,
    parallel_threshold: float = 0.9,
    emb_size: int = 32,
    seed: Optional[int] = None,
    output: str = "",
    n_jobs: int = 1,
    verbose: int = 1,
    logs: str = "",
) -> dict:
    """
    Seed search followed by batch REINFORCE training on a corpus.

    :param corpus: corpus directory, instance paths or instances
    :type corpus: Union[str, list]
    :param epochs: training epochs, one batch over the corpus each.
                Default value = 500
    :type epochs: int
    :param samples: actions sampled per instance and epoch. Default value = 20
    :type samples: int
    :param seeds: initialization seeds tried by the seed search.
                Default value = 1000
    :type seeds: int
    :param seed: seed of the action sampler; $CUTSEL_SEED or 0 when not given
    :type seed: int
    :param output: prefix of <output>.ckpt, <output>_log.csv,
                <output>_instances.csv and <output>_manifest.json. If not
                given, nothing will be saved.
    :type output: str

    :return: A dictionary with three keys, 'status_code', 'status' and 'data'.
    :rtype: dict

    """
    logger = logging_basic_config(verbose, content_only=True, filename=logs)
    res = _result()
    paths = output_paths(
        output,
        {
            "checkpoint": ".ckpt",
            "log": "_log.csv",
            "instances": "_instances.csv",
            "manifest": "_manifest.json",
        },
    )
    err = _refuse_overwrite(paths, logger)
    if err:
        res["status"] = err
        return res
    loaded = _load_instances(corpus, logger)
    if isinstance(loaded, str):
        res["status"] = loaded
        return res
    if not loaded:
        res["status"] = "The training corpus is empty."
        logger.error(res["status"])
        return res
    loaded = _usable(loaded, logger)
    if isinstance(loaded, str):
        res["status"] = loaded
        return res
    try:
        cfg = _rollout_config(rounds, cuts_per_round, parallel_threshold)
        if epochs < 0 or samples < 1 or seeds < 1:
            raise ValueError("epochs must be >= 0, samples and seeds >= 1.")
        sampler_seed = resolve_seed(seed)
    except ValueError as e:
        res["status"] = str(e)
        return res

    _write_manifest(
        paths["manifest"],
        "train",
        {
            "instances": [inst.name for inst in loaded],
            "epochs": epochs,
            "samples": samples,
            "seeds": seeds,
            "rounds": rounds,
            "cuts_per_round": cuts_per_round,
            "parallel_threshold": parallel_threshold,
            "emb_size": emb_size,
        },
        {"sampler": sampler_seed},
        paths,
        logger,
    )
    graphs = [encode(inst) for inst in loaded]
    init_seed = seed_search(graphs, seeds, emb_size)
    policy = GCNNPolicy(emb_size, seed=init_seed)

    reward_fn = RolloutReward(cfg)
    for inst in loaded:
        reward_fn.prepare(inst)
    log = train(policy, loaded, epochs, samples, reward_fn, seed=sampler_seed, n_jobs=n_jobs)

    if paths["checkpoint"]:
        save_checkpoint(policy, paths["checkpoint"])
        logger.info(f"Checkpoint saved to {paths['checkpoint']}")
        save_csv(log, paths["log"], logger)
        save_csv(instance_statistics(loaded), paths["instances"], logger)

    res["data"] = {"policy": policy, "log": log, "init_seed": init_seed}
    res["status"] = "OK"
    res["status_code"] = 0
    return res


def run_evaluate(
    checkpoint: str,
    instances: Union[str, Sequence[Any]],
    rounds: int = 10,
    cuts_per_round: int = 5,
    parallel_threshold: float = 0.9,
    emb_size: int = 32,
    output: str = "",
    verbose: int = 1,
    logs: str = "",
) -> dict:
    """
    Uses the policy mean as cut scoring weights on each instance and reports
    the gap against the baseline weights.

    :param checkpoint: policy checkpoint written by run_train
    :type checkpoint: str
    :param instances: instance JSON paths, a corpus directory or instances
    :type instances: Union[str, list]
    :param output: prefix of <output>.csv and <output>_manifest.json
    :type output: str

    :return: A dictionary with three keys, 'status_code', 'status' and 'data'.
             'data' is the table instance, mu1..mu4, gap, improvement.
    :rtype: dict

    """
    logger = logging_basic_config(verbose, content_only=True, filename=logs)
    res = _result()
    paths = output_paths(output, {"table": ".csv", "manifest": "_manifest.json"})
    err = _refuse_overwrite(paths, logger)
    if err:
        res["status"] = err
        return res
    try:
        policy = load_checkpoint(checkpoint, emb_size)
        cfg = _rollout_config(rounds, cuts_per_round, parallel_threshold)
    except (OSError, ValueError) as e:
        logger.error(str(e))
        res["status"] = str(e)
        return res
    loaded = _load_instances(instances, logger)
    if isinstance(loaded, str):
        res["status"] = loaded
        return res
    loaded = _usable(loaded, logger)
    if isinstance(loaded, str):
        res["status"] = loaded
        return res

    _write_manifest(
        paths["manifest"],
        "evaluate",
        {
            "checkpoint": checkpoint,
            "instances": [inst.name for inst in loaded],
            "rounds": rounds,
            "cuts_per_round": cuts_per_round,
            "parallel_threshold": parallel_threshold,
        },
        {},
        paths,
        logger,
    )
    rows = []
    for inst in loaded:
        mu = forward(encode(inst), policy)
        reference = reference_for(inst, cfg)
        baseline_gap = rollout(inst, cfg.baseline_weights, cfg, reference)
        achieved = rollout(inst, action_weights(mu, cfg), cfg, reference)
        rows.append(
            {
                "instance": inst.name,
                "mu1": mu[0],
                "mu2": mu[1],
                "mu3": mu[2],
                "mu4": mu[3],
                "gap": achieved,
                "improvement": relative_improvement(baseline_gap, achieved),
            }
        )
        logger.info(f"{inst.name}: gap {achieved:.6g}, baseline {baseline_gap:.6g}")
    table = pd.DataFrame(
        rows, columns=["instance", "mu1", "mu2", "mu3", "mu4", "gap", "improvement"]
    )
    if paths["table"]:
        save_csv(table, paths["table"], logger)

    summary = summarize_improvements(table["improvement"].tolist())
    if not table.empty:
        weights = table[["mu1", "mu2", "mu3", "mu4"]].set_axis(
            ["l1", "l2", "l3", "l4"], axis=1
        )
        summary["parameter_statistics"] = parameter_statistics(weights).to_dict(
            orient="records"
        )
    res["data"] = {"table": table, "summary": summary}
    res["status"] = "OK"
    res["status_code"] = 0
    return res


def run_generate(
    kind: str = "packing",
    count: int = 10,
    seed: Optional[int] = None,
    output: str = "",
    verbose: int = 1,
    logs: str = "",
) -> dict:
    """
    Writes a seeded synthetic corpus, one <output>/<kind>_<k>.json per
    instance.

    :return: A dictionary with three keys, 'status_code', 'status' and 'data'.
    :rtype: dict
    """
    logger = logging_basic_config(verbose, content_only=True, filename=logs)
    res = _result()
    try:
        corpus_seed = resolve_seed(seed)
        instances = generate_corpus(kind, count, corpus_seed)
    except (ValueError, NotImplementedError) as e:
        logger.error(str(e))
        res["status"] = str(e)
        return res

    files = {}
    if output:
        files = {inst.name: os.path.join(output, inst.name + ".json") for inst in instances}
        files["manifest"] = os.path.join(output, CORPUS_MANIFEST)
        err = _refuse_overwrite(files, logger)
        if err:
            res["status"] = err
            return res
        _write_manifest(
            files["manifest"],
            "generate",
            {"kind": kind, "count": count},
            {"corpus": corpus_seed},
            files,
            logger,
        )
        for inst in instances:
            save_instance(inst, files[inst.name], logger)
    logger.debug(f"Generated {len(instances)} {kind} instances")

    res["data"] = {"instances": instances, "files": files}
    res["status"] = "OK"
    res["status_code"] = 0
    return res
