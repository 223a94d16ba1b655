import itertools
import logging
import time
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import torch
import torch.optim as optim
from joblib import Parallel, delayed
from scipy.special import comb

from .classes import (
    FamilyParams,
    GoodCutInterval,
    MilpInstance,
    RelaxedModel,
    RolloutConfig,
    ScoringWeights,
    SelectionContext,
    TrajectorySample,
)
from .family import make_instance, simulate_pure_cutting
from .graph import encode
from .milp import reference_optimum
from .policy import (
    DTYPE,
    GCNNPolicy,
    gamma_schedule,
    logprob,
    sample_action,
    seed_search,
)
from .selector import select_cuts
from .simplex import gomory_cuts, solve_lp

GAP_GUARD = 1e-8
LEARNING_RATE = 5e-4
INTERVAL_LEARNING_RATE = 2e-3
WEIGHT_COLUMNS = ["l1", "l2", "l3", "l4"]


@dataclass(frozen=True, eq=False)
class Reference:
    """
    Primal side of the gap of one instance: objective value and point.
    """

    value: float
    point: Optional[np.ndarray]


def reference_for(inst: MilpInstance, cfg: RolloutConfig) -> Reference:
    """
    The configured incumbent when given, else the brute force optimum.
    """
    if cfg.incumbent is not None:
        point = np.asarray(cfg.incumbent, dtype=float)
        if point.shape != (inst.n,):
            raise ValueError(f"Incumbent has length {point.size}, expected {inst.n}.")
        return Reference(float(np.dot(inst.c, point)), point)
    value, point = reference_optimum(inst)
    if value is None:
        raise ValueError(f"Instance {inst.name} has no integer feasible point.")
    return Reference(float(value), point)


def gap(reference: float, bound: float) -> float:
    return (reference - bound) / max(abs(reference), GAP_GUARD)


def rollout(
    inst: MilpInstance,
    weights: ScoringWeights,
    cfg: RolloutConfig,
    reference: Optional[Reference] = None,
) -> float:
    """
    Runs cfg.n_rounds separation rounds: solve the LP, generate Gomory cuts,
    select with weights, add the selection. Stops early once no cut is
    generated.

    :param inst: the instance
    :type inst: MilpInstance
    :param weights: cut scoring weights
    :type weights: ScoringWeights
    :param cfg: separation loop settings
    :type cfg: RolloutConfig
    :param reference: precomputed primal reference, see reference_for
    :type reference: Reference

    :return: the final relative gap
    :rtype: float

    """
    if reference is None:
        reference = reference_for(inst, cfg)
    model = RelaxedModel(inst)
    sol = solve_lp(model)
    if not sol.optimal:
        raise ValueError(f"Root LP of {inst.name} is {sol.status}.")

    for rnd in range(cfg.n_rounds):
        cuts = gomory_cuts(model, sol)
        if not cuts:
            logging.debug(f"No cuts generated at round {rnd}")
            break
        incumbent = reference.point
        if incumbent is not None and np.max(np.abs(incumbent - sol.x)) <= 1e-12:
            incumbent = None
        ctx = SelectionContext(inst.c, sol.x, incumbent)
        res = select_cuts(
            cuts,
            [],
            cfg.cuts_per_round,
            weights,
            ctx,
            inst.integer_mask,
            cfg.parallel_threshold,
            cfg.fill_filtered,
        )
        model = model.with_cuts(res.selected)
        sol = solve_lp(model)
        if not sol.optimal:
            raise RuntimeError("invalid cut applied")
    return gap(reference.value, sol.objective)


def relative_improvement(baseline_gap: float, achieved_gap: float) -> float:
    return (baseline_gap - achieved_gap) / (abs(baseline_gap) + GAP_GUARD)


def action_weights(action: Any, cfg: RolloutConfig) -> ScoringWeights:
    a = np.asarray(action, dtype=float)
    if cfg.clamp_actions:
        a = np.clip(a, 0.0, None)
    return ScoringWeights.scip_rule(a, normalized=False)


def reward(
    inst: MilpInstance,
    action: Any,
    cfg: RolloutConfig,
    reference: Optional[Reference] = None,
    baseline_gap: Optional[float] = None,
) -> float:
    """
    Relative gap improvement of the action over the baseline weights.
    Negative actions are passed through unless cfg.clamp_actions is set.
    """
    if reference is None:
        reference = reference_for(inst, cfg)
    if baseline_gap is None:
        baseline_gap = rollout(inst, cfg.baseline_weights, cfg, reference)
    achieved = rollout(inst, action_weights(action, cfg), cfg, reference)
    return relative_improvement(baseline_gap, achieved)


def surrogate_loss(
    mu: torch.Tensor,
    samples: Sequence[Any],
    rewards: Sequence[float],
    gamma: float,
    baseline: float = 0.0,
) -> torch.Tensor:
    """
    Batch REINFORCE loss: sum over samples of -(r - baseline) log pi(a).
    """
    loss = torch.zeros((), dtype=DTYPE)
    for a, r in zip(samples, rewards):
        loss = loss - (float(r) - baseline) * logprob(mu, gamma, a)
    return loss


RewardFn = Callable[[MilpInstance, np.ndarray], float]


class RolloutReward:
    """
    Reward of sampled actions on a fixed instance set. References and
    baseline gaps are computed once per instance and kept.
    """

    def __init__(self, cfg: RolloutConfig) -> None:
        self.cfg = cfg
        self.references: Dict[str, Reference] = {}
        self.baselines: Dict[str, float] = {}

    def prepare(self, inst: MilpInstance) -> None:
        key = inst.name
        if key not in self.references:
            ref = reference_for(inst, self.cfg)
            self.references[key] = ref
            self.baselines[key] = rollout(inst, self.cfg.baseline_weights, self.cfg, ref)
            logging.debug(f"Baseline gap of {inst.name}: {self.baselines[key]:.6g}")

    def __call__(self, inst: MilpInstance, action: np.ndarray) -> float:
        self.prepare(inst)
        key = inst.name
        return reward(inst, action, self.cfg, self.references[key], self.baselines[key])


def reinforce_batch(
    policy: GCNNPolicy,
    optimizer: optim.Optimizer,
    batch: Sequence[MilpInstance],
    n_samples: int,
    gamma: float,
    reward_fn: RewardFn,
    generator: torch.Generator,
    n_jobs: int = 1,
    center_rewards: bool = False,
) -> dict:
    """
    One batch REINFORCE update. For every instance, n_samples actions are
    drawn around the policy mean, rewarded, and the summed loss
    -r log pi(a) takes a single optimizer step. With center_rewards the
    mean reward of the instance's samples is subtracted first.

    :param policy: the policy, updated in place
    :type policy: GCNNPolicy
    :param optimizer: optimizer over the policy parameters
    :type optimizer: torch.optim.Optimizer
    :param batch: training instances
    :type batch: Sequence[MilpInstance]
    :param n_samples: actions per instance
    :type n_samples: int
    :param gamma: variance of the sampling distribution
    :type gamma: float
    :param reward_fn: reward of an action on an instance
    :type reward_fn: Callable
    :param generator: torch generator the actions are drawn from
    :type generator: torch.Generator
    :param n_jobs: joblib workers for reward evaluation. Default value = 1
    :type n_jobs: int
    :param center_rewards: subtract the per instance mean reward. Default
                           value = False
    :type center_rewards: bool

    :return: mean reward, mean log-probability and the samples
    :rtype: dict

    """
    if len(batch) == 0:
        raise ValueError("reinforce_batch needs a nonempty batch.")
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1.")

    loss = torch.zeros((), dtype=DTYPE)
    samples: List[TrajectorySample] = []
    for inst in batch:
        mu = policy(encode(inst))
        mu_np = mu.detach().numpy()
        actions = [sample_action(mu_np, gamma, generator) for _ in range(n_samples)]
        rewards = Parallel(n_jobs=n_jobs)(
            delayed(reward_fn)(inst, a.sample) for a in actions
        )
        if not np.all(np.isfinite(rewards)):
            raise RuntimeError(f"Non-finite reward on {inst.name}.")
        baseline = float(np.mean(rewards)) if center_rewards else 0.0
        loss = loss + surrogate_loss(
            mu, [a.sample for a in actions], rewards, gamma, baseline
        )
        for a, r in zip(actions, rewards):
            samples.append(
                TrajectorySample(inst.name, tuple(a.sample.tolist()), float(r), a.logprob)
            )

    optimizer.zero_grad()
    loss.backward()
    optimizer.step()
    return {
        "mean_reward": float(np.mean([s.reward for s in samples])),
        "mean_logprob": float(np.mean([s.logprob for s in samples])),
        "loss": float(loss.detach()),
        "samples": samples,
    }


def train(
    policy: GCNNPolicy,
    instances: Sequence[MilpInstance],
    epochs: int,
    n_samples: int,
    reward_fn: RewardFn,
    seed: int = 0,
    lr: float = LEARNING_RATE,
    n_jobs: int = 1,
    center_rewards: bool = False,
) -> pd.DataFrame:
    """
    Runs one reinforce_batch per epoch over all instances with the decaying
    variance schedule and Adam.

    :return: the training log, one row per epoch
    :rtype: pandas.DataFrame
    """
    if epochs < 0:
        raise ValueError("epochs must be nonnegative.")
    optimizer = optim.Adam(policy.parameters(), lr=lr)
    generator = torch.Generator().manual_seed(int(seed))
    rows = []
    start = time.time()
    for epoch in range(epochs):
        gamma = gamma_schedule(epoch, epochs)
        stats = reinforce_batch(
            policy,
            optimizer,
            instances,
            n_samples,
            gamma,
            reward_fn,
            generator,
            n_jobs,
            center_rewards,
        )
        rows.append(
            {
                "epoch": epoch,
                "mean_reward": stats["mean_reward"],
                "mean_logprob": stats["mean_logprob"],
                "gamma": gamma,
                "wallclock_ms": int(round((time.time() - start) * 1000)),
            }
        )
        logging.info(
            f"Epoch {epoch}: mean reward {stats['mean_reward']:.4g}, gamma {gamma:.4g}"
        )
    return pd.DataFrame(
        rows, columns=["epoch", "mean_reward", "mean_logprob", "gamma", "wallclock_ms"]
    )


def compositions(resolution: int) -> List[Tuple[int, int, int, int]]:
    """
    All nonnegative integer (b1, b2, b3, b4) summing to resolution, in
    lexicographic order.
    """
    if resolution < 1:
        raise ValueError("resolution must be at least 1.")
    out = []
    for b1, b2, b3 in itertools.product(range(resolution + 1), repeat=3):
        if b1 + b2 + b3 <= resolution:
            out.append((b1, b2, b3, resolution - b1 - b2 - b3))
    if len(out) != comb(resolution + 3, 3, exact=True):
        raise RuntimeError(f"Enumerated {len(out)} compositions of {resolution}.")
    return out


def grid_search(
    inst: MilpInstance, resolution: int, cfg: RolloutConfig, n_jobs: int = 1
) -> Tuple[ScoringWeights, float, pd.DataFrame]:
    """
    Rolls out every weight vector beta / resolution on the simplex grid.

    :param inst: the instance
    :type inst: MilpInstance
    :param resolution: grid resolution, 10 gives steps of 0.1
    :type resolution: int
    :param cfg: separation loop settings
    :type cfg: RolloutConfig
    :param n_jobs: joblib workers. Default value = 1
    :type n_jobs: int

    :return: best weights (lowest lexicographic beta on ties), best gap and
             the table l1, l2, l3, l4, gap, improvement
    :rtype: tuple

    """
    betas = compositions(resolution)
    reference = reference_for(inst, cfg)
    baseline_gap = rollout(inst, cfg.baseline_weights, cfg, reference)
    weights = [
        ScoringWeights.scip_rule([b / resolution for b in beta]) for beta in betas
    ]
    gaps = Parallel(n_jobs=n_jobs)(
        delayed(rollout)(inst, w, cfg, reference) for w in weights
    )
    table = pd.DataFrame([w.as_array() for w in weights], columns=WEIGHT_COLUMNS)
    table["gap"] = gaps
    table["improvement"] = [relative_improvement(baseline_gap, g) for g in gaps]

    best = 0
    for k, g in enumerate(gaps):
        if g < gaps[best]:
            best = k
    logging.info(
        f"Grid search on {inst.name}: best gap {gaps[best]:.6g} at {weights[best].scip}"
    )
    return weights[best], float(gaps[best]), table


def n_best(table: pd.DataFrame, best_gap: float, tol: float = 1e-12) -> int:
    """
    Number of grid points attaining the best gap.
    """
    return int(np.sum(np.abs(table["gap"].to_numpy() - best_gap) <= tol))


def parameter_statistics(table: pd.DataFrame) -> pd.DataFrame:
    """
    Mean, median and standard deviation of each weight over a set of best
    weight vectors (one row per instance).
    """
    missing = set(WEIGHT_COLUMNS) - set(table.columns)
    if missing:
        raise ValueError(f"Table misses columns {sorted(missing)}.")
    stats = table[WEIGHT_COLUMNS].agg(["mean", "median", "std"])
    return stats.reset_index().rename(columns={"index": "statistic"})


def summarize_improvements(values: Sequence[float]) -> dict:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return {"count": 0, "median": np.nan, "mean": np.nan, "share_improved": np.nan}
    return {
        "count": int(arr.size),
        "median": float(np.median(arr)),
        "mean": float(np.mean(arr)),
        "share_improved": float(np.mean(arr > 0)),
    }


def lambda_projection(action: Any) -> Optional[float]:
    """
    Simple rule weight read off a four weight action: a3 / (a3 + a4), or
    None when that is not a weight in [0, 1].
    """
    a = np.asarray(action, dtype=float)
    denom = a[2] + a[3]
    if denom <= 0:
        return None
    lam = a[2] / denom
    if not 0.0 <= lam <= 1.0:
        return None
    return float(lam)


class IntervalReward:
    """
    +1 when the projected simple rule weight makes one round of the pure
    cutting loop on P(a,d) pick GC, -1 otherwise.
    """

    def __init__(self, params: FamilyParams) -> None:
        self.params = params

    def __call__(self, inst: MilpInstance, action: np.ndarray) -> float:
        lam = lambda_projection(action)
        if lam is None:
            return -1.0
        outcome = simulate_pure_cutting(self.params, lam, max_rounds=1)
        return 1.0 if outcome.solved else -1.0


def in_interval_frequency(
    policy: GCNNPolicy,
    inst: MilpInstance,
    interval: GoodCutInterval,
    gamma: float,
    n_draws: int,
    generator: torch.Generator,
) -> float:
    with torch.no_grad():
        mu = policy(encode(inst)).numpy()
    hits = 0
    for _ in range(n_draws):
        lam = lambda_projection(sample_action(mu, gamma, generator).sample)
        hits += int(lam is not None and interval.contains(lam))
    return hits / n_draws


def train_interval_task(
    params: FamilyParams,
    interval: GoodCutInterval,
    epochs: int = 200,
    n_samples: int = 20,
    seed: int = 0,
    lr: float = INTERVAL_LEARNING_RATE,
    emb_size: int = 32,
    n_draws: int = 200,
    n_seeds: int = 1000,
) -> dict:
    """
    Trains a policy on the single instance P(a,d) to put the simple rule
    weight a3 / (a3 + a4) into the good cut interval.

    The policy starts from the seed_search initialization over n_seeds
    candidates and rewards are centred per batch. seed drives the sampling.
    The in-interval frequency is measured on draws around mu at the
    variance of the first epoch before training and of the last epoch
    after it.

    :param params: the adversarial instance
    :type params: FamilyParams
    :param interval: its good cut interval
    :type interval: GoodCutInterval
    :param epochs: training epochs. Default value = 200
    :type epochs: int
    :param n_samples: actions per epoch. Default value = 20
    :type n_samples: int
    :param seed: sampling seed. Default value = 0
    :type seed: int
    :param lr: Adam learning rate. Default value = 2e-3
    :type lr: float
    :param n_seeds: initialization seeds tried. Default value = 1000
    :type n_seeds: int

    :return: before and after frequencies, the training log with a per
             epoch in_interval column, the initialization seed and the
             trained policy
    :rtype: dict
    """
    if epochs < 1:
        raise ValueError("epochs must be at least 1.")
    inst = make_instance(params)
    init_seed = seed_search([encode(inst)], n_seeds, emb_size)
    policy = GCNNPolicy(emb_size, seed=init_seed)
    before = in_interval_frequency(
        policy,
        inst,
        interval,
        gamma_schedule(0, epochs),
        n_draws,
        torch.Generator().manual_seed(seed),
    )
    log = train(
        policy,
        [inst],
        epochs,
        n_samples,
        IntervalReward(params),
        seed=seed,
        lr=lr,
        center_rewards=True,
    )
    # rewards are +-1, so the share of hits is (r + 1) / 2
    log["in_interval"] = (log["mean_reward"] + 1.0) / 2.0
    after = in_interval_frequency(
        policy,
        inst,
        interval,
        gamma_schedule(epochs, epochs),
        n_draws,
        torch.Generator().manual_seed(seed),
    )
    logging.info(f"In-interval frequency {before:.3f} -> {after:.3f}")
    return {
        "before": before,
        "after": after,
        "log": log,
        "init_seed": init_seed,
        "policy": policy,
    }
