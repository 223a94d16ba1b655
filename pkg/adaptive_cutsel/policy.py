import logging
import struct
from collections import OrderedDict
from typing import Any, Dict, Sequence, Union

import numpy as np
import torch
import torch.nn as nn
from torch.distributions import Normal

from .classes import BipartiteGraph, GaussianAction
from .graph import N_FEATURES

N_ACTIONS = 4
EMB_SIZE = 32
DTYPE = torch.float64

CHECKPOINT_MAGIC = b"ACSP"
CHECKPOINT_VERSION = 1
CHECKPOINT_HEADER = struct.Struct("<4sIQ")

UNIFORM_TARGET = 0.25


class HalfConvolution(nn.Module):
    """
    One message passing pass from source nodes to target nodes. Along each
    edge (s, t) the message relu(msg [h_s ; e_st ; h_t]) is formed, messages
    are averaged per target (zero for targets without edges) and the target
    is updated to relu(upd [h_t ; mean message]).

    :param emb_size: embedding width
    :type emb_size: int
    """

    def __init__(self, emb_size: int) -> None:
        super(HalfConvolution, self).__init__()
        self.msg = nn.Linear(2 * emb_size + 1, emb_size, dtype=DTYPE)
        self.upd = nn.Linear(2 * emb_size, emb_size, dtype=DTYPE)

    def forward(
        self,
        h_src: torch.Tensor,
        h_tgt: torch.Tensor,
        src: torch.Tensor,
        tgt: torch.Tensor,
        edge_val: torch.Tensor,
    ) -> torch.Tensor:
        n_tgt = h_tgt.shape[0]
        messages = torch.relu(
            self.msg(torch.cat([h_src[src], edge_val.unsqueeze(1), h_tgt[tgt]], dim=1))
        )
        total = torch.zeros(n_tgt, h_tgt.shape[1], dtype=DTYPE).index_add_(0, tgt, messages)
        counts = torch.zeros(n_tgt, dtype=DTYPE).index_add_(
            0, tgt, torch.ones(tgt.shape[0], dtype=DTYPE)
        )
        mean = total / counts.clamp(min=1.0).unsqueeze(1)
        return torch.relu(self.upd(torch.cat([h_tgt, mean], dim=1)))


class GCNNPolicy(nn.Module):
    """
    Graph convolutional policy mapping an instance graph to the mean of a
    Gaussian over the four cut scoring weights.

    Variables and constraints are embedded to emb_size, one pass updates the
    constraints from the variables, a second pass updates the variables from
    the constraints, a linear head maps each variable to four outputs and μ
    is their mean over variable nodes.

    :param emb_size: embedding width. Default value = 32
    :type emb_size: int
    :param seed: seed of the torch generator used for initialization.
                Default value = 0
    :type seed: int
    """

    def __init__(self, emb_size: int = EMB_SIZE, seed: int = 0) -> None:
        super(GCNNPolicy, self).__init__()
        if emb_size < 1:
            raise ValueError("emb_size must be at least 1.")
        self.emb_size = emb_size
        self.seed = seed
        self.embed_v = nn.Linear(N_FEATURES, emb_size, dtype=DTYPE)
        self.embed_c = nn.Linear(N_FEATURES, emb_size, dtype=DTYPE)
        self.conv_vc = HalfConvolution(emb_size)
        self.conv_cv = HalfConvolution(emb_size)
        self.head = nn.Linear(emb_size, N_ACTIONS, dtype=DTYPE)
        self.reset_parameters(seed)

    def reset_parameters(self, seed: int) -> None:
        """
        Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases of
        every affine map, drawn from torch.Generator().manual_seed(seed).
        """
        gen = torch.Generator().manual_seed(int(seed))
        with torch.no_grad():
            for module in self.modules():
                if isinstance(module, nn.Linear):
                    bound = 1.0 / np.sqrt(module.in_features)
                    module.weight.uniform_(-bound, bound, generator=gen)
                    module.bias.uniform_(-bound, bound, generator=gen)

    def forward(self, g: BipartiteGraph) -> torch.Tensor:
        V = torch.as_tensor(g.V, dtype=DTYPE)
        C = torch.as_tensor(g.C, dtype=DTYPE).reshape(-1, N_FEATURES)
        cons = torch.as_tensor(g.edge_cons, dtype=torch.long)
        var = torch.as_tensor(g.edge_var, dtype=torch.long)
        val = torch.as_tensor(g.edge_val, dtype=DTYPE)

        h_v = torch.relu(self.embed_v(V))
        h_c = torch.relu(self.embed_c(C))
        h_c = self.conv_vc(h_v, h_c, var, cons, val)
        h_v = self.conv_cv(h_c, h_v, cons, var, val)
        return self.head(h_v).mean(dim=0)

    def n_parameters(self) -> int:
        return sum(p.numel() for p in self.parameters())


def forward(g: BipartiteGraph, policy: GCNNPolicy) -> np.ndarray:
    with torch.no_grad():
        return policy(g).numpy().copy()


def _generator(seed: Union[int, torch.Generator]) -> torch.Generator:
    if isinstance(seed, torch.Generator):
        return seed
    return torch.Generator().manual_seed(int(seed))


def _check_gamma(gamma: float) -> None:
    if not gamma > 0:
        raise ValueError(f"gamma = {gamma} must be positive.")


def logprob(mu: Any, gamma: float, sample: Any) -> torch.Tensor:
    """
    Log density of N(mu, gamma I) at sample, summed over the four components.
    Differentiable in mu when mu is a tensor with gradients.
    """
    _check_gamma(gamma)
    mu = torch.as_tensor(mu, dtype=DTYPE)
    sample = torch.as_tensor(sample, dtype=DTYPE)
    return Normal(mu, float(np.sqrt(gamma))).log_prob(sample).sum()


def sample_action(
    mu: Any, gamma: float, seed: Union[int, torch.Generator] = 0
) -> GaussianAction:
    """
    Draws mu + sqrt(gamma) z with z from torch.randn on a seeded
    torch.Generator.

    :param mu: Gaussian mean, length 4
    :type mu: numpy.ndarray
    :param gamma: variance of each component
    :type gamma: float
    :param seed: an integer seed or a generator to continue from
    :type seed: Union[int, torch.Generator]

    :return: the action with its log-probability
    :rtype: GaussianAction

    """
    _check_gamma(gamma)
    mu_t = torch.as_tensor(np.asarray(mu, dtype=float), dtype=DTYPE).detach()
    z = torch.randn(mu_t.shape, generator=_generator(seed), dtype=DTYPE)
    sample = mu_t + float(np.sqrt(gamma)) * z
    return GaussianAction(
        mu=mu_t.numpy().copy(),
        gamma=float(gamma),
        sample=sample.numpy().copy(),
        logprob=float(logprob(mu_t, gamma, sample)),
    )


def grad_logprob(
    g: BipartiteGraph, policy: GCNNPolicy, action: GaussianAction
) -> Dict[str, np.ndarray]:
    """
    Gradient of log pi(action | g) with respect to every policy parameter.

    :return: parameter name to gradient, in parameter order
    :rtype: OrderedDict
    """
    params = [p for _, p in policy.named_parameters()]
    lp = logprob(policy(g), action.gamma, action.sample)
    grads = torch.autograd.grad(lp, params, allow_unused=True)
    out: Dict[str, np.ndarray] = OrderedDict()
    for (name, p), grad in zip(policy.named_parameters(), grads):
        out[name] = np.zeros(tuple(p.shape)) if grad is None else grad.numpy().copy()
    return out


def gamma_schedule(i_epoch: int, n_epochs: int) -> float:
    if n_epochs < 1:
        raise ValueError("n_epochs must be at least 1.")
    if not 0 <= i_epoch <= n_epochs:
        raise ValueError(f"Epoch {i_epoch} is outside [0, {n_epochs}].")
    return 0.01 - 0.009 * i_epoch / n_epochs


def seed_objective(policy: GCNNPolicy, graphs: Sequence[BipartiteGraph]) -> float:
    total = 0.0
    for g in graphs:
        total += float(np.sum(np.abs(forward(g, policy) - UNIFORM_TARGET)))
    return total


def seed_search(
    graphs: Sequence[BipartiteGraph], n_seeds: int, emb_size: int = EMB_SIZE
) -> int:
    """
    Picks the initialization seed whose policy outputs are closest to equal
    weights, summing the L1 distance of mu to (1/4, 1/4, 1/4, 1/4) over
    graphs. Ties go to the lowest seed.

    :param graphs: encoded training instances
    :type graphs: Sequence[BipartiteGraph]
    :param n_seeds: seeds 0 .. n_seeds - 1 are tried
    :type n_seeds: int
    :param emb_size: embedding width. Default value = 32
    :type emb_size: int

    :return: the chosen seed
    :rtype: int

    """
    if len(graphs) == 0:
        raise ValueError("seed_search needs at least one graph.")
    if n_seeds < 1:
        raise ValueError("n_seeds must be at least 1.")
    best_seed, best_value = 0, np.inf
    for seed in range(n_seeds):
        value = seed_objective(GCNNPolicy(emb_size, seed=seed), graphs)
        if value < best_value:
            best_seed, best_value = seed, value
    logging.info(f"Seed search chose seed {best_seed} with objective {best_value:.6g}")
    return best_seed


def flat_parameters(policy: GCNNPolicy) -> np.ndarray:
    return np.concatenate(
        [p.detach().numpy().ravel() for p in policy.parameters()]
    ).astype("<f8")


def save_checkpoint(policy: GCNNPolicy, output: str) -> str:
    """
    Writes the little-endian header (magic, version, parameter count)
    followed by all parameters as f64 in parameter order.
    """
    flat = flat_parameters(policy)
    with open(output, "wb") as f:
        f.write(CHECKPOINT_HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, flat.size))
        f.write(flat.tobytes())
    return output


def load_checkpoint(path: str, emb_size: int = EMB_SIZE) -> GCNNPolicy:
    """
    Reads a checkpoint written by save_checkpoint into a fresh policy.

    :param path: checkpoint file
    :type path: str
    :param emb_size: embedding width the checkpoint was trained with
    :type emb_size: int

    :return: the policy
    :rtype: GCNNPolicy

    """
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < CHECKPOINT_HEADER.size:
        raise ValueError(f"Checkpoint {path} is truncated.")
    magic, version, count = CHECKPOINT_HEADER.unpack_from(raw)
    if magic != CHECKPOINT_MAGIC:
        raise ValueError(f"{path} is not a policy checkpoint.")
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"Checkpoint version {version} is not supported.")
    policy = GCNNPolicy(emb_size)
    if count != policy.n_parameters():
        raise ValueError(
            f"Checkpoint shape mismatch: {count} parameters, model has {policy.n_parameters()}."
        )
    flat = np.frombuffer(raw, dtype="<f8", offset=CHECKPOINT_HEADER.size)
    if flat.size != count:
        raise ValueError(f"Checkpoint {path} is truncated.")
    with torch.no_grad():
        start = 0
        for p in policy.parameters():
            size = p.numel()
            p.copy_(torch.as_tensor(flat[start : start + size].copy()).reshape(p.shape))
            start += size
    return policy
