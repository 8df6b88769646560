"""Monte Carlo ground truth for the analytic speed pipeline.

The infinite percolation cluster is grown lazily with the green/red
construction: green vertices form the backbone (every green expansion
is conditioned on producing at least one green child by rejection),
red vertices head finite bushes drawn from the subcritical bush law.
A simple random walk runs on the lazily expanded cluster and the speed
is estimated as |X_T| / T averaged over independent replicas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .offspring import FinitePmf
from .percolation import ModelError, PercolatedModel, bush_pmf_iter

GREEN = 0
RED = 1

MAX_REJECTIONS = 10**7
DEFAULT_NODE_CAP = 10**8
_UNIFORM_BLOCK = 8192


class SimulationError(RuntimeError):
    """Rejection cap or arena capacity exhausted."""


@dataclass(frozen=True)
class WalkEstimate:
    """Monte Carlo speed estimate over independent replicas."""

    speed_hat: float
    std_error: float
    replicas: int
    horizon: int
    seed: int
    law_spec: str
    p: float


class BushSampler:
    """Inverse-CDF sampler for the bush offspring law phat.

    The table covers all but the 1e-13 truncated tail; a uniform that
    lands past the covered mass is resampled.
    """

    def __init__(self, model: PercolatedModel):
        cdf = []
        cum = 0.0
        for _, pk in bush_pmf_iter(model):
            cum += pk
            cdf.append(cum)
        self.cdf = cdf
        self.coverage = cum

    def sample(self, rng: np.random.Generator) -> int:
        for _ in range(MAX_REJECTIONS):
            u = rng.random()
            if u < self.coverage:
                # linear scan: bush laws concentrate near 0
                for k, c in enumerate(self.cdf):
                    if u < c:
                        return k
        raise SimulationError("bush sampler exceeded the rejection cap")


class Cluster:
    """Append-only arena of lazily expanded cluster nodes."""

    __slots__ = (
        "model",
        "bush_sampler",
        "parent",
        "depth",
        "color",
        "children",
        "expanded",
        "max_nodes",
    )

    def __init__(self, model: PercolatedModel, bush_sampler: BushSampler | None = None,
                 max_nodes: int = DEFAULT_NODE_CAP):
        self.model = model
        if bush_sampler is None and model.rho > 0.0:
            bush_sampler = BushSampler(model)
        self.bush_sampler = bush_sampler
        self.max_nodes = max_nodes
        # root: green, no parent, depth 0
        self.parent = [-1]
        self.depth = [0]
        self.color = [GREEN]
        self.children = [[]]
        self.expanded = [False]

    def _add_node(self, parent: int, color: int) -> int:
        node = len(self.parent)
        if node >= self.max_nodes:
            raise SimulationError(f"arena capacity {self.max_nodes} exhausted")
        self.parent.append(parent)
        self.depth.append(self.depth[parent] + 1)
        self.color.append(color)
        self.children.append([])
        self.expanded.append(False)
        self.children[parent].append(node)
        return node

    def expand_green(self, node: int, rng: np.random.Generator) -> list[int]:
        """Attach children per the thinned law, colored green w.p. 1-rho,
        rejecting whole assignments until at least one green child exists."""
        if self.color[node] != GREEN or self.expanded[node]:
            raise SimulationError("expand_green needs an unexpanded green node")
        model = self.model
        law, p, rho = model.law, model.p, model.rho
        for _ in range(MAX_REJECTIONS):
            k = law.sample(rng)
            c = int(rng.binomial(k, p)) if k else 0
            if c == 0:
                continue
            greens = int(rng.binomial(c, 1.0 - rho)) if rho > 0.0 else c
            if greens == 0:
                continue
            for _ in range(greens):
                self._add_node(node, GREEN)
            for _ in range(c - greens):
                self._add_node(node, RED)
            self.expanded[node] = True
            return self.children[node]
        raise SimulationError("green expansion exceeded the rejection cap (rho off?)")

    def expand_red(self, node: int, rng: np.random.Generator) -> list[int]:
        """Attach an all-red batch of children drawn from the bush law."""
        if self.color[node] != RED or self.expanded[node]:
            raise SimulationError("expand_red needs an unexpanded red node")
        if self.bush_sampler is None:
            raise ModelError("rho = 0: red vertices cannot exist")
        for _ in range(self.bush_sampler.sample(rng)):
            self._add_node(node, RED)
        self.expanded[node] = True
        return self.children[node]

    def expand(self, node: int, rng: np.random.Generator) -> list[int]:
        if self.color[node] == GREEN:
            return self.expand_green(node, rng)
        return self.expand_red(node, rng)


def run_walk(model: PercolatedModel, horizon: int, rng: np.random.Generator,
             max_nodes: int = DEFAULT_NODE_CAP) -> int:
    """Walk `horizon` steps from the root of a fresh cluster; return |X_T|."""
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    cluster = Cluster(model, max_nodes=max_nodes)
    return _walk(cluster, horizon, rng)


def _walk(cluster: Cluster, horizon: int, rng: np.random.Generator) -> int:
    parent = cluster.parent
    children = cluster.children
    expanded = cluster.expanded
    expand = cluster.expand

    buf = rng.random(_UNIFORM_BLOCK)
    pos = 0
    cur = 0
    for _ in range(horizon):
        if not expanded[cur]:
            expand(cur, rng)
        ch = children[cur]
        par = parent[cur]
        if pos == _UNIFORM_BLOCK:
            buf = rng.random(_UNIFORM_BLOCK)
            pos = 0
        u = buf[pos]
        pos += 1
        if par >= 0:
            j = int(u * (len(ch) + 1))
            cur = par if j == 0 else ch[j - 1]
        else:
            cur = ch[int(u * len(ch))]
    return cluster.depth[cur]


def walk_path(cluster: Cluster, horizon: int, rng: np.random.Generator) -> list[int]:
    """Like _walk but records the visited node ids (root included).

    Consumes randomness exactly as _walk does, so the final node's depth
    equals run_walk's return value for an identically seeded rng.
    """
    parent = cluster.parent
    children = cluster.children
    expanded = cluster.expanded

    buf = rng.random(_UNIFORM_BLOCK)
    pos = 0
    cur = 0
    path = [0]
    for _ in range(horizon):
        if not expanded[cur]:
            cluster.expand(cur, rng)
        ch = children[cur]
        par = parent[cur]
        if pos == _UNIFORM_BLOCK:
            buf = rng.random(_UNIFORM_BLOCK)
            pos = 0
        u = buf[pos]
        pos += 1
        if par >= 0:
            j = int(u * (len(ch) + 1))
            cur = par if j == 0 else ch[j - 1]
        else:
            cur = ch[int(u * len(ch))]
        path.append(cur)
    return path


def _replica_rng(seed: int, replica: int) -> np.random.Generator:
    # documented splitting rule: sub-stream r is default_rng([seed, r])
    return np.random.default_rng([seed, replica])


def _aggregate(speeds, replicas, horizon, seed, law_spec, p) -> WalkEstimate:
    arr = np.asarray(speeds, dtype=float)
    return WalkEstimate(
        speed_hat=float(arr.mean()),
        std_error=float(arr.std(ddof=1) / math.sqrt(replicas)),
        replicas=replicas,
        horizon=horizon,
        seed=seed,
        law_spec=law_spec,
        p=p,
    )


def estimate_speed(model: PercolatedModel, horizon: int, replicas: int,
                   seed: int) -> WalkEstimate:
    """Mean and standard error of |X_T|/T over independent replicas.

    Each replica walks on a fresh independently sampled cluster with its
    own rng sub-stream, so any replica reproduces in isolation.
    """
    if horizon < 10**3:
        raise ValueError(f"horizon must be >= 1000, got {horizon}")
    if replicas < 2:
        raise ValueError(f"replicas must be >= 2, got {replicas}")
    sampler = BushSampler(model) if model.rho > 0.0 else None
    speeds = []
    for r in range(replicas):
        rng = _replica_rng(seed, r)
        cluster = Cluster(model, bush_sampler=sampler)
        speeds.append(_walk(cluster, horizon, rng) / horizon)
    return _aggregate(speeds, replicas, horizon, seed,
                      model.law.spec_string(), model.p)


class PipesCluster:
    """Binary-tree skeleton cluster where every skeleton vertex carries a
    pipe: a dangling path of geometric(1-p) many open edges."""

    __slots__ = ("skeleton", "p", "bush_sampler", "parent", "depth",
                 "children", "pending")

    def __init__(self, skeleton_model: PercolatedModel):
        self.skeleton = skeleton_model
        self.p = skeleton_model.p
        self.bush_sampler = BushSampler(skeleton_model)
        self.parent = [-1]
        self.depth = [0]
        # children[node] is None until the node is expanded
        self.children = [None]
        # colors of not-yet-expanded skeleton vertices; pipe vertices
        # are fully built at creation and never appear here
        self.pending = {0: GREEN}

    def _add_skeleton(self, parent_node: int, color: int) -> int:
        node = len(self.parent)
        self.parent.append(parent_node)
        self.depth.append(self.depth[parent_node] + 1)
        self.children.append(None)
        self.children[parent_node].append(node)
        self.pending[node] = color
        return node

    def _add_pipe(self, root: int, length: int) -> None:
        prev = root
        for _ in range(length):
            node = len(self.parent)
            self.parent.append(prev)
            self.depth.append(self.depth[prev] + 1)
            self.children.append([])
            self.children[prev].append(node)
            prev = node

    def expand(self, node: int, rng: np.random.Generator) -> None:
        color = self.pending.pop(node)
        self.children[node] = []
        skel = self.skeleton
        if color == GREEN:
            for _ in range(MAX_REJECTIONS):
                c = int(rng.binomial(2, skel.p))
                if c == 0:
                    continue
                greens = int(rng.binomial(c, 1.0 - skel.rho))
                if greens == 0:
                    continue
                for _ in range(greens):
                    self._add_skeleton(node, GREEN)
                for _ in range(c - greens):
                    self._add_skeleton(node, RED)
                break
            else:
                raise SimulationError("green expansion exceeded the rejection cap")
        else:
            for _ in range(self.bush_sampler.sample(rng)):
                self._add_skeleton(node, RED)
        # pipe: number of consecutive open edges ~ failures before the
        # first closed edge, P(L = l) = p^l (1-p), mean p/(1-p)
        self._add_pipe(node, int(rng.geometric(1.0 - self.p)) - 1)


def simulate_pipes(p: float, horizon: int, replicas: int, seed: int) -> WalkEstimate:
    """Monte Carlo speed on the percolated binary tree with pipes."""
    if not 0.5 < p < 1.0:
        raise ModelError(f"pipes simulation needs p in (1/2, 1), got {p}")
    if horizon < 10**3:
        raise ValueError(f"horizon must be >= 1000, got {horizon}")
    if replicas < 2:
        raise ValueError(f"replicas must be >= 2, got {replicas}")
    skeleton = PercolatedModel(FinitePmf([0.0, 0.0, 1.0]), p)
    speeds = []
    for r in range(replicas):
        rng = _replica_rng(seed, r)
        speeds.append(_walk_pipes(skeleton, horizon, rng) / horizon)
    return _aggregate(speeds, replicas, horizon, seed, "pipes", p)


def _walk_pipes(skeleton: PercolatedModel, horizon: int,
                rng: np.random.Generator) -> int:
    cluster = PipesCluster(skeleton)
    parent = cluster.parent
    children = cluster.children
    expand = cluster.expand

    buf = rng.random(_UNIFORM_BLOCK)
    pos = 0
    cur = 0
    for _ in range(horizon):
        if children[cur] is None:
            expand(cur, rng)
        ch = children[cur]
        par = parent[cur]
        if pos == _UNIFORM_BLOCK:
            buf = rng.random(_UNIFORM_BLOCK)
            pos = 0
        u = buf[pos]
        pos += 1
        deg = len(ch) + (par >= 0)
        if deg == 0:
            continue  # isolated root with no open edges cannot occur (green)
        if par >= 0:
            j = int(u * deg)
            cur = par if j == 0 else ch[j - 1]
        else:
            cur = ch[int(u * deg)]
    return cluster.depth[cur]
