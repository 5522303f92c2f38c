"""Goal-issuing supervisor: capability encoders, context fusion, recurrent actor-critic.

Per agent, a private 2-layer encoder projects the capability vector and a
1-layer merger folds in the agent's current (state, action, goal) tuple. A
shared 3-layer fusion block combines all embeddings with the normalized
global targets into a context vector; a 2-layer GRU actor with one softmax
head per goal slot emits goal rungs, and a 2-layer dense critic scores the
context. Training is episodic advantage actor-critic with backpropagation
through the whole episode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import slice_sim
from .agents import (
    ACHIEVEMENT_HORIZON,
    AgentId,
    CapabilityVector,
    GOAL_LEVELS,
    KnobAction,
    PL_SCALE,
    QTable,
    agent_roster,
    apply_action,
    goal_achieved,
    goal_value,
    nearest_goal_level,
    normalize_goal,
    observe,
    select_action,
)
from .config import ScenarioConfig
from .errors import TrainingDivergence
from .nn import (
    DenseLayer,
    GruCell,
    OptimizerState,
    adam_step,
    dense_backward,
    dense_forward,
    gru_forward,
    gru_sequence_backward,
    log_softmax,
    softmax,
    softmax_sample,
)
from .slice_sim import KpiKind, KpiReport, NetworkState

N_ACTION_ONEHOT = 3
TUPLE_DIM = 4 + N_ACTION_ONEHOT + 1  # observation, one-hot action, normalized goal


class GoalMode(str, Enum):
    AGENT_LEVEL = "agent"  # one head per agent (2K heads)
    SERVICE_LEVEL = "service"  # one head per intent, broadcast to both planes


@dataclass(frozen=True)
class GlobalIntent:
    name: str
    kpi_kind: KpiKind
    target: float

    @property
    def normalized_target(self) -> float:
        if self.kpi_kind is KpiKind.QOE:
            return (self.target - 1.0) / 4.0
        return self.target / PL_SCALE


def intents_of(config: ScenarioConfig) -> list[GlobalIntent]:
    return [GlobalIntent(s.name, s.kpi_kind, s.kpi_target) for s in config.services]


@dataclass
class GoalAssignment:
    """Per-agent goal, as a ladder rung where applicable plus its KPI value."""

    levels: dict[str, int]
    values: dict[str, float]

    def __len__(self) -> int:
        return len(self.values)


@dataclass
class ActorHidden:
    h1: np.ndarray
    h2: np.ndarray

    @classmethod
    def zeros(cls, size: int) -> "ActorHidden":
        return cls(h1=np.zeros(size), h2=np.zeros(size))


@dataclass
class PolicyDims:
    encoder: int = 32
    merger: int = 32
    fusion: int = 64
    gru: int = 64


@dataclass
class SupervisorPolicy:
    mode: GoalMode
    agents: list[AgentId]
    n_intents: int
    dims: PolicyDims
    encoders: list[list[DenseLayer]]  # one 2-layer stack per agent
    mergers: list[DenseLayer]  # one per agent
    fusion: list[DenseLayer]  # shared, 3 layers
    gru: list[GruCell]  # 2 stacked cells
    heads: list[DenseLayer]  # one linear head per goal slot
    critic: list[DenseLayer]  # 2 layers to a scalar

    @property
    def n_heads(self) -> int:
        return len(self.heads)

    def named_params(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for i, stack in enumerate(self.encoders):
            for j, layer in enumerate(stack):
                for name, arr in layer.params().items():
                    out[f"enc{i}_l{j}.{name}"] = arr
        for i, layer in enumerate(self.mergers):
            for name, arr in layer.params().items():
                out[f"mrg{i}.{name}"] = arr
        for j, layer in enumerate(self.fusion):
            for name, arr in layer.params().items():
                out[f"fus_l{j}.{name}"] = arr
        for j, cell in enumerate(self.gru):
            for name, arr in cell.params().items():
                out[f"gru_l{j}.{name}"] = arr
        for i, layer in enumerate(self.heads):
            for name, arr in layer.params().items():
                out[f"head{i}.{name}"] = arr
        for j, layer in enumerate(self.critic):
            for name, arr in layer.params().items():
                out[f"crit_l{j}.{name}"] = arr
        return out


def create_policy(
    rng: np.random.Generator,
    config: ScenarioConfig,
    mode: GoalMode = GoalMode.AGENT_LEVEL,
    dims: PolicyDims | None = None,
) -> SupervisorPolicy:
    dims = dims or PolicyDims()
    agents = agent_roster(config)
    k = config.intent_count
    n_heads = len(agents) if mode is GoalMode.AGENT_LEVEL else k
    fusion_in = len(agents) * dims.merger + k
    encoders = [
        [
            DenseLayer.create(rng, GOAL_LEVELS, dims.encoder, "tanh"),
            DenseLayer.create(rng, dims.encoder, dims.encoder, "tanh"),
        ]
        for _ in agents
    ]
    mergers = [DenseLayer.create(rng, dims.encoder + TUPLE_DIM, dims.merger, "tanh") for _ in agents]
    fusion = [
        DenseLayer.create(rng, fusion_in, dims.fusion, "tanh"),
        DenseLayer.create(rng, dims.fusion, dims.fusion, "tanh"),
        DenseLayer.create(rng, dims.fusion, dims.fusion, "tanh"),
    ]
    gru = [GruCell.create(rng, dims.fusion, dims.gru), GruCell.create(rng, dims.gru, dims.gru)]
    heads = [DenseLayer.create(rng, dims.gru, GOAL_LEVELS, "identity") for _ in range(n_heads)]
    critic = [
        DenseLayer.create(rng, dims.fusion, dims.fusion, "tanh"),
        DenseLayer.create(rng, dims.fusion, 1, "identity"),
    ]
    return SupervisorPolicy(
        mode=mode,
        agents=agents,
        n_intents=k,
        dims=dims,
        encoders=encoders,
        mergers=mergers,
        fusion=fusion,
        gru=gru,
        heads=heads,
        critic=critic,
    )


# ---------------------------------------------------------------------------
# forward pieces


def encode_capability(policy: SupervisorPolicy, agent_idx: int, gamma: np.ndarray):
    """Project one agent's capability vector through its private encoder."""
    caches = []
    h = gamma
    for layer in policy.encoders[agent_idx]:
        h, cache = dense_forward(layer, h)
        caches.append(cache)
    return h, caches


def merge(policy: SupervisorPolicy, agent_idx: int, latent: np.ndarray, tuple_vec: np.ndarray):
    """Fold the (state, action, goal) tuple into the capability latent."""
    x = np.concatenate([latent, tuple_vec])
    return dense_forward(policy.mergers[agent_idx], x)


def fuse(policy: SupervisorPolicy, embeddings: list[np.ndarray], targets_norm: np.ndarray):
    """Concatenate all agent embeddings (fixed roster order) with the targets."""
    if len(embeddings) != len(policy.agents):
        raise ValueError(f"expected {len(policy.agents)} embeddings, got {len(embeddings)}")
    x = np.concatenate(embeddings + [targets_norm])
    caches = []
    h = x
    for layer in policy.fusion:
        h, cache = dense_forward(layer, h)
        caches.append(cache)
    return h, caches


@dataclass
class StepForward:
    """All intermediate values of one supervisor forward step."""

    context: np.ndarray
    value: float
    logits: list[np.ndarray]
    hidden: ActorHidden
    enc_caches: list
    mrg_caches: list
    fus_caches: list
    gru_caches: tuple
    head_caches: list
    crit_caches: list


def forward_step(
    policy: SupervisorPolicy,
    gammas: list[np.ndarray],
    tuples: list[np.ndarray],
    targets_norm: np.ndarray,
    hidden: ActorHidden,
) -> StepForward:
    enc_caches, mrg_caches, embeddings = [], [], []
    for i in range(len(policy.agents)):
        latent, ec = encode_capability(policy, i, gammas[i])
        m, mc = merge(policy, i, latent, tuples[i])
        enc_caches.append(ec)
        mrg_caches.append(mc)
        embeddings.append(m)
    context, fus_caches = fuse(policy, embeddings, targets_norm)
    h1, cache1 = gru_forward(policy.gru[0], context, hidden.h1)
    h2, cache2 = gru_forward(policy.gru[1], h1, hidden.h2)
    logits = []
    head_caches = []
    for layer in policy.heads:
        lg, hc = dense_forward(layer, h2)
        logits.append(lg)
        head_caches.append(hc)
    v = context
    crit_caches = []
    for layer in policy.critic:
        v, cc = dense_forward(layer, v)
        crit_caches.append(cc)
    return StepForward(
        context=context,
        value=float(v[0]),
        logits=logits,
        hidden=ActorHidden(h1=h1, h2=h2),
        enc_caches=enc_caches,
        mrg_caches=mrg_caches,
        fus_caches=fus_caches,
        gru_caches=(cache1, cache2),
        head_caches=head_caches,
        crit_caches=crit_caches,
    )


def assignment_from_levels(policy: SupervisorPolicy, config: ScenarioConfig, levels: list[int]) -> GoalAssignment:
    """Map head outputs to per-agent goals (broadcast in service mode)."""
    lvl_map: dict[str, int] = {}
    val_map: dict[str, float] = {}
    if policy.mode is GoalMode.AGENT_LEVEL:
        for agent, level in zip(policy.agents, levels):
            kind = config.services[agent.intent_index].kpi_kind
            lvl_map[agent.key] = level
            val_map[agent.key] = goal_value(kind, level)
    else:
        for agent in policy.agents:
            level = levels[agent.intent_index]
            kind = config.services[agent.intent_index].kpi_kind
            lvl_map[agent.key] = level
            val_map[agent.key] = goal_value(kind, level)
    return GoalAssignment(levels=lvl_map, values=val_map)


def act(
    policy: SupervisorPolicy,
    config: ScenarioConfig,
    gammas: list[np.ndarray],
    tuples: list[np.ndarray],
    targets_norm: np.ndarray,
    hidden: ActorHidden,
    rng: np.random.Generator,
    explore: bool,
) -> tuple[GoalAssignment, np.ndarray, ActorHidden, StepForward]:
    """One supervisor decision; returns goals, per-head log-probs, new hidden."""
    fwd = forward_step(policy, gammas, tuples, targets_norm, hidden)
    levels = []
    log_probs = np.zeros(policy.n_heads)
    for i, logits in enumerate(fwd.logits):
        if explore:
            idx, lp = softmax_sample(logits, rng)
        else:
            if not np.all(np.isfinite(logits)):
                raise FloatingPointError("non-finite actor logits")
            idx = int(np.argmax(logits))
            lp = float(log_softmax(logits)[idx])
        levels.append(idx + 1)
        log_probs[i] = lp
    assignment = assignment_from_levels(policy, config, levels)
    return assignment, log_probs, fwd.hidden, fwd


def supervisor_reward(report: KpiReport, intents: list[GlobalIntent]) -> float:
    """Shortfall-only deviation penalty plus a bonus when every intent is met."""
    total_dev = 0.0
    for k, intent in enumerate(intents):
        kpi = float(report.kpi[k])
        if intent.kpi_kind is KpiKind.QOE:
            dev = max(0.0, (intent.target - kpi) / intent.target)
        else:
            dev = max(0.0, (kpi - intent.target) / intent.target)
        total_dev += dev
    return -total_dev + (1.0 if total_dev == 0.0 else 0.0)


# ---------------------------------------------------------------------------
# capability bookkeeping during supervisor training


class CapabilityTracker:
    """Online EMA of goal-achievement per agent while assignments run."""

    def __init__(self, capabilities: dict[str, CapabilityVector], config: ScenarioConfig, factor: float = 0.05):
        self.capabilities = capabilities
        self.config = config
        self.factor = factor
        self._active: dict[str, tuple[int, int, bool]] = {}  # key -> (level, steps, achieved)

    def observe_step(self, assignment: GoalAssignment, report: KpiReport, roster: list[AgentId]):
        for agent in roster:
            key = agent.key
            level = assignment.levels.get(key)
            if level is None:
                continue
            svc = self.config.services[agent.intent_index]
            kpi = float(report.kpi[agent.intent_index])
            active = self._active.get(key)
            if active is None or active[0] != level:
                if active is not None:
                    self.capabilities[key].ema_update(active[0], active[2], self.factor)
                active = (level, 0, False)
            lvl, steps, achieved = active
            steps += 1
            if steps <= ACHIEVEMENT_HORIZON and goal_achieved(kpi, goal_value(svc.kpi_kind, lvl), svc.kpi_kind):
                achieved = True
            if steps >= ACHIEVEMENT_HORIZON:
                self.capabilities[key].ema_update(lvl, achieved, self.factor)
                steps, achieved = 0, False
            self._active[key] = (lvl, steps, achieved)

    def flush(self):
        for key, (lvl, steps, achieved) in self._active.items():
            if steps > 0:
                self.capabilities[key].ema_update(lvl, achieved, self.factor)
        self._active.clear()


# ---------------------------------------------------------------------------
# episodic A2C training


@dataclass
class TrainConfig:
    episodes: int = 400
    episode_length: int = 40
    discount: float = 0.95
    entropy_coef: float = 0.01
    learning_rate: float = 1e-3
    critic_coef: float = 0.5
    grad_clip: float = 5.0
    normalize_advantage: bool = True
    # fraction of training episodes that start from randomized knob settings,
    # so the goal policy learns recovery behavior beyond the canonical
    # default-start transient
    exploring_starts: float = 0.5


@dataclass
class EpisodeTrajectory:
    """Leaf inputs and outcomes of one rollout, enough to replay the forward."""

    gammas: list[list[np.ndarray]] = field(default_factory=list)  # [t][agent]
    tuples: list[list[np.ndarray]] = field(default_factory=list)
    targets: np.ndarray | None = None
    sampled_levels: list[list[int]] = field(default_factory=list)  # [t][head]
    rewards: list[float] = field(default_factory=list)
    forwards: list[StepForward] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rewards)


def discounted_returns(rewards: list[float], gamma: float) -> np.ndarray:
    out = np.zeros(len(rewards))
    acc = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        acc = rewards[t] + gamma * acc
        out[t] = acc
    return out


def episode_gradients(
    policy: SupervisorPolicy,
    traj: EpisodeTrajectory,
    advantages: np.ndarray,
    returns: np.ndarray,
    cfg: TrainConfig,
) -> tuple[dict[str, np.ndarray], dict[str, float]]:
    """Backpropagate the A2C loss through the episode.

    Advantages are treated as constants. Returns (gradients, loss terms).
    """
    grads = {k: np.zeros_like(v) for k, v in policy.named_params().items()}
    T = len(traj)
    dh2_list = []
    actor_loss = 0.0
    entropy_total = 0.0
    critic_loss = 0.0
    dc_direct = [np.zeros(policy.dims.fusion) for _ in range(T)]

    for t in range(T):
        fwd = traj.forwards[t]
        dh2 = np.zeros(policy.dims.gru)
        for i, layer in enumerate(policy.heads):
            logits = fwd.logits[i]
            probs = softmax(logits)
            logp = log_softmax(logits)
            chosen = traj.sampled_levels[t][i] - 1
            onehot = np.zeros_like(probs)
            onehot[chosen] = 1.0
            entropy = float(-(probs * logp).sum())
            actor_loss += -advantages[t] * float(logp[chosen]) - cfg.entropy_coef * entropy
            entropy_total += entropy
            dlogits = advantages[t] * (probs - onehot)
            dlogits += cfg.entropy_coef * probs * (logp + entropy)
            layer_grads, dh = dense_backward(layer, fwd.head_caches[i], dlogits)
            for name, g in layer_grads.items():
                grads[f"head{i}.{name}"] += g
            dh2 += dh
        dh2_list.append(dh2)

        # critic: 0.5-weighted squared error on the context value
        err = fwd.value - returns[t]
        critic_loss += cfg.critic_coef * err * err
        dval = np.array([2.0 * cfg.critic_coef * err])
        dv = dval
        for j in range(len(policy.critic) - 1, -1, -1):
            layer_grads, dv = dense_backward(policy.critic[j], fwd.crit_caches[j], dv)
            for name, g in layer_grads.items():
                grads[f"crit_l{j}.{name}"] += g
        dc_direct[t] += dv

    # BPTT through the two stacked GRU cells
    caches2 = [traj.forwards[t].gru_caches[1] for t in range(T)]
    gru2_grads, dh1_list, _ = gru_sequence_backward(policy.gru[1], caches2, dh2_list)
    for name, g in gru2_grads.items():
        grads[f"gru_l1.{name}"] += g
    caches1 = [traj.forwards[t].gru_caches[0] for t in range(T)]
    gru1_grads, dcontext_list, _ = gru_sequence_backward(policy.gru[0], caches1, dh1_list)
    for name, g in gru1_grads.items():
        grads[f"gru_l0.{name}"] += g

    # fusion, mergers, encoders per step
    n_agents = len(policy.agents)
    for t in range(T):
        fwd = traj.forwards[t]
        dc = dc_direct[t] + dcontext_list[t]
        dx = dc
        for j in range(len(policy.fusion) - 1, -1, -1):
            layer_grads, dx = dense_backward(policy.fusion[j], fwd.fus_caches[j], dx)
            for name, g in layer_grads.items():
                grads[f"fus_l{j}.{name}"] += g
        for i in range(n_agents):
            dm = dx[i * policy.dims.merger : (i + 1) * policy.dims.merger]
            layer_grads, dmx = dense_backward(policy.mergers[i], fwd.mrg_caches[i], dm)
            for name, g in layer_grads.items():
                grads[f"mrg{i}.{name}"] += g
            dlatent = dmx[: policy.dims.encoder]
            dh = dlatent
            for j in range(len(policy.encoders[i]) - 1, -1, -1):
                layer_grads, dh = dense_backward(policy.encoders[i][j], fwd.enc_caches[i][j], dh)
                for name, g in layer_grads.items():
                    grads[f"enc{i}_l{j}.{name}"] += g

    losses = {
        "actor": float(actor_loss),
        "critic": float(critic_loss),
        "entropy": float(entropy_total),
    }
    return grads, losses


def episode_loss(
    policy: SupervisorPolicy,
    traj: EpisodeTrajectory,
    advantages: np.ndarray,
    returns: np.ndarray,
    cfg: TrainConfig,
) -> float:
    """Recompute the scalar A2C loss from leaf inputs (finite-difference oracle hook)."""
    hidden = ActorHidden.zeros(policy.dims.gru)
    total = 0.0
    for t in range(len(traj)):
        fwd = forward_step(policy, traj.gammas[t], traj.tuples[t], traj.targets, hidden)
        hidden = fwd.hidden
        for i in range(policy.n_heads):
            logp = log_softmax(fwd.logits[i])
            probs = softmax(fwd.logits[i])
            entropy = float(-(probs * logp).sum())
            chosen = traj.sampled_levels[t][i] - 1
            total += -advantages[t] * float(logp[chosen]) - cfg.entropy_coef * entropy
        err = fwd.value - returns[t]
        total += cfg.critic_coef * err * err
    return float(total)


def _clip_grads(grads: dict[str, np.ndarray], max_norm: float):
    total = np.sqrt(sum(float((g * g).sum()) for g in grads.values()))
    if total > max_norm > 0:
        scale = max_norm / total
        for g in grads.values():
            g *= scale
    return total


@dataclass
class TrainStats:
    episode_rewards: list[float]
    grad_norms: list[float]
    diverged: bool = False

    @property
    def final_mean_reward(self) -> float:
        tail = self.episode_rewards[-max(len(self.episode_rewards) // 5, 1):]
        return float(np.mean(tail))


def rollout_episode(
    policy: SupervisorPolicy,
    config: ScenarioConfig,
    qtables: dict[str, QTable],
    capabilities: dict[str, CapabilityVector],
    rng: np.random.Generator,
    episode_length: int,
    explore: bool,
    tracker: CapabilityTracker | None = None,
    shift_schedule: list[tuple[int, slice_sim.DistributionSpec]] | None = None,
    randomize_start: bool = False,
) -> EpisodeTrajectory:
    """Run one closed-loop episode with the frozen agents in the loop."""
    intents = intents_of(config)
    targets_norm = np.array([it.normalized_target for it in intents])
    roster = policy.agents
    state = slice_sim.init_scenario(config)
    if randomize_start:
        n = len(config.services)
        state.controls.priority[:] = rng.integers(1, 6, size=n)
        state.controls.mbr[:] = [slice_sim.MBR_LEVELS[i] for i in rng.integers(2, 7, size=n)]
    report = slice_sim.evaluate_kpis(state, slice_sim.offered_loads(state, None))
    hidden = ActorHidden.zeros(policy.dims.gru)
    # agents start aimed at the global targets until the first assignment
    current = GoalAssignment(
        levels={
            a.key: nearest_goal_level(config.services[a.intent_index].kpi_kind, config.services[a.intent_index].kpi_target)
            for a in roster
        },
        values={a.key: config.services[a.intent_index].kpi_target for a in roster},
    )
    last_action = {a.key: KnobAction.HOLD for a in roster}
    traj = EpisodeTrajectory(targets=targets_norm)
    shift_map = {t: spec for t, spec in (shift_schedule or [])}

    for t in range(episode_length):
        if t in shift_map:
            state = slice_sim.set_distribution(state, shift_map[t])
        gammas = [capabilities[a.key].rho.copy() for a in roster]
        tuples = []
        for a in roster:
            svc = config.services[a.intent_index]
            obs = observe(state, report, a, current.values[a.key])
            onehot = np.zeros(N_ACTION_ONEHOT)
            onehot[int(last_action[a.key])] = 1.0
            goal_norm = normalize_goal(svc.kpi_kind, current.values[a.key])
            tuples.append(np.concatenate([obs.as_array(), onehot, [goal_norm]]))
        assignment, _, hidden, fwd = act(
            policy, config, gammas, tuples, targets_norm, hidden, rng, explore
        )
        current = assignment
        for a in roster:
            obs = observe(state, report, a, current.values[a.key])
            action = select_action(qtables[a.key], obs, explore=False, rng=rng)
            apply_action(state, a, action)
            last_action[a.key] = action
        state, report = slice_sim.step(state, rng)
        reward = supervisor_reward(report, intents)
        if tracker is not None:
            tracker.observe_step(assignment, report, roster)
        traj.gammas.append(gammas)
        traj.tuples.append(tuples)
        traj.sampled_levels.append([assignment.levels[_head_key(policy, i)] for i in range(policy.n_heads)])
        traj.rewards.append(reward)
        traj.forwards.append(fwd)
    return traj


def _head_key(policy: SupervisorPolicy, head_idx: int) -> str:
    if policy.mode is GoalMode.AGENT_LEVEL:
        return policy.agents[head_idx].key
    # service mode: both planes share the rung; read it off the priority agent
    return policy.agents[head_idx].key


def train_supervisor(
    policy: SupervisorPolicy,
    config: ScenarioConfig,
    qtables: dict[str, QTable],
    capabilities: dict[str, CapabilityVector],
    rng: np.random.Generator,
    cfg: TrainConfig | None = None,
) -> TrainStats:
    """Episodic A2C over the frozen MARL systems; mutates the policy in place."""
    cfg = cfg or TrainConfig()
    opt = OptimizerState(lr=cfg.learning_rate)
    params = policy.named_params()
    tracker = CapabilityTracker(capabilities, config)
    stats = TrainStats(episode_rewards=[], grad_norms=[])
    for episode in range(cfg.episodes):
        traj = rollout_episode(
            policy,
            config,
            qtables,
            capabilities,
            rng,
            cfg.episode_length,
            explore=True,
            tracker=tracker,
            randomize_start=bool(rng.random() < cfg.exploring_starts),
        )
        tracker.flush()
        returns = discounted_returns(traj.rewards, cfg.discount)
        values = np.array([f.value for f in traj.forwards])
        advantages = returns - values
        if cfg.normalize_advantage and len(advantages) > 1:
            advantages = (advantages - advantages.mean()) / (advantages.std() + 1e-8)
        grads, losses = episode_gradients(policy, traj, advantages, returns, cfg)
        if not all(np.all(np.isfinite(g)) for g in grads.values()):
            raise TrainingDivergence(
                "non-finite gradients during supervisor training",
                diagnostics={"episode": episode, "losses": losses},
            )
        norm = _clip_grads(grads, cfg.grad_clip)
        adam_step(params, grads, opt)
        episode_reward = float(np.sum(traj.rewards))
        if not np.isfinite(episode_reward):
            raise TrainingDivergence(
                "non-finite episode reward", diagnostics={"episode": episode}
            )
        stats.episode_rewards.append(episode_reward)
        stats.grad_norms.append(float(norm))
    return stats
