"""Goal-conditioned tabular agents for the Priority and MBR control planes.

Each service intent gets one agent per control plane; an agent sees only its
own KPI, its own knob, its assigned goal and a global congestion scalar, and
nudges its knob one rung per step. The two planes are pre-trained separately
(the other plane frozen at defaults) and stay frozen afterwards; capability
vectors summarize, per goal rung, how often an agent reached it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .config import ScenarioConfig
from .errors import ScenarioError
from . import slice_sim
from .slice_sim import (
    KpiKind,
    MBR_LEVELS,
    NetworkState,
    KpiReport,
    PRIORITY_LEVELS,
    init_scenario,
    step as sim_step,
)

GOAL_LEVELS = 8
ACHIEVEMENT_HORIZON = 5

# Observation scales. QoE maps [1,5] onto [0,1]; packet loss uses an
# operational 8-percent window so that one table bin spans 1% (the full
# [0,100] range would collapse every relevant reading into a single bin).
PL_SCALE = 8.0
QOE_BIN = 0.5  # KPI width of one quantization bin / goal rung
OBS_BINS = 8
CONGESTION_MAX = 1.5

N_ACTIONS = 3  # decrement, hold, increment
ACTION_HOLD = 1


class SystemKind(str, Enum):
    PRIORITY = "Priority"
    MBR = "MBR"


class KnobAction(int, Enum):
    DECREMENT = 0
    HOLD = 1
    INCREMENT = 2

    @property
    def delta(self) -> int:
        return int(self.value) - 1


@dataclass(frozen=True)
class AgentId:
    system: SystemKind
    intent_index: int

    @property
    def key(self) -> str:
        return f"{self.system.value.lower()}_{self.intent_index}"


@dataclass(frozen=True)
class AgentObservation:
    kpi: float  # own KPI, normalized
    knob: float  # own knob level, normalized
    goal: float  # assigned goal, normalized
    congestion: float  # slice offered / slice bandwidth

    def as_array(self) -> np.ndarray:
        return np.array([self.kpi, self.knob, self.goal, self.congestion])


@dataclass
class QTable:
    """Dense state-action values over the binned observation space."""

    values: np.ndarray  # [OBS_BINS]*4 + [N_ACTIONS]
    learning_rate: float = 0.1
    discount: float = 0.9
    exploration: float = 0.05

    @classmethod
    def create(cls) -> "QTable":
        return cls(values=np.zeros((OBS_BINS,) * 4 + (N_ACTIONS,)))


@dataclass
class CapabilityVector:
    """Per-goal-rung achievement probabilities for one agent."""

    rho: np.ndarray  # [GOAL_LEVELS]
    from_data: np.ndarray  # bool mask; False where the 0.5 prior was used

    @classmethod
    def prior(cls) -> "CapabilityVector":
        return cls(rho=np.full(GOAL_LEVELS, 0.5), from_data=np.zeros(GOAL_LEVELS, dtype=bool))

    def ema_update(self, level: int, achieved: bool, factor: float = 0.05):
        i = level - 1
        self.rho[i] = (1.0 - factor) * self.rho[i] + factor * (1.0 if achieved else 0.0)
        self.from_data[i] = True


def agent_roster(config: ScenarioConfig) -> list[AgentId]:
    """Fixed agent ordering: all Priority agents by intent, then all MBR."""
    ids = [AgentId(SystemKind.PRIORITY, k) for k in range(config.intent_count)]
    ids += [AgentId(SystemKind.MBR, k) for k in range(config.intent_count)]
    return ids


def goal_value(kpi_kind: KpiKind, level: int) -> float:
    """Map a goal rung in {1..8} to KPI space."""
    if not 1 <= level <= GOAL_LEVELS:
        raise ValueError(f"goal level {level} outside 1..{GOAL_LEVELS}")
    if kpi_kind is KpiKind.QOE:
        return 1.0 + QOE_BIN * level
    return float(level)


def nearest_goal_level(kpi_kind: KpiKind, value: float) -> int:
    if kpi_kind is KpiKind.QOE:
        level = round((value - 1.0) / QOE_BIN)
    else:
        level = round(value)
    return int(np.clip(level, 1, GOAL_LEVELS))


def normalize_kpi(kpi_kind: KpiKind, value: float) -> float:
    if kpi_kind is KpiKind.QOE:
        return (value - 1.0) / 4.0
    return min(value / PL_SCALE, CONGESTION_MAX)


def normalize_goal(kpi_kind: KpiKind, goal_kpi: float) -> float:
    if kpi_kind is KpiKind.QOE:
        return (goal_kpi - 1.0) / 4.0
    return min(goal_kpi / PL_SCALE, CONGESTION_MAX)


def normalize_knob(agent: AgentId, state: NetworkState) -> float:
    k = agent.intent_index
    if agent.system is SystemKind.PRIORITY:
        return (float(state.controls.priority[k]) - 1.0) / 4.0
    return MBR_LEVELS.index(_nearest_mbr(state.controls.mbr[k])) / (len(MBR_LEVELS) - 1)


def _nearest_mbr(value: float) -> float:
    return min(MBR_LEVELS, key=lambda lvl: abs(lvl - value))


def observe(state: NetworkState, report: KpiReport, agent: AgentId, goal_kpi: float) -> AgentObservation:
    """Build one agent's normalized observation; excludes the other plane's knobs."""
    if agent.intent_index >= len(state.services):
        raise ScenarioError(f"agent {agent} references a missing intent")
    svc = state.services[agent.intent_index]
    return AgentObservation(
        kpi=normalize_kpi(svc.kpi_kind, float(report.kpi[agent.intent_index])),
        knob=normalize_knob(agent, state),
        goal=normalize_goal(svc.kpi_kind, goal_kpi),
        congestion=min(report.congestion(state), CONGESTION_MAX),
    )


def discretize(obs: AgentObservation) -> tuple[int, int, int, int]:
    def bin_unit(x: float) -> int:
        return min(int(np.clip(x, 0.0, 1.0) * OBS_BINS), OBS_BINS - 1)

    cong = min(int(np.clip(obs.congestion / CONGESTION_MAX, 0.0, 1.0) * OBS_BINS), OBS_BINS - 1)
    return (bin_unit(obs.kpi), bin_unit(obs.knob), bin_unit(obs.goal), cong)


def select_action(table: QTable, obs: AgentObservation, explore: bool, rng: np.random.Generator) -> KnobAction:
    """Epsilon-greedy over the table; exact ties break toward HOLD."""
    if explore and rng.random() < table.exploration:
        return KnobAction(int(rng.integers(N_ACTIONS)))
    q = table.values[discretize(obs)]
    best = q.max()
    if q[ACTION_HOLD] == best:
        return KnobAction.HOLD
    return KnobAction(int(np.argmax(q)))


def apply_action(state: NetworkState, agent: AgentId, action: KnobAction):
    """Move the agent's knob one rung, saturating at the ladder ends."""
    k = agent.intent_index
    if agent.system is SystemKind.PRIORITY:
        level = int(state.controls.priority[k]) + action.delta
        state.controls.priority[k] = int(np.clip(level, PRIORITY_LEVELS[0], PRIORITY_LEVELS[-1]))
    else:
        idx = MBR_LEVELS.index(_nearest_mbr(state.controls.mbr[k]))
        idx = int(np.clip(idx + action.delta, 0, len(MBR_LEVELS) - 1))
        state.controls.mbr[k] = MBR_LEVELS[idx]


def agent_reward(kpi: float, goal_kpi: float, kpi_kind: KpiKind) -> float:
    """Distance-to-goal penalty; packet loss counts only the excess above goal."""
    if kpi_kind is KpiKind.QOE:
        return -abs(kpi - goal_kpi) / 4.0
    if kpi <= goal_kpi:
        return 0.0
    return -(kpi - goal_kpi) / PL_SCALE


def goal_achieved(kpi: float, goal_kpi: float, kpi_kind: KpiKind) -> bool:
    if kpi_kind is KpiKind.QOE:
        return abs(kpi - goal_kpi) <= QOE_BIN
    return kpi <= goal_kpi


@dataclass
class PretrainConfig:
    episodes: int = 600
    episode_length: int = 20
    learning_rate: float = 0.1
    discount: float = 0.9
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    reward_floor: float = -0.5  # mean final-phase reward below this flags non-convergence
    # UE spreads sampled per episode; agents arrive robust to the radio
    # environment, so the generalization experiments probe the supervisor
    vary_distribution: bool = True


@dataclass
class PretrainResult:
    qtables: dict[str, QTable]
    logs: list[dict]
    converged: bool
    mean_recent_reward: float


def pretrain_system(
    system: SystemKind,
    config: ScenarioConfig,
    rng: np.random.Generator,
    params: PretrainConfig | None = None,
) -> PretrainResult:
    """Independently Q-train all agents of one plane against random goals.

    The other plane's knobs stay at scenario defaults throughout. Each
    episode starts from a fresh default state and a fresh random goal rung
    per agent; the log records whether each agent reached its rung within
    the achievement horizon.
    """
    params = params or PretrainConfig()
    agents = [AgentId(system, k) for k in range(config.intent_count)]
    tables = {
        a.key: QTable(
            values=np.zeros((OBS_BINS,) * 4 + (N_ACTIONS,)),
            learning_rate=params.learning_rate,
            discount=params.discount,
        )
        for a in agents
    }
    logs: list[dict] = []
    recent_rewards: list[float] = []
    anneal = params.episodes * 0.7
    spreads = list(slice_sim.DistributionKind) if params.vary_distribution else [config.distribution.kind]
    for episode in range(params.episodes):
        eps = max(
            params.epsilon_end,
            params.epsilon_start + (params.epsilon_end - params.epsilon_start) * episode / max(anneal, 1),
        )
        state = init_scenario(config)
        kind = spreads[int(rng.integers(len(spreads)))]
        if kind is not config.distribution.kind:
            state = slice_sim.set_distribution(state, slice_sim.DistributionSpec.of(kind))
        report = slice_sim.evaluate_kpis(state, slice_sim.offered_loads(state, None))
        goals = {a.key: int(rng.integers(1, GOAL_LEVELS + 1)) for a in agents}
        goal_kpis = {
            a.key: goal_value(config.services[a.intent_index].kpi_kind, goals[a.key]) for a in agents
        }
        hit_step = {a.key: None for a in agents}
        episode_reward = 0.0
        for t in range(params.episode_length):
            obs_bins = {}
            actions = {}
            for a in agents:
                tables[a.key].exploration = eps
                obs = observe(state, report, a, goal_kpis[a.key])
                obs_bins[a.key] = discretize(obs)
                actions[a.key] = select_action(tables[a.key], obs, explore=True, rng=rng)
                apply_action(state, a, actions[a.key])
            state, report = sim_step(state, rng)
            for a in agents:
                svc = config.services[a.intent_index]
                kpi = float(report.kpi[a.intent_index])
                r = agent_reward(kpi, goal_kpis[a.key], svc.kpi_kind)
                episode_reward += r
                next_obs = observe(state, report, a, goal_kpis[a.key])
                nb = discretize(next_obs)
                table = tables[a.key]
                sa = obs_bins[a.key] + (int(actions[a.key]),)
                td = r + table.discount * table.values[nb].max() - table.values[sa]
                table.values[sa] += table.learning_rate * td
                if hit_step[a.key] is None and goal_achieved(kpi, goal_kpis[a.key], svc.kpi_kind):
                    hit_step[a.key] = t + 1
        for a in agents:
            steps = hit_step[a.key]
            logs.append(
                {
                    "agent_system": system.value,
                    "intent_index": a.intent_index,
                    "goal_level": goals[a.key],
                    "achieved": int(steps is not None and steps <= ACHIEVEMENT_HORIZON),
                    "episode": episode,
                    "steps_taken": steps if steps is not None else params.episode_length,
                }
            )
        recent_rewards.append(episode_reward / (params.episode_length * len(agents)))
    tail = recent_rewards[-max(len(recent_rewards) // 5, 1):]
    mean_recent = float(np.mean(tail))
    converged = mean_recent >= params.reward_floor
    if not converged:
        import warnings

        warnings.warn(
            f"{system.value} pretraining mean reward {mean_recent:.3f} below "
            f"{params.reward_floor}; agents may be undertrained",
            stacklevel=2,
        )
    return PretrainResult(qtables=tables, logs=logs, converged=converged, mean_recent_reward=mean_recent)


def write_pretrain_log(logs: list[dict], path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=["agent_system", "intent_index", "goal_level", "achieved", "episode", "steps_taken"],
        )
        writer.writeheader()
        writer.writerows(logs)


def estimate_capabilities(
    logs: list[dict], config: ScenarioConfig, horizon: int = ACHIEVEMENT_HORIZON
) -> dict[str, CapabilityVector]:
    """Success-frequency capability vectors from pre-training logs.

    Missing (agent, rung) pairs fall back to a 0.5 prior and are flagged via
    ``from_data``. ``horizon`` re-filters logged step counts so capabilities
    can be recomputed for a stricter window than the logged flag.
    """
    vectors = {a.key: CapabilityVector.prior() for a in agent_roster(config)}
    attempts = {key: np.zeros(GOAL_LEVELS) for key in vectors}
    successes = {key: np.zeros(GOAL_LEVELS) for key in vectors}
    for row in logs:
        key = f"{str(row['agent_system']).lower()}_{row['intent_index']}"
        if key not in vectors:
            continue
        lvl = int(row["goal_level"]) - 1
        attempts[key][lvl] += 1
        achieved = int(row["achieved"]) == 1 and int(row["steps_taken"]) <= horizon
        successes[key][lvl] += int(achieved)
    for key, vec in vectors.items():
        seen = attempts[key] > 0
        vec.rho[seen] = successes[key][seen] / attempts[key][seen]
        vec.from_data[:] = seen
    return vectors
