#!/usr/bin/env python3
"""Train the goal-issuing supervisor against the frozen control planes.

The supervisor encodes each agent's capability vector, merges it with the
agent's (state, action, goal) tuple, fuses everything with the global targets
into a context, and a recurrent actor-critic emits one goal rung per agent
each timestep. Training is episodic advantage actor-critic with BPTT.
"""

import numpy as np

from atmarl.agents import PretrainConfig, SystemKind, estimate_capabilities, pretrain_system
from atmarl.config import default_scenario
from atmarl.supervisor import TrainConfig, create_policy, train_supervisor

EPISODES = 120  # reduced for a quick demo; the full campaign uses 500


def main():
    cfg = default_scenario()
    rng = np.random.default_rng(1001)
    pre = PretrainConfig(episodes=300)
    logs = []
    qtables = {}
    for system in (SystemKind.PRIORITY, SystemKind.MBR):
        result = pretrain_system(system, cfg, rng, pre)
        qtables.update(result.qtables)
        logs.extend(result.logs)
    capabilities = estimate_capabilities(logs, cfg)
    print("control planes pre-trained; starting supervisor training")

    policy = create_policy(rng, cfg)
    stats = train_supervisor(policy, cfg, qtables, capabilities, rng, TrainConfig(episodes=EPISODES))

    rewards = np.array(stats.episode_rewards)
    block = max(len(rewards) // 8, 1)
    print("\nepisode-reward trajectory (block means):")
    for i in range(0, len(rewards), block):
        chunk = rewards[i : i + block]
        bar = "#" * max(int((chunk.mean() + 40) / 2), 0)
        print(f"  episodes {i:>4}-{i + len(chunk) - 1:<4} mean {chunk.mean():7.2f} {bar}")
    print(f"\nfinal mean reward {stats.final_mean_reward:.2f} "
          f"(a step with every intent met scores +1)")


if __name__ == "__main__":
    main()
