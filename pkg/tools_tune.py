"""Scratch tuning harness: run a reduced pipeline and dump per-approach metrics."""

import sys
import time
from pathlib import Path

import numpy as np

from atmarl.agents import PretrainConfig
from atmarl.config import default_scenario
from atmarl.harness import (
    Approach,
    ExperimentPlan,
    evaluate_episode,
    run_pipeline,
)
from atmarl.supervisor import TrainConfig

OUT = Path(sys.argv[1] if len(sys.argv) > 1 else "/tmp/tune1")
EPISODES = int(sys.argv[2]) if len(sys.argv) > 2 else 150


def main():
    t0 = time.time()
    plan = ExperimentPlan(
        scenario=default_scenario(),
        approaches=(
            Approach.ATMARL,
            Approach.RULE_BASED,
            Approach.NAIVE_PARALLEL,
            Approach.GOAL_HALVING,
        ),
        seeds=(1, 2, 3, 4, 5),
        episode_length=40,
        pretrain_cfg=PretrainConfig(),
        train_cfg=TrainConfig(episodes=EPISODES),
    )
    result = run_pipeline(plan, OUT)
    print(f"pipeline took {time.time() - t0:.1f}s")
    print(f"{'approach':<14} {'kpi':<10} {'iae':>8} {'conv':>6} {'osc':>7}")
    for row in result.summary:
        iae = "nyr" if row.iae_mean is None else f"{row.iae_mean:.3f}"
        print(f"{row.approach:<14} {row.kpi:<10} {iae:>8} {row.conv_time_mean:>6.1f} {row.oscillation_mean:>7.3f}")

    # peek at one ATMARL trace
    for approach in (Approach.ATMARL, Approach.RULE_BASED, Approach.NAIVE_PARALLEL, Approach.GOAL_HALVING):
        tr = [t for t in result.traces if t.approach == approach and t.seed == 1][0]
        cols = tr.columns
        print(f"\n--- {approach.value} seed 1 (t, kpis, goals) ---")
        for row in tr.rows[:: max(1, len(tr.rows) // 14)]:
            kpis = " ".join(f"{row[cols.index(f'kpi_{n}')]:6.2f}" for n in ("cv0", "urllc0", "miot0"))
            goals = " ".join(f"{row[cols.index(f'goal_{k}')]:4.1f}" for k in
                             ("priority_cv0... placeholder",)) if False else ""
            gl = " ".join(
                f"{row[cols.index(c)]:4.1f}" for c in cols if c.startswith("goal_")
            )
            kn = " ".join(f"{row[cols.index(c)]:4.1f}" for c in cols if c.startswith("knob_"))
            print(f"t={row[0]:>2} kpi[{kpis}] goals[{gl}] knobs[{kn}] r={row[cols.index('reward')]:6.2f}")


if __name__ == "__main__":
    main()
