"""Grid over supervisor-training knobs; report criteria 1-4 margins per combo."""

import itertools
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
    load_pretrain,
    stage_pretrain,
    stage_train_supervisor,
    summarize,
)
from atmarl.slice_sim import DistributionKind, DistributionSpec
from atmarl.supervisor import TrainConfig

OUT = Path("/tmp/combo")


def ensure_pretrain(plan, d):
    d.mkdir(parents=True, exist_ok=True)
    if (d / "pretrain.ckpt").exists():
        return load_pretrain(plan, d)
    return stage_pretrain(plan, d)


def fmt(v):
    return " nyr " if v is None else f"{v:.3f}"


def main():
    cfg = default_scenario()
    combos = list(itertools.product([0.3, 0.5], [1001, 2001, 3001]))
    if len(sys.argv) > 1:
        combos = combos[int(sys.argv[1]) : int(sys.argv[1]) + 1]
    base_plan = ExperimentPlan(scenario=cfg, pretrain_cfg=PretrainConfig())
    art0 = ensure_pretrain(base_plan, OUT / "pre")

    for starts, seed in combos:
        t0 = time.time()
        train_cfg = TrainConfig(episodes=500, exploring_starts=starts)
        d = OUT / f"s{int(starts*10)}_{seed}"
        d.mkdir(parents=True, exist_ok=True)
        plan_u = ExperimentPlan(
            scenario=cfg,
            approaches=(Approach.ATMARL, Approach.RULE_BASED, Approach.NAIVE_PARALLEL, Approach.GOAL_HALVING),
            train_seed=seed,
            train_cfg=train_cfg,
            pretrain_cfg=PretrainConfig(),
        )
        art = ensure_pretrain(plan_u, OUT / "pre")
        import shutil

        for f in (OUT / "pre").glob("pretrain*"):
            shutil.copy(f, d / f.name)
        stage_train_supervisor(plan_u, art, Approach.ATMARL, d)
        stage_train_supervisor(plan_u, art, Approach.GOAL_HALVING, d)
        traces = [
            evaluate_episode(plan_u, art, app, s)
            for app in plan_u.approaches
            for s in plan_u.seeds
        ]
        tab = {(r.approach, r.kpi): r for r in summarize(plan_u, traces)}

        plan_g = ExperimentPlan(
            scenario=cfg,
            approaches=(Approach.ATMARL, Approach.RULE_BASED, Approach.ORACLE),
            eval_distribution=DistributionSpec.of(DistributionKind.GAUSSIAN),
            train_seed=seed,
            train_cfg=train_cfg,
            pretrain_cfg=PretrainConfig(),
        )
        art.policies.pop("Oracle", None)
        stage_train_supervisor(plan_g, art, Approach.ORACLE, d)
        traces_g = [
            evaluate_episode(plan_g, art, app, s)
            for app in plan_g.approaches
            for s in plan_g.seeds
        ]
        tab_g = {(r.approach, r.kpi): r for r in summarize(plan_g, traces_g)}

        print(f"\n### starts={starts} seed={seed}  ({time.time()-t0:.0f}s)")
        print("uniform:")
        for kpi in ("cv0", "urllc0", "miot0"):
            cells = " ".join(
                f"{a[:5]}={fmt(tab[(a, kpi)].iae_mean)}"
                for a in ("ATMARL", "GoalHalving", "RuleBased", "NaiveParallel")
            )
            print(f"  {kpi:<7} {cells}")
        print("gaussian:")
        for kpi in ("cv0", "urllc0", "miot0"):
            a = tab_g[("ATMARL", kpi)].iae_mean
            r = tab_g[("RuleBased", kpi)].iae_mean
            o = tab_g[("Oracle", kpi)].iae_mean
            ratio = "inf" if (a is None or not o) else f"{a/o:.2f}"
            ok = "OK " if (a is not None and r is not None and a < r) else "BAD"
            print(f"  {kpi:<7} ATM={fmt(a)} RB={fmt(r)} {ok} oracle={fmt(o)} ratio={ratio}")


if __name__ == "__main__":
    main()
