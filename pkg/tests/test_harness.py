import csv
from pathlib import Path

import numpy as np
import pytest

from atmarl.agents import PretrainConfig
from atmarl.config import default_scenario, load_scenario, write_scenario
from atmarl.errors import ScenarioError
from atmarl.harness import (
    Approach,
    ExperimentPlan,
    evaluate_episode,
    load_pretrain,
    run_pipeline,
    stage_pretrain,
    summarize,
)
from atmarl.slice_sim import DistributionKind, DistributionSpec
from atmarl.supervisor import TrainConfig

QUICK_PRETRAIN = PretrainConfig(episodes=120, episode_length=12)
QUICK_TRAIN = TrainConfig(episodes=8, episode_length=12)


def quick_plan(**kwargs):
    defaults = dict(
        scenario=default_scenario(),
        approaches=(Approach.RULE_BASED, Approach.NAIVE_PARALLEL),
        seeds=(1, 2),
        episode_length=12,
        pretrain_cfg=QUICK_PRETRAIN,
        train_cfg=QUICK_TRAIN,
    )
    defaults.update(kwargs)
    return ExperimentPlan(**defaults)


@pytest.fixture(scope="module")
def pipeline_result(tmp_path_factory):
    out = tmp_path_factory.mktemp("pipe")
    plan = quick_plan(approaches=(Approach.ATMARL, Approach.RULE_BASED))
    return plan, run_pipeline(plan, out, reuse=False)


# ---------------------------------------------------------------------------
# plan validation


def test_plan_rejects_empty_seeds():
    with pytest.raises(ScenarioError):
        quick_plan(seeds=())


def test_plan_rejects_nonincreasing_shifts():
    gauss = DistributionSpec.of(DistributionKind.GAUSSIAN)
    with pytest.raises(ScenarioError):
        quick_plan(shift_schedule=((8, gauss), (4, gauss)))


def test_plan_rejects_shift_beyond_episode():
    gauss = DistributionSpec.of(DistributionKind.GAUSSIAN)
    with pytest.raises(ScenarioError):
        quick_plan(shift_schedule=((20, gauss),), episode_length=12)


# ---------------------------------------------------------------------------
# scenario files


def test_scenario_round_trip(tmp_path):
    cfg = default_scenario()
    path = tmp_path / "scenario.ini"
    write_scenario(cfg, path)
    loaded = load_scenario(path)
    assert loaded == cfg


def test_scenario_exact_keys(tmp_path):
    path = tmp_path / "scn.ini"
    path.write_text(
        "[scenario]\n"
        "bandwidth_mbps = 10.0\n"
        "distribution = gaussian\n"
        "dist_weights = 0.2 0.3 0.3 0.2\n"
        "noise_pct = 4.0\n"
        "seed = 11\n"
        "\n"
        "[service:cv0]\n"
        "kind = CV\n"
        "demand_mbps = 0.5\n"
        "ue_count = 10\n"
        "kpi_target = 4.2\n"
    )
    cfg = load_scenario(path)
    assert cfg.bandwidth_mbps == 10.0
    assert cfg.distribution.kind is DistributionKind.GAUSSIAN
    assert cfg.distribution.weights == (0.2, 0.3, 0.3, 0.2)
    assert cfg.noise_pct == 4.0
    assert cfg.seed == 11
    assert cfg.services[0].kpi_target == 4.2


def test_scenario_missing_file_rejected(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "missing.ini")


# ---------------------------------------------------------------------------
# traces


def test_trace_row_count_and_columns(pipeline_result):
    plan, result = pipeline_result
    trace = result.traces[0]
    assert len(trace.rows) == plan.episode_length
    assert trace.columns[0] == "t"
    names = [s.name for s in plan.scenario.services]
    for name in names:
        assert f"kpi_{name}" in trace.columns
    assert trace.columns[-4:] == ["reward", "active_priority", "active_mbr", "dist_kind"]
    goal_cols = [c for c in trace.columns if c.startswith("goal_")]
    knob_cols = [c for c in trace.columns if c.startswith("knob_")]
    assert len(goal_cols) == len(knob_cols) == 2 * len(names)


def test_rule_based_one_system_per_step(pipeline_result):
    plan, result = pipeline_result
    rb = [t for t in result.traces if t.approach is Approach.RULE_BASED][0]
    ap = rb.columns.index("active_priority")
    am = rb.columns.index("active_mbr")
    for i, row in enumerate(rb.rows):
        assert int(row[ap]) + int(row[am]) == 1
        expected_priority = ((i // plan.switch_period) % 2) == 0
        assert bool(row[ap]) == expected_priority


def test_atmarl_both_systems_active(pipeline_result):
    plan, result = pipeline_result
    atm = [t for t in result.traces if t.approach is Approach.ATMARL][0]
    ap = atm.columns.index("active_priority")
    am = atm.columns.index("active_mbr")
    assert all(int(r[ap]) == 1 and int(r[am]) == 1 for r in atm.rows)


def test_shift_visible_in_trace(tmp_path):
    plan = quick_plan(
        approaches=(Approach.RULE_BASED,),
        seeds=(1,),
        episode_length=14,
        shift_schedule=(
            (5, DistributionSpec.of(DistributionKind.GAUSSIAN)),
            (9, DistributionSpec.of(DistributionKind.GAMMA)),
        ),
    )
    result = run_pipeline(plan, tmp_path, reuse=False)
    trace = result.traces[0]
    kinds = [row[trace.columns.index("dist_kind")] for row in trace.rows]
    assert kinds[4] == "Uniform"
    assert kinds[5] == "Gaussian"
    assert kinds[8] == "Gaussian"
    assert kinds[9] == "Gamma"
    assert kinds[-1] == "Gamma"


# ---------------------------------------------------------------------------
# summary and report


def test_summary_complete_and_sorted(pipeline_result):
    plan, result = pipeline_result
    pairs = [(r.approach, r.kpi) for r in result.summary]
    assert len(pairs) == len(set(pairs))
    expected = {(a.value, s.name) for a in plan.approaches for s in plan.scenario.services}
    assert set(pairs) == expected
    assert pairs == sorted(pairs, key=lambda p: (p[1], p[0]))


def test_summary_csv_layout(pipeline_result):
    plan, result = pipeline_result
    with open(result.out_dir / "summary.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["approach", "kpi", "iae_mean", "iae_std", "conv_time_mean", "oscillation_mean"]
    assert len(rows) == 1 + len(result.summary)


def test_plot_script_emitted(pipeline_result):
    _, result = pipeline_result
    script = (result.out_dir / "plot_kpis.py").read_text()
    assert "matplotlib" in script
    assert "kpi_comparison.png" in script


def test_trace_csv_files_written(pipeline_result):
    plan, result = pipeline_result
    for approach in plan.approaches:
        for seed in plan.seeds:
            assert (result.out_dir / f"trace_{approach.value}_seed{seed}.csv").exists()


# ---------------------------------------------------------------------------
# determinism and checkpoint hygiene


def test_pipeline_byte_identical_reruns(tmp_path):
    plan = quick_plan(approaches=(Approach.ATMARL, Approach.RULE_BASED))
    res_a = run_pipeline(plan, tmp_path / "a", reuse=False)
    res_b = run_pipeline(plan, tmp_path / "b", reuse=False)
    for name in ["summary.csv"] + [
        f"trace_{a.value}_seed{s}.csv" for a in plan.approaches for s in plan.seeds
    ]:
        assert (res_a.out_dir / name).read_bytes() == (res_b.out_dir / name).read_bytes(), name


def test_evaluation_does_not_mutate_checkpoints(tmp_path):
    plan = quick_plan(approaches=(Approach.ATMARL,), seeds=(1,))
    result = run_pipeline(plan, tmp_path, reuse=False)
    ckpts = sorted(tmp_path.glob("*.ckpt"))
    before = {p.name: p.read_bytes() for p in ckpts}
    artifacts = load_pretrain(plan, tmp_path)
    from atmarl.harness import load_policy

    load_policy(plan, artifacts, Approach.ATMARL, tmp_path)
    evaluate_episode(plan, artifacts, Approach.ATMARL, seed=3)
    after = {p.name: p.read_bytes() for p in sorted(tmp_path.glob("*.ckpt"))}
    assert before == after


def test_checkpoint_round_trip_reproduces_trace(tmp_path):
    plan = quick_plan(approaches=(Approach.ATMARL,), seeds=(4,))
    result = run_pipeline(plan, tmp_path, reuse=False)
    artifacts = load_pretrain(plan, tmp_path)
    from atmarl.harness import load_policy

    load_policy(plan, artifacts, Approach.ATMARL, tmp_path)
    replay = evaluate_episode(plan, artifacts, Approach.ATMARL, seed=4)
    original = result.traces[0]
    assert replay.rows == original.rows


def test_generalization_plan_evaluates_under_other_distribution(tmp_path):
    plan = quick_plan(
        approaches=(Approach.RULE_BASED,),
        seeds=(1,),
        eval_distribution=DistributionSpec.of(DistributionKind.GAUSSIAN),
    )
    result = run_pipeline(plan, tmp_path, reuse=False)
    trace = result.traces[0]
    kinds = {row[trace.columns.index("dist_kind")] for row in trace.rows}
    assert kinds == {"Gaussian"}
