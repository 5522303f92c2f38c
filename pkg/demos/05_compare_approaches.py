#!/usr/bin/env python3
"""Run the full comparison campaign on the uniform scenario.

Pre-trains both control planes, trains the supervisor variants, evaluates
every approach over the standard seeds, and prints the per-KPI summary
(IAE / convergence time / oscillation). Writes traces, summary.csv and a
plotting script under ./out_compare. Takes a few minutes.
"""

from atmarl.experiments import uniform_comparison_plan
from atmarl.harness import run_pipeline

OUT = "out_compare"


def main():
    plan = uniform_comparison_plan()
    result = run_pipeline(plan, OUT)
    print(f"\n{'approach':<15} {'kpi':<8} {'IAE':>8} {'conv':>6} {'osc':>7}")
    for row in result.summary:
        iae = "nyr" if row.iae_mean is None else f"{row.iae_mean:.3f}"
        print(f"{row.approach:<15} {row.kpi:<8} {iae:>8} {row.conv_time_mean:>6.1f} {row.oscillation_mean:>7.3f}")
    print(f"\nartifacts in ./{OUT} (run plot_kpis.py there for figures)")


if __name__ == "__main__":
    main()
