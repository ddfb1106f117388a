"""A small Pr[connected] sweep over c with Wilson intervals, written to demos_out/.

Run: python demos/phase_sweep.py
"""

from scatternet import ExperimentConfig, sweep

config = ExperimentConfig(n=[5000], gamma=[4.0], c=list(range(1, 7)), trials=10, seed=0, cstar=True)
table = sweep(config, "demos_out")
for a in table.aggregates:
    print(f"c={a['c']}: Pr[connected]={a['p_connected']:.2f} "
          f"(95% CI {a['wilson_low']:.2f}-{a['wilson_high']:.2f})")
print("rows written to demos_out/rows.csv")
