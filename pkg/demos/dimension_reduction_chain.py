"""
From the round sphere to sparse vectors
=======================================

Points of the round sphere, shrunk into the l^1 ball, are pushed through the
reduction map. The partial diameter before the map never exceeds the one
after it by more than eps, and the reduced partial diameter shrinks as the
dimension grows.
"""

from obsdiam import ExperimentConfig, emit, run_experiment

cfg = ExperimentConfig("theorem1", p=1.0, q=2.0, eps=0.5, kappa=0.1, n_list=(16, 64, 256), samples=1000)
rec = run_experiment(cfg)
for n in cfg.n_list:
    print(f"n={n:3d}  exact on {rec.value('exact_points', n)} points: "
          f"{rec.value('direct_exact', n):.4f} <= {rec.value('reduced_exact', n):.4f} + eps"
          f"   projected: {rec.value('direct_projected', n):.4f} <= {rec.value('reduced_projected', n):.4f} + eps")

# the same record as plot-ready long-format CSV
emit(rec, "csv")
