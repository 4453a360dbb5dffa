"""
Skewed noise
============

Gamma noise with the same variance as the Gaussian case but a long right
tail. Runs a short multi-seed comparison and prints the summary table.
Takes about half a minute.
"""
from mdlhisto import NoiseSpec, run_benchmark

methods = ["identity", "fixedform-soft", "fixedform-hard", "mdl-fixed", "mdl-variable"]
for kind in ("gaussian", "gamma"):
    rep = run_benchmark(methods, NoiseSpec(kind), seeds=range(5))
    print(f"{kind} noise, 5 seeds")
    print(rep.table())
    print()
