"""
Quasiconvexity experiments
==========================

Small versions of the experiments.  Each returns a report with sample
rows, estimated constants, stability across radii and pass/fail checks.
"""

from floydlab.lab import experiments as cx
from floydlab.lab import system_experiments as sx

reports = [
    cx.experiment_theoremC(radii=(6, 7), samples=40),
    cx.experiment_injectivity_bound(radii=(6, 7), samples=40, level_range=(2, 3)),
    cx.overlap_survey(ds=(0, 1, 2), radii=(5, 6)),
    cx.experiment_graph_quasiconvexity(radii=(6, 7), samples=40),
    sx.experiment_separation_constants(Ls=(4,), N=256, samples=20),
]
for rep in reports:
    print(rep)
    print()

# every report renders to deterministic CSV
print(reports[2].stability_csv())
