"""
How much storage does truncation save?
======================================

Naive backpropagation keeps every reservoir state; the truncated variant
keeps two. The readout weights and the feature vector are stored either
way, so the saving depends on series length and class count.
"""

from dfrgrad.memory import benchmark_table, memory_counts

print(f"{'set':6s} {'naive':>7s} {'trunc':>7s} {'saved':>6s}")
for name, r in benchmark_table().items():
    print(f"{name:6s} {r.naive:7d} {r.simplified:7d} {100 * r.reduction:5.0f}%")

###############################################################################
# A 500-step, three-class series with 30 nodes:
r = memory_counts(500, 30, 3)
print(f"\nT=500, 3 classes: {r.naive} -> {r.simplified} values, {100 * r.reduction:.1f}% saved")
