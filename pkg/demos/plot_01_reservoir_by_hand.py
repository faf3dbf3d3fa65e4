"""
A reservoir you can check by hand
=================================

One virtual node, a unit mask and two input steps. Each step applies
``x(k) = A * (j(k) + x(k-1)) + B * x(k-1)``; with a single node the
ring predecessor of node 1 is that same node one step earlier.
"""

import numpy as np

from dfrgrad.dprr import accumulate_dprr
from dfrgrad.reservoir import Mask, ReservoirParams, run_reservoir

params = ReservoirParams(A=0.5, B=0.3, mask=Mask(np.array([[1.0]]), seed=0))
trace = run_reservoir(params, np.array([[2.0], [2.0]]), mode="full")

# x(1) = 0.5 * (2 + 0) + 0.3 * 0 = 1.0
# x(2) = 0.5 * (2 + 1) + 0.3 * 1 = 1.8
print("states x(0..2):", trace.states[:, 0])

###############################################################################
# The feature vector has one lagged product and one sum per node pair/node:
# sum_k x(k) x(k-1) = 1.0 * 0 + 1.8 * 1.0 and sum_k x(k) = 1.0 + 1.8.
print("features:", accumulate_dprr(trace))

###############################################################################
# Truncated mode keeps only the last two states but streams the same
# features while stepping.
short = run_reservoir(params, np.array([[2.0], [2.0]]), mode="truncated")
print("truncated keeps", short.stored_states, "states:", short.states[:, 0])
print("same features:", np.array_equal(short.dprr, trace.dprr))
