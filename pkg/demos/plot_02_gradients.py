"""
Checking reservoir gradients against finite differences
=======================================================

The full backward pass walks every time step; the truncated one looks only
at the last. Both are compared here with central differences of the
end-to-end loss.
"""

import numpy as np

from dfrgrad.backprop import OpCounter, finite_diff_grads, full_bptt, truncated_bp
from dfrgrad.gradcheck import random_instance
from dfrgrad.head import forward_head, head_gradients
from dfrgrad.reservoir import ReservoirParams, generate_mask, run_reservoir

inst = random_instance(seed=4, max_T=10, max_nx=5)
print(f"T={inst.series.shape[0]}  N_x={inst.params.n_nodes}  A={inst.params.A:.3f}  B={inst.params.B:.3f}")

full = run_reservoir(inst.params, inst.series, "full")
pred = forward_head(inst.head, full.dprr)
_, _, dr = head_gradients(pred, inst.label, full.dprr, inst.head)

exact = full_bptt(inst.params, full, dr)
numeric = finite_diff_grads(inst.params, inst.series, inst.label, inst.head)
approx = truncated_bp(inst.params, run_reservoir(inst.params, inst.series, "truncated"), dr)

print(f"dA  full {exact.dA: .8e}  differences {numeric.dA: .8e}  last step only {approx.dA: .8e}")
print(f"dB  full {exact.dB: .8e}  differences {numeric.dB: .8e}  last step only {approx.dB: .8e}")

###############################################################################
# The truncated pass costs the same whatever the series length.
rs = np.random.default_rng(0)
dr30 = rs.normal(size=930)
params = ReservoirParams(0.2, 0.2, generate_mask(0, 30, 1))
for T in (10, 100, 1000):
    series = rs.normal(size=(T, 1))
    c_full, c_trunc = OpCounter(), OpCounter()
    full_bptt(params, run_reservoir(params, series, "full"), dr30, c_full)
    truncated_bp(params, run_reservoir(params, series, "truncated"), dr30, c_trunc)
    print(f"T={T:5d}: full {c_full.ops:9d} ops, truncated {c_trunc.ops} ops")
