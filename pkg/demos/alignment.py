"""Reactive power references for the benchmark zone.

Solves for the per-generator reactive references that put the pilot bus at a
target voltage with every generator carrying the same share, then drops a
generator and solves again on the reduced network.
"""

import numpy as np

from svc_sim import ActiveMask, ParticipationFactors, benchmark_model, solve_alignment

model = benchmark_model()
pf = ParticipationFactors(np.ones(model.n))

print("pilot sensitivity to reactive power:", np.round(model.pilot_sensitivity_to_q(), 4))

for v_ref in (0.98, 1.0):
    sol = solve_alignment(model, pf, v_ref)
    print(f"v_pp_ref = {v_ref:.2f}  ->  c = {sol.c:.5f}, q_ref = {np.round(sol.q_ref, 5)}")

# Unequal participation: G1 carries twice the share of the others.
sol = solve_alignment(model, ParticipationFactors([2.0, 1.0, 1.0, 1.0]), 1.0)
print("pf = [2, 1, 1, 1]   ->  q_ref =", np.round(sol.q_ref, 5))

# G2 disconnected: the remaining three pick up its share.
mask = ActiveMask.all_active(4).disconnect(1)
sol = solve_alignment(model, pf, 1.0, mask)
print("G2 out              ->  q_ref =", np.round(sol.q_ref, 5))
