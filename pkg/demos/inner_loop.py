"""One generator's reactive power loop on the plant, without the pilot loop.

The agent only sees its own reactive output and reference.  Halfway through,
the reference steps up and later a disturbance shifts the generator's output.
"""

import numpy as np

from svc_sim import DtipGains, GeneratorParams, GridState, InnerAgent, benchmark_model
from svc_sim import DifferentiatorConfig, apply_disturbance, inner_step, plant_step

model = benchmark_model()
gens = [GeneratorParams(v_base=1.4) for _ in range(model.n)]
state = GridState.create(model, gens)
agent = InnerAgent(DtipGains(10 * model.c_q[0, 0], 2.0), DifferentiatorConfig(0.01, 11), 0.1)

dt = 0.01
q_ref = float(state.q[0])
u1 = np.zeros(model.n)
for k in range(int(20 / dt) + 1):
    t = k * dt
    if k == int(5 / dt):
        q_ref += 0.1
    if k == int(12 / dt):
        state = apply_disturbance(state, 0.0, [0.05, 0, 0, 0])
    if k % 10 == 0:
        u1[0] = inner_step(agent, float(state.q[0]), q_ref)
    else:
        agent.observe(float(state.q[0]))
    if k % 100 == 0:
        print(f"t={t:5.1f}  q1={state.q[0]:.5f}  ref={q_ref:.5f}  u1={u1[0]:+.5f}")
    state = plant_step(state, u1, dt)
