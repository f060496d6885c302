"""Run the six canned case studies and summarise each one.

Writes nothing to disk; see ``svc-sim cases`` for CSV output.
"""

import time

from svc_sim import case_scenario, run

for case_id in range(1, 7):
    sc = case_scenario(case_id)
    t0 = time.perf_counter()
    r = run(sc)
    m = r.metrics
    print(f"{sc.name}: {time.perf_counter() - t0:.1f} s wall, final error {m['final_v_pp_error']:.1e}, "
          f"spread {m['final_alignment_spread']:.1e}")
    for ev in m["events"]:
        rec = ev["recovery_time"]
        rec = "not recovered" if rec is None else f"back within 1e-3 pu after {rec:.1f} s"
        print(f"    event at {ev['at']:.0f} s: max deviation {ev['max_deviation']:.4f} pu, {rec}")
