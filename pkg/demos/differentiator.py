"""Sliding-window slope estimates on a noisy ramp.

The estimator is exact on straight lines; with noise, a longer window over
the same time span averages more of it away.
"""

import numpy as np

from svc_sim import Differentiator, DifferentiatorConfig

rng = np.random.default_rng(1)
slope, span, noise = 0.25, 1.0, 2e-3

for n in (3, 5, 11, 21, 41):
    cfg = DifferentiatorConfig(t_ndf=span / (n - 1), n_ndf=n)
    errors = []
    for trial in range(500):
        d = Differentiator(cfg)
        for k in range(n):
            d.push(1.0 + slope * k * cfg.t_ndf + rng.uniform(-noise, noise))
        errors.append(d.derivative() - slope)
    errors = np.abs(errors)
    print(f"n_ndf={n:2d}  mean |err| {errors.mean():.2e}  worst {errors.max():.2e}")
