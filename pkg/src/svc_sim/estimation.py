"""Sliding-window derivative estimation and ultra-local disturbance estimates.

The differentiator returns the slope of the least-squares line through the
last ``n_ndf`` uniformly spaced samples.  This is the sampled form of the
first-order algebraic derivative estimator

    dy/dt ~ 6 / T^3 * integral_0^T (T - 2 tau) y(t - tau) dtau,

with window length ``T = (n_ndf - 1) * t_ndf``.  It is exact on affine
signals and averages zero-mean noise over the window.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteInput, NonFiniteSample, NotReady


@dataclass(frozen=True)
class DifferentiatorConfig:
    """Sampling period ``t_ndf`` (s) and window length ``n_ndf`` (samples)."""

    t_ndf: float
    n_ndf: int = 5

    def __post_init__(self):
        if not (self.t_ndf > 0.0 and math.isfinite(self.t_ndf)):
            raise ValueError(f"t_ndf must be a positive finite period, got {self.t_ndf}")
        if int(self.n_ndf) != self.n_ndf or self.n_ndf < 3:
            raise ValueError(f"n_ndf must be an integer >= 3, got {self.n_ndf}")
        object.__setattr__(self, "n_ndf", int(self.n_ndf))

    @property
    def window(self) -> float:
        """Window duration ``(n_ndf - 1) * t_ndf`` in seconds."""
        return (self.n_ndf - 1) * self.t_ndf

    def check_fits(self, loop_period: float) -> None:
        # small slack absorbs float rounding of t_ndf * (n - 1)
        if self.window > loop_period * (1.0 + 1e-9):
            raise ValueError(
                f"differentiator window {self.window:g} s exceeds loop period {loop_period:g} s"
            )


def slope_weights(config: DifferentiatorConfig) -> np.ndarray:
    """Weights ``w`` such that ``w @ window`` is the least-squares slope (oldest sample first)."""
    n = config.n_ndf
    centred = np.arange(n) - (n - 1) / 2.0
    return centred / (config.t_ndf * float(centred @ centred))


def _pair_weights(config: DifferentiatorConfig) -> tuple[float, ...]:
    # slope = sum_j p_j * (y[n-1-j] - y[j]); antisymmetric pairing makes a
    # constant window give exactly zero
    w = slope_weights(config)
    return tuple(float(-w[j]) for j in range(config.n_ndf // 2))


class Differentiator:
    """Streaming least-squares slope over a fixed-length window."""

    def __init__(self, config: DifferentiatorConfig):
        self.config = config
        self._pairs = _pair_weights(config)
        self._window: deque[float] = deque(maxlen=config.n_ndf)

    @property
    def ready(self) -> bool:
        return len(self._window) == self.config.n_ndf

    def push(self, sample: float) -> None:
        if not math.isfinite(sample):
            raise NonFiniteSample(f"non-finite sample {sample!r}")
        self._window.append(float(sample))

    def derivative(self) -> float:
        if not self.ready:
            raise NotReady(f"{len(self._window)}/{self.config.n_ndf} samples buffered")
        y = self._window
        last = self.config.n_ndf - 1
        return math.fsum(p * (y[last - j] - y[j]) for j, p in enumerate(self._pairs))

    def reset(self) -> None:
        self._window.clear()


def push_and_differentiate(d: Differentiator, sample: float) -> float:
    """Push one sample and return the current slope estimate.

    Raises NotReady until the window holds ``n_ndf`` samples.
    """
    d.push(sample)
    return d.derivative()


@dataclass(frozen=True)
class UltraLocalEstimate:
    f_bar: float
    y_dot: float


def estimate_f(y_dot: float, alpha: float, u_delayed: float) -> float:
    """Lumped-dynamics estimate ``f_bar = y_dot - alpha * u_delayed``."""
    if not (math.isfinite(y_dot) and math.isfinite(alpha) and math.isfinite(u_delayed)):
        raise NonFiniteInput(f"estimate_f({y_dot!r}, {alpha!r}, {u_delayed!r})")
    return y_dot - alpha * u_delayed
