"""Decentralised secondary voltage control: discrete-time intelligent P loops.

Both loops use the same ultra-local model ``y_dot = F + alpha * u``.  At each
controller tick ``F`` is re-estimated from the measured slope and the control
issued ``h_d`` ticks earlier, then cancelled by the proportional law

    u = -(F_bar - y_ref_dot + k_p * e) / alpha,      e = y - y_ref.

The inner loop (one agent per generator) drives the generator reactive power
to its reference by correcting the AVR setpoint; the outer loop drives the
pilot voltage by shifting every reactive reference by the same amount.
"""

from __future__ import annotations

import bisect
import math
from collections import deque
from dataclasses import dataclass

from .errors import NonFiniteInput
from .estimation import Differentiator, DifferentiatorConfig, estimate_f

# Inner (outer) loop period must be 5 to 10 times shorter (longer).
MIN_PERIOD_RATIO = 5.0
MAX_PERIOD_RATIO = 10.0


@dataclass(frozen=True)
class DtipGains:
    alpha: float
    k_p: float
    h_d: int = 1

    def __post_init__(self):
        if not math.isfinite(self.alpha) or self.alpha == 0.0:
            raise ValueError(f"alpha must be finite and nonzero, got {self.alpha}")
        if not (math.isfinite(self.k_p) and self.k_p > 0.0):
            raise ValueError(f"k_p must be positive, got {self.k_p}")
        if int(self.h_d) != self.h_d or self.h_d < 1:
            raise ValueError(f"h_d must be an integer >= 1, got {self.h_d}")
        object.__setattr__(self, "h_d", int(self.h_d))


def dtip_law(f_bar: float, y_ref_dot: float, e: float, gains: DtipGains) -> float:
    """Intelligent proportional control value ``-(f_bar - y_ref_dot + k_p e) / alpha``."""
    if not (math.isfinite(f_bar) and math.isfinite(y_ref_dot) and math.isfinite(e)):
        raise NonFiniteInput(f"dtip_law({f_bar!r}, {y_ref_dot!r}, {e!r})")
    # + 0.0 turns a negative zero into zero so logged steady states print as 0
    return -(f_bar - y_ref_dot + gains.k_p * e) / gains.alpha + 0.0


def compose_reference(q_ref: float, u2: float, weight: float = 1.0) -> float:
    """Inner-loop reactive reference: aligned share plus the pilot loop correction.

    ``weight`` is 1 for the uniform split; the pf-weighted variant passes the
    generator's participation factor.
    """
    return q_ref + weight * u2


class _DtipLoop:
    """Shared state machine of one intelligent P loop."""

    def __init__(
        self,
        gains: DtipGains,
        diff: DifferentiatorConfig,
        period: float,
        limits: tuple[float, float] | None = None,
    ):
        if not (period > 0.0):
            raise ValueError(f"period must be positive, got {period}")
        diff.check_fits(period)
        if limits is not None and not limits[0] <= limits[1]:
            raise ValueError(f"empty control range {limits}")
        self.gains = gains
        self.period = period
        self.limits = limits
        self.differentiator = Differentiator(diff)
        self.u_history: deque[float] = deque([0.0] * gains.h_d, maxlen=gains.h_d)
        self.enabled = True
        self.u = 0.0

    def reset(self) -> None:
        self.differentiator.reset()
        self.u_history.extend([0.0] * self.gains.h_d)
        self.u = 0.0

    def observe(self, y: float) -> None:
        """Feed an intermediate sample between controller ticks."""
        if self.enabled:
            self.differentiator.push(y)

    def _step(self, y: float, y_ref: float, y_ref_dot: float) -> float:
        if not self.enabled:
            return 0.0
        self.differentiator.push(y)
        if not self.differentiator.ready:
            u = 0.0
        else:
            y_dot = self.differentiator.derivative()
            f_bar = estimate_f(y_dot, self.gains.alpha, self.u_history[0])
            u = dtip_law(f_bar, y_ref_dot, y - y_ref, self.gains)
            if self.limits is not None:
                u = min(max(u, self.limits[0]), self.limits[1])
        self.u_history.append(u)
        self.u = u
        return u


class InnerAgent(_DtipLoop):
    """Reactive power loop of a single generator.

    Uses only the generator's own reactive power measurement and reference;
    its output ``u1`` is a correction added to the AVR base setpoint.
    """

    def set_enabled(self, active: bool) -> None:
        if active == self.enabled:
            return
        self.enabled = active
        self.reset()


class OuterController(_DtipLoop):
    """Pilot voltage loop producing the common reactive reference shift ``u2``."""

    def __init__(
        self,
        gains: DtipGains,
        diff: DifferentiatorConfig,
        period: float,
        inner_period: float,
        limits: tuple[float, float] | None = None,
    ):
        ratio = period / inner_period
        if not (MIN_PERIOD_RATIO - 1e-9 <= ratio <= MAX_PERIOD_RATIO + 1e-9):
            raise ValueError(
                f"outer/inner period ratio {ratio:g} outside [{MIN_PERIOD_RATIO:g}, {MAX_PERIOD_RATIO:g}]"
            )
        super().__init__(gains, diff, period, limits)
        self.inner_period = inner_period


def inner_step(agent: InnerAgent, q_meas: float, q_ref_prime: float, q_ref_dot: float = 0.0) -> float:
    """One inner-loop tick; returns the AVR setpoint correction ``u1``."""
    return agent._step(q_meas, q_ref_prime, q_ref_dot)


def outer_step(
    ctrl: OuterController, v_pp_meas: float, v_pp_ref: float, v_pp_ref_dot: float = 0.0
) -> float:
    """One outer-loop tick; returns the reactive reference shift ``u2``."""
    return ctrl._step(v_pp_meas, v_pp_ref, v_pp_ref_dot)


def gate_participation(agent: InnerAgent, active: bool) -> None:
    """Switch an agent in or out of SVC; either transition clears its state."""
    agent.set_enabled(active)


class DelayBuffer:
    """Transport delay on a sampled measurement.

    ``read(t)`` returns the latest sample taken at or before ``t - delay``,
    or the oldest retained sample if there is none yet.
    """

    def __init__(self, delay: float = 0.0):
        self.delay = 0.0
        self.set_delay(delay)
        self._t: list[float] = []
        self._v: list[float] = []

    def set_delay(self, delay: float) -> None:
        if not (delay >= 0.0 and math.isfinite(delay)):
            raise ValueError(f"delay must be >= 0, got {delay}")
        # samples pruned under a shorter delay are not recovered
        self.delay = float(delay)

    def push(self, t: float, value: float) -> None:
        if self._t and t < self._t[-1]:
            raise ValueError("samples must arrive in time order")
        self._t.append(t)
        self._v.append(value)

    def read(self, t: float) -> float:
        if not self._t:
            raise LookupError("delay buffer is empty")
        # tiny slack keeps tick-aligned lookups robust to float drift
        k = bisect.bisect_right(self._t, t - self.delay + 1e-9) - 1
        if k < 0:
            return self._v[0]
        if k > 64:
            del self._t[:k]
            del self._v[:k]
            k = 0
        return self._v[k]
