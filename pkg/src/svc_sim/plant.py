"""Discrete-time surrogate of the zone: first-order AVR lags behind a static sensitivity network.

Each connected generator's terminal voltage follows its (clamped) AVR setpoint
with time constant ``tau_avr``; pilot voltage and reactive powers are then
algebraic functions of the terminal voltages plus additive disturbances.
Reactive power is counted positive when generated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DimensionMismatch, NonFiniteInput
from .model import ActiveMask, SensitivityModel, reduce_model

# Sample times of the original electromagnetic benchmark, kept for reference.
T_POWER = 10e-6
T_CONTROL = 100e-6


@dataclass(frozen=True)
class GeneratorParams:
    """AVR closed-loop lag and setpoint range of one generator (pu, s)."""

    tau_avr: float = 0.5
    v_base: float = 1.0
    v_min: float = 0.5
    v_max: float = 2.0

    def __post_init__(self):
        if not (0.0 < self.tau_avr < math.inf):
            raise ValueError(f"tau_avr must be positive, got {self.tau_avr}")
        if not (self.v_min < self.v_base < self.v_max):
            raise ValueError(
                f"need v_min < v_base < v_max, got {self.v_min}, {self.v_base}, {self.v_max}"
            )


@dataclass(frozen=True)
class PlantConfig:
    dt_plant: float = 0.01
    t_power: float = T_POWER
    t_control: float = T_CONTROL

    def __post_init__(self):
        if not (self.dt_plant > 0.0):
            raise ValueError(f"dt_plant must be positive, got {self.dt_plant}")

    def check(self, generators: list[GeneratorParams], periods: tuple[float, ...]) -> None:
        tau_min = min(g.tau_avr for g in generators)
        if self.dt_plant > tau_min / 10.0 * (1.0 + 1e-9):
            raise ValueError(f"dt_plant {self.dt_plant:g} s exceeds min(tau_avr)/10")
        for p in periods:
            ticks_per_period(p, self.dt_plant)


def ticks_per_period(period: float, dt: float) -> int:
    m = round(period / dt)
    if m < 1 or abs(m * dt - period) > 1e-9 * max(1.0, period):
        raise ValueError(f"period {period:g} s is not a multiple of dt_plant {dt:g} s")
    return m


@dataclass(frozen=True, eq=False)
class GridState:
    """Snapshot of the zone at time ``t``.

    ``v_pp`` and ``q`` are always the algebraic image of ``v_t`` under the
    current model restricted to connected generators, plus disturbances.
    Use :meth:`create` rather than the raw constructor.
    """

    t: float
    v_t: NDArray[np.float64]
    v_set: NDArray[np.float64]
    q: NDArray[np.float64]
    v_pp: float
    d_v: float
    d_q: NDArray[np.float64]
    mask: ActiveMask
    model: SensitivityModel
    generators: tuple[GeneratorParams, ...]
    # model with disconnected rows/columns zeroed
    _c_v: NDArray[np.float64] = field(repr=False)
    _c_q: NDArray[np.float64] = field(repr=False)

    @classmethod
    def create(
        cls,
        model: SensitivityModel,
        generators: list[GeneratorParams] | tuple[GeneratorParams, ...],
        v_t: ArrayLike | None = None,
        mask: ActiveMask | None = None,
        d_v: float = 0.0,
        d_q: ArrayLike | None = None,
        t: float = 0.0,
    ) -> GridState:
        n = model.n
        generators = tuple(generators)
        if len(generators) != n:
            raise DimensionMismatch(f"{len(generators)} generators for a model of size {n}")
        if v_t is None:
            v_t = [g.v_base for g in generators]
        v_t = _vector(v_t, n, "v_t")
        d_q = np.zeros(n) if d_q is None else _vector(d_q, n, "d_q")
        mask = ActiveMask.all_active(n) if mask is None else mask
        c_v, c_q = _effective(model, mask)
        v_set = np.array([g.v_base for g in generators])
        return cls._assemble(t, v_t, v_set, float(d_v), d_q, mask, model, generators, c_v, c_q)

    @classmethod
    def _assemble(cls, t, v_t, v_set, d_v, d_q, mask, model, generators, c_v, c_q) -> GridState:
        conn = np.asarray(mask.connected, dtype=float)
        q = (c_q @ v_t + d_q) * conn
        v_pp = float(c_v @ v_t) + d_v
        return cls(t, v_t, v_set, q, v_pp, d_v, d_q, mask, model, generators, c_v, c_q)

    @property
    def n(self) -> int:
        return self.model.n


def _vector(x: ArrayLike, n: int, name: str) -> NDArray[np.float64]:
    arr = np.array(x, dtype=np.float64).reshape(-1)
    if arr.shape != (n,):
        raise DimensionMismatch(f"{name} has {arr.size} entries, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput(f"{name} contains non-finite values")
    return arr


def _effective(model: SensitivityModel, mask: ActiveMask):
    if mask.n != model.n:
        raise DimensionMismatch(f"mask covers {mask.n} generators, model has {model.n}")
    reduce_model(model, mask)  # raises if the connected block is singular
    conn = np.asarray(mask.connected, dtype=float)
    return model.c_v * conn, model.c_q * np.outer(conn, conn)


@lru_cache(maxsize=64)
def _bank(generators: tuple[GeneratorParams, ...], dt: float):
    v_base = np.array([g.v_base for g in generators])
    v_min = np.array([g.v_min for g in generators])
    v_max = np.array([g.v_max for g in generators])
    decay = np.exp(-dt / np.array([g.tau_avr for g in generators]))
    return v_base, v_min, v_max, decay


def setpoints(generators: tuple[GeneratorParams, ...], u1: ArrayLike) -> NDArray[np.float64]:
    """AVR setpoints ``v_base + u1`` clamped to each generator's range."""
    v_base, v_min, v_max, _ = _bank(tuple(generators), 1.0)
    return np.minimum(np.maximum(v_base + u1, v_min), v_max)


def plant_step(state: GridState, setpoint_corrections: ArrayLike, dt: float) -> GridState:
    """Advance the AVR lags by ``dt`` with zero-order-hold setpoints ``v_base + u1``.

    Uses the exact discretisation of the first-order lag, so two steps of
    ``dt`` equal one step of ``2 dt``.
    """
    if not (dt > 0.0):
        raise ValueError(f"dt must be positive, got {dt}")
    u1 = _vector(setpoint_corrections, state.n, "setpoint_corrections")
    gens = state.generators
    v_base, v_min, v_max, decay = _bank(gens, dt)
    v_set = np.minimum(np.maximum(v_base + u1, v_min), v_max)
    v_t = v_set + (state.v_t - v_set) * decay
    frozen = ~np.asarray(state.mask.connected)
    v_t[frozen] = state.v_t[frozen]
    return GridState._assemble(
        state.t + dt, v_t, v_set, state.d_v, state.d_q, state.mask, state.model,
        gens, state._c_v, state._c_q,
    )


def apply_disturbance(state: GridState, d_v: float, d_q: ArrayLike | None = None) -> GridState:
    """Replace the additive pilot-voltage and reactive-power disturbances."""
    if not math.isfinite(d_v):
        raise NonFiniteInput("d_v must be finite")
    d_q = np.zeros(state.n) if d_q is None else _vector(d_q, state.n, "d_q")
    return GridState._assemble(
        state.t, state.v_t, state.v_set, float(d_v), d_q, state.mask, state.model,
        state.generators, state._c_v, state._c_q,
    )


def apply_topology(
    state: GridState,
    model: SensitivityModel | None = None,
    mask: ActiveMask | None = None,
) -> GridState:
    """Swap the sensitivity model and/or the connection mask.

    Terminal voltages are continuous across the swap, so outputs jump
    instantaneously.  Disconnected generators keep their last ``v_t`` frozen.
    """
    model = state.model if model is None else model
    mask = state.mask if mask is None else mask
    if model.n != state.n:
        raise DimensionMismatch(f"new model has {model.n} generators, state has {state.n}")
    c_v, c_q = _effective(model, mask)
    return GridState._assemble(
        state.t, state.v_t, state.v_set, state.d_v, state.d_q, mask, model,
        state.generators, c_v, c_q,
    )


def perturb_line(model: SensitivityModel, gen: int, factor: float) -> SensitivityModel:
    """Scale a generator's network couplings: off-diagonal row/column of c_q and its c_v entry."""
    c_v = model.c_v.copy()
    c_q = model.c_q.copy()
    c_v[gen] *= factor
    diag = c_q[gen, gen]
    c_q[gen, :] *= factor
    c_q[:, gen] *= factor
    c_q[gen, gen] = diag
    return SensitivityModel(c_v, c_q)
