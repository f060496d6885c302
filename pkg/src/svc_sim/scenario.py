"""Closed-loop run loop, scheduled events, canned case studies and run metrics."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .control import (
    DelayBuffer,
    DtipGains,
    InnerAgent,
    OuterController,
    compose_reference,
    gate_participation,
    inner_step,
    outer_step,
)
from .errors import (
    DimensionMismatch,
    EmptySeries,
    NoActiveGenerator,
    NotSettled,
    ScenarioError,
)
from .estimation import Differentiator, DifferentiatorConfig
from .model import (
    ActiveMask,
    ParticipationFactors,
    SensitivityModel,
    benchmark_model,
    reduce_model,
    solve_alignment,
)
from .plant import (
    GeneratorParams,
    GridState,
    PlantConfig,
    apply_disturbance,
    apply_topology,
    perturb_line,
    plant_step,
    setpoints,
    ticks_per_period,
)

log = logging.getLogger(__name__)


# -- events -------------------------------------------------------------------

@dataclass(frozen=True)
class SetpointStep:
    v_pp_ref: float


@dataclass(frozen=True)
class SetDelay:
    delay: float


@dataclass(frozen=True)
class LoadDisturbance:
    d_v: float
    d_q: tuple[float, ...] | None = None


@dataclass(frozen=True)
class LinePerturb:
    """Scale one generator's couplings of the scenario's base model, or swap in ``model``.

    ``factor=1`` restores the base model.
    """

    gen: int = 1
    factor: float = 1.15
    model: SensitivityModel | None = None


@dataclass(frozen=True)
class Disconnect:
    gen: int


@dataclass(frozen=True)
class JoinSvc:
    gen: int


@dataclass(frozen=True)
class LeaveSvc:
    gen: int


EventKind = Union[SetpointStep, SetDelay, LoadDisturbance, LinePerturb, Disconnect, JoinSvc, LeaveSvc]


@dataclass(frozen=True)
class Event:
    at: float
    kind: EventKind

    def __post_init__(self):
        if not (self.at >= 0.0 and math.isfinite(self.at)):
            raise ValueError(f"event time must be >= 0, got {self.at}")


# -- configuration ------------------------------------------------------------

# Desk-scale tuning for the surrogate plant (tau_avr = 0.5 s, inner period
# 0.1 s, outer period 1 s): alpha_1i = DESK_INNER_ALPHA_PER_CQ * c_q[i, i] and
# alpha_2 = DESK_OUTER_ALPHA_PER_GAIN * (pilot voltage per unit of u2).
DESK_INNER_ALPHA_PER_CQ = 10.0
DESK_INNER_KP = 2.0
DESK_OUTER_ALPHA_PER_GAIN = 3.6
DESK_OUTER_KP = 0.09

# Gains reported for the electromagnetic benchmark at a 100 us control rate.
BENCHMARK_INNER_ALPHA = (4346.0, 4564.0, 4410.0, 4584.0)
BENCHMARK_INNER_KP = 2.0
BENCHMARK_OUTER_ALPHA = 50000.0
BENCHMARK_OUTER_KP = 0.09


@dataclass(frozen=True)
class ControllerConfig:
    inner_gains: tuple[DtipGains, ...]
    outer_gains: DtipGains
    inner_period: float = 0.1
    outer_period: float = 1.0
    inner_diff: DifferentiatorConfig = DifferentiatorConfig(t_ndf=0.01, n_ndf=11)
    outer_diff: DifferentiatorConfig = DifferentiatorConfig(t_ndf=0.1, n_ndf=11)
    # "uniform": u2 added as is to every reference; "pf": scaled by pf_i
    u2_distribution: str = "uniform"
    # references slew linearly to new targets over this many seconds (0: step)
    ref_ramp: float = 10.0
    # "analytic": exact slope of the slewed reference; "differentiate": estimate it
    ref_derivative: str = "analytic"

    def __post_init__(self):
        if self.u2_distribution not in ("uniform", "pf"):
            raise ValueError(f"unknown u2_distribution {self.u2_distribution!r}")
        if not self.ref_ramp >= 0.0:
            raise ValueError(f"ref_ramp must be >= 0, got {self.ref_ramp}")
        if self.ref_derivative not in ("analytic", "differentiate"):
            raise ValueError(f"unknown ref_derivative {self.ref_derivative!r}")
        object.__setattr__(self, "inner_gains", tuple(self.inner_gains))

    @classmethod
    def desk(cls, model: SensitivityModel, **kw) -> ControllerConfig:
        """Gains scaled to the model so the loops behave alike on any zone."""
        gain = float(np.sum(model.pilot_sensitivity_to_q()))
        return cls(
            inner_gains=tuple(
                DtipGains(DESK_INNER_ALPHA_PER_CQ * float(model.c_q[i, i]), DESK_INNER_KP)
                for i in range(model.n)
            ),
            outer_gains=DtipGains(DESK_OUTER_ALPHA_PER_GAIN * gain, DESK_OUTER_KP),
            **kw,
        )

    @classmethod
    def benchmark(cls, **kw) -> ControllerConfig:
        return cls(
            inner_gains=tuple(DtipGains(a, BENCHMARK_INNER_KP) for a in BENCHMARK_INNER_ALPHA),
            outer_gains=DtipGains(BENCHMARK_OUTER_ALPHA, BENCHMARK_OUTER_KP),
            **kw,
        )


@dataclass(frozen=True, eq=False)
class Scenario:
    model: SensitivityModel
    pf: ParticipationFactors
    generators: tuple[GeneratorParams, ...]
    controllers: ControllerConfig
    v_pp_ref: float
    duration: float = 1000.0
    events: tuple[Event, ...] = ()
    plant: PlantConfig = PlantConfig()
    initial_mask: ActiveMask | None = None
    initial_v_t: tuple[float, ...] | None = None
    log_interval: float = 0.1
    name: str = "scenario"

    def __post_init__(self):
        n = self.model.n
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "events", tuple(sorted(self.events, key=lambda e: e.at)))
        if self.initial_v_t is not None:
            object.__setattr__(self, "initial_v_t", tuple(float(v) for v in self.initial_v_t))
        if not (self.duration > 0.0):
            raise ValueError(f"duration must be positive, got {self.duration}")
        if self.pf.n != n or len(self.generators) != n or len(self.controllers.inner_gains) != n:
            raise DimensionMismatch("pf, generators and inner gains must all have one entry per generator")
        if self.initial_mask is not None and self.initial_mask.n != n:
            raise DimensionMismatch("initial_mask size differs from the model")
        if self.initial_v_t is not None and len(self.initial_v_t) != n:
            raise DimensionMismatch("initial_v_t size differs from the model")
        for ev in self.events:
            gen = getattr(ev.kind, "gen", None)
            if gen is not None and not 0 <= gen < n:
                raise ValueError(f"event at {ev.at} s references generator {gen}, n = {n}")
            if isinstance(ev.kind, LoadDisturbance) and ev.kind.d_q is not None and len(ev.kind.d_q) != n:
                raise DimensionMismatch(f"event at {ev.at} s: d_q needs {n} entries")
            if isinstance(ev.kind, LinePerturb) and ev.kind.model is not None and ev.kind.model.n != n:
                raise DimensionMismatch(f"event at {ev.at} s: replacement model size differs")
        c = self.controllers
        OuterController(c.outer_gains, c.outer_diff, c.outer_period, c.inner_period)
        for g in c.inner_gains:
            InnerAgent(g, c.inner_diff, c.inner_period)
        self.plant.check(
            list(self.generators), (c.inner_period, c.outer_period, c.inner_diff.t_ndf, c.outer_diff.t_ndf, self.log_interval)
        )

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return np.array_equal(self.pf.pf, other.pf.pf) and all(
            getattr(self, f) == getattr(other, f)
            for f in ("model", "generators", "controllers", "v_pp_ref", "duration", "events",
                      "plant", "initial_mask", "initial_v_t", "log_interval", "name")
        )

    __hash__ = None

    @property
    def n(self) -> int:
        return self.model.n

    @property
    def mask0(self) -> ActiveMask:
        return self.initial_mask or ActiveMask.all_active(self.n)


# -- results ------------------------------------------------------------------

SCALAR_COLUMNS = ("t", "v_pp_ref", "v_pp", "v_pp_meas_delayed", "u2")
GENERATOR_COLUMNS = ("v_t", "v_set", "q", "q_ref", "q_ref_prime", "u1", "connected", "svc_active")


def column_names(n: int) -> list[str]:
    """Stable CSV column order: scalars, then one block per quantity over generators 1..n."""
    cols = list(SCALAR_COLUMNS)
    for name in GENERATOR_COLUMNS:
        cols.extend(f"{name}_{i + 1}" for i in range(n))
    return cols


@dataclass(eq=False)
class RunResult:
    columns: list[str]
    data: NDArray[np.float64]
    n: int
    inner_ticks: int = 0
    outer_ticks: int = 0
    metrics: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> NDArray[np.float64]:
        return self.data[:, self.columns.index(name)]

    def gen(self, name: str) -> NDArray[np.float64]:
        """Per-generator block, shape (rows, n)."""
        start = self.columns.index(f"{name}_1")
        return self.data[:, start:start + self.n]

    @property
    def t(self) -> NDArray[np.float64]:
        return self.data[:, 0]

    def at(self, t: float) -> int:
        """Row index of the last sample at or before ``t``."""
        return int(np.searchsorted(self.t, t + 1e-9, side="right")) - 1


# -- steady state -------------------------------------------------------------

def equilibrium(
    model: SensitivityModel,
    pf: ParticipationFactors,
    v_pp_ref: float,
    mask: ActiveMask | None = None,
    v_t_idle: ArrayLike | None = None,
    u2_weights: ArrayLike | None = None,
) -> tuple[NDArray[np.float64], float]:
    """Closed-loop steady state ``(v_t, u2)``.

    Active generators produce ``q_ref_i + w_i * u2`` and the pilot voltage
    equals ``v_pp_ref``; connected non-participating generators sit at
    ``v_t_idle``.  Solved directly as one square linear system, independent
    of the alignment solver's closed form.
    """
    n = model.n
    mask = ActiveMask.all_active(n) if mask is None else mask
    w = np.ones(n) if u2_weights is None else np.asarray(u2_weights, dtype=float)
    act = mask.active_idx
    idle = np.array([i for i in mask.connected_idx if not mask.svc_active[i]], dtype=int)
    v_idle = np.zeros(n) if v_t_idle is None else np.asarray(v_t_idle, dtype=float)
    sol = solve_alignment(model, pf, v_pp_ref, mask)

    # unknowns: v_t[act], u2
    m = act.size
    a = np.zeros((m + 1, m + 1))
    b = np.zeros(m + 1)
    a[:m, :m] = model.c_q[np.ix_(act, act)]
    a[:m, m] = -w[act]
    b[:m] = sol.q_ref[act] - model.c_q[np.ix_(act, idle)] @ v_idle[idle]
    a[m, :m] = model.c_v[act]
    b[m] = v_pp_ref - model.c_v[idle] @ v_idle[idle]
    x = np.linalg.solve(a, b)
    v_t = v_idle.copy()
    v_t[act] = x[:m]
    return v_t, float(x[m])


# -- run loop -----------------------------------------------------------------

class _Ramp:
    """Reference slewing linearly from its current value to a new target."""

    def __init__(self, value: ArrayLike, duration: float):
        self.start = np.array(value, dtype=float)
        self.target = self.start.copy()
        self.duration = duration
        self.t0 = 0.0

    def retarget(self, t: float, target: ArrayLike, start: ArrayLike | None = None) -> None:
        self.start = self.value(t) if start is None else np.array(start, dtype=float)
        self.target = np.array(target, dtype=float)
        self.t0 = t

    def _frac(self, t: float) -> float:
        if self.duration <= 0.0:
            return 1.0
        return min(1.0, max(0.0, (t - self.t0) / self.duration))

    def value(self, t: float) -> NDArray[np.float64]:
        f = self._frac(t)
        if f >= 1.0:
            return self.target.copy()
        return self.start + (self.target - self.start) * f

    def slope(self, t: float) -> NDArray[np.float64]:
        if self._frac(t) >= 1.0:
            return np.zeros_like(self.target)
        return (self.target - self.start) / self.duration


class _Runner:
    def __init__(self, sc: Scenario, parallel: bool):
        self.sc = sc
        c = sc.controllers
        dt = sc.plant.dt_plant
        self.dt = dt
        self.m_in = ticks_per_period(c.inner_period, dt)
        self.m_out = ticks_per_period(c.outer_period, dt)
        self.m_ndf_in = ticks_per_period(c.inner_diff.t_ndf, dt)
        self.m_ndf_out = ticks_per_period(c.outer_diff.t_ndf, dt)
        self.m_log = ticks_per_period(sc.log_interval, dt)
        for m_ndf, m in ((self.m_ndf_in, self.m_in), (self.m_ndf_out, self.m_out)):
            if m % m_ndf:
                raise ValueError("differentiator sample period must divide the loop period")

        n = sc.n
        self.mask = sc.mask0
        self.agents = []
        for i, (g, gen) in enumerate(zip(c.inner_gains, sc.generators)):
            agent = InnerAgent(g, c.inner_diff, c.inner_period, (gen.v_min - gen.v_base, gen.v_max - gen.v_base))
            agent.set_enabled(self.mask.svc_active[i])
            self.agents.append(agent)
        self.outer = OuterController(c.outer_gains, c.outer_diff, c.outer_period, c.inner_period)
        self.delay = DelayBuffer(0.0)
        self.state = GridState.create(sc.model, sc.generators, sc.initial_v_t, self.mask)

        self.v_pp_ref = float(sc.v_pp_ref)
        self.v_ref_ramp = _Ramp(self.v_pp_ref, c.ref_ramp)
        sol = solve_alignment(sc.model, sc.pf, self.v_pp_ref, self.mask)
        self.q_ref = sol.q_ref.copy()
        self.q_ref_ramp = _Ramp(self.q_ref, c.ref_ramp)
        self.dirty = False
        self.snap = False

        self.u1 = np.zeros(n)
        self.u2 = 0.0
        self.q_ref_prime = np.zeros(n)
        self.q_ref_dot = np.zeros(n)
        self.weights = sc.pf.pf.copy() if c.u2_distribution == "pf" else np.ones(n)
        self.inner_ticks = 0
        self.outer_ticks = 0
        if c.ref_derivative == "differentiate":
            self.ref_diffs = [Differentiator(c.inner_diff) for _ in range(n)]
            self.outer_ref_diff = Differentiator(c.outer_diff)
        else:
            self.ref_diffs = None
            self.outer_ref_diff = None
        self.pool = ThreadPoolExecutor(max_workers=n) if parallel else None

    # events ------------------------------------------------------------------

    def apply(self, ev: Event) -> None:
        k = ev.kind
        st = self.state
        log.debug("t=%.3f applying %s", st.t, k)
        if isinstance(k, SetpointStep):
            self.v_pp_ref = float(k.v_pp_ref)
            self.v_ref_ramp.retarget(st.t, self.v_pp_ref)
        elif isinstance(k, SetDelay):
            self.delay.set_delay(k.delay)
            return
        elif isinstance(k, LoadDisturbance):
            self.state = apply_disturbance(st, k.d_v, k.d_q)
            return
        elif isinstance(k, LinePerturb):
            new = k.model if k.model is not None else perturb_line(self.sc.model, k.gen, k.factor)
            self.state = apply_topology(st, model=new)
            self.snap = True
        elif isinstance(k, Disconnect):
            self.mask = self.mask.disconnect(k.gen)
            self.state = apply_topology(st, mask=self.mask)
            self.snap = True
        elif isinstance(k, JoinSvc):
            self.mask = self.mask.with_svc(k.gen, True)
        elif isinstance(k, LeaveSvc):
            self.mask = self.mask.with_svc(k.gen, False)
        else:  # pragma: no cover
            raise TypeError(f"unknown event kind {k!r}")
        self.dirty = True

    def realign(self) -> None:
        t = self.state.t
        sol = solve_alignment(self.state.model, self.sc.pf, self.v_pp_ref, self.mask)
        start = self.q_ref_ramp.value(t)
        for i, agent in enumerate(self.agents):
            active = self.mask.svc_active[i]
            if active and not agent.enabled:
                # bumpless entry: the joiner's reference starts from its output
                start[i] = self.state.q[i]
            elif not active:
                start[i] = 0.0
                self.u1[i] = 0.0
            gate_participation(agent, active)
        self.q_ref = sol.q_ref.copy()
        # the network itself jumped on topology changes: retarget at once
        self.q_ref_ramp.retarget(t, self.q_ref, self.q_ref if self.snap else start)
        self.dirty = False
        self.snap = False

    # loop --------------------------------------------------------------------

    def _inner(self, i: int, q_i: float, do_step: bool) -> float:
        agent = self.agents[i]
        if not agent.enabled:
            return 0.0
        ref = self.q_ref_prime[i]
        ref_dot = self.q_ref_dot[i]
        if self.ref_diffs is not None:
            self.ref_diffs[i].push(ref)
            ref_dot = self.ref_diffs[i].derivative() if self.ref_diffs[i].ready else 0.0
        if not do_step:
            agent.observe(q_i)
            return self.u1[i]
        return inner_step(agent, q_i, ref, ref_dot)

    def tick(self, k: int) -> None:
        st = self.state
        t = k * self.dt
        self.delay.push(t, st.v_pp)
        v_meas = self.delay.read(t)

        if k % self.m_ndf_out == 0:
            v_ref = float(self.v_ref_ramp.value(t))
            ref_dot = float(self.v_ref_ramp.slope(t))
            if self.outer_ref_diff is not None:
                self.outer_ref_diff.push(v_ref)
                ref_dot = self.outer_ref_diff.derivative() if self.outer_ref_diff.ready else 0.0
            if k % self.m_out == 0:
                self.u2 = outer_step(self.outer, v_meas, v_ref, ref_dot)
                self.outer_ticks += 1
            else:
                self.outer.observe(v_meas)

        active = np.asarray(self.mask.svc_active)
        shaped = self.q_ref_ramp.value(t)
        self.q_ref_prime = np.where(active, compose_reference(shaped, self.u2, self.weights), 0.0)

        if k % self.m_ndf_in == 0:
            do_step = k % self.m_in == 0
            self.q_ref_dot = np.where(active, self.q_ref_ramp.slope(t), 0.0)
            q = st.q.tolist()
            idx = range(self.sc.n)
            if self.pool is not None and do_step:
                out = list(self.pool.map(lambda i: self._inner(i, q[i], True), idx))
            else:
                out = [self._inner(i, q[i], do_step) for i in idx]
            self.u1 = np.array(out)
            if do_step:
                self.inner_ticks += 1
        self.v_meas = v_meas

    def row(self) -> list[float]:
        st = self.state
        # v_set reflects the correction applied over the next plant step
        v_set = setpoints(st.generators, self.u1)
        return [
            st.t, self.v_pp_ref, st.v_pp, self.v_meas, self.u2,
            *st.v_t, *v_set, *st.q, *self.q_ref, *self.q_ref_prime, *self.u1,
            *(float(c) for c in self.mask.connected),
            *(float(a) for a in self.mask.svc_active),
        ]

    def run(self) -> RunResult:
        sc = self.sc
        n_steps = round(sc.duration / self.dt)
        events = [(round(ev.at / self.dt), ev) for ev in sc.events]
        e = 0
        rows = []
        try:
            for k in range(n_steps + 1):
                while e < len(events) and events[e][0] <= k:
                    self.apply(events[e][1])
                    e += 1
                if self.dirty:
                    self.realign()
                self.tick(k)
                if k % self.m_log == 0:
                    rows.append(self.row())
                if k < n_steps:
                    self.state = plant_step(self.state, self.u1, self.dt)
        except Exception as exc:
            raise ScenarioError(self.state.t, exc) from exc
        finally:
            if self.pool is not None:
                self.pool.shutdown()
        result = RunResult(column_names(sc.n), np.array(rows), sc.n, self.inner_ticks, self.outer_ticks)
        result.metrics = compute_metrics(result, sc)
        return result


def run(scenario: Scenario, parallel: bool = False) -> RunResult:
    """Simulate the closed loop; ``parallel`` evaluates inner agents on a thread pool."""
    log.info("running %s for %.1f s", scenario.name, scenario.duration)
    return _Runner(scenario, parallel).run()


# -- metrics ------------------------------------------------------------------

def settling_time(t: ArrayLike, y: ArrayLike, ref: float, band: float) -> float:
    """Earliest sample time after which ``|y - ref| <= band * |ref|`` holds throughout.

    Raises NotSettled when the final sample is outside the band.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size == 0:
        raise EmptySeries("empty series")
    if not band > 0.0:
        raise ValueError(f"band must be positive, got {band}")
    outside = np.flatnonzero(np.abs(y - ref) > band * abs(ref))
    if outside.size == 0:
        return float(t[0])
    last = outside[-1]
    if last == t.size - 1:
        raise NotSettled(f"still outside the {band:g} band at t = {t[-1]:g}")
    return float(t[last + 1])


def alignment_spread(q: ArrayLike, pf: ParticipationFactors, mask: ActiveMask | None = None) -> float:
    """Range of ``q_i / pf_i`` over SVC-active generators (0 when perfectly aligned)."""
    q = np.asarray(q, dtype=float)
    mask = ActiveMask.all_active(q.size) if mask is None else mask
    act = mask.active_idx
    if act.size == 0:
        raise NoActiveGenerator("no generator participates in SVC")
    ratio = q[act] / pf.pf[act]
    return float(ratio.max() - ratio.min())


RECOVERY_TOL = 1e-3


def _recovery(t, y, ref, t0, t1, tol=RECOVERY_TOL):
    sel = (t >= t0 - 1e-9) & (t < t1 - 1e-9) if t1 is not None else (t >= t0 - 1e-9)
    try:
        return settling_time(t[sel], y[sel], ref, tol / abs(ref)) - t0
    except NotSettled:
        return None


def compute_metrics(result: RunResult, scenario: Scenario) -> dict:
    t = result.t
    v = result["v_pp"]
    ref = result["v_pp_ref"]
    final_ref = float(ref[-1])
    # measured from the last reference step (or the start of the run)
    steps = [ev.at for ev in scenario.events if isinstance(ev.kind, SetpointStep) and ev.at <= t[-1]]
    t_step = steps[-1] if steps else float(t[0])
    sel = t >= t_step - 1e-9
    try:
        settle = max(0.0, settling_time(t[sel], v[sel], final_ref, 0.02) - t_step)
    except NotSettled:
        settle = None
    last = -1
    mask = ActiveMask(
        tuple(bool(x) for x in result.gen("connected")[last]),
        tuple(bool(x) for x in result.gen("svc_active")[last]),
    )
    times = sorted({ev.at for ev in scenario.events if 0.0 < ev.at <= t[-1]})
    per_event = []
    for j, at in enumerate(times):
        nxt = times[j + 1] if j + 1 < len(times) else None
        i0 = result.at(at)
        seg = (t >= at - 1e-9) & ((t < nxt - 1e-9) if nxt is not None else True)
        seg_ref = float(ref[seg][-1]) if seg.any() else final_ref
        per_event.append({
            "at": at,
            "recovery_time": _recovery(t, v, seg_ref, at, nxt),
            "max_deviation": float(np.max(np.abs(v[seg] - seg_ref))) if seg.any() else 0.0,
            "v_pp_before": float(v[max(i0 - 1, 0)]),
        })
    return {
        "v_pp_settling_time": settle,
        "final_v_pp_error": float(abs(v[-1] - final_ref)),
        "final_alignment_spread": alignment_spread(result.gen("q")[last], scenario.pf, mask)
        if any(mask.svc_active) else None,
        "max_overshoot": float(max(0.0, np.max(v - ref))),
        "events": per_event,
    }


# -- canned case studies ------------------------------------------------------

CASE_IDS = (1, 2, 3, 4, 5, 6)
G2 = 1


def base_scenario(
    v_pp_ref: float = 1.0,
    mask: ActiveMask | None = None,
    events: tuple[Event, ...] = (),
    name: str = "benchmark",
    duration: float = 1000.0,
    tau_avr: float = 0.5,
) -> Scenario:
    """Benchmark zone at a pre-converged operating point.

    Base AVR setpoints are the closed-loop steady state for ``v_pp_ref``; a
    connected generator outside SVC idles at zero reactive output.
    """
    model = benchmark_model()
    pf = ParticipationFactors(np.ones(model.n))
    mask = ActiveMask.all_active(model.n) if mask is None else mask
    sol = solve_alignment(model, pf, v_pp_ref, mask)
    # idle units produce no reactive power at the start
    v_t = np.linalg.solve(model.c_q, sol.q_ref)
    generators = tuple(GeneratorParams(tau_avr=tau_avr, v_base=float(v)) for v in v_t)
    return Scenario(
        model=model,
        pf=pf,
        generators=generators,
        controllers=ControllerConfig.desk(model),
        v_pp_ref=v_pp_ref,
        duration=duration,
        events=events,
        initial_mask=mask,
        name=name,
    )


def case_scenario(case_id: int) -> Scenario:
    """The six benchmark case studies on the surrogate plant."""
    if case_id == 1:
        return base_scenario(0.98, events=(Event(500.0, SetpointStep(1.0)),), name="case1")
    if case_id == 2:
        return base_scenario(
            0.98, events=(Event(0.0, SetDelay(28.0)), Event(280.0, SetpointStep(1.0))), name="case2"
        )
    if case_id == 3:
        return base_scenario(1.0, events=(Event(500.0, LoadDisturbance(-0.005)),), name="case3")
    if case_id == 4:
        return base_scenario(
            1.0,
            events=(Event(500.0, LinePerturb(G2, 1.15)), Event(650.0, LinePerturb(G2, 1.0))),
            name="case4",
        )
    if case_id == 5:
        return base_scenario(1.0, events=(Event(350.0, Disconnect(G2)),), name="case5")
    if case_id == 6:
        mask = ActiveMask.all_active(4).with_svc(G2, False)
        return base_scenario(
            0.98,
            mask=mask,
            events=(Event(350.0, SetpointStep(1.0)), Event(500.0, JoinSvc(G2))),
            name="case6",
        )
    raise ValueError(f"unknown case id {case_id}; expected one of {CASE_IDS}")
