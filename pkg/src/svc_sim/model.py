"""Sensitivity model of a single voltage zone and the reactive power alignment solver.

The zone is described by two linear maps from generator terminal voltages
``v_t`` (pu):

    v_pp = c_v @ v_t        pilot point voltage
    q    = c_q @ v_t        generator reactive powers

At steady state the participating generators share reactive power in
proportion to their participation factors, ``q_i = c * pf_i``.  Combined
with the pilot voltage map this pins down ``c`` and the per-generator
reactive references for a given pilot voltage reference:

    v_pp_ref = (c_v @ inv(c_q)) @ (c * pf)

All quantities are per-unit on a common base.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import (
    DegenerateAlignment,
    DimensionMismatch,
    NoActiveGenerator,
    SingularModel,
)

SOLVE_RESIDUAL_TOL = 1e-10
DEGENERACY_TOL = 1e-12

# Benchmark zone: four 200 MVA machines feeding one pilot bus.
BENCHMARK_C_V = (0.2715, 0.0989, 0.2746, 0.1022)
BENCHMARK_C_Q = (
    (+2.5370, -0.3528, -0.9798, -0.3647),
    (-0.2729, +2.8570, -0.2761, -0.6678),
    (-0.9774, -0.3560, +2.4910, -0.3680),
    (-0.2729, -0.6605, -0.2823, +2.7530),
)
BENCHMARK_MACHINE_BASE_MVA = 200.0


def _frozen(a: ArrayLike, ndim: int) -> NDArray[np.float64]:
    arr = np.array(a, dtype=np.float64)
    if arr.ndim != ndim:
        raise DimensionMismatch(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def _check_invertible(c_q: NDArray[np.float64], tol: float = SOLVE_RESIDUAL_TOL) -> None:
    n = c_q.shape[0]
    rhs = np.random.default_rng(n).standard_normal(n)
    try:
        x = np.linalg.solve(c_q, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularModel(str(exc)) from exc
    scale = np.linalg.norm(c_q, np.inf) * np.linalg.norm(x, np.inf) + np.linalg.norm(rhs, np.inf)
    if not np.all(np.isfinite(x)) or np.linalg.norm(c_q @ x - rhs, np.inf) > tol * scale:
        raise SingularModel("c_q linear solve residual exceeds tolerance")


@dataclass(frozen=True, eq=False)
class SensitivityModel:
    """Linear pilot-voltage and reactive-power sensitivities of one zone.

    Parameters
    ----------
    c_v : array_like, shape (n,)
        Pilot voltage sensitivity to each terminal voltage.
    c_q : array_like, shape (n, n)
        Reactive power sensitivities; must be invertible.
    """

    c_v: NDArray[np.float64]
    c_q: NDArray[np.float64]

    def __post_init__(self):
        c_v = _frozen(self.c_v, 1)
        c_q = _frozen(self.c_q, 2)
        n = c_v.shape[0]
        if n == 0:
            raise DimensionMismatch("empty sensitivity model")
        if c_q.shape != (n, n):
            raise DimensionMismatch(f"c_q has shape {c_q.shape}, expected ({n}, {n})")
        if not (np.all(np.isfinite(c_v)) and np.all(np.isfinite(c_q))):
            raise ValueError("sensitivity entries must be finite")
        _check_invertible(c_q)
        object.__setattr__(self, "c_v", c_v)
        object.__setattr__(self, "c_q", c_q)

    @property
    def n(self) -> int:
        return self.c_v.shape[0]

    def pilot_voltage(self, v_t: ArrayLike) -> float:
        return float(self.c_v @ np.asarray(v_t, dtype=np.float64))

    def reactive_power(self, v_t: ArrayLike) -> NDArray[np.float64]:
        return self.c_q @ np.asarray(v_t, dtype=np.float64)

    def pilot_sensitivity_to_q(self) -> NDArray[np.float64]:
        """Row vector ``c_v @ inv(c_q)``: pilot voltage per unit reactive power."""
        return np.linalg.solve(self.c_q.T, self.c_v)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SensitivityModel):
            return NotImplemented
        return np.array_equal(self.c_v, other.c_v) and np.array_equal(self.c_q, other.c_q)

    __hash__ = None  # type: ignore[assignment]

    def to_dict(self) -> dict:
        return {"c_v": self.c_v.tolist(), "c_q": self.c_q.tolist()}


def benchmark_model() -> SensitivityModel:
    """The four-generator benchmark zone used by the canned case studies."""
    return SensitivityModel(BENCHMARK_C_V, BENCHMARK_C_Q)


@dataclass(frozen=True, eq=False)
class ParticipationFactors:
    """Strictly positive per-generator reactive power sharing weights."""

    pf: NDArray[np.float64]

    def __post_init__(self):
        pf = _frozen(self.pf, 1)
        if not np.all(np.isfinite(pf)) or np.any(pf <= 0.0):
            raise ValueError("participation factors must be finite and > 0")
        object.__setattr__(self, "pf", pf)

    @property
    def n(self) -> int:
        return self.pf.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ParticipationFactors):
            return NotImplemented
        return np.array_equal(self.pf, other.pf)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class ActiveMask:
    """Which generators are electrically connected and which take part in SVC."""

    connected: tuple[bool, ...]
    svc_active: tuple[bool, ...]

    def __post_init__(self):
        connected = tuple(bool(x) for x in self.connected)
        svc_active = tuple(bool(x) for x in self.svc_active)
        if len(connected) != len(svc_active):
            raise DimensionMismatch("connected and svc_active lengths differ")
        if any(a and not c for a, c in zip(svc_active, connected)):
            raise ValueError("a generator cannot be SVC-active while disconnected")
        object.__setattr__(self, "connected", connected)
        object.__setattr__(self, "svc_active", svc_active)

    @classmethod
    def all_active(cls, n: int) -> ActiveMask:
        return cls((True,) * n, (True,) * n)

    @property
    def n(self) -> int:
        return len(self.connected)

    @property
    def connected_idx(self) -> NDArray[np.intp]:
        return np.flatnonzero(self.connected)

    @property
    def active_idx(self) -> NDArray[np.intp]:
        return np.flatnonzero(self.svc_active)

    def disconnect(self, i: int) -> ActiveMask:
        """Disconnecting a generator also removes it from SVC."""
        connected = list(self.connected)
        active = list(self.svc_active)
        connected[i] = active[i] = False
        return ActiveMask(tuple(connected), tuple(active))

    def with_svc(self, i: int, active: bool) -> ActiveMask:
        if active and not self.connected[i]:
            raise ValueError(f"generator {i} is disconnected and cannot join SVC")
        flags = list(self.svc_active)
        flags[i] = active
        return ActiveMask(self.connected, tuple(flags))


@dataclass(frozen=True, eq=False)
class AlignmentSolution:
    """Steady-state reactive references ``q_ref = c * pf`` (zero for inactive units)."""

    q_ref: NDArray[np.float64]
    c: float

    def __post_init__(self):
        object.__setattr__(self, "q_ref", _frozen(self.q_ref, 1))


def reduce_model(model: SensitivityModel, mask: ActiveMask) -> SensitivityModel:
    """Drop the rows/columns of disconnected generators from the sensitivities."""
    if mask.n != model.n:
        raise DimensionMismatch(f"mask covers {mask.n} generators, model has {model.n}")
    idx = mask.connected_idx
    if idx.size == 0:
        raise NoActiveGenerator("no connected generator left")
    if idx.size == model.n:
        return model
    return SensitivityModel(model.c_v[idx], model.c_q[np.ix_(idx, idx)])


def solve_alignment(
    model: SensitivityModel,
    pf: ParticipationFactors,
    v_pp_ref: float,
    mask: ActiveMask | None = None,
    *,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> AlignmentSolution:
    """Per-generator reactive references that realise ``v_pp_ref`` with aligned shares.

    Only SVC-active generators receive a nonzero reference; the pilot voltage
    map is taken over the connected set.
    """
    if mask is None:
        mask = ActiveMask.all_active(model.n)
    if pf.n != model.n:
        raise DimensionMismatch(f"{pf.n} participation factors for {model.n} generators")
    if not any(mask.svc_active):
        raise NoActiveGenerator("no generator participates in SVC")
    if not np.isfinite(v_pp_ref):
        raise ValueError("v_pp_ref must be finite")

    reduced = reduce_model(model, mask)
    conn = mask.connected_idx
    s = np.zeros(model.n)
    s[conn] = reduced.pilot_sensitivity_to_q()

    act = mask.active_idx
    denom = float(s[act] @ pf.pf[act])
    if abs(denom) < degeneracy_tol:
        raise DegenerateAlignment(f"s . pf = {denom:g} is numerically zero")
    c = v_pp_ref / denom
    q_ref = np.zeros(model.n)
    q_ref[act] = c * pf.pf[act]
    return AlignmentSolution(q_ref, c)


def alignment_residuals(
    model: SensitivityModel,
    pf: ParticipationFactors,
    v_pp_ref: float,
    sol: AlignmentSolution,
    mask: ActiveMask | None = None,
) -> tuple[float, float]:
    """Residuals of both alignment equations: (max |q_ref - c*pf|, |v_pp_ref - s @ q_ref|)."""
    if mask is None:
        mask = ActiveMask.all_active(model.n)
    act = mask.active_idx
    conn = mask.connected_idx
    r_share = float(np.max(np.abs(sol.q_ref[act] - sol.c * pf.pf[act])))
    s = reduce_model(model, mask).pilot_sensitivity_to_q()
    r_pilot = abs(v_pp_ref - float(s @ sol.q_ref[conn]))
    return r_share, r_pilot
