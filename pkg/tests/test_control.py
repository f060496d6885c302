import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from svc_sim.control import (
    DelayBuffer,
    DtipGains,
    InnerAgent,
    OuterController,
    compose_reference,
    dtip_law,
    gate_participation,
    inner_step,
    outer_step,
)
from svc_sim.errors import NonFiniteInput
from svc_sim.estimation import DifferentiatorConfig

CFG = DifferentiatorConfig(0.02, 5)


def scalar_plant_error(k_p, t_end, dt=1e-3, alpha=3.0, e0=1.0):
    """Scalar plant y' = F(t) + alpha u under the law with the exact F."""
    gains = DtipGains(alpha, k_p)
    y, y_ref = e0, 0.0
    t = 0.0
    for _ in range(round(t_end / dt)):
        f = 0.5 * math.sin(t)
        u = dtip_law(f, 0.0, y - y_ref, gains)
        y += dt * (f + alpha * u)
        t += dt
    return y - y_ref


def test_dtip_examples():
    assert dtip_law(0.0, 0.0, 0.0, DtipGains(5.0, 3.0)) == 0.0
    assert dtip_law(1.0, 0.0, 0.5, DtipGains(1.0, 2.0)) == -2.0


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10), st.floats(0.1, 100), st.floats(0.1, 10))
def test_dtip_linear_and_inverse_alpha(f, r, e, alpha, k_p):
    g = DtipGains(alpha, k_p)
    total = dtip_law(f, r, e, g)
    parts = dtip_law(f, 0, 0, g) + dtip_law(0, r, 0, g) + dtip_law(0, 0, e, g)
    assert total == pytest.approx(parts, abs=1e-9 * (1 + abs(total)))
    assert dtip_law(f, r, e, DtipGains(2 * alpha, k_p)) == pytest.approx(total / 2, abs=1e-12 * (1 + abs(total)))


def test_dtip_rejects_nonfinite():
    with pytest.raises(NonFiniteInput):
        dtip_law(float("inf"), 0.0, 0.0, DtipGains(1.0, 1.0))


def test_gains_validation():
    for bad in ((0.0, 1.0), (1.0, 0.0), (1.0, -1.0), (float("nan"), 1.0)):
        with pytest.raises(ValueError):
            DtipGains(*bad)
    with pytest.raises(ValueError):
        DtipGains(1.0, 1.0, 0)


@pytest.mark.parametrize("k_p", [0.5, 2.0, 4.0])
def test_scalar_plant_exponential_decay(k_p):
    for mult in (1.0, 3.0):
        t = mult / k_p
        assert scalar_plant_error(k_p, t) == pytest.approx(math.exp(-k_p * t), rel=0.05)


def test_compose_reference():
    assert compose_reference(0.2, 0.0) == 0.2
    assert compose_reference(0.2, 0.05) == pytest.approx(0.25)
    assert compose_reference(0.2, 0.05, 2.0) == pytest.approx(0.3)


def test_inner_warm_up_outputs_zero():
    agent = InnerAgent(DtipGains(10.0, 2.0), CFG, 0.1)
    for k in range(CFG.n_ndf - 1):
        assert inner_step(agent, 1.0 + k, 5.0) == 0.0
    assert inner_step(agent, 9.0, 5.0) != 0.0


def test_outer_warm_up_outputs_zero():
    ctrl = OuterController(DtipGains(1.0, 0.1), CFG, 0.5, 0.1)
    for _ in range(CFG.n_ndf - 1):
        assert outer_step(ctrl, 0.9, 1.0) == 0.0


def test_inner_fixed_point_holds_control():
    agent = InnerAgent(DtipGains(10.0, 2.0), CFG, 0.1)
    for y in (0.0, 0.1, 0.3, 0.2) + (0.5,) * CFG.n_ndf:
        inner_step(agent, y, 0.5)
    held = agent.u
    for _ in range(10):
        assert inner_step(agent, 0.5, 0.5) == held
    # and with a longer actuation delay the value from h_d ticks ago is held
    agent = InnerAgent(DtipGains(10.0, 2.0, h_d=2), CFG, 0.1)
    for y in (0.0, 0.1, 0.3, 0.2) + (0.5,) * CFG.n_ndf:
        inner_step(agent, y, 0.5)
    older = agent.u_history[0]
    assert inner_step(agent, 0.5, 0.5) == older


def test_outer_fixed_point_holds_control():
    ctrl = OuterController(DtipGains(1.0, 0.1), CFG, 0.5, 0.1)
    for v in (0.95, 0.96, 0.97) + (1.0,) * CFG.n_ndf:
        outer_step(ctrl, v, 1.0)
    held = ctrl.u
    assert outer_step(ctrl, 1.0, 1.0) == held


def test_gating_zeroes_and_resets():
    seq = [0.3, 0.1, 0.4, 0.1, 0.5, 0.9, 0.2, 0.6]
    a = InnerAgent(DtipGains(10.0, 2.0), CFG, 0.1)
    for y in seq:
        inner_step(a, y, 1.0)
    gate_participation(a, False)
    assert inner_step(a, 0.7, 1.0) == 0.0
    gate_participation(a, True)
    fresh = InnerAgent(DtipGains(10.0, 2.0), CFG, 0.1)
    out_a = [inner_step(a, y, 1.0) for y in seq]
    out_f = [inner_step(fresh, y, 1.0) for y in seq]
    assert out_a == out_f
    assert out_a[: CFG.n_ndf - 1] == [0.0] * (CFG.n_ndf - 1)


def test_decentralisation():
    rng = np.random.default_rng(3)
    own = rng.normal(size=30)
    a = InnerAgent(DtipGains(10.0, 2.0), CFG, 0.1)
    b = InnerAgent(DtipGains(10.0, 2.0), CFG, 0.1)
    other = InnerAgent(DtipGains(10.0, 2.0), CFG, 0.1)
    out_a, out_b = [], []
    for y, z in zip(own, rng.normal(size=30) * 100):
        out_a.append(inner_step(a, y, 0.5))
        inner_step(other, z, -3.0)  # traffic on a neighbour agent
        out_b.append(inner_step(b, y, 0.5))
    assert out_a == out_b


def test_determinism():
    ys = np.random.default_rng(5).normal(size=50).tolist()

    def seq():
        a = InnerAgent(DtipGains(7.0, 1.5), CFG, 0.1, (-0.5, 0.5))
        return [inner_step(a, y, 0.2, 0.01) for y in ys]

    assert seq() == seq()


def test_output_limits():
    a = InnerAgent(DtipGains(1.0, 2.0), CFG, 0.1, (-0.1, 0.1))
    out = [inner_step(a, y, 100.0) for y in (0, 0, 0, 0, 0, 0)]
    assert max(out) == 0.1


def test_period_ratio_enforced():
    OuterController(DtipGains(1.0, 0.1), CFG, 0.5, 0.1)
    OuterController(DtipGains(1.0, 0.1), CFG, 1.0, 0.1)
    for period in (0.4, 1.1):
        with pytest.raises(ValueError):
            OuterController(DtipGains(1.0, 0.1), CFG, period, 0.1)


def test_differentiator_window_must_fit_period():
    with pytest.raises(ValueError):
        InnerAgent(DtipGains(1.0, 1.0), DifferentiatorConfig(0.1, 5), 0.1)


def test_delay_buffer():
    buf = DelayBuffer(0.3)
    for k in range(10):
        buf.push(k * 0.1, float(k))
    assert buf.read(0.9) == 6.0
    assert buf.read(0.1) == 0.0  # nothing old enough yet: oldest sample
    buf.set_delay(0.0)
    assert buf.read(0.9) == 9.0
    with pytest.raises(ValueError):
        buf.push(0.5, 1.0)
    with pytest.raises(ValueError):
        buf.set_delay(-1.0)
    with pytest.raises(LookupError):
        DelayBuffer().read(0.0)


def test_delay_buffer_long_run_prunes():
    buf = DelayBuffer(1.0)
    for k in range(10000):
        t = k * 0.01
        buf.push(t, t)
        if t >= 1.0:
            assert buf.read(t) == pytest.approx(t - 1.0, abs=1e-9)
    assert len(buf._t) < 300
