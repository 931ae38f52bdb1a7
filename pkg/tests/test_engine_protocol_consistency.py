"""The engine's message-driven per-agent assignments must coincide with the
omniscient plan functions computed from the same halted formation state."""

import pytest

from lisform import initialize_mission
from lisform.geometry import wrap_angle
from lisform.protocol import (
    ParamPair,
    addition_entry,
    addition_plan,
    removal_plan,
    transform_params,
)
from lisform.sim.engine import SYM_TRANSITION, make_world

SIM1 = (10, 7, 4.7, 9.5, 0.5, 2, 1.05)


def _run_until_sym(cmd):
    m = initialize_mission(*SIM1)
    w = make_world(m, dt=0.01, base_xy=(6.0, 0.0))
    w.enqueue_command({"cmd": "take_off"}, tick=0)
    w.enqueue_command({"cmd": "start"}, tick=600)
    w.enqueue_command(cmd, tick=1200)
    guard = 0
    while guard < 10_000:
        w.step()
        guard += 1
        members = [w.agents[i] for i in sorted(w.op["member_ids"])] if w.op else []
        if members and all(a.mode == SYM_TRANSITION for a in members):
            return m, w, members
    raise AssertionError("formation never entered the slide phase")


def test_removal_assignments_match_reference_plan():
    m, w, members = _run_until_sym({"cmd": "remove", "id": 2})
    op = w.op
    psi_d = {a.id: wrap_angle(a.seg_psi.g0) for a in members}
    plan = removal_plan(psi_d, op["i_n"], op["i_p"], op["n_c"], members[0].curve.o)
    for a in members:
        engine_delta = a.seg_psi.gf - a.seg_psi.g0
        assert engine_delta == pytest.approx(plan.delta[a.id], abs=1e-9)
    tps = {a.seg_psi.Tp for a in members}
    assert len(tps) == 1
    expect_tp = 15 * plan.delta_max * m.region.diag / (8 * m.config.V_max)
    assert tps.pop() == pytest.approx(expect_tp, abs=1e-9)


def test_addition_assignments_match_reference_plan():
    m, w, members = _run_until_sym({"cmd": "add"})
    op = w.op
    curve_d = members[0].curve
    psi_d = {a.id: wrap_angle(a.seg_psi.g0) for a in members}
    s_df = wrap_angle(members[0].s)
    slot = addition_entry(psi_d, op["n_c"], curve_d.o, s_df, curve_d, m.region)
    plan = addition_plan(psi_d, slot, op["n_c"], curve_d.o)
    for a in members:
        engine_delta = a.seg_psi.gf - a.seg_psi.g0
        assert engine_delta == pytest.approx(plan.delta[a.id], abs=1e-9)
    # the entering agent took the slot the reference scheme assigns it
    ia = w.agents[op["ia"]]
    assert wrap_angle(ia.psi) == pytest.approx(slot.psi_ia_D, abs=1e-9)
    tps = {a.seg_psi.Tp for a in members}
    expect_tp = 15 * plan.delta_max * m.region.diag / (8 * m.config.V_max)
    assert tps.pop() == pytest.approx(expect_tp, abs=1e-9)


def test_transform_matches_engine_state():
    m, w, members = _run_until_sym({"cmd": "remove", "id": 3})
    stop = members[0].proto["stop"]
    curve_c = m.spec
    for a in members:
        # reconstruct the agent's pre-transform phase on the original curve
        orig_psi = curve_c.formation_psis()[a.id - 1]
        q = transform_params(
            ParamPair(wrap_angle(stop["s_cf"]), orig_psi), curve_c, a.curve
        )
        assert wrap_angle(a.seg_psi.g0) == pytest.approx(q.psi, abs=1e-9)
        assert wrap_angle(a.s) == pytest.approx(q.s, abs=1e-9)
