import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noiseflow import SpecError, loop_phase, occupations_lyapunov, build_dynamics, plaquette, with_loop_phase
from noiseflow.sweep import (
    Axis,
    FigurePreset,
    SweepSpec,
    SweepTable,
    apply_override,
    check_selector,
    evaluate_outputs,
    linspace_axis,
    parse_axis,
    parse_number,
    parse_override,
    reproduce,
    run_sweep,
)

BASE = plaquette(0.1, phase=math.pi)


# -- selectors ---------------------------------------------------------------
def test_mode_and_link_overrides():
    m = apply_override(BASE, "modes[b1].damping", 2e-5)
    assert m.mode("b1").damping == 2e-5
    m = apply_override(BASE, "couplings[a2,b2].strength", 0.3)
    assert m.coupling("a2", "b2").strength == 0.3
    m = apply_override(BASE, "couplings[*].strength", 0.25)
    assert all(c.strength == 0.25 for c in m.couplings)


def test_loop_phase_override():
    m = apply_override(BASE, "loop_phase", 0.5 * math.pi)
    assert loop_phase(m) == pytest.approx(0.5 * math.pi)


def test_ratio_override_scales_numerator():
    m = apply_override(plaquette((0.1, 0.2, 0.3, 0.4)), "ratio:G21/G12", 0.5)
    assert m.coupling("a2", "b1").strength == pytest.approx(0.1)
    assert m.coupling("a1", "b2").strength == 0.2
    m = apply_override(BASE, "ratio:kappa2/kappa1", 0.625)
    assert m.mode("a2").damping == pytest.approx(0.625)
    m = apply_override(BASE, "ratio:gamma2/gamma1", 3.0)
    assert m.mode("b2").damping == pytest.approx(3e-5)


@pytest.mark.parametrize(
    "selector",
    ["modes[zz].damping", "modes[b1].colour", "couplings[a1,zz].strength", "ratio:G31/G11", "ratio:foo/G11", "nonsense"],
)
def test_bad_selectors(selector):
    with pytest.raises(SpecError):
        check_selector(BASE, selector)


def test_parse_helpers():
    assert parse_number("1.5pi") == pytest.approx(1.5 * math.pi)
    assert parse_number("pi") == pytest.approx(math.pi)
    assert parse_number("-pi") == pytest.approx(-math.pi)
    assert parse_number("2e-3") == 2e-3
    assert parse_override("loop_phase=0.5pi") == ("loop_phase", pytest.approx(0.5 * math.pi))
    with pytest.raises(SpecError):
        parse_override("loop_phase")
    with pytest.raises(SpecError):
        parse_number("fast")


def test_parse_axis_forms():
    ax = parse_axis("loop_phase=0:2pi:5")
    assert ax.path == "loop_phase"
    np.testing.assert_allclose(ax.values, np.linspace(0, 2 * math.pi, 5))
    assert parse_axis("modes[b1].bath_occupation=10,100").values == (10.0, 100.0)
    for bad in ("loop_phase", "loop_phase=0:1", "loop_phase=0:1:x"):
        with pytest.raises(SpecError):
            parse_axis(bad)


# -- specs -------------------------------------------------------------------
def test_spec_validation():
    with pytest.raises(SpecError):
        SweepSpec(BASE, (), ("n_bar:b1",))
    with pytest.raises(SpecError):
        SweepSpec(BASE, (Axis("loop_phase", ()),), ("n_bar:b1",))
    with pytest.raises(SpecError):
        SweepSpec(BASE, (Axis("modes[q].damping", (1.0,)),), ("n_bar:b1",))
    with pytest.raises(SpecError):
        SweepSpec(BASE, (Axis("loop_phase", (0.0,)),), ("temperature:b1",))
    axes = tuple(Axis("loop_phase", (0.0,)) for _ in range(3))
    with pytest.raises(SpecError):
        SweepSpec(BASE, axes, ("n_bar:b1",))


def test_outputs_match_direct_computation():
    model = with_loop_phase(plaquette((0.1, 0.2, 0.3, 0.15)), 1.0)
    rep = occupations_lyapunov(build_dynamics(model))
    vals = evaluate_outputs(model, ["n_bar:b1", "T:b2->b1", "asymmetry:b1,b2", "loop_phase", "N_in:b2"])
    t21, t12 = rep.T("b2", "b1"), rep.T("b1", "b2")
    assert vals == pytest.approx([rep.n("b1"), t21, (t21 - t12) / (t21 + t12), 1.0, rep.row("b2")["N_in"]])


# -- runs --------------------------------------------------------------------
def _spec():
    return SweepSpec(
        BASE,
        (linspace_axis("loop_phase", 0.0, 2 * math.pi, 9), Axis("modes[b2].bath_occupation", (1e3, 1e4))),
        ("n_bar:b1", "n_bar:b2", "T:b2->b1"),
    )


def test_axis_major_order_and_columns():
    table = run_sweep(_spec())
    assert table.columns == ["loop_phase", "modes[b2].bath_occupation", "n_bar:b1", "n_bar:b2", "T:b2->b1", "status"]
    assert len(table.rows) == 18
    assert [r[1] for r in table.rows[:2]] == [1e3, 1e4]
    assert set(table.column("status")) == {"ok"}


def test_deterministic_and_worker_independent():
    a = run_sweep(_spec()).to_csv()
    assert run_sweep(_spec()).to_csv() == a
    assert run_sweep(_spec(), workers=4).to_csv() == a


def test_failed_cell_is_isolated():
    spec = SweepSpec(BASE, (Axis("modes[b1].damping", (1e-5, 0.0, 2e-5)),), ("n_bar:b1",))
    table = run_sweep(spec)
    status = list(table.column("status"))
    assert status[0] == "ok" and status[2] == "ok"
    assert status[1].startswith("failed:") and "damping > 0" in status[1]
    assert math.isnan(table.rows[1][1])


def test_occupation_symmetric_about_pi():
    n = run_sweep(SweepSpec(plaquette((0.1, 0.2, 0.15, 0.1)), (linspace_axis("loop_phase", 0, 2 * math.pi, 41),), ("n_bar:b1",))).column("n_bar:b1")
    np.testing.assert_allclose(n, n[::-1], rtol=1e-7)


@given(st.floats(0, 2 * math.pi))
def test_reciprocal_plaquette_has_zero_asymmetry(phi):
    # equal resonator parameters under H1: T(b2->b1) = T(b1->b2) at every loop phase
    (asym,) = evaluate_outputs(with_loop_phase(BASE, phi), ["asymmetry:b1,b2"])
    assert abs(asym) < 1e-6


def test_where_and_select():
    table = run_sweep(_spec())
    sub = table.where(loop_phase=math.pi)
    assert len(sub.rows) == 2
    assert len(table.select(lambda r: r["modes[b2].bath_occupation"] > 5e3).rows) == 9


def test_csv_round_trip_is_exact():
    table = run_sweep(_spec())
    table.metrics = {"x": 0.1 + 0.2}
    table.refined = {"y": math.pi}
    back = SweepTable.from_csv(table.to_csv())
    assert back.columns == table.columns
    assert back.rows == table.rows
    assert back.metrics == table.metrics and back.refined == table.refined


def test_jsonl_lines():
    table = run_sweep(_spec())
    lines = table.to_jsonl().splitlines()
    assert json.loads(lines[0])["status"] == "ok"
    assert len(lines) == len(table.rows)


# -- presets -----------------------------------------------------------------
def test_unknown_preset():
    with pytest.raises(SpecError):
        reproduce("Fig99")


def test_preset_names():
    assert FigurePreset("CouplingMap") is FigurePreset.COUPLING_MAP
    assert {p.value for p in FigurePreset} >= {"Fig1b", "Fig1c", "Fig2", "Fig3", "Fig4", "Fig5", "Fig6", "Fig7", "Fig8", "Conclusion"}


@pytest.mark.parametrize("preset", ["Fig1b", "Fig3", "Fig6", "Fig8"])
def test_preset_metrics_survive_csv(preset):
    table = reproduce(preset)
    back = SweepTable.from_csv(table.to_csv())
    assert back.metrics == table.metrics
    assert back.refined == table.refined
    assert len(back.rows) == len(table.rows)


def test_fig3_metrics_consistent_with_rows():
    table = reproduce("Fig3")
    rows = table.where(loop_phase=math.pi)
    assert table.metrics["n1_at_pi"] in list(rows.column("n_bar:b1"))
