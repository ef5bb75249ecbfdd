"""
Parameter sweeps over network models.

Parameters are addressed by selector strings:

``modes[b1].damping`` / ``.detuning`` / ``.bath_occupation``
    a field of one mode;
``couplings[a2,b1].strength`` / ``.phase``
    a field of one link; ``couplings[*].strength`` sets every link;
``loop_phase``
    the plaquette phase (the model is gauge-fixed first);
``ratio:G21/G12``, ``ratio:kappa1/kappa2``
    sets the numerator to ``value * denominator``; ``Gjk`` names the link
    between the j-th cavity and k-th resonator, ``kappaj`` / ``gammak`` the
    dampings, all counted from 1 in declaration order.

Requested outputs use the same label vocabulary:

``n_bar:b1``, ``delta_n:b1``, ``N_out:b1``, ``N_in:b1``
    flow-report quantities of a resonator;
``T:b2->b1``
    integrated coefficient from the bath of ``b2`` into ``b1``;
``T@0.25:b2->b1``
    transmission ``T(w)`` at ``w = 0.25``;
``asymmetry:b1,b2``
    ``(T:b2->b1 - T:b1->b2) / (T:b2->b1 + T:b1->b2)``;
``residual:interference`` (also ``impedance``, ``dark_mode``, ``block21``, ``block12``)
    condition residuals;
``loop_phase``.

A sweep produces a long-format :class:`SweepTable`, one row per grid cell in
axis-major order. Cells that fail (invalid or unstable model) are kept with
NaN outputs and a ``failed: ...`` status.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import json
import math
import re
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import conditions
from .errors import NoiseflowError, SpecError
from .netmodel import (
    TWO_PI,
    NetworkModel,
    build_dynamics,
    loop_phase,
    plaquette,
    thermal_occupation,
    with_loop_phase,
)
from .spectral import count_local_maxima, transmission_matrices
from .steady import FlowReport, Method, dual_cavity_limit_of, flow_report

_MODE_SEL = re.compile(r"^modes\[(?P<label>[^\]]+)\]\.(?P<field>damping|detuning|bath_occupation)$")
_LINK_SEL = re.compile(r"^couplings\[(?P<cav>[^,\]]+)(?:,(?P<mech>[^\]]+))?\]\.(?P<field>strength|phase)$")
_RATIO_SEL = re.compile(r"^ratio:(?P<num>\w+)/(?P<den>\w+)$")
_TOKEN = re.compile(r"^(?:G(?P<j>\d)(?P<k>\d)|kappa(?P<cj>\d)|gamma(?P<mk>\d))$")

_FLOW_OUT = re.compile(r"^(?P<q>n_bar|delta_n|N_out|N_in|m_bar):(?P<label>\w+)$")
_TINT_OUT = re.compile(r"^T:(?P<src>\w+)->(?P<tgt>\w+)$")
_TOMEGA_OUT = re.compile(r"^T@(?P<w>[-+0-9.eE]+):(?P<src>\w+)->(?P<tgt>\w+)$")
_ASYM_OUT = re.compile(r"^asymmetry:(?P<a>\w+),(?P<b>\w+)$")
_RES_OUT = re.compile(r"^residual:(?P<name>interference|impedance|dark_mode|block21|block12)$")


# -- selectors -------------------------------------------------------------
def _resolve_token(model: NetworkModel, token: str):
    m = _TOKEN.match(token)
    if not m:
        raise SpecError(f"unknown ratio token {token!r}")
    try:
        if m["j"]:
            cav = model.optical[int(m["j"]) - 1].label
            mech = model.mechanical[int(m["k"]) - 1].label
            return ("link", cav, mech)
        if m["cj"]:
            return ("mode", model.optical[int(m["cj"]) - 1].label)
        return ("mode", model.mechanical[int(m["mk"]) - 1].label)
    except IndexError:
        raise SpecError(f"ratio token {token!r} does not name a mode of the model") from None


def _get_token(model: NetworkModel, ref) -> float:
    if ref[0] == "link":
        link = model.coupling(ref[1], ref[2])
        return 0.0 if link is None else link.strength
    return model.mode(ref[1]).damping


def _set_token(model: NetworkModel, ref, value: float) -> NetworkModel:
    if ref[0] == "link":
        return model.with_coupling(ref[1], ref[2], strength=value)
    return model.with_mode(ref[1], damping=value)


def check_selector(model: NetworkModel, selector: str) -> None:
    """Raise SpecError unless ``selector`` resolves against ``model``."""
    if selector == "loop_phase":
        if not model.is_plaquette:
            raise SpecError("loop_phase selector needs a plaquette model")
        return
    if m := _MODE_SEL.match(selector):
        if m["label"] not in {x.label for x in model.modes}:
            raise SpecError(f"selector {selector!r}: no mode {m['label']!r}")
        return
    if m := _LINK_SEL.match(selector):
        if m["cav"] == "*" and m["mech"] is None:
            return
        if m["mech"] is None or model.coupling(m["cav"], m["mech"]) is None:
            raise SpecError(f"selector {selector!r}: no such coupling")
        return
    if m := _RATIO_SEL.match(selector):
        _resolve_token(model, m["num"])
        _resolve_token(model, m["den"])
        return
    raise SpecError(f"cannot parse selector {selector!r}")


def apply_override(model: NetworkModel, selector: str, value: float) -> NetworkModel:
    """Return a copy of ``model`` with the parameter at ``selector`` set to ``value``."""
    check_selector(model, selector)
    value = float(value)
    if selector == "loop_phase":
        return with_loop_phase(model, value)
    if m := _MODE_SEL.match(selector):
        return model.with_mode(m["label"], **{m["field"]: value})
    if m := _LINK_SEL.match(selector):
        if m["cav"] == "*":
            out = model
            for c in model.couplings:
                out = out.with_coupling(c.cavity, c.mechanical, **{m["field"]: value})
            return out
        return model.with_coupling(m["cav"], m["mech"], **{m["field"]: value})
    m = _RATIO_SEL.match(selector)
    num, den = _resolve_token(model, m["num"]), _resolve_token(model, m["den"])
    return _set_token(model, num, value * _get_token(model, den))


def parse_override(text: str) -> tuple[str, float]:
    """Split ``selector=value``; the value may be a float or ``pi`` multiple like ``1.5pi``."""
    if "=" not in text:
        raise SpecError(f"override {text!r} must look like selector=value")
    selector, raw = text.split("=", 1)
    return selector.strip(), parse_number(raw)


def parse_number(raw: str) -> float:
    raw = raw.strip()
    try:
        if raw.endswith("pi"):
            head = raw[:-2].rstrip("*")
            sign = {"": 1.0, "+": 1.0, "-": -1.0}
            return (sign[head] if head in sign else float(head)) * math.pi
        return float(raw)
    except ValueError:
        raise SpecError(f"cannot parse number {raw!r}") from None


# -- specs and tables ------------------------------------------------------
@dataclass(frozen=True)
class Axis:
    """One swept parameter, or several moved together (``path`` a tuple, ``values`` tuples)."""

    path: str | tuple[str, ...]
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))

    @property
    def paths(self) -> tuple[str, ...]:
        return (self.path,) if isinstance(self.path, str) else tuple(self.path)

    def assignments(self, value) -> list[tuple[str, float]]:
        if isinstance(self.path, str):
            return [(self.path, value)]
        return list(zip(self.path, value))


@dataclass(frozen=True)
class SweepSpec:
    base_model: NetworkModel
    axes: tuple[Axis, ...]
    outputs: tuple[str, ...]
    method: Method = Method.LYAPUNOV

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "method", Method(self.method))
        if not self.axes:
            raise SpecError("a sweep needs at least one axis")
        if len(self.axes) > 2:
            raise SpecError("a sweep has one or two axes")
        for axis in self.axes:
            if not axis.values:
                raise SpecError(f"axis {axis.path!r} has no values")
            for p in axis.paths:
                check_selector(self.base_model, p)
        for out in self.outputs:
            _parse_output(out)

    @property
    def axis_columns(self) -> list[str]:
        return [p for a in self.axes for p in a.paths]


def _round9(x: float) -> float:
    return float(f"{x:.9g}")


@dataclass
class SweepTable:
    """Long-format sweep output.

    ``metrics`` are derived from the table values alone, so re-reading the
    CSV and recomputing them gives identical numbers. ``refined`` holds
    summary values that needed extra solves (root finding, minimization).
    """

    columns: list[str]
    rows: list[list[Any]]
    metrics: dict[str, float] = field(default_factory=dict)
    refined: dict[str, float] = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=object if name == "status" else float)

    def where(self, **equal) -> "SweepTable":
        """Rows whose named columns equal the given values (after 9-digit rounding)."""
        idx = {k: self.columns.index(k) for k in equal}
        keep = [r for r in self.rows if all(_close(r[idx[k]], v) for k, v in equal.items())]
        return SweepTable(self.columns, keep)

    def select(self, predicate: Callable[[dict[str, Any]], bool]) -> "SweepTable":
        keep = [r for r in self.rows if predicate(dict(zip(self.columns, r)))]
        return SweepTable(self.columns, keep)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        if self.metrics or self.refined:
            buf.write("# metric,name,value\n")
            for k, v in self.metrics.items():
                buf.write(f"# metric,{k},{_fmt(v)}\n")
            for k, v in self.refined.items():
                buf.write(f"# refined,{k},{_fmt(v)}\n")
        return buf.getvalue()

    def to_jsonl(self) -> str:
        lines = [json.dumps(dict(zip(self.columns, r)), allow_nan=True) for r in self.rows]
        lines += [json.dumps({"metric": k, "value": v}) for k, v in self.metrics.items()]
        lines += [json.dumps({"refined": k, "value": v}) for k, v in self.refined.items()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "SweepTable":
        data_lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
        reader = csv.reader(data_lines)
        columns = next(reader)
        rows = [[_parse_cell(c, columns[i]) for i, c in enumerate(r)] for r in reader]
        metrics, refined = {}, {}
        for ln in text.splitlines():
            if ln.startswith("# metric,") and ln != "# metric,name,value":
                _, name, value = ln[2:].split(",", 2)
                metrics[name] = float(value)
            elif ln.startswith("# refined,"):
                _, name, value = ln[2:].split(",", 2)
                refined[name] = float(value)
        return cls(columns, rows, metrics, refined)


def _fmt(v) -> str:
    # Shortest repr round-trips exactly; outputs are already rounded to 9 digits.
    if isinstance(v, str):
        return v
    return repr(float(v))


def _parse_cell(text: str, column: str):
    if column in ("status", "setup") or column.startswith("label"):
        return text
    try:
        return float(text)
    except ValueError:
        return text


def _close(a, b) -> bool:
    if isinstance(a, str) or isinstance(b, str):
        return a == b
    return _round9(float(a)) == _round9(float(b))


# -- outputs ---------------------------------------------------------------
def _parse_output(name: str):
    for kind, pattern in (
        ("flow", _FLOW_OUT),
        ("tint", _TINT_OUT),
        ("tomega", _TOMEGA_OUT),
        ("asym", _ASYM_OUT),
        ("res", _RES_OUT),
    ):
        if m := pattern.match(name):
            return kind, m
    if name == "loop_phase":
        return "phase", None
    raise SpecError(f"unknown output {name!r}")


def evaluate_outputs(model: NetworkModel, outputs: Sequence[str], method: Method = Method.LYAPUNOV) -> list[float]:
    """Compute the requested outputs for one model."""
    sys = build_dynamics(model)
    report: FlowReport | None = None
    values = []
    for name in outputs:
        kind, m = _parse_output(name)
        if kind in ("flow", "tint", "asym") and report is None:
            report = flow_report(sys, method)
        if kind == "flow":
            values.append(report.row(m["label"])[m["q"]])
        elif kind == "tint":
            values.append(report.T(m["src"], m["tgt"]))
        elif kind == "asym":
            t_ba, t_ab = report.T(m["b"], m["a"]), report.T(m["a"], m["b"])
            values.append((t_ba - t_ab) / (t_ba + t_ab))
        elif kind == "tomega":
            t = transmission_matrices(sys, np.array([float(m["w"])]))[0]
            values.append(float(t[sys.mode_index[m["tgt"]], sys.mode_index[m["src"]]]))
        elif kind == "res":
            values.append(_residual(model, m["name"]))
        else:
            values.append(loop_phase(model))
    return values


def _residual(model: NetworkModel, name: str) -> float:
    if name == "interference":
        return conditions.interference_residual(model).residual
    if name == "impedance":
        return conditions.impedance_kappa_check(model).residual
    if name == "dark_mode":
        return conditions.dark_mode_breaking(model).residual
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        block21, block12 = conditions.nonreciprocity_residuals(model)
    return (block21 if name == "block21" else block12).residual


def cell_models(spec: SweepSpec):
    """Yield ``(axis values, model or exception)`` in axis-major order."""
    for combo in itertools.product(*(a.values for a in spec.axes)):
        flat = []
        model = spec.base_model
        try:
            for axis, value in zip(spec.axes, combo):
                for path, v in axis.assignments(value):
                    flat.append(float(v))
                    model = apply_override(model, path, v)
        except NoiseflowError as exc:
            flat = [float(v) for axis, value in zip(spec.axes, combo) for _, v in axis.assignments(value)]
            yield flat, exc
            continue
        yield flat, model


def _evaluate_cell(item, spec: SweepSpec) -> list[Any]:
    flat, model = item
    if isinstance(model, Exception):
        return flat + [math.nan] * len(spec.outputs) + [f"failed: {model}"]
    try:
        values = evaluate_outputs(model, spec.outputs, spec.method)
    except NoiseflowError as exc:
        return flat + [math.nan] * len(spec.outputs) + [f"failed: {exc}"]
    return flat + [_round9(v) for v in values] + ["ok"]


def run_sweep(spec: SweepSpec, workers: int | None = None) -> SweepTable:
    """Evaluate every grid cell; output order is axis-major whatever ``workers`` is."""
    columns = spec.axis_columns + list(spec.outputs) + ["status"]
    items = list(cell_models(spec))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda it: _evaluate_cell(it, spec), items))
    else:
        rows = [_evaluate_cell(it, spec) for it in items]
    return SweepTable(columns, rows)


def linspace_axis(path: str, start: float, stop: float, num: int) -> Axis:
    return Axis(path, tuple(np.linspace(start, stop, num).tolist()))


def parse_axis(text: str) -> Axis:
    """``selector=start:stop:num`` or ``selector=v1,v2,...``."""
    selector, _, raw = text.partition("=")
    if not raw:
        raise SpecError(f"axis {text!r} must look like selector=start:stop:num or selector=v1,v2")
    if ":" in raw:
        parts = raw.split(":")
        if len(parts) != 3:
            raise SpecError(f"range {raw!r} must be start:stop:num")
        try:
            num = int(parts[2])
        except ValueError:
            raise SpecError(f"point count {parts[2]!r} is not an integer") from None
        return linspace_axis(selector.strip(), parse_number(parts[0]), parse_number(parts[1]), num)
    return Axis(selector.strip(), tuple(parse_number(v) for v in raw.split(",")))


# -- figure presets --------------------------------------------------------
class FigurePreset(str, enum.Enum):
    FIG1B = "Fig1b"
    FIG1C = "Fig1c"
    FIG2 = "Fig2"
    FIG3 = "Fig3"
    FIG4 = "Fig4"
    COUPLING_MAP = "CouplingMap"
    FIG5 = "Fig5"
    FIG6 = "Fig6"
    FIG7 = "Fig7"
    FIG8 = "Fig8"
    CONCLUSION = "Conclusion"


def _phase_axis(num: int = 201) -> Axis:
    # pi * linspace keeps pi/2, pi and 3pi/2 exact on the grid
    return Axis("loop_phase", tuple((math.pi * np.linspace(0.0, 2.0, num)).tolist()))


def _nearest(values: np.ndarray, target: float) -> int:
    return int(np.argmin(np.abs(values - target)))


def _lyapunov_n(model: NetworkModel, label: str) -> float:
    return flow_report(build_dynamics(model), Method.LYAPUNOV).n(label)


# Fig. 1: series setups, all G = 0.1, gamma = 1e-5.
SERIES_SETUPS = {
    "b1": (0.0, 0.0, 0.0, 0.0),
    "b1-a1": (0.1, 0.0, 0.0, 0.0),
    "b1-a1-b2": (0.1, 0.1, 0.0, 0.0),
    "a2-b1-a1": (0.1, 0.0, 0.1, 0.0),
}


def _fig1_omegas() -> np.ndarray:
    w = 0.2 * np.linspace(-1.0, 1.0, 401)
    w[200] = 0.0
    return w


def _fig1b() -> SweepTable:
    omegas = _fig1_omegas()
    rows = []
    for name, G in SERIES_SETUPS.items():
        sys = build_dynamics(plaquette(G))
        t = transmission_matrices(sys, omegas)[:, sys.mode_index["b1"], sys.mode_index["b1"]]
        rows += [[name, float(w), _round9(v)] for w, v in zip(omegas, t)]
    table = SweepTable(["setup", "omega", "T_R1_to_b1"], rows)
    at_zero = {r[0]: r[2] for r in rows if r[1] == 0.0}
    table.metrics = {
        "peak_b1": at_zero["b1"],
        "peak_b1-a1": at_zero["b1-a1"],
        "peak_a2-b1-a1": at_zero["a2-b1-a1"],
        "peak_b1-a1-b2": at_zero["b1-a1-b2"],
    }
    return table


def _fig1c() -> SweepTable:
    omegas = _fig1_omegas()
    model = plaquette(SERIES_SETUPS["b1-a1-b2"])
    sys = build_dynamics(model)
    t = transmission_matrices(sys, omegas)
    i1, i2 = sys.mode_index["b1"], sys.mode_index["b2"]
    rows = [[float(w), _round9(t[n, i1, i1]), _round9(t[n, i1, i2])] for n, w in enumerate(omegas)]
    table = SweepTable(["omega", "T_R1_to_b1", "T_R2_to_b1"], rows)
    mid = rows[200]
    report = flow_report(sys)
    table.metrics = {"T_R1_to_b1_at_0": mid[1], "T_R2_to_b1_at_0": mid[2]}
    table.refined = {
        "T11_integrated": report.T("b1", "b1"),
        "T21_integrated": report.T("b2", "b1"),
        "delta_n1": report.row("b1")["delta_n"],
    }
    return table


FIG2_COUPLINGS = (0.1, 0.3, 0.7, 1.0)


def _fig2() -> SweepTable:
    """T(w) for b1 on a 400 x 181 (w x Phi) grid for each coupling strength."""
    omegas = np.linspace(-2.5, 2.5, 400)
    phases = math.pi * np.linspace(0.0, 2.0, 181)
    rows = []
    metrics = {}
    for G in FIG2_COUPLINGS:
        for phi in phases:
            sys = build_dynamics(plaquette(G, phase=float(phi)))
            t = transmission_matrices(sys, omegas)
            i1, i2 = sys.mode_index["b1"], sys.mode_index["b2"]
            t11, t21 = t[:, i1, i1], t[:, i1, i2]
            rows += [[G, float(phi), float(w), _round9(a), _round9(b)] for w, a, b in zip(omegas, t11, t21)]
    table = SweepTable(["G", "loop_phase", "omega", "T_R1_to_b1", "T_R2_to_b1"], rows)
    for G in FIG2_COUPLINGS:
        sub = table.where(G=G, loop_phase=math.pi)
        t11, t21 = sub.column("T_R1_to_b1"), sub.column("T_R2_to_b1")
        metrics[f"cross_ratio_at_pi_G{G}"] = float(np.max(t21) / np.max(t11))
        metrics[f"maxima_at_pi_G{G}"] = float(count_local_maxima(t11))
    table.metrics = metrics
    return table


def _fig3() -> SweepTable:
    spec = SweepSpec(
        plaquette(0.1),
        (Axis("modes[b1].bath_occupation", (1e3, 1e5)), _phase_axis()),
        ("n_bar:b1", "n_bar:b2", "N_out:b1", "N_out:b2", "N_in:b1", "N_in:b2"),
    )
    table = run_sweep(spec)
    cold = table.where(**{"modes[b1].bath_occupation": 1e3})
    hot = table.where(**{"modes[b1].bath_occupation": 1e5})
    phi = cold.column("loop_phase")
    i = _nearest(phi, math.pi)
    n_max = np.maximum(cold.column("n_bar:b1"), cold.column("n_bar:b2"))
    inside = phi[n_max < 1.0]
    table.metrics = {
        "n1_at_pi": float(cold.column("n_bar:b1")[i]),
        "n2_at_pi": float(cold.column("n_bar:b2")[i]),
        "n2_at_pi_hot": float(hot.column("n_bar:b2")[i]),
        "grid_window_lower_over_pi": float(inside.min() / math.pi),
        "grid_window_upper_over_pi": float(inside.max() / math.pi),
    }
    table.refined = {
        "window_lower_over_pi": ground_state_edge(plaquette(0.1), (0.0, math.pi)) / math.pi,
        "window_upper_over_pi": ground_state_edge(plaquette(0.1), (math.pi, 2 * math.pi)) / math.pi,
        "dual_limit_b2_hot": dual_cavity_limit_of(plaquette(0.1, occupations=(1e5, 1e3)), "b2"),
    }
    return table


def ground_state_edge(model: NetworkModel, bracket: tuple[float, float]) -> float:
    """Loop phase inside ``bracket`` where the larger occupation crosses one."""

    def excess(phi):
        report = flow_report(build_dynamics(with_loop_phase(model, phi)))
        return float(np.max(report.occupations)) - 1.0

    return float(brentq(excess, *bracket, xtol=1e-12))


def _fig4() -> SweepTable:
    base = plaquette(0.1, occupations=(1e5, 1e3))
    spec = SweepSpec(
        base,
        (Axis("couplings[*].strength", FIG2_COUPLINGS), _phase_axis()),
        ("n_bar:b2", "N_out:b2", "N_in:b2"),
    )
    table = run_sweep(spec)
    strong = table.where(**{"couplings[*].strength": 1.0})
    n2 = strong.column("n_bar:b2")
    i = int(np.argmin(n2))
    table.metrics = {
        "min_n2_G1.0": float(n2[i]),
        "argmin_n2_G1.0_over_pi": float(strong.column("loop_phase")[i] / math.pi),
    }
    strong_model = apply_override(base, "couplings[*].strength", 1.0)
    res = minimize_scalar(
        lambda phi: _lyapunov_n(with_loop_phase(strong_model, phi), "b2"),
        bounds=(0.5 * math.pi, 1.5 * math.pi),
        method="bounded",
        options={"xatol": 1e-10},
    )
    table.refined = {"min_n2_G1.0": float(res.fun), "argmin_n2_G1.0_over_pi": float(res.x / math.pi)}
    return table


def _coupling_map() -> SweepTable:
    ratios = tuple(np.round(np.linspace(0.1, 3.0, 30), 12).tolist())
    spec = SweepSpec(
        plaquette(0.1, phase=math.pi, occupations=(1e5, 1e3)),
        (Axis("ratio:G22/G11", ratios), Axis("ratio:G21/G12", ratios)),
        ("n_bar:b1", "n_bar:b2", "residual:interference", "residual:dark_mode"),
    )
    table = run_sweep(spec)
    cell = table.where(**{"ratio:G22/G11": 2.0, "ratio:G21/G12": 0.5})
    table.metrics = {
        "n2_at_matching": float(cell.column("n_bar:b2")[0]),
        "cells_with_n2_below_1": float(np.sum(table.column("n_bar:b2") < 1.0)),
    }
    return table


FIG5_KAPPA_RATIOS = (1.0, 0.75, 0.625, 0.5)


def _fig5_model(kappa_ratio: float) -> NetworkModel:
    return plaquette((0.1, 0.1, 0.1, 0.2), phase=math.pi, kappa=(kappa_ratio, 1.0), occupations=(1e5, 1e3))


def _fig5() -> SweepTable:
    ratios = tuple(np.round(np.linspace(0.3, 1.5, 121), 12).tolist())
    spec = SweepSpec(
        _fig5_model(1.0),
        (Axis("ratio:kappa1/kappa2", FIG5_KAPPA_RATIOS), Axis("ratio:G21/G12", ratios)),
        ("n_bar:b2", "residual:impedance"),
    )
    table = run_sweep(spec)
    metrics, refined = {}, {}
    for kr in FIG5_KAPPA_RATIOS:
        sub = table.where(**{"ratio:kappa1/kappa2": kr})
        n2 = sub.column("n_bar:b2")
        i = int(np.argmin(n2))
        metrics[f"grid_argmin_k{kr}"] = float(sub.column("ratio:G21/G12")[i])
        metrics[f"grid_min_n2_k{kr}"] = float(n2[i])
        model = _fig5_model(kr)
        res = minimize_scalar(
            lambda r: _lyapunov_n(apply_override(model, "ratio:G21/G12", r), "b2"),
            bracket=(ratios[max(i - 1, 0)], ratios[i], ratios[min(i + 1, len(ratios) - 1)]),
            options={"xtol": 1e-10},
        )
        refined[f"argmin_k{kr}"] = float(res.x)
        refined[f"min_n2_k{kr}"] = float(res.fun)
        refined[f"dual_limit_k{kr}"] = dual_cavity_limit_of(model, "b2")
    table.metrics, table.refined = metrics, refined
    return table


def _fig6() -> SweepTable:
    spec = SweepSpec(
        plaquette(0.1, occupations=(1e5, 1e3)),
        (Axis("loop_phase", (0.0, math.pi)), linspace_axis("modes[b1].detuning", 0.0, 1.0, 101)),
        ("n_bar:b1", "n_bar:b2", "N_in:b1", "N_in:b2"),
    )
    table = run_sweep(spec)
    at_pi = table.where(loop_phase=math.pi)
    n2 = at_pi.column("n_bar:b2")
    table.metrics = {"n2_spread_at_pi": float((n2.max() - n2.min()) / n2.mean())}
    table.refined = {"dual_limit_b2": dual_cavity_limit_of(plaquette(0.1, occupations=(1e5, 1e3)), "b2")}
    return table


FIG7_HOT = (1e3, 1e4, 5e4, 1e5)


def _fig7() -> SweepTable:
    ratios = tuple(np.round(np.linspace(0.1, 3.0, 30), 12).tolist())
    base = plaquette((0.1, 0.1, 0.1, 0.2), phase=math.pi, occupations=(1e3, 1e3))
    spec = SweepSpec(base, (Axis("modes[b1].bath_occupation", FIG7_HOT), Axis("ratio:G21/G12", ratios)), ("n_bar:b2",))
    table = run_sweep(spec)
    at_match = table.where(**{"ratio:G21/G12": 0.5}).column("n_bar:b2")
    table.metrics = {
        "n2_at_matching_min": float(at_match.min()),
        "n2_at_matching_max": float(at_match.max()),
        "n2_at_matching_relative_spread": float((at_match.max() - at_match.min()) / at_match.min()),
    }
    table.refined = {"dual_limit_b2": dual_cavity_limit_of(base, "b2")}
    return table


def fig8_model(occupations=(1e5, 1e3)) -> NetworkModel:
    return plaquette(0.1, kappa=(1.0, 0.1), cavity_detuning=(0.0, 0.5), occupations=occupations)


def _fig8() -> SweepTable:
    spec = SweepSpec(
        fig8_model(),
        (
            Axis(("modes[b1].bath_occupation", "modes[b2].bath_occupation"), ((1e5, 1e3), (1e3, 1e5))),
            _phase_axis(),
        ),
        ("asymmetry:b1,b2", "T:b2->b1", "T:b1->b2", "n_bar:b1", "n_bar:b2"),
    )
    table = run_sweep(spec)
    hot1 = table.where(**{"modes[b1].bath_occupation": 1e5})
    hot2 = table.where(**{"modes[b1].bath_occupation": 1e3})
    phi = hot1.column("loop_phase")
    i_half, i_three = _nearest(phi, 0.5 * math.pi), _nearest(phi, 1.5 * math.pi)
    asym = hot1.column("asymmetry:b1,b2")
    table.metrics = {
        "asymmetry_at_pi/2": float(asym[i_half]),
        "asymmetry_at_3pi/2": float(asym[i_three]),
        "n2_at_3pi/2": float(hot1.column("n_bar:b2")[i_three]),
        "n1_at_pi/2_swapped": float(hot2.column("n_bar:b1")[i_half]),
        "grid_min_n2": float(hot1.column("n_bar:b2").min()),
    }
    model = fig8_model()

    def asym_at(phi):
        return evaluate_outputs(with_loop_phase(model, phi), ["asymmetry:b1,b2"])[0]

    lo = minimize_scalar(asym_at, bounds=(0.0, math.pi), method="bounded", options={"xatol": 1e-10})
    hi = minimize_scalar(lambda p: -asym_at(p), bounds=(math.pi, 2 * math.pi), method="bounded", options={"xatol": 1e-10})
    n2 = minimize_scalar(
        lambda p: _lyapunov_n(with_loop_phase(model, p), "b2"),
        bounds=(math.pi, 2 * math.pi),
        method="bounded",
        options={"xatol": 1e-10},
    )
    table.refined = {
        "most_negative_asymmetry": float(lo.fun),
        "most_negative_asymmetry_phase_over_pi": float(lo.x / math.pi),
        "most_positive_asymmetry": float(-hi.fun),
        "most_positive_asymmetry_phase_over_pi": float(hi.x / math.pi),
        "min_n2": float(n2.fun),
        "min_n2_phase_over_pi": float(n2.x / math.pi),
    }
    return table


# Two parameter sets of the closing discussion: (reference rate in Hz, gamma / kappa).
CONCLUSION_SETS = {"A": (200e3, 1.0 / 200e3), "B": (1e6, 10.0 / 1e6)}
CONCLUSION_FREQUENCIES_HZ = (6.7e6, 9.4e6)
CONCLUSION_CASES = ((0.5, 0.5), (20.0, 0.5))
CONCLUSION_TARGETS = {"n1_500mK": 0.216, "n2_500mK": 0.1485, "n1_20K": 8.37, "n2_20K": 0.1485}


def conclusion_model(name: str, temperatures: tuple[float, float]) -> NetworkModel:
    rate, gamma = CONCLUSION_SETS[name]
    occ = tuple(thermal_occupation(TWO_PI * f, T) for f, T in zip(CONCLUSION_FREQUENCIES_HZ, temperatures))
    return plaquette(0.1, phase=math.pi, gamma=(gamma, gamma), occupations=occ, reference_rate_hz=rate)


def _conclusion() -> SweepTable:
    rows = []
    for name in CONCLUSION_SETS:
        for temps in CONCLUSION_CASES:
            model = conclusion_model(name, temps)
            report = flow_report(build_dynamics(model))
            rows.append([
                name,
                temps[0],
                temps[1],
                _round9(model.mode("b1").bath_occupation),
                _round9(model.mode("b2").bath_occupation),
                _round9(report.n("b1")),
                _round9(report.n("b2")),
            ])
    table = SweepTable(["set", "T1_K", "T2_K", "m_bar1", "m_bar2", "n_bar1", "n_bar2"], rows)
    metrics = {}
    for r in rows:
        tag = "500mK" if r[1] == 0.5 else "20K"
        metrics[f"{r[0]}_n1_{tag}"] = r[5]
        metrics[f"{r[0]}_n2_{tag}"] = r[6]
    for name in CONCLUSION_SETS:
        metrics[f"{name}_worst_relative_residual"] = max(
            abs(metrics[f"{name}_{key}"] - target) / target for key, target in CONCLUSION_TARGETS.items()
        )
    table.metrics = metrics
    return table


_PRESETS: dict[FigurePreset, Callable[[], SweepTable]] = {
    FigurePreset.FIG1B: _fig1b,
    FigurePreset.FIG1C: _fig1c,
    FigurePreset.FIG2: _fig2,
    FigurePreset.FIG3: _fig3,
    FigurePreset.FIG4: _fig4,
    FigurePreset.COUPLING_MAP: _coupling_map,
    FigurePreset.FIG5: _fig5,
    FigurePreset.FIG6: _fig6,
    FigurePreset.FIG7: _fig7,
    FigurePreset.FIG8: _fig8,
    FigurePreset.CONCLUSION: _conclusion,
}


def reproduce(preset: FigurePreset | str) -> SweepTable:
    """Data behind one figure plus its summary metrics.

    ``metrics`` are recomputable from the rows; ``refined`` values come from
    extra solves (root finding or minimization between grid points).
    """
    try:
        preset = FigurePreset(preset)
    except ValueError:
        names = ", ".join(p.value for p in FigurePreset)
        raise SpecError(f"unknown preset {preset!r}; choose one of {names}") from None
    return _PRESETS[preset]()


__all__ = [
    "Axis",
    "FigurePreset",
    "SweepSpec",
    "SweepTable",
    "apply_override",
    "check_selector",
    "evaluate_outputs",
    "ground_state_edge",
    "linspace_axis",
    "parse_axis",
    "parse_number",
    "parse_override",
    "reproduce",
    "run_sweep",
]
