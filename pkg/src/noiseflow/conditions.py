"""
Analytic conditions for routing noise around the plaquette.

Every residual is dimensionless and lies in ``[0, 1]``: the modulus of a
two-path sum divided by the sum of the two path moduli. Zero means the two
paths cancel exactly; one means they add in phase or one path is absent.
"""

from __future__ import annotations

import cmath
import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ModelError, TopologyError
from .netmodel import Convention, NetworkModel, loop_phase, normalize_phase, plaquette_links

EXACT_TOL = 1e-9
APPROX_TOL = 1e-2
PHASE_TOL = 1e-9
ADIABATIC_FACTOR = 10.0


class Condition(str, enum.Enum):
    INTERFERENCE_EXACT = "InterferenceExact"
    IMPEDANCE_KAPPA = "ImpedanceKappa"
    DARK_MODE_BREAKING = "DarkModeBreaking"
    NONRECIPROCAL_BLOCK_12 = "NonreciprocalBlock12"
    NONRECIPROCAL_BLOCK_21 = "NonreciprocalBlock21"


@dataclass(frozen=True)
class ConditionReport:
    condition: Condition
    residual: float
    tolerance: float
    required_phase: float | None = None
    bandwidth_correction: float | None = None

    @property
    def satisfied(self) -> bool:
        return self.residual <= self.tolerance


def _two_path(first: complex, second: complex) -> float:
    total = abs(first) + abs(second)
    if total == 0.0:
        return 0.0
    return min(abs(first + second) / total, 1.0)


def _cancelling_phase(first: complex, second: complex, sign: int) -> float | None:
    """Phase ``p`` with ``first + exp(sign i p) second = 0`` in direction only."""
    if first == 0 or second == 0:
        return None
    return normalize_phase(sign * cmath.phase(-first / second))


def _strengths(model: NetworkModel) -> dict[tuple[int, int], float]:
    return {jk: c.strength for jk, c in plaquette_links(model).items()}


def _dampings(model: NetworkModel):
    kappa = [m.damping for m in model.optical]
    return kappa[0], kappa[1]


def _cavity_susceptibility(model: NetworkModel, j: int, omega: float) -> complex:
    cav = model.optical[j - 1]
    det = cav.detuning if model.convention is Convention.H2 else 0.0
    return 1.0 / (cav.damping / 2 + 1j * det - 1j * omega)


def path_terms(model: NetworkModel, omega: float = 0.0) -> tuple[complex, complex]:
    """``(G11 G12 chi_a1(w), G21 G22 chi_a2(w))``, the two cavity-mediated paths."""
    G = _strengths(model)
    return (
        G[1, 1] * G[1, 2] * _cavity_susceptibility(model, 1, omega),
        G[2, 1] * G[2, 2] * _cavity_susceptibility(model, 2, omega),
    )


def interference_residual(model: NetworkModel, omega: float = 0.0, tol: float = EXACT_TOL) -> ConditionReport:
    """How far the two inter-resonator paths are from cancelling at ``omega``.

    The residual is the worse of the two directions,
    ``|t1 + exp(-i Phi) t2|`` (bath 2 into b1) and ``|t1 + exp(+i Phi) t2|``
    (bath 1 into b2), each normalized by ``|t1| + |t2|``. Under H1 with real
    susceptibilities the two coincide. ``required_phase`` is the loop phase
    that would cancel the second direction.
    """
    if model.convention is not Convention.H1:
        raise ModelError("interference_residual expects the H1 convention")
    t1, t2 = path_terms(model, omega)
    phi = loop_phase(model)
    into_1 = _two_path(t1, cmath.exp(-1j * phi) * t2)
    into_2 = _two_path(t1, cmath.exp(1j * phi) * t2)
    return ConditionReport(
        Condition.INTERFERENCE_EXACT,
        max(into_1, into_2),
        tol,
        required_phase=_cancelling_phase(t1, t2, +1),
    )


def effective_linewidth(model: NetworkModel) -> float:
    """Largest cooperativity-broadened resonator linewidth ``gamma_k + sum_j 4 G_jk^2 / kappa_j``."""
    widths = []
    for m in model.mechanical:
        width = m.damping
        for cav in model.optical:
            link = model.coupling(cav.label, m.label)
            if link is not None:
                width += 4 * link.strength ** 2 / cav.damping
        widths.append(width)
    return max(widths)


def impedance_kappa_check(model: NetworkModel, tol: float = APPROX_TOL) -> ConditionReport:
    """Zero-frequency matching ``G11 G12 kappa2 = G21 G22 kappa1``.

    Valid while the resonator response is much narrower than the cavities;
    ``bandwidth_correction`` reports the effective resonator linewidth over
    the smaller cavity linewidth as a measure of that error.
    """
    G = _strengths(model)
    k1, k2 = _dampings(model)
    lhs = G[1, 1] * G[1, 2] * k2
    rhs = G[2, 1] * G[2, 2] * k1
    total = lhs + rhs
    residual = 0.0 if total == 0 else abs(lhs - rhs) / total
    return ConditionReport(
        Condition.IMPEDANCE_KAPPA,
        residual,
        tol,
        required_phase=math.pi,
        bandwidth_correction=effective_linewidth(model) / min(k1, k2),
    )


def dark_mode_breaking(model: NetworkModel, tol: float = EXACT_TOL) -> ConditionReport:
    """Comparison line ``G22 / G11 = G21 / G12`` (not a matching condition)."""
    G = _strengths(model)
    lhs = G[2, 2] * G[1, 2]
    rhs = G[2, 1] * G[1, 1]
    total = lhs + rhs
    residual = 0.0 if total == 0 else abs(lhs - rhs) / total
    return ConditionReport(Condition.DARK_MODE_BREAKING, residual, tol)


@dataclass(frozen=True)
class SupermodeBasis:
    """Cavity superpositions over ``(a1, a2)`` at loop phase pi.

    ``plus[k]`` and ``minus[k]`` belong to resonator ``k + 1``; ``strengths``
    are ``G_k = sqrt(G1k^2 + G2k^2)``.
    """

    plus: tuple[np.ndarray, np.ndarray]
    minus: tuple[np.ndarray, np.ndarray]
    strengths: tuple[float, float]
    parallel: bool


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ModelError("resonator has no optical links; supermode undefined")
    return v / norm


def supermodes(model: NetworkModel, phase_tol: float = PHASE_TOL, rtol: float = 1e-12) -> SupermodeBasis:
    """Supermodes ``alpha_{1,+-}``, ``alpha_{2,+-}`` at the interference point.

    ``parallel`` is true when ``alpha_2`` is parallel to ``alpha_1``, which
    happens exactly when ``G11 G12 = G21 G22``.
    """
    phi = loop_phase(model)
    if abs(phi - math.pi) > phase_tol:
        raise ModelError(f"supermodes are defined at loop phase pi (got {phi:.6g})", "loop_phase = pi")
    G = _strengths(model)
    plus1, minus1 = _unit([G[2, 1], G[1, 1]]), _unit([G[1, 1], -G[2, 1]])
    plus2, minus2 = _unit([G[1, 2], G[2, 2]]), _unit([G[2, 2], -G[1, 2]])
    a, b = G[1, 1] * G[1, 2], G[2, 1] * G[2, 2]
    parallel = abs(a - b) <= rtol * max(abs(a), abs(b), 1e-300)
    return SupermodeBasis(
        plus=(plus1, plus2),
        minus=(minus1, minus2),
        strengths=(math.hypot(G[1, 1], G[2, 1]), math.hypot(G[1, 2], G[2, 2])),
        parallel=parallel,
    )


def nonreciprocity_residuals(
    model: NetworkModel,
    omega: float = 0.0,
    *,
    adiabatic: bool = True,
    tol: float = EXACT_TOL,
) -> tuple[ConditionReport, ConditionReport]:
    """Blocking conditions for the detuned-cavity (H2) plaquette.

    Returns ``(block 2->1, block 1->2)``. The 2->1 report vanishes when
    ``G11 G12 / (kappa1/2) + exp(-i Phi) G21 G22 / (i Dt2) = 0`` and the 1->2
    report with ``exp(+i Phi)``. With ``adiabatic=False`` the full cavity
    susceptibilities at ``omega`` replace the adiabatic forms. A warning is
    issued when ``Dt2`` is not large against ``kappa2, G21, G22``.
    """
    if model.convention is not Convention.H2:
        raise ModelError("nonreciprocity_residuals expects the H2 convention")
    G = _strengths(model)
    k1, k2 = _dampings(model)
    det2 = model.optical[1].detuning
    if abs(det2) < ADIABATIC_FACTOR * max(k2, G[2, 1], G[2, 2]):
        warnings.warn(
            f"adiabatic regime not reached: |Dt2| = {abs(det2):.3g} vs "
            f"max(kappa2, G21, G22) = {max(k2, G[2, 1], G[2, 2]):.3g}",
            RuntimeWarning,
            stacklevel=2,
        )
    if adiabatic:
        if det2 == 0:
            raise ModelError("adiabatic form needs a non-zero detuning on the second cavity")
        t1 = complex(G[1, 1] * G[1, 2] / (k1 / 2))
        t2 = G[2, 1] * G[2, 2] / (1j * det2)
    else:
        t1, t2 = path_terms(model, omega)
    phi = loop_phase(model)
    block_21 = ConditionReport(
        Condition.NONRECIPROCAL_BLOCK_21,
        _two_path(t1, cmath.exp(-1j * phi) * t2),
        tol,
        required_phase=_cancelling_phase(t1, t2, -1),
    )
    block_12 = ConditionReport(
        Condition.NONRECIPROCAL_BLOCK_12,
        _two_path(t1, cmath.exp(1j * phi) * t2),
        tol,
        required_phase=_cancelling_phase(t1, t2, +1),
    )
    return block_21, block_12


def check_all(model: NetworkModel, omega: float = 0.0) -> list[ConditionReport]:
    """Every condition applicable to ``model``'s convention."""
    if not model.is_plaquette:
        raise TopologyError("conditions are defined for the 2x2 plaquette")
    reports = [impedance_kappa_check(model), dark_mode_breaking(model)]
    if model.convention is Convention.H1:
        reports.insert(0, interference_residual(model, omega))
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            reports.extend(nonreciprocity_residuals(model, omega))
    return reports


def format_table(reports: list[ConditionReport]) -> str:
    lines = [f"{'condition':<22} {'residual':>12} {'satisfied':>9} {'required_phase':>14}"]
    for r in reports:
        phase = "-" if r.required_phase is None else f"{r.required_phase:.6f}"
        lines.append(f"{r.condition.value:<22} {r.residual:>12.4e} {str(r.satisfied):>9} {phase:>14}")
    return "\n".join(lines)


__all__ = [
    "Condition",
    "ConditionReport",
    "SupermodeBasis",
    "check_all",
    "dark_mode_breaking",
    "effective_linewidth",
    "format_table",
    "impedance_kappa_check",
    "interference_residual",
    "nonreciprocity_residuals",
    "path_terms",
    "supermodes",
]
