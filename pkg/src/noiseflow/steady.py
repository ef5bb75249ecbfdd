"""
Steady-state occupations and noise-flow bookkeeping.

Two independent routes give the same numbers:

* ``occupations_spectral`` integrates the symmetrized spectra and the
  transmission coefficients with adaptive Gauss-Kronrod quadrature;
* ``occupations_lyapunov`` solves ``M C + C M^dagger + D = 0`` for the
  normal-ordered covariance, once with the full input noise and once per
  input channel for the integrated coefficients.

Directional notation: ``integrated_T[k, l]`` is the coefficient from input
channel ``l`` (any mode's bath) to resonator ``k``, written T_{l->k}. The
two-index shorthand T_21 for "bath 2 into resonator 1" is
``integrated_T[b1, b2]`` here.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import solve_continuous_lyapunov

from .errors import IntegrationError, NumericalError
from .netmodel import (
    Coupling,
    DynamicalSystem,
    Mode,
    ModeKind,
    NetworkModel,
    build_dynamics,
)
from .quadrature import integrate_real_line
from .spectral import FrequencyGrid, default_window, resonances, transmission_matrices

QUAD_ABS = 1e-12
QUAD_REL = 1e-10
MIN_WINDOW_COVERAGE = 0.9999
LYAPUNOV_RTOL = 1e-9


class Method(str, enum.Enum):
    SPECTRAL = "spectral"
    LYAPUNOV = "lyapunov"


@dataclass(frozen=True, eq=False)
class FlowReport:
    """Occupations and noise-flow decomposition of every resonator.

    ``integrated_T`` has one row per resonator (``labels``) and one column per
    input channel (``channels``, cavities included).
    """

    labels: tuple[str, ...]
    channels: tuple[str, ...]
    occupations: NDArray[np.float64]
    bath_occupations: NDArray[np.float64]
    integrated_T: NDArray[np.float64]
    method: Method
    thermal_channels: tuple[str, ...] = ()

    @property
    def net_flow(self) -> NDArray[np.float64]:
        return self.occupations - self.bath_occupations

    def T(self, source: str, target: str) -> float:
        """Integrated coefficient from ``source``'s bath into resonator ``target``."""
        return float(self.integrated_T[self.labels.index(target), self.channels.index(source)])

    @property
    def outflow(self) -> NDArray[np.float64]:
        own = np.array([self.T(lab, lab) for lab in self.labels])
        return self.bath_occupations * (own - 1.0)

    @property
    def inflow(self) -> NDArray[np.float64]:
        occ = dict(zip(self.labels, self.bath_occupations))
        out = np.zeros(len(self.labels))
        for i, k in enumerate(self.labels):
            out[i] = sum(occ[l] * self.T(l, k) for l in self.thermal_channels if l != k)
        return out

    def row(self, label: str) -> dict[str, float]:
        i = self.labels.index(label)
        return {
            "n_bar": float(self.occupations[i]),
            "m_bar": float(self.bath_occupations[i]),
            "delta_n": float(self.net_flow[i]),
            "N_out": float(self.outflow[i]),
            "N_in": float(self.inflow[i]),
        }

    def n(self, label: str) -> float:
        return float(self.occupations[self.labels.index(label)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["mode", "n_bar", "m_bar", "delta_n", "N_out", "N_in", "method"])
        for lab in self.labels:
            r = self.row(lab)
            w.writerow([lab] + [f"{r[c]:.9g}" for c in ("n_bar", "m_bar", "delta_n", "N_out", "N_in")] + [self.method.value])
        return buf.getvalue()

    def transmission_csv(self) -> str:
        """Labelled matrix: rows are resonators, columns input channels."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["target"] + list(self.channels))
        for i, lab in enumerate(self.labels):
            w.writerow([lab] + [f"{v:.9g}" for v in self.integrated_T[i]])
        return buf.getvalue()


def _clip_roundoff(values, scale: float, rtol: float = 1e-12):
    """Zero out negatives no larger than ``rtol * scale``; quantities here are nonnegative."""
    values = np.asarray(values, dtype=float)
    return np.where((values < 0) & (values >= -rtol * scale), 0.0, values)


def _report(sys: DynamicalSystem, occupations, integrated, method: Method) -> FlowReport:
    mech = sys.mechanical_indices
    m_max = float(np.max(sys.input_occupations[mech], initial=0.0))
    occupations = _clip_roundoff(occupations, m_max + 1.0)
    integrated = _clip_roundoff(integrated, 1.0)
    return FlowReport(
        labels=tuple(sys.labels[k] for k in mech),
        channels=sys.labels,
        occupations=np.asarray(occupations, dtype=float),
        bath_occupations=sys.input_occupations[mech].copy(),
        integrated_T=np.asarray(integrated, dtype=float),
        method=method,
        thermal_channels=tuple(sys.labels[k] for k in mech),
    )


def _breakpoints(sys: DynamicalSystem, grid: FrequencyGrid | None, window: float) -> list[float]:
    centres, halfwidths = resonances(sys)
    pts = set()
    for c, h in zip(centres, halfwidths):
        for s in (0.0, 1.0, -1.0, 10.0, -10.0, 100.0, -100.0):
            p = c + s * h
            if -window < p < window:
                pts.add(float(p))
    if grid is not None:
        pts.update(float(p) for p in grid.resonance_hints if -window < p < window)
    return sorted(pts)


def occupations_spectral(
    sys: DynamicalSystem,
    grid: FrequencyGrid | None = None,
    *,
    epsabs: float | None = None,
    epsrel: float = QUAD_REL,
) -> FlowReport:
    """Occupations from ``n_k = (2 pi)^{-1} int s_bk dw - 1/2`` and integrated T.

    The integration window is the grid's window with tails beyond it
    integrated on a compactified variable. Without a grid the default window
    is widened tenfold (up to three times) until it holds 99.99 % of every
    coefficient's weight. Raises IntegrationError if the window falls short
    or the quadrature does not converge.
    """
    sys.require_stable()
    if grid is not None:
        return _spectral_on_window(sys, grid.window, grid, epsabs, epsrel)
    window = default_window(sys)
    for attempt in range(4):
        try:
            return _spectral_on_window(sys, window, None, epsabs, epsrel)
        except _ShortWindow as exc:
            if attempt == 3:
                raise exc.error from None
            window *= 10.0
    raise AssertionError("unreachable")


class _ShortWindow(Exception):
    def __init__(self, error: IntegrationError):
        super().__init__(str(error))
        self.error = error


def _spectral_on_window(sys, window, grid, epsabs, epsrel) -> FlowReport:
    mech = sys.mechanical_indices
    occ = sys.input_occupations + 0.5
    m_max = float(np.max(sys.input_occupations[mech])) if mech else 0.0
    if epsabs is None:
        epsabs = QUAD_ABS * (m_max + 1.0)
    n_ch = sys.dimension

    def integrand(omegas):
        t = transmission_matrices(sys, omegas)[:, mech, :]
        s = t @ occ
        return np.concatenate([t.reshape(len(omegas), -1), s], axis=1)

    # Coefficients are O(1); spectra carry the occupation scale.
    tol = np.concatenate([np.full(len(mech) * n_ch, QUAD_ABS), np.full(len(mech), epsabs)]) * 2 * np.pi
    result, tails = integrate_real_line(
        integrand,
        window=window,
        breakpoints=_breakpoints(sys, grid, window),
        epsabs=tol,
        epsrel=epsrel,
    )
    values = result.value / (2 * np.pi)
    tails = tails / (2 * np.pi)
    coeffs = values[: len(mech) * n_ch].reshape(len(mech), n_ch)
    coverage = 1.0 - np.abs(tails[: len(mech) * n_ch].reshape(len(mech), n_ch)).sum(axis=1)
    if np.any(coverage < MIN_WINDOW_COVERAGE):
        error = IntegrationError(
            f"integration window +/-{window:.4g} holds only {coverage.min():.6f} of the spectral weight",
            error_estimate=result.error,
            panels=result.panels,
        )
        if grid is not None:
            raise error
        raise _ShortWindow(error)
    n_bar = values[len(mech) * n_ch:] - 0.5
    return _report(sys, n_bar, coeffs, Method.SPECTRAL)


def _lyapunov(matrix: NDArray, diffusion: NDArray) -> NDArray:
    cov = solve_continuous_lyapunov(matrix, -diffusion)
    residual = matrix @ cov + cov @ matrix.conj().T + diffusion
    scale = np.linalg.norm(diffusion) + np.linalg.norm(matrix) * np.linalg.norm(cov)
    if not np.all(np.isfinite(cov)) or np.linalg.norm(residual) > LYAPUNOV_RTOL * max(scale, 1e-300):
        raise NumericalError(
            f"Lyapunov solve inaccurate: residual {np.linalg.norm(residual):.3e} vs scale {scale:.3e}"
        )
    return cov


def steady_covariance(sys: DynamicalSystem) -> NDArray[np.complex128]:
    """Solution of ``M C + C M^dagger + Gamma diag(m) = 0``.

    ``C_ij = <v_j^dagger v_i>`` (normal ordered), so the diagonal holds the
    mode occupations.
    """
    sys.require_stable()
    return _lyapunov(sys.matrix, np.diag(sys.rates * sys.input_occupations).astype(complex))


def occupations_lyapunov(sys: DynamicalSystem) -> FlowReport:
    """Occupations from the steady-state Lyapunov equation.

    Integrated coefficients come from one solve per input channel with unit
    occupation on that channel alone.
    """
    sys.require_stable()
    mech = sys.mechanical_indices
    n_bar = steady_covariance(sys).diagonal().real[mech]
    n = sys.dimension
    coeffs = np.zeros((len(mech), n))
    for l in range(n):
        d = np.zeros((n, n), dtype=complex)
        d[l, l] = sys.rates[l]
        coeffs[:, l] = _lyapunov(sys.matrix, d).diagonal().real[mech]
    return _report(sys, n_bar, coeffs, Method.LYAPUNOV)


def flow_report(sys: DynamicalSystem, method: Method | str = Method.LYAPUNOV, grid: FrequencyGrid | None = None) -> FlowReport:
    method = Method(method)
    if method is Method.SPECTRAL:
        return occupations_spectral(sys, grid)
    return occupations_lyapunov(sys)


def oracle_disagreement(a: FlowReport, b: FlowReport) -> float:
    """Largest ``|n_a - n_b| / (n + 1)`` over resonators."""
    return float(np.max(np.abs(a.occupations - b.occupations) / (np.abs(b.occupations) + 1.0)))


def dual_cavity_limit(
    mech: Mode,
    cavities: Sequence[Mode],
    strengths: Sequence[float],
    reference_rate_hz: float = 1e6,
) -> float:
    """Occupation of one resonator cooled by two cavities (a2-b-a1 setup).

    The cavities keep their dampings; detunings follow the H1 convention, so
    only the resonator's detuning is kept.
    """
    if len(cavities) != 2 or len(strengths) != 2:
        raise ValueError("dual-cavity limit needs exactly two cavities and two strengths")
    resonator = Mode(ModeKind.MECHANICAL, mech.label, mech.damping, mech.detuning, mech.bath_occupation)
    modes = tuple(Mode(ModeKind.OPTICAL, c.label, c.damping) for c in cavities) + (resonator,)
    links = tuple(Coupling(c.label, mech.label, g) for c, g in zip(cavities, strengths))
    model = NetworkModel(modes, links, reference_rate_hz=reference_rate_hz)
    return occupations_lyapunov(build_dynamics(model)).n(mech.label)


def dual_cavity_limit_of(model: NetworkModel, label: str) -> float:
    """Dual-cavity limit of resonator ``label`` using its own links in ``model``.

    The other resonators are dropped, which is the decoupled reference line
    drawn in the phase and coupling-ratio sweeps.
    """
    mech = model.mode(label)
    cavities = model.optical
    strengths = []
    for c in cavities:
        link = model.coupling(c.label, label)
        strengths.append(0.0 if link is None else link.strength)
    if model.convention.value == "H2":
        modes = tuple(cavities) + (Mode(ModeKind.MECHANICAL, mech.label, mech.damping, 0.0, mech.bath_occupation),)
        links = tuple(Coupling(c.label, label, g) for c, g in zip(cavities, strengths))
        reduced = NetworkModel(modes, links, model.convention, model.reference_rate_hz)
        return occupations_lyapunov(build_dynamics(reduced)).n(label)
    return dual_cavity_limit(mech, cavities, strengths, model.reference_rate_hz)
