"""
Frequency-domain response of a linear network.

Fourier convention: ``o(w) = (2 pi)^{-1/2} int o(t) exp(i w t) dt``, so the
Langevin equations give ``v(w) = U(w) v_in(w)`` with

    U(w) = (-M - i w I)^{-1} sqrt(Gamma),     T_lm(w) = |U_lm(w)|^2.

Row index = output mode, column index = input channel. The closed-form
susceptibility chains in :func:`chain_amplitude` exist to cross-check the
matrix route; the matrix route is what everything else uses.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import ModelError, NumericalError, TopologyError
from .netmodel import (
    Convention,
    DynamicalSystem,
    NetworkModel,
    gauge_fix,
    loop_phase,
    plaquette_links,
)


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    points: NDArray[np.float64]
    resonance_hints: NDArray[np.float64]

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise ValueError("grid needs a non-empty 1-D array of points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("grid points must be finite")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        pts.setflags(write=False)
        hints = np.array(self.resonance_hints, dtype=float)
        hints.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "resonance_hints", hints)

    @property
    def window(self) -> float:
        return float(max(abs(self.points[0]), abs(self.points[-1])))


def resonances(sys: DynamicalSystem) -> tuple[NDArray, NDArray]:
    """Centres and half-widths of the response peaks.

    An eigenvalue ``lam`` of M puts a pole of ``(-M - i w)^{-1}`` at
    ``w = -Im(lam) + i Re(lam)``.
    """
    lam = sys.eigenvalues()
    return -lam.imag, np.abs(lam.real)


def default_window(sys: DynamicalSystem) -> float:
    centres, _ = resonances(sys)
    scale = max(float(np.max(sys.rates)), float(np.max(np.abs(centres))))
    return 10.0 * scale


def make_grid(
    sys: DynamicalSystem,
    *,
    window: float | None = None,
    base_points: int = 401,
    points_per_linewidth: int = 10,
    linewidths: float = 5.0,
) -> FrequencyGrid:
    """Symmetric grid on ``[-W, W]`` refined around every resonance.

    ``W`` defaults to ten times the larger of the biggest decay rate and the
    largest resonance offset. Within ``linewidths`` half-widths of each
    resonance the spacing is at most ``half-width / points_per_linewidth``;
    beyond that, points thin out geometrically.
    """
    W = default_window(sys) if window is None else float(window)
    centres, halfwidths = resonances(sys)
    parts = [np.linspace(-W, W, base_points)]
    for c, h in zip(centres, halfwidths):
        h = max(h, 1e-300)
        n = int(2 * linewidths * points_per_linewidth) + 1
        parts.append(c + h * np.linspace(-linewidths, linewidths, n))
        outer = np.geomspace(linewidths * h, max(2 * W, linewidths * h * 1.01), 60)[1:]
        parts.append(c + outer)
        parts.append(c - outer)
    pts = np.concatenate(parts)
    pts = np.unique(pts[(pts >= -W) & (pts <= W)])
    return FrequencyGrid(pts, np.sort(centres))


def uniform_grid(start: float, stop: float, num: int, sys: DynamicalSystem | None = None) -> FrequencyGrid:
    hints = np.sort(resonances(sys)[0]) if sys is not None else np.array([])
    return FrequencyGrid(np.linspace(start, stop, num), hints)


def transfer_matrices(sys: DynamicalSystem, omegas: NDArray) -> NDArray[np.complex128]:
    """U(w) for every w in ``omegas``; shape ``(len(omegas), N, N)``."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    n = sys.dimension
    lhs = -sys.matrix[None, :, :] - 1j * omegas[:, None, None] * np.eye(n)[None, :, :]
    rhs = np.broadcast_to(np.diag(np.sqrt(sys.rates)).astype(complex), lhs.shape)
    try:
        out = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular resolvent: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise NumericalError("non-finite transfer matrix")
    return out


def transfer_matrix(sys: DynamicalSystem, omega: float) -> NDArray[np.complex128]:
    """``U(w) = (-M - i w I)^{-1} sqrt(Gamma)`` at a single real frequency."""
    return transfer_matrices(sys, np.array([omega]))[0]


def transmission_matrices(sys: DynamicalSystem, omegas: NDArray) -> NDArray[np.float64]:
    u = transfer_matrices(sys, omegas)
    return u.real ** 2 + u.imag ** 2


@dataclass(frozen=True, eq=False)
class SpectralResult:
    grid: FrequencyGrid
    transfer: NDArray[np.complex128]
    transmission: NDArray[np.float64]
    labels: tuple[str, ...]

    def entry(self, source: str, target: str) -> NDArray[np.float64]:
        """T from input channel ``source`` to mode ``target`` on the grid."""
        idx = {lab: i for i, lab in enumerate(self.labels)}
        return self.transmission[:, idx[target], idx[source]]


def transmission(sys: DynamicalSystem, grid: FrequencyGrid) -> SpectralResult:
    u = transfer_matrices(sys, grid.points)
    return SpectralResult(grid, u, u.real ** 2 + u.imag ** 2, sys.labels)


def spectrum(sys: DynamicalSystem, grid: FrequencyGrid | NDArray) -> NDArray[np.float64]:
    """Symmetrized spectra ``s_o(w) = sum_l T_ol(w) (m_l + 1/2)`` of every mode.

    Shape ``(len(grid), N)``; columns follow ``sys.labels``.
    """
    omegas = grid.points if isinstance(grid, FrequencyGrid) else np.asarray(grid, dtype=float)
    t = transmission_matrices(sys, omegas)
    return t @ (sys.input_occupations + 0.5)


def write_spectra_csv(sys: DynamicalSystem, grid: FrequencyGrid, stream=None) -> str:
    """CSV of ``T_R{l}_to_b{k}`` and ``s_b{k}`` columns; indices count resonators from 1."""
    mech = sys.mechanical_indices
    t = transmission_matrices(sys, grid.points)
    s = t @ (sys.input_occupations + 0.5)
    header = ["omega"]
    cols = []
    for k_pos, k in enumerate(mech, start=1):
        for l_pos, l in enumerate(mech, start=1):
            header.append(f"T_R{l_pos}_to_b{k_pos}")
            cols.append(t[:, k, l])
    for k_pos, k in enumerate(mech, start=1):
        header.append(f"s_b{k_pos}")
        cols.append(s[:, k])
    buf = io.StringIO() if stream is None else stream
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for i, w in enumerate(grid.points):
        writer.writerow([f"{w:.9g}"] + [f"{c[i]:.9g}" for c in cols])
    return buf.getvalue() if stream is None else ""


# -- closed-form susceptibility chains -------------------------------------
class Setup(str, enum.Enum):
    TWO_MODE = "TwoMode"        # a1-b1
    SERIES_ABA = "SeriesABA"    # a2-b1-a1
    SERIES_BAB = "SeriesBAB"    # b1-a1-b2
    PLAQUETTE = "Plaquette"


def F(x):
    """Feedback factor ``1 / (1 - x)``."""
    return 1.0 / (1.0 - x)


class ChainSusceptibilities:
    """Bare susceptibilities and the dressed chain factors of a plaquette.

    Indices are 1-based: ``j`` counts cavities, ``k`` resonators. The model is
    gauge-fixed first, so the loop phase sits on the a2-b1 link only and the
    strengths ``G[j, k]`` are real.
    """

    def __init__(self, model: NetworkModel, omega):
        fixed = gauge_fix(model)
        links = plaquette_links(fixed)
        self.phase = loop_phase(fixed)
        self.omega = np.asarray(omega, dtype=float)
        self.G = {jk: c.strength for jk, c in links.items()}
        self.kappa = {j: m.damping for j, m in enumerate(fixed.optical, start=1)}
        self.gamma = {k: m.damping for k, m in enumerate(fixed.mechanical, start=1)}
        h2 = fixed.convention is Convention.H2
        self._a_det = {j: (m.detuning if h2 else 0.0) for j, m in enumerate(fixed.optical, start=1)}
        self._b_det = {k: (0.0 if h2 else m.detuning) for k, m in enumerate(fixed.mechanical, start=1)}

    def chi_a(self, j):
        return 1.0 / (self.kappa[j] / 2 + 1j * self._a_det[j] - 1j * self.omega)

    def chi_b(self, k):
        return 1.0 / (self.gamma[k] / 2 + 1j * self._b_det[k] - 1j * self.omega)

    def A(self, j, k):
        return -1j * self.G[j, k] * self.chi_a(j)

    def B(self, j, k):
        return -1j * self.G[j, k] * self.chi_b(k)

    def K(self, j):
        return self.chi_a(j) * np.sqrt(self.kappa[j])

    def Gam(self, k):
        return self.chi_b(k) * np.sqrt(self.gamma[k])

    def x(self, jk):
        return self.A(*jk) * self.B(*jk)

    def chiF(self, *links):
        """``F(sum of A B over links)``."""
        return F(sum(self.x(jk) for jk in links))

    def chiFF(self, alpha, beta):
        """``F[A_alpha B_alpha F(A_beta B_beta)]``."""
        return F(self.x(alpha) * F(self.x(beta)))


def _zero_links(model: NetworkModel) -> set[tuple[int, int]]:
    return {jk for jk, c in plaquette_links(model).items() if c.strength == 0.0}


_REQUIRED_ZEROS = {
    Setup.TWO_MODE: {(1, 2), (2, 1), (2, 2)},
    Setup.SERIES_ABA: {(1, 2), (2, 2)},
    Setup.SERIES_BAB: {(2, 1), (2, 2)},
    Setup.PLAQUETTE: set(),
}


def chain_amplitude(
    model: NetworkModel, setup: Setup | str, source: str, target: str, omega
):
    """Closed-form amplitude from input channel ``source`` to resonator ``target``.

    ``model`` is a plaquette in which the links absent from ``setup`` have zero
    strength. ``source`` is a mode label (its input channel) and ``target`` a
    resonator label. The squared modulus equals the matching entry of
    :func:`transmission`.
    """
    setup = Setup(setup)
    missing = _REQUIRED_ZEROS[setup] - _zero_links(model)
    if missing:
        raise ModelError(f"{setup.value} requires zero strength on links {sorted(missing)}")
    cs = ChainSusceptibilities(model, omega)
    cav = {m.label: j for j, m in enumerate(model.optical, start=1)}
    mech = {m.label: k for k, m in enumerate(model.mechanical, start=1)}
    if target not in mech:
        raise ModelError(f"target {target!r} is not a resonator of the model")
    k = mech[target]
    if source in mech:
        l, kind = mech[source], "b"
    elif source in cav:
        l, kind = cav[source], "a"
    else:
        raise ModelError(f"unknown source {source!r}")

    def unsupported():
        return ModelError(f"{setup.value} has no channel from {source} to {target}")

    if setup is Setup.TWO_MODE:
        if k != 1:
            raise unsupported()
        if kind == "b" and l == 1:
            return cs.chiF((1, 1)) * cs.Gam(1)
        if kind == "a" and l == 1:
            return cs.chiF((1, 1)) * cs.B(1, 1) * cs.K(1)
        raise unsupported()

    if setup is Setup.SERIES_ABA:
        if k != 1:
            raise unsupported()
        chi = cs.chiF((1, 1), (2, 1))
        if kind == "b" and l == 1:
            return chi * cs.Gam(1)
        if kind == "a":
            return chi * cs.B(l, 1) * cs.K(l)
        raise unsupported()

    if setup is Setup.SERIES_BAB:
        other = 2 if k == 1 else 1
        own, cross = (1, k), (1, other)
        chi = cs.chiFF(own, cross)
        if kind == "b" and l == k:
            return chi * cs.Gam(k)
        if kind == "b":
            return cs.A(1, other) * cs.B(1, k) * cs.chiF(cross) * chi * cs.Gam(other)
        if kind == "a" and l == 1:
            return cs.B(1, k) * cs.chiF(cross) * chi * cs.K(1)
        raise unsupported()

    return _plaquette_amplitude(cs, kind, l, k)


def _plaquette_amplitude(cs: ChainSusceptibilities, kind: str, l: int, k: int):
    e_p = np.exp(1j * cs.phase)
    e_m = np.exp(-1j * cs.phase)
    A, B = cs.A, cs.B
    loop = e_m * A(1, 1) * B(1, 2) * B(2, 1) * A(2, 2) + e_p * B(1, 1) * A(1, 2) * A(2, 1) * B(2, 2)
    if k == 1:
        chi = cs.chiF((1, 2), (2, 2))
        D = 1 - loop * chi - A(1, 1) * B(1, 1) * cs.chiFF((1, 2), (2, 2)) - A(2, 1) * B(2, 1) * cs.chiFF((2, 2), (1, 2))
        if kind == "b":
            H = 1.0 if l == 1 else (A(1, 2) * B(1, 1) + e_m * A(2, 2) * B(2, 1)) * chi
            return H * cs.Gam(l) / D
        if l == 1:
            Mk = B(2, 1) * e_m * A(2, 2) * B(1, 2) * chi + B(1, 1) * cs.chiFF((1, 2), (2, 2))
        else:
            Mk = B(1, 1) * A(1, 2) * B(2, 2) * cs.chiF((2, 2), (1, 2)) + B(2, 1) * e_m * cs.chiFF((2, 2), (1, 2))
        return Mk * cs.K(l) / D
    chi = cs.chiF((1, 1), (2, 1))
    D = 1 - loop * chi - A(1, 2) * B(1, 2) * cs.chiFF((1, 1), (2, 1)) - A(2, 2) * B(2, 2) * cs.chiFF((2, 1), (1, 1))
    if kind == "b":
        H = 1.0 if l == 2 else (A(1, 1) * B(1, 2) + e_p * A(2, 1) * B(2, 2)) * chi
        return H * cs.Gam(l) / D
    if l == 1:
        Mk = B(2, 2) * A(2, 1) * e_p * B(1, 1) * chi + B(1, 2) * cs.chiFF((1, 1), (2, 1))
    else:
        Mk = B(1, 2) * A(1, 1) * B(2, 1) * e_m * cs.chiF((2, 1), (1, 1)) + B(2, 2) * cs.chiFF((2, 1), (1, 1))
    return Mk * cs.K(l) / D


def series_model(setup: Setup | str, G: float = 0.1, **kwargs) -> NetworkModel:
    """Plaquette with the links of ``setup`` at strength ``G`` and the rest zeroed."""
    from .netmodel import plaquette

    setup = Setup(setup)
    strengths = [G if jk not in _REQUIRED_ZEROS[setup] else 0.0 for jk in ((1, 1), (1, 2), (2, 1), (2, 2))]
    return plaquette(strengths, **kwargs)


def count_local_maxima(values: Sequence[float], rtol: float = 1e-9) -> int:
    """Number of strict interior local maxima, ignoring plateaus within ``rtol``."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return 0
    scale = rtol * float(np.max(np.abs(v)))
    d = np.diff(v)
    d[np.abs(d) <= scale] = 0.0
    signs = np.sign(d)
    signs = signs[signs != 0]
    return int(np.sum((signs[:-1] > 0) & (signs[1:] < 0)))


__all__ = [
    "ChainSusceptibilities",
    "FrequencyGrid",
    "Setup",
    "SpectralResult",
    "TopologyError",
    "chain_amplitude",
    "count_local_maxima",
    "make_grid",
    "resonances",
    "series_model",
    "spectrum",
    "transfer_matrices",
    "transfer_matrix",
    "transmission",
    "transmission_matrices",
    "uniform_grid",
    "write_spectra_csv",
]
