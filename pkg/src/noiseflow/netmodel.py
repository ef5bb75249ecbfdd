"""
Network data model for linearized optomechanical networks.

A network is a bipartite graph of optical modes ``a_j`` and mechanical modes
``b_k`` joined by beam-splitter couplings. Each coupling contributes

    G_jk exp(-i phi_jk) a_j b_k^dagger + h.c.

to the Hamiltonian, so a cavity amplitude ``alpha_jk = |alpha_jk| exp(i phi_jk)``
maps onto a link with strength ``g_jk |alpha_jk|`` and phase ``phi_jk``. With
this sign choice the gauge-fixed plaquette (all phase on the a2-b1 link) has
exactly the ``G21 exp(-i Phi) a2 b1^dagger`` term and the quantum Langevin
equations read

    da_j/dt = -i sum_k G_jk exp(+i phi_jk) b_k - (kappa_j/2 + i Dt_j) a_j + ...
    db_k/dt = -i sum_j G_jk exp(-i phi_jk) a_j - (gamma_k/2 + i D_k) b_k + ...

All rates are dimensionless, measured in units of a reference rate
``2 pi * reference_rate_hz`` (default 2 pi x 1 MHz).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import constants

from .errors import ModelError, NumericalError, TopologyError

TWO_PI = 2.0 * math.pi

#: Default reference rate in Hz; rates are expressed in units of 2 pi times this.
DEFAULT_REFERENCE_RATE_HZ = 1.0e6

# Hermiticity of the coherent part is checked relative to ||M||.
HERMITICITY_RTOL = 1e-12
STABILITY_MARGIN = 1e-12


class ModeKind(str, enum.Enum):
    OPTICAL = "optical"
    MECHANICAL = "mechanical"


class Convention(str, enum.Enum):
    """Which frame detunings are active.

    ``H1`` puts detunings on the mechanical modes, ``H2`` on the cavities.
    """

    H1 = "H1"
    H2 = "H2"


def normalize_phase(phase: float) -> float:
    """Reduce an angle to ``[0, 2 pi)``."""
    reduced = math.fmod(float(phase), TWO_PI)
    if reduced < 0.0:
        reduced += TWO_PI
    # fmod can return exactly 2 pi after the shift for tiny negative inputs
    if reduced >= TWO_PI:
        reduced -= TWO_PI
    return reduced


@dataclass(frozen=True)
class Mode:
    """A single bosonic mode with its bath.

    Parameters
    ----------
    kind:
        Optical or mechanical.
    label:
        Unique name, e.g. ``"a1"`` or ``"b2"``.
    damping:
        Energy decay rate (kappa_j or gamma_k), in reference-rate units.
    detuning:
        Frame detuning. Mechanical modes carry it under ``H1``, cavities under ``H2``.
    bath_occupation:
        Mean thermal quanta of the bath; zero for optical vacuum baths.
    frequency:
        Absolute mode frequency in rad/s. Only used for occupation conversion
        and regime diagnostics; may be omitted.
    """

    kind: ModeKind
    label: str
    damping: float
    detuning: float = 0.0
    bath_occupation: float = 0.0
    frequency: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ModeKind(self.kind))
        if not self.label:
            raise ModelError("mode label must be non-empty", "label")
        for name in ("damping", "detuning", "bath_occupation"):
            if not math.isfinite(getattr(self, name)):
                raise ModelError(f"mode {self.label}: {name} must be finite", name)
        if not self.damping > 0:
            raise ModelError(f"mode {self.label}: damping > 0 violated (got {self.damping})", "damping > 0")
        if not self.bath_occupation >= 0:
            raise ModelError(
                f"mode {self.label}: bath_occupation >= 0 violated (got {self.bath_occupation})",
                "bath_occupation >= 0",
            )

    @property
    def is_optical(self) -> bool:
        return self.kind is ModeKind.OPTICAL


@dataclass(frozen=True)
class Coupling:
    """Beam-splitter link between cavity ``cavity`` and resonator ``mechanical``."""

    cavity: str
    mechanical: str
    strength: float
    phase: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.strength) and math.isfinite(self.phase)):
            raise ModelError(f"coupling {self.cavity}-{self.mechanical}: non-finite value", "finite")
        if self.strength < 0:
            raise ModelError(
                f"coupling {self.cavity}-{self.mechanical}: strength >= 0 violated (got {self.strength})",
                "strength >= 0",
            )
        object.__setattr__(self, "phase", normalize_phase(self.phase))

    @property
    def key(self) -> tuple[str, str]:
        return (self.cavity, self.mechanical)


@dataclass(frozen=True)
class LinearizationInput:
    single_photon_coupling: float
    cavity_amplitude: complex


@dataclass(frozen=True)
class NetworkModel:
    """Full description of an optomechanical network."""

    modes: tuple[Mode, ...]
    couplings: tuple[Coupling, ...]
    convention: Convention = Convention.H1
    reference_rate_hz: float = DEFAULT_REFERENCE_RATE_HZ

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "couplings", tuple(self.couplings))
        object.__setattr__(self, "convention", Convention(self.convention))
        self._validate()

    def _validate(self):
        labels = [m.label for m in self.modes]
        if len(set(labels)) != len(labels):
            raise ModelError("mode labels must be unique", "unique labels")
        if not any(m.is_optical for m in self.modes) and self.couplings:
            raise ModelError("couplings given but no optical modes", "bipartite")
        if not self.reference_rate_hz > 0:
            raise ModelError("reference_rate_hz must be positive", "reference_rate_hz > 0")
        by_label = {m.label: m for m in self.modes}
        for m in self.modes:
            if self.convention is Convention.H1 and m.is_optical and m.detuning != 0.0:
                raise ModelError(
                    f"mode {m.label}: optical detuning must be 0 under H1", "single detuning convention"
                )
            if self.convention is Convention.H2 and not m.is_optical and m.detuning != 0.0:
                raise ModelError(
                    f"mode {m.label}: mechanical detuning must be 0 under H2", "single detuning convention"
                )
        seen = set()
        for c in self.couplings:
            cav = by_label.get(c.cavity)
            mech = by_label.get(c.mechanical)
            if cav is None or mech is None:
                raise ModelError(f"coupling {c.cavity}-{c.mechanical} references an unknown mode", "labels resolve")
            if not cav.is_optical or mech.is_optical:
                raise ModelError(
                    f"coupling {c.cavity}-{c.mechanical} must join an optical and a mechanical mode", "bipartite"
                )
            if c.key in seen:
                raise ModelError(f"duplicate coupling {c.cavity}-{c.mechanical}", "one coupling per pair")
            seen.add(c.key)

    # -- accessors ---------------------------------------------------------
    @property
    def optical(self) -> tuple[Mode, ...]:
        return tuple(m for m in self.modes if m.is_optical)

    @property
    def mechanical(self) -> tuple[Mode, ...]:
        return tuple(m for m in self.modes if not m.is_optical)

    @property
    def ordered_modes(self) -> tuple[Mode, ...]:
        """Modes in dynamical-matrix order: cavities first, then resonators."""
        return self.optical + self.mechanical

    def mode(self, label: str) -> Mode:
        for m in self.modes:
            if m.label == label:
                return m
        raise ModelError(f"unknown mode {label!r}", "labels resolve")

    def coupling(self, cavity: str, mechanical: str) -> Coupling | None:
        for c in self.couplings:
            if c.key == (cavity, mechanical):
                return c
        return None

    @property
    def is_plaquette(self) -> bool:
        return (
            len(self.optical) == 2
            and len(self.mechanical) == 2
            and len(self.couplings) == 4
        )

    # -- functional updates -----------------------------------------------
    def with_mode(self, label: str, **changes) -> "NetworkModel":
        self.mode(label)
        modes = tuple(replace(m, **changes) if m.label == label else m for m in self.modes)
        return replace(self, modes=modes)

    def with_coupling(self, cavity: str, mechanical: str, **changes) -> "NetworkModel":
        if self.coupling(cavity, mechanical) is None:
            proto = Coupling(cavity, mechanical, changes.pop("strength", 0.0), changes.pop("phase", 0.0))
            return replace(self, couplings=self.couplings + (proto,))
        couplings = tuple(
            replace(c, **changes) if c.key == (cavity, mechanical) else c for c in self.couplings
        )
        return replace(self, couplings=couplings)


@dataclass(frozen=True, eq=False)
class DynamicalSystem:
    """Linear drift ``dv/dt = M v + sqrt(Gamma) v_in`` of a network.

    ``matrix`` is M, ``rates`` the diagonal of Gamma, ``input_occupations`` the
    normal-ordered occupation of each input channel (zero for vacuum inputs).
    """

    matrix: NDArray[np.complex128]
    rates: NDArray[np.float64]
    input_occupations: NDArray[np.float64]
    labels: tuple[str, ...]
    kinds: tuple[ModeKind, ...]
    mode_index: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("matrix", "rates", "input_occupations"):
            arr = np.array(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not self.mode_index:
            object.__setattr__(self, "mode_index", {lab: i for i, lab in enumerate(self.labels)})

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def damping(self) -> NDArray[np.float64]:
        """Gamma as a diagonal matrix."""
        return np.diag(self.rates)

    @property
    def mechanical_indices(self) -> list[int]:
        return [i for i, k in enumerate(self.kinds) if k is ModeKind.MECHANICAL]

    @property
    def optical_indices(self) -> list[int]:
        return [i for i, k in enumerate(self.kinds) if k is ModeKind.OPTICAL]

    def eigenvalues(self) -> NDArray[np.complex128]:
        return np.linalg.eigvals(self.matrix)

    def max_real_eigenvalue(self) -> float:
        return float(np.max(self.eigenvalues().real))

    def hermiticity_defect(self) -> float:
        """``||(M + Gamma/2) + (M + Gamma/2)^dagger||``, zero for an exact decomposition."""
        coherent = self.matrix + 0.5 * self.damping
        return float(np.linalg.norm(coherent + coherent.conj().T))

    def require_stable(self, margin: float = STABILITY_MARGIN) -> None:
        top = self.max_real_eigenvalue()
        if top >= -margin:
            raise NumericalError(f"system is not strictly stable: max Re(eig(M)) = {top:.3e}")

    def with_occupations(self, occupations: Sequence[float]) -> "DynamicalSystem":
        occ = np.asarray(occupations, dtype=float)
        if occ.shape != self.rates.shape:
            raise ValueError("occupation vector has the wrong length")
        return replace(self, input_occupations=occ)


# -- operations ------------------------------------------------------------
def linearize(inputs: Mapping[tuple[str, str], LinearizationInput]) -> list[Coupling]:
    """Effective couplings ``G = g |alpha|`` with phase ``arg(alpha)``."""
    out = []
    for (cavity, mechanical), item in inputs.items():
        alpha = complex(item.cavity_amplitude)
        g = float(item.single_photon_coupling)
        if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag) and math.isfinite(g)):
            raise ModelError(f"non-finite linearization input for {cavity}-{mechanical}", "finite")
        magnitude = abs(alpha)
        phase = math.atan2(alpha.imag, alpha.real) if magnitude > 0 else 0.0
        out.append(Coupling(cavity, mechanical, abs(g) * magnitude, phase))
    return out


def plaquette_links(model: NetworkModel) -> dict[tuple[int, int], Coupling]:
    """Map ``(j, k)`` (1-based cavity and resonator positions) to couplings.

    Raises TopologyError unless the model is the full 2x2 plaquette.
    """
    if not model.is_plaquette:
        raise TopologyError(
            "operation requires the 2x2 plaquette (two cavities, two resonators, four links)"
        )
    cav = {m.label: j for j, m in enumerate(model.optical, start=1)}
    mech = {m.label: k for k, m in enumerate(model.mechanical, start=1)}
    links = {(cav[c.cavity], mech[c.mechanical]): c for c in model.couplings}
    if len(links) != 4:
        raise TopologyError("plaquette must contain every cavity-resonator link")
    return links


def loop_phase(model: NetworkModel) -> float:
    """Gauge-invariant plaquette phase ``phi21 - phi22 - phi11 + phi12`` in ``[0, 2 pi)``.

    This is the only combination of link phases left after the gauge freedom
    of the four mode operators is used up; see :func:`gauge_fix`.
    """
    p = {jk: c.phase for jk, c in plaquette_links(model).items()}
    return normalize_phase(p[2, 1] - p[2, 2] - p[1, 1] + p[1, 2])


def gauge_fix(model: NetworkModel) -> NetworkModel:
    """Equivalent model with every phase on the a2-b1 link."""
    links = plaquette_links(model)
    phi = loop_phase(model)
    new = {c.key: replace(c, phase=phi if jk == (2, 1) else 0.0) for jk, c in links.items()}
    return replace(model, couplings=tuple(new[c.key] for c in model.couplings))


def with_loop_phase(model: NetworkModel, phase: float) -> NetworkModel:
    """Gauge-fixed copy of a plaquette with loop phase set to ``phase``."""
    fixed = gauge_fix(model)
    cav = fixed.optical[1].label
    mech = fixed.mechanical[0].label
    return fixed.with_coupling(cav, mech, phase=phase)


def build_dynamics(model: NetworkModel) -> DynamicalSystem:
    """Assemble M, Gamma and the input occupations of ``model``.

    Rows are ordered cavities first, then resonators, each in declaration order.
    """
    ordered = model.ordered_modes
    index = {m.label: i for i, m in enumerate(ordered)}
    n = len(ordered)
    matrix = np.zeros((n, n), dtype=complex)
    for i, m in enumerate(ordered):
        matrix[i, i] = -(0.5 * m.damping + 1j * m.detuning)
    for c in model.couplings:
        j, k = index[c.cavity], index[c.mechanical]
        matrix[j, k] += -1j * c.strength * np.exp(1j * c.phase)
        matrix[k, j] += -1j * c.strength * np.exp(-1j * c.phase)
    rates = np.array([m.damping for m in ordered])
    occupations = np.array([0.0 if m.is_optical else m.bath_occupation for m in ordered])
    system = DynamicalSystem(
        matrix=matrix,
        rates=rates,
        input_occupations=occupations,
        labels=tuple(m.label for m in ordered),
        kinds=tuple(m.kind for m in ordered),
    )
    defect = system.hermiticity_defect()
    if defect > HERMITICITY_RTOL * max(np.linalg.norm(matrix), 1.0):
        raise NumericalError(f"coherent part is not Hermitian (defect {defect:.3e})")
    system.require_stable()
    return system


def thermal_occupation(frequency: float, temperature: float) -> float:
    """Bose-Einstein occupation for angular ``frequency`` (rad/s) at ``temperature`` (K)."""
    if not frequency > 0:
        raise ModelError(f"frequency must be positive (got {frequency})", "frequency > 0")
    if temperature < 0:
        raise ModelError(f"temperature must be non-negative (got {temperature})", "temperature >= 0")
    if temperature == 0:
        return 0.0
    x = constants.hbar * frequency / (constants.k * temperature)
    return float(1.0 / math.expm1(x))


def make_mode(kind: str | ModeKind, label: str, damping: float, **kwargs) -> Mode:
    return Mode(ModeKind(kind), label, damping, **kwargs)


def plaquette(
    G: float | Sequence[float] = 0.1,
    *,
    phase: float = 0.0,
    kappa: Sequence[float] = (1.0, 1.0),
    gamma: Sequence[float] = (1e-5, 1e-5),
    detuning: Sequence[float] = (0.0, 0.0),
    cavity_detuning: Sequence[float] | None = None,
    occupations: Sequence[float] = (1e3, 1e3),
    reference_rate_hz: float = DEFAULT_REFERENCE_RATE_HZ,
) -> NetworkModel:
    """Four-mode plaquette a1, a2, b1, b2 in the gauge with all phase on a2-b1.

    ``G`` is either one strength for every link or ``(G11, G12, G21, G22)``.
    Passing ``cavity_detuning`` selects the H2 convention.
    """
    strengths = (G,) * 4 if np.isscalar(G) else tuple(G)
    if len(strengths) != 4:
        raise ModelError("G must be a scalar or (G11, G12, G21, G22)")
    g11, g12, g21, g22 = (float(x) for x in strengths)
    convention = Convention.H1 if cavity_detuning is None else Convention.H2
    cav_det = (0.0, 0.0) if cavity_detuning is None else cavity_detuning
    mech_det = detuning if cavity_detuning is None else (0.0, 0.0)
    modes = (
        Mode(ModeKind.OPTICAL, "a1", kappa[0], detuning=cav_det[0]),
        Mode(ModeKind.OPTICAL, "a2", kappa[1], detuning=cav_det[1]),
        Mode(ModeKind.MECHANICAL, "b1", gamma[0], detuning=mech_det[0], bath_occupation=occupations[0]),
        Mode(ModeKind.MECHANICAL, "b2", gamma[1], detuning=mech_det[1], bath_occupation=occupations[1]),
    )
    couplings = (
        Coupling("a1", "b1", g11),
        Coupling("a1", "b2", g12),
        Coupling("a2", "b1", g21, phase),
        Coupling("a2", "b2", g22),
    )
    return NetworkModel(modes, couplings, convention, reference_rate_hz)


def drop_zero_links(model: NetworkModel) -> NetworkModel:
    """Remove zero-strength couplings and modes left without any link to a resonator."""
    couplings = tuple(c for c in model.couplings if c.strength > 0)
    used = {c.cavity for c in couplings}
    modes = tuple(m for m in model.modes if not m.is_optical or m.label in used)
    return NetworkModel(modes, couplings, model.convention, model.reference_rate_hz)
