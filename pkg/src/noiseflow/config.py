"""JSON configuration documents for network models.

Schema::

    {
      "reference_rate_hz": 1e6,
      "convention": "H1",
      "modes": [
        {"label": "a1", "kind": "optical", "damping": 1.0},
        {"label": "b1", "kind": "mechanical", "damping": 1e-5, "detuning": 0.0,
         "bath_occupation": 1000},
        {"label": "b2", "kind": "mechanical", "damping": 1e-5,
         "bath_occupation": {"frequency_hz": 5e6, "temperature_K": 0.24}}
      ],
      "couplings": [{"cavity": "a1", "mechanical": "b1", "strength": 0.1, "phase": 0.0}]
    }

Rates are in units of ``2 pi * reference_rate_hz``. A mode may also carry
``frequency_hz`` for regime diagnostics.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .errors import ConfigError, ModelError
from .netmodel import (
    DEFAULT_REFERENCE_RATE_HZ,
    TWO_PI,
    Convention,
    Coupling,
    Mode,
    ModeKind,
    NetworkModel,
    thermal_occupation,
)

_MODE_KEYS = {"label", "kind", "damping", "detuning", "bath_occupation", "frequency_hz"}
_COUPLING_KEYS = {"cavity", "mechanical", "strength", "phase"}


def parse_config(text: str) -> dict[str, Any]:
    """Parse JSON text, reporting the line and column of syntax errors."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise ConfigError("top level of a config must be an object")
    return doc


def load_config(path: str | Path) -> NetworkModel:
    return model_from_dict(parse_config(Path(path).read_text()))


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise ConfigError(f"missing required key {key!r} in {where}")
    return obj[key]


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number (got {value!r})")
    return float(value)


def _occupation(value, frequency_hz: float | None, where: str) -> float:
    if isinstance(value, dict):
        unknown = set(value) - {"frequency_hz", "temperature_K"}
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)} in {where}")
        freq = _number(value.get("frequency_hz", frequency_hz), f"{where}.frequency_hz")
        temp = _number(_require(value, "temperature_K", where), f"{where}.temperature_K")
        return thermal_occupation(TWO_PI * freq, temp)
    return _number(value, where)


def model_from_dict(doc: dict[str, Any]) -> NetworkModel:
    """Build a :class:`NetworkModel` from a parsed config document.

    Schema problems raise :class:`ConfigError`; invariant violations raise
    :class:`ModelError` naming the invariant.
    """
    modes_doc = _require(doc, "modes", "config")
    if not isinstance(modes_doc, list):
        raise ConfigError("'modes' must be an array")
    couplings_doc = doc.get("couplings", [])
    if not isinstance(couplings_doc, list):
        raise ConfigError("'couplings' must be an array")
    reference = _number(doc.get("reference_rate_hz", DEFAULT_REFERENCE_RATE_HZ), "reference_rate_hz")
    try:
        convention = Convention(doc.get("convention", "H1"))
    except ValueError:
        raise ConfigError(f"convention must be 'H1' or 'H2' (got {doc.get('convention')!r})") from None

    modes = []
    for i, m in enumerate(modes_doc):
        where = f"modes[{i}]"
        if not isinstance(m, dict):
            raise ConfigError(f"{where} must be an object")
        unknown = set(m) - _MODE_KEYS
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)} in {where}")
        label = str(_require(m, "label", where))
        try:
            kind = ModeKind(_require(m, "kind", where))
        except ValueError:
            raise ConfigError(f"{where}.kind must be 'optical' or 'mechanical'") from None
        freq_hz = m.get("frequency_hz")
        if freq_hz is not None:
            freq_hz = _number(freq_hz, f"{where}.frequency_hz")
        occ = _occupation(m.get("bath_occupation", 0.0), freq_hz, f"{where}.bath_occupation")
        modes.append(
            Mode(
                kind=kind,
                label=label,
                damping=_number(_require(m, "damping", where), f"{where}.damping"),
                detuning=_number(m.get("detuning", 0.0), f"{where}.detuning"),
                bath_occupation=occ,
                frequency=None if freq_hz is None else TWO_PI * freq_hz,
            )
        )

    couplings = []
    for i, c in enumerate(couplings_doc):
        where = f"couplings[{i}]"
        if not isinstance(c, dict):
            raise ConfigError(f"{where} must be an object")
        unknown = set(c) - _COUPLING_KEYS
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)} in {where}")
        couplings.append(
            Coupling(
                cavity=str(_require(c, "cavity", where)),
                mechanical=str(_require(c, "mechanical", where)),
                strength=_number(_require(c, "strength", where), f"{where}.strength"),
                phase=_number(c.get("phase", 0.0), f"{where}.phase"),
            )
        )
    return NetworkModel(tuple(modes), tuple(couplings), convention, reference)


def model_to_dict(model: NetworkModel) -> dict[str, Any]:
    modes = []
    for m in model.modes:
        entry: dict[str, Any] = {
            "label": m.label,
            "kind": m.kind.value,
            "damping": m.damping,
            "detuning": m.detuning,
            "bath_occupation": m.bath_occupation,
        }
        if m.frequency is not None:
            entry["frequency_hz"] = m.frequency / TWO_PI
        modes.append(entry)
    return {
        "reference_rate_hz": model.reference_rate_hz,
        "convention": model.convention.value,
        "modes": modes,
        "couplings": [
            {"cavity": c.cavity, "mechanical": c.mechanical, "strength": c.strength, "phase": c.phase}
            for c in model.couplings
        ],
    }


def dump_config(model: NetworkModel) -> str:
    return json.dumps(model_to_dict(model), indent=2)


def regime_warnings(model: NetworkModel, factor: float = 5.0) -> list[str]:
    """Non-fatal diagnostics for the resolved-sideband and rotating-wave assumptions.

    ``factor`` is how many times larger a quantity must be to count as
    "much greater". Modes without a frequency are skipped.
    """
    warnings = []
    unit = TWO_PI * model.reference_rate_hz
    rates = [m.damping for m in model.optical] + [c.strength for c in model.couplings]
    scale = max(rates, default=0.0)
    g_max = max((c.strength for c in model.couplings), default=0.0)
    freqs = {}
    for m in model.mechanical:
        if m.frequency is None:
            continue
        w = m.frequency / unit
        freqs[m.label] = w
        if w <= factor * scale:
            warnings.append(
                f"resolved-sideband regime violated for {m.label}: "
                f"omega_b = {w:.4g} <= {factor:g} x max(kappa, G) = {factor * scale:.4g}"
            )
    labels = sorted(freqs)
    for i, p in enumerate(labels):
        for q in labels[i + 1:]:
            gap = abs(freqs[p] - freqs[q])
            if min(freqs[p], freqs[q], gap) <= factor * g_max:
                warnings.append(
                    f"rotating-wave separation violated for {p},{q}: "
                    f"min(omega_b, |omega_b1 - omega_b2|) = {min(freqs[p], freqs[q], gap):.4g} "
                    f"<= {factor:g} x max G = {factor * g_max:.4g}"
                )
    return warnings


def validate(doc_or_text: str | dict[str, Any]) -> tuple[NetworkModel, list[str]]:
    """Parse and validate a config, returning the model and any regime warnings."""
    doc = parse_config(doc_or_text) if isinstance(doc_or_text, str) else doc_or_text
    model = model_from_dict(doc)
    return model, regime_warnings(model)


__all__ = [
    "ConfigError",
    "ModelError",
    "dump_config",
    "load_config",
    "model_from_dict",
    "model_to_dict",
    "parse_config",
    "regime_warnings",
    "validate",
]
