import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noiseflow import (
    Convention,
    Coupling,
    LinearizationInput,
    Mode,
    ModeKind,
    ModelError,
    NetworkModel,
    NumericalError,
    TopologyError,
    build_dynamics,
    gauge_fix,
    linearize,
    loop_phase,
    plaquette,
    thermal_occupation,
    with_loop_phase,
)
from noiseflow.netmodel import normalize_phase

TWO_PI = 2 * math.pi


def _with_phases(model, p11, p12, p21, p22):
    for (c, m), p in zip((("a1", "b1"), ("a1", "b2"), ("a2", "b1"), ("a2", "b2")), (p11, p12, p21, p22)):
        model = model.with_coupling(c, m, phase=p)
    return model


# -- linearize ---------------------------------------------------------------
def test_linearize_product_and_argument():
    (c,) = linearize({("a1", "b1"): LinearizationInput(TWO_PI * 100, 1000 * np.exp(1j * math.pi / 3))})
    assert c.strength == pytest.approx(TWO_PI * 1e5, rel=1e-14)
    assert c.phase == pytest.approx(math.pi / 3, abs=1e-14)


def test_linearize_zero_amplitude_has_zero_phase():
    (c,) = linearize({("a1", "b1"): LinearizationInput(5.0, 0j)})
    assert (c.strength, c.phase) == (0.0, 0.0)


def test_linearize_negative_real_amplitude():
    (c,) = linearize({("a1", "b1"): LinearizationInput(1.0, -2.0)})
    assert c.strength == 2.0
    assert c.phase == pytest.approx(math.pi)


def test_linearize_rejects_non_finite():
    with pytest.raises(ModelError):
        linearize({("a1", "b1"): LinearizationInput(1.0, complex(math.inf, 0))})


# -- loop phase and gauge ----------------------------------------------------
@pytest.mark.parametrize(
    "phases, expected",
    [
        ((0, 0, 0, 0), 0.0),
        ((math.pi, 0, 0, 0), math.pi),
        ((math.pi / 4, math.pi / 4, math.pi / 7, math.pi / 7), 0.0),
    ],
)
def test_loop_phase_examples(phases, expected):
    phi = loop_phase(_with_phases(plaquette(0.1), *phases))
    assert min(abs(phi - expected), TWO_PI - abs(phi - expected)) < 1e-12


def test_gauge_fix_relocates_phase():
    fixed = gauge_fix(_with_phases(plaquette(0.1), math.pi, 0, 0, 0))
    assert fixed.coupling("a2", "b1").phase == pytest.approx(math.pi)
    assert all(fixed.coupling(*k).phase == 0.0 for k in (("a1", "b1"), ("a1", "b2"), ("a2", "b2")))


def test_gauge_fix_uniform_phases_gives_zero_gauge():
    fixed = gauge_fix(_with_phases(plaquette(0.1), *(math.pi / 5,) * 4))
    assert all(c.phase == 0.0 for c in fixed.couplings)


@given(st.lists(st.floats(-10, 10), min_size=4, max_size=4))
def test_gauge_fix_preserves_loop_phase(phases):
    model = _with_phases(plaquette(0.1), *phases)
    a, b = loop_phase(model), loop_phase(gauge_fix(model))
    assert min(abs(a - b), TWO_PI - abs(a - b)) < 1e-9


@given(st.lists(st.floats(0, TWO_PI), min_size=4, max_size=4), st.floats(0, TWO_PI))
def test_loop_phase_invariant_under_mode_rephasing(shifts, phi):
    """Rephasing a_j -> a_j e^{i t_j}, b_k -> b_k e^{i s_k} shifts phi_jk by t_j - s_k."""
    model = with_loop_phase(plaquette(0.1), phi)
    t = {"a1": shifts[0], "a2": shifts[1], "b1": shifts[2], "b2": shifts[3]}
    shifted = model
    for c in model.couplings:
        shifted = shifted.with_coupling(c.cavity, c.mechanical, phase=c.phase + t[c.cavity] - t[c.mechanical])
    d = abs(loop_phase(shifted) - loop_phase(model))
    assert min(d, TWO_PI - d) < 1e-9


def test_loop_phase_needs_plaquette():
    three = NetworkModel(
        (Mode("optical", "a1", 1.0), Mode("mechanical", "b1", 1e-5), Mode("mechanical", "b2", 1e-5)),
        (Coupling("a1", "b1", 0.1), Coupling("a1", "b2", 0.1)),
    )
    with pytest.raises(TopologyError):
        loop_phase(three)
    with pytest.raises(TopologyError):
        gauge_fix(three)


@given(st.floats(-100, 100, allow_nan=False))
def test_normalize_phase_range(p):
    r = normalize_phase(p)
    assert 0.0 <= r < TWO_PI
    assert math.isclose(math.cos(r), math.cos(p), abs_tol=1e-9)


# -- validation --------------------------------------------------------------
def test_zero_damping_names_invariant():
    with pytest.raises(ModelError) as err:
        Mode("mechanical", "b1", 0.0)
    assert err.value.invariant == "damping > 0"


def test_negative_occupation_rejected():
    with pytest.raises(ModelError) as err:
        Mode("mechanical", "b1", 1e-5, bath_occupation=-1.0)
    assert err.value.invariant == "bath_occupation >= 0"


def test_negative_strength_rejected():
    with pytest.raises(ModelError):
        Coupling("a1", "b1", -0.1)


def test_coupling_phase_normalized():
    assert Coupling("a1", "b1", 0.1, -math.pi / 2).phase == pytest.approx(1.5 * math.pi)


def test_duplicate_coupling_rejected():
    modes = (Mode("optical", "a1", 1.0), Mode("mechanical", "b1", 1e-5))
    with pytest.raises(ModelError):
        NetworkModel(modes, (Coupling("a1", "b1", 0.1), Coupling("a1", "b1", 0.2)))


def test_non_bipartite_link_rejected():
    modes = (Mode("optical", "a1", 1.0), Mode("optical", "a2", 1.0), Mode("mechanical", "b1", 1e-5))
    with pytest.raises(ModelError):
        NetworkModel(modes, (Coupling("a1", "a2", 0.1),))
    with pytest.raises(ModelError):
        NetworkModel(modes, (Coupling("a1", "zz", 0.1),))


def test_detuning_convention_enforced():
    with pytest.raises(ModelError):
        NetworkModel((Mode("optical", "a1", 1.0, detuning=0.3),), (), Convention.H1)
    with pytest.raises(ModelError):
        NetworkModel((Mode("mechanical", "b1", 1e-5, detuning=0.3),), (), Convention.H2)


def test_duplicate_labels_rejected():
    with pytest.raises(ModelError):
        NetworkModel((Mode("optical", "a1", 1.0), Mode("mechanical", "a1", 1e-5)), ())


# -- build_dynamics ----------------------------------------------------------
def test_matrix_matches_hand_built_plaquette():
    G11, G12, G21, G22, phi = 0.1, 0.2, 0.3, 0.4, 0.7
    k1, k2, g1, g2, d1, d2 = 1.0, 0.8, 1e-5, 2e-5, 0.05, -0.02
    model = plaquette((G11, G12, G21, G22), phase=phi, kappa=(k1, k2), gamma=(g1, g2), detuning=(d1, d2))
    e = np.exp(1j * phi)
    expected = np.array([
        [-k1 / 2, 0, -1j * G11, -1j * G12],
        [0, -k2 / 2, -1j * G21 * e, -1j * G22],
        [-1j * G11, -1j * G21 / e, -g1 / 2 - 1j * d1, 0],
        [-1j * G12, -1j * G22, 0, -g2 / 2 - 1j * d2],
    ])
    sys_ = build_dynamics(model)
    np.testing.assert_allclose(sys_.matrix, expected, atol=1e-15)
    np.testing.assert_array_equal(sys_.rates, [k1, k2, g1, g2])
    np.testing.assert_array_equal(sys_.input_occupations, [0, 0, 1e3, 1e3])
    assert sys_.labels == ("a1", "a2", "b1", "b2")


def test_h2_diagonal_carries_cavity_detuning():
    sys_ = build_dynamics(plaquette(0.1, kappa=(1.0, 0.1), cavity_detuning=(0.0, 0.5)))
    assert sys_.matrix[1, 1] == pytest.approx(-0.05 - 0.5j)
    assert sys_.matrix[3, 3] == pytest.approx(-0.5e-5)


def test_decoupled_matrix_is_diagonal():
    sys_ = build_dynamics(plaquette(0.0, detuning=(0.1, 0.2)))
    np.testing.assert_allclose(sys_.matrix, np.diag([-0.5, -0.5, -0.5e-5 - 0.1j, -0.5e-5 - 0.2j]))


@given(
    st.lists(st.floats(0, 1.2), min_size=4, max_size=4),
    st.floats(0, TWO_PI),
    st.lists(st.floats(1e-6, 1e-3), min_size=2, max_size=2),
    st.lists(st.floats(-0.5, 0.5), min_size=2, max_size=2),
)
def test_hermitian_decomposition_and_stability(G, phi, gamma, detuning):
    sys_ = build_dynamics(plaquette(tuple(G), phase=phi, gamma=tuple(gamma), detuning=tuple(detuning)))
    assert sys_.hermiticity_defect() <= 1e-12 * np.linalg.norm(sys_.matrix)
    # passivity: M + M^dagger = -Gamma is negative definite
    top = sys_.max_real_eigenvalue()
    assert top < 0
    assert top <= -min(sys_.rates) / 2 + 1e-12


def test_arbitrary_bipartite_network():
    modes = (
        Mode("optical", "a1", 1.0),
        Mode("optical", "a2", 0.5),
        Mode("optical", "a3", 2.0),
        Mode("mechanical", "b1", 1e-4, bath_occupation=10),
    )
    couplings = (Coupling("a1", "b1", 0.1), Coupling("a2", "b1", 0.2), Coupling("a3", "b1", 0.3, 1.0))
    sys_ = build_dynamics(NetworkModel(modes, couplings))
    assert sys_.dimension == 4
    assert sys_.mechanical_indices == [3]


def test_require_stable_raises():
    sys_ = build_dynamics(plaquette(0.1))
    unstable = type(sys_)(
        matrix=np.array([[1e-3]]), rates=np.array([1.0]), input_occupations=np.array([0.0]), labels=("x",), kinds=(ModeKind.MECHANICAL,)
    )
    with pytest.raises(NumericalError):
        unstable.require_stable()


def test_dynamical_system_arrays_are_read_only():
    sys_ = build_dynamics(plaquette(0.1))
    with pytest.raises(ValueError):
        sys_.matrix[0, 0] = 1.0


# -- thermal occupation ------------------------------------------------------
def test_thermal_occupation_5mhz_240mk():
    assert thermal_occupation(TWO_PI * 5e6, 0.240) == pytest.approx(1e3, rel=0.05)


def test_thermal_occupation_1mhz_4k():
    assert thermal_occupation(TWO_PI * 1e6, 4.0) == pytest.approx(1e5, rel=0.2)


def test_thermal_occupation_zero_temperature():
    assert thermal_occupation(TWO_PI * 1e6, 0.0) == 0.0


def test_thermal_occupation_high_temperature_limit():
    # k T / (hbar w) - 1/2 to second order
    from scipy import constants

    w, T = TWO_PI * 1e6, 10.0
    x = constants.hbar * w / (constants.k * T)
    assert thermal_occupation(w, T) == pytest.approx(1 / x - 0.5 + x / 12, rel=1e-9)


def test_thermal_occupation_domain():
    with pytest.raises(ModelError):
        thermal_occupation(0.0, 1.0)
    with pytest.raises(ModelError):
        thermal_occupation(1.0, -1.0)
