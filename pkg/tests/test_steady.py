import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noiseflow import IntegrationError, build_dynamics, plaquette
from noiseflow.netmodel import Coupling, Mode, NetworkModel
from noiseflow.spectral import uniform_grid
from noiseflow.steady import (
    Method,
    dual_cavity_limit,
    dual_cavity_limit_of,
    flow_report,
    occupations_lyapunov,
    occupations_spectral,
    oracle_disagreement,
    steady_covariance,
)


def _two_mode(G, kappa=1.0, gamma=1e-5, m=1e3):
    modes = (Mode("optical", "a1", kappa), Mode("mechanical", "b1", gamma, bath_occupation=m))
    return NetworkModel(modes, (Coupling("a1", "b1", G),))


def _kron_lyapunov(M, D):
    """Dense vectorized solve of M C + C M^dagger + D = 0 (column-major vec)."""
    n = M.shape[0]
    eye = np.eye(n)
    op = np.kron(eye, M) + np.kron(M.conj(), eye)
    vec = np.linalg.solve(op, -D.reshape(-1, order="F"))
    return vec.reshape(n, n, order="F")


# -- closed forms ------------------------------------------------------------
def test_uncoupled_resonators_sit_at_bath():
    rep = occupations_lyapunov(build_dynamics(plaquette(0.0, occupations=(10.0, 300.0))))
    np.testing.assert_allclose(rep.occupations, [10.0, 300.0], rtol=1e-12)
    assert rep.T("b1", "b1") == pytest.approx(1.0, rel=1e-12)
    assert rep.T("b2", "b1") == 0.0
    np.testing.assert_allclose(rep.net_flow, 0.0, atol=1e-9)


@pytest.mark.parametrize("G", [0.01, 0.05, 0.1, 0.3])
def test_single_cavity_exact_formula(G):
    kappa, gamma, m = 1.0, 1e-5, 1e3
    exact = m * gamma * (4 * G ** 2 + kappa * (kappa + gamma)) / ((kappa + gamma) * (4 * G ** 2 + kappa * gamma))
    assert occupations_lyapunov(build_dynamics(_two_mode(G))).n("b1") == pytest.approx(exact, rel=1e-10)


def test_single_cavity_weak_coupling_cooperativity_limit():
    G, kappa, gamma, m = 0.02, 1.0, 1e-5, 1e3
    C = 4 * G ** 2 / (kappa * gamma)
    assert occupations_lyapunov(build_dynamics(_two_mode(G))).n("b1") == pytest.approx(m / (1 + C), rel=2e-2)


def test_single_cavity_finite_kappa_gap_at_g_01():
    """At G = 0.1 kappa the exact occupation sits ~4 % above m / (1 + C).

    The gap is the factor (1 + 4 G^2 / kappa^2) carried by the exact form,
    so the cooperativity estimate is only good to 2 % for G below ~0.07.
    """
    n = occupations_lyapunov(build_dynamics(_two_mode(0.1))).n("b1")
    adiabatic = 1e3 / 4001
    assert n / adiabatic == pytest.approx(1 + 4 * 0.1 ** 2, rel=1e-3)


def test_dual_cavity_limit_weak_coupling():
    G, gamma, m = 0.02, 1e-5, 1e3
    C = 4 * G ** 2 / gamma
    mech = Mode("mechanical", "b1", gamma, bath_occupation=m)
    cavs = (Mode("optical", "a1", 1.0), Mode("optical", "a2", 1.0))
    assert dual_cavity_limit(mech, cavs, (G, G)) == pytest.approx(m / (1 + 2 * C), rel=2e-2)


def test_dual_cavity_limit_of_plaquette_drops_other_resonator():
    model = plaquette((0.1, 0.2, 0.3, 0.4), phase=1.0)
    mech = model.mode("b1")
    direct = dual_cavity_limit(mech, model.optical, (0.1, 0.3))
    assert dual_cavity_limit_of(model, "b1") == pytest.approx(direct, rel=1e-14)


def test_dual_cavity_limit_rejects_wrong_arity():
    with pytest.raises(ValueError):
        dual_cavity_limit(Mode("mechanical", "b1", 1e-5), (Mode("optical", "a1", 1.0),), (0.1,))


def test_equal_couplings_at_pi_cool_both(fig3_model):
    rep = occupations_lyapunov(build_dynamics(fig3_model))
    np.testing.assert_allclose(rep.occupations, 0.135, rtol=5e-2)
    # exact interference: no noise crosses between resonators
    assert rep.T("b2", "b1") == 0.0
    assert rep.T("b1", "b2") == 0.0


def test_equal_couplings_at_zero_share_baths():
    rep = occupations_lyapunov(build_dynamics(plaquette(0.1, phase=0.0)))
    # bright mode cooled, dark mode left at the bath: both resonators carry half
    np.testing.assert_allclose(rep.occupations, 500.0, rtol=1e-3)


def test_bab_series_flow_split():
    from noiseflow.spectral import Setup, series_model

    rep = occupations_lyapunov(build_dynamics(series_model(Setup.SERIES_BAB)))
    row = rep.row("b1")
    assert row["delta_n"] == pytest.approx(-0.75 * 1e3 + 0.25 * 1e3, rel=2e-2)


# -- oracles -----------------------------------------------------------------
MODELS = [
    plaquette(0.1, phase=math.pi),
    plaquette((0.1, 0.3, 0.2, 0.5), phase=2.0, detuning=(0.02, -0.01)),
    plaquette(0.1, phase=0.7, kappa=(1.0, 0.1), cavity_detuning=(0.0, 0.5), occupations=(1e5, 1e3)),
    plaquette(1.0, phase=math.pi),
]


@pytest.mark.parametrize("model", MODELS)
def test_spectral_matches_lyapunov(model):
    sys_ = build_dynamics(model)
    a, b = occupations_spectral(sys_), occupations_lyapunov(sys_)
    assert oracle_disagreement(a, b) <= 1e-6
    np.testing.assert_allclose(a.integrated_T, b.integrated_T, atol=1e-8)


@pytest.mark.parametrize("model", MODELS)
def test_lyapunov_matches_kronecker_solve(model):
    sys_ = build_dynamics(model)
    D = np.diag(sys_.rates * sys_.input_occupations).astype(complex)
    np.testing.assert_allclose(steady_covariance(sys_), _kron_lyapunov(sys_.matrix, D), rtol=1e-8, atol=1e-8)


def test_covariance_is_hermitian_positive():
    cov = steady_covariance(build_dynamics(MODELS[1]))
    np.testing.assert_allclose(cov, cov.conj().T, atol=1e-10)
    assert np.linalg.eigvalsh((cov + cov.conj().T) / 2).min() >= -1e-9


# -- flow bookkeeping --------------------------------------------------------
@given(st.lists(st.floats(0.0, 1.0), min_size=4, max_size=4), st.floats(0, 2 * math.pi), st.floats(0, 1e4), st.floats(0, 1e4))
def test_net_flow_is_outflow_plus_inflow(G, phi, m1, m2):
    rep = occupations_lyapunov(build_dynamics(plaquette(tuple(G), phase=phi, occupations=(m1, m2))))
    np.testing.assert_allclose(rep.net_flow, rep.outflow + rep.inflow, atol=1e-7 * (m1 + m2 + 1))


@given(st.floats(0, 1e4), st.floats(0, 2 * math.pi))
def test_occupation_linear_in_bath(m1, phi):
    """n1 is affine in m1 with slope T(b1 -> b1)."""
    base = plaquette((0.1, 0.2, 0.3, 0.15), phase=phi, occupations=(0.0, 500.0))
    rep0 = occupations_lyapunov(build_dynamics(base))
    rep = occupations_lyapunov(build_dynamics(base.with_mode("b1", bath_occupation=m1)))
    assert rep.n("b1") == pytest.approx(rep0.n("b1") + m1 * rep0.T("b1", "b1"), rel=1e-9, abs=1e-9)


def test_cooling_is_monotone_in_coupling_at_pi():
    occ = [occupations_lyapunov(build_dynamics(plaquette(G, phase=math.pi))).n("b1") for G in (0.0, 0.01, 0.03, 0.1)]
    assert all(b <= a + 1e-8 for a, b in zip(occ, occ[1:]))


def test_interference_isolates_from_hot_neighbour(fig3_model):
    cold = occupations_lyapunov(build_dynamics(fig3_model)).n("b1")
    hot = occupations_lyapunov(build_dynamics(fig3_model.with_mode("b2", bath_occupation=1e6))).n("b1")
    assert hot == pytest.approx(cold, rel=1e-9)


def test_report_row_and_method(fig3_model):
    rep = flow_report(build_dynamics(fig3_model), "lyapunov")
    assert rep.method is Method.LYAPUNOV
    assert set(rep.row("b1")) == {"n_bar", "m_bar", "delta_n", "N_out", "N_in"}
    assert flow_report(build_dynamics(fig3_model), Method.SPECTRAL).method is Method.SPECTRAL


def test_report_csv_layout(fig3_model):
    rep = occupations_lyapunov(build_dynamics(fig3_model))
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert rows[0] == ["mode", "n_bar", "m_bar", "delta_n", "N_out", "N_in", "method"]
    assert [r[0] for r in rows[1:]] == ["b1", "b2"]
    assert float(rows[1][1]) == pytest.approx(rep.n("b1"), rel=1e-8)
    assert rows[1][-1] == "lyapunov"
    t_rows = list(csv.reader(io.StringIO(rep.transmission_csv())))
    assert t_rows[0] == ["target", "a1", "a2", "b1", "b2"]


def test_explicit_narrow_grid_raises_integration_error(fig3_model):
    sys_ = build_dynamics(fig3_model)
    with pytest.raises(IntegrationError):
        occupations_spectral(sys_, uniform_grid(-1e-3, 1e-3, 11))
