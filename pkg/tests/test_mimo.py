import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mbcoffset import mimo
from mbcoffset.errors import MarginalStabilityError
from mbcoffset.lti import log_grid
from mbcoffset.plant import FRFFunction, RotorModel, TransformedPlant, analytic_offset_decoupled, pq_factors

W = 1.27


def _static(K):
    return FRFFunction(lambda w: np.broadcast_to(K * np.eye(2), np.shape(w) + (2, 2)).astype(complex))


def _lag_diag(tau=1.0):
    return FRFFunction(lambda w: np.einsum("...,ij->...ij", 1.0 / (1j * w * tau + 1.0), np.eye(2)))


def test_loop_gain_static():
    L = mimo.loop_gain(_static(2.0), mimo.DiagonalController(0.5), [0.1, 1.0])
    assert np.allclose(L[:, 0, 0], 1.0 / (1j * np.array([0.1, 1.0])))
    assert np.allclose(L[:, 0, 1], 0.0)
    with pytest.raises(ValueError):
        mimo.loop_gain(_static(1.0), mimo.DiagonalController(1.0), 0.0)


def test_controller_gains():
    assert mimo.DiagonalController(2.0).gains(2).tolist() == [2.0, 2.0]
    assert mimo.DiagonalController([1.0, 3.0]).gains(2).tolist() == [1.0, 3.0]
    with pytest.raises(ValueError):
        mimo.DiagonalController(float("nan"))


@pytest.mark.parametrize("K, c", [(1.0, 0.3), (2.5, 0.1)])
def test_static_crossover(K, c):
    xs = mimo.gain_crossovers(_static(K), mimo.DiagonalController(c))
    assert xs == [pytest.approx(c * K, rel=1e-9)]


def test_zero_loop_sensitivity_is_identity():
    res = mimo.sensitivity_svd(_static(0.0), mimo.DiagonalController(1.0), log_grid(0.01, 10, 20))
    assert np.allclose(res.sigma_min, 1.0) and np.allclose(res.sigma_max, 1.0)


def test_diagonal_loop_sensitivity_scalar():
    grid = log_grid(0.01, 10, 20)
    res = mimo.sensitivity_svd(_lag_diag(), mimo.DiagonalController(0.7), grid)
    l = 0.7 / (1j * grid) / (1j * grid + 1)
    assert np.allclose(res.sigma_max, 1 / np.abs(1 + l))
    assert np.allclose(res.sigma_min, 1 / np.abs(1 + l))


@given(st.floats(0, 1.5), st.floats(0.02, 0.5), st.floats(0.01, 1.0))
def test_sensitivity_closed_form(psi_o, c, tau):
    # the transformed plant is normal with eigenvalues H(s+) q and H(s-) p
    rotor = RotorModel.first_order(1.0, tau)
    plant = TransformedPlant(rotor, 1, W, psi_o)
    grid = log_grid(0.01, 1.0, 15)
    res = mimo.sensitivity_svd(plant, mimo.DiagonalController(c), grid)
    p, q = pq_factors(1, psi_o)
    h = rotor.h1
    e1 = 1 / np.abs(1 + c / (1j * grid) * h(1j * (grid + W)) * q)
    e2 = 1 / np.abs(1 + c / (1j * grid) * h(1j * (grid - W)) * p)
    assert np.allclose(res.sigma_max, np.maximum(e1, e2), rtol=1e-9)
    assert np.allclose(res.sigma_min, np.minimum(e1, e2), rtol=1e-9)


def test_sensitivity_marginal():
    # P = -jw I makes l = -1 at every frequency
    plant = FRFFunction(lambda w: np.einsum("...,ij->...ij", -1j * np.asarray(w, complex), np.eye(2)))
    with pytest.raises(MarginalStabilityError):
        mimo.sensitivity_svd(plant, mimo.DiagonalController(1.0), [0.5, 1.0])


def test_bands_diagonal_and_2x2():
    grid = log_grid(0.01, 1, 10)
    band = mimo.gershgorin_bands(_lag_diag(), mimo.DiagonalController(1.0), grid)
    assert np.all(band.radii == 0.0)
    plant = TransformedPlant(RotorModel.first_order(1, 0.1), 1, W, 0.0)
    ctrl = mimo.DiagonalController(0.2)
    L = mimo.loop_gain(plant, ctrl, grid)
    for loop in (1, 2):
        b = mimo.gershgorin_bands(plant, ctrl, grid, loop)
        off = L[:, 0, 1] if loop == 1 else L[:, 1, 0]
        assert np.allclose(b.radii, np.abs(off))
    with pytest.raises(ValueError):
        mimo.gershgorin_bands(plant, ctrl, grid, 3)
    with pytest.raises(ValueError):
        mimo.gershgorin_bands(plant, ctrl, grid, convention="diagonal")


def test_column_convention_differs_for_unequal_gains():
    plant = TransformedPlant(RotorModel.first_order(1, 0.1), 1, W, 0.0)
    ctrl = mimo.DiagonalController([0.2, 0.5])
    grid = log_grid(0.1, 1, 5)
    row = mimo.gershgorin_bands(plant, ctrl, grid, 1, "row").radii
    col = mimo.gershgorin_bands(plant, ctrl, grid, 1, "column").radii
    assert np.allclose(col / row, 0.2 / 0.5)


def test_dominance():
    band = mimo.GershgorinBand(np.array([1.0, 2.0]), np.array([0.5 + 0j, -0.5 + 0j]), np.array([0.0, 0.0]))
    assert mimo.diagonal_dominance(band) == (True, pytest.approx(0.5))
    covered = mimo.GershgorinBand(np.array([1.0]), np.array([-0.5 + 0j]), np.array([0.6]))
    dom = mimo.diagonal_dominance(covered)
    assert not dom.dominant and dom.clearance <= 0


@pytest.mark.parametrize("tau, needs_offset", [(0.1, False), (1.0, True), (2.0, True)])
def test_dominance_requires_offset_for_large_lag(tau, needs_offset):
    rotor = RotorModel.first_order(1.0, tau)
    ps = analytic_offset_decoupled(tau, W)
    ctrl = mimo.DiagonalController(0.1)
    d0 = mimo.diagonal_dominance(mimo.gershgorin_bands(TransformedPlant(rotor, 1, W, 0.0), ctrl, mimo.MARGIN_GRID))
    d1 = mimo.diagonal_dominance(mimo.gershgorin_bands(TransformedPlant(rotor, 1, W, ps), ctrl, mimo.MARGIN_GRID))
    assert d1.dominant
    assert d0.dominant is not needs_offset


def test_scalar_margins_oracle():
    rep = mimo.extended_margins(_lag_diag(), mimo.DiagonalController(1.0))
    assert rep.phi_m == pytest.approx(51.83, abs=0.01)
    assert rep.a_m == math.inf and rep.omega_p is None
    dense = np.logspace(-3, 2, 200001)
    l = 1 / (1j * dense * (1j * dense + 1))
    assert rep.m_m == pytest.approx(np.abs(1 + l).min(), abs=1e-8)
    # no coupling: extended margins coincide with the classical ones
    assert rep.phi_m_ext == pytest.approx(rep.phi_m, abs=1e-12)
    assert rep.m_m_ext == pytest.approx(rep.m_m, abs=1e-12)
    assert rep.a_m_ext == math.inf


def test_phase_crossover_gain_margin():
    # l = c / (jw (jw + 1)^2): phase crossover at w = 1 with |l| = c / 2
    plant = FRFFunction(lambda w: np.einsum("...,ij->...ij", 1.0 / (1j * w + 1.0) ** 2, np.eye(2)))
    rep = mimo.extended_margins(plant, mimo.DiagonalController(0.5))
    assert rep.omega_p == pytest.approx(1.0, rel=1e-8)
    assert rep.a_m == pytest.approx(4.0, rel=1e-8)
    assert rep.a_m_ext == pytest.approx(rep.a_m)


def test_extended_margins_shrink_with_coupling():
    plant = TransformedPlant(RotorModel.first_order(1, 0.1, 0.1, 1), 1, W, 0.0)
    rep = mimo.extended_margins(plant, mimo.DiagonalController(0.1461))
    assert rep.dominant
    assert rep.m_m_ext < rep.m_m and rep.phi_m_ext < rep.phi_m
    d = rep.to_dict()
    assert set(d) == {"loop", "A_m_ext", "phi_m_ext_deg", "M_m_ext", "omega_p", "omega_g", "omega_m",
                      "dominant", "A_m", "phi_m_deg", "M_m"}
    json.dumps(d)


def test_not_dominant_gives_none():
    rotor = RotorModel.first_order(1.0, 2.0)
    rep = mimo.extended_margins(TransformedPlant(rotor, 1, W, 0.0), mimo.DiagonalController(0.1))
    assert not rep.dominant
    assert rep.a_m_ext is None and rep.phi_m_ext is None and rep.m_m_ext is None


@pytest.mark.parametrize("dc0, dc1, c, expected", [(1.0, 1.0, 2.0, 2.0), (1.37, 1.0, 3.65e-6 / 1.37, 3.65e-6)])
def test_gain_correction_examples(dc0, dc1, c, expected):
    assert mimo.gain_correction(dc0, dc1, c) == pytest.approx(expected)
    assert mimo.gain_correction(1.0, 1.37, 3.65e-6) == pytest.approx(2.66e-6, rel=2e-3)


def test_gain_correction_first_order():
    rotor = RotorModel.first_order(1.0, 0.3)
    ps = analytic_offset_decoupled(0.3, W)
    f = mimo.gain_correction(TransformedPlant(rotor, 1, W, 0).dc_gain(), TransformedPlant(rotor, 1, W, ps).dc_gain(), 1.0)
    assert f == pytest.approx(1 / math.sqrt(1 + (0.3 * W) ** 2), rel=1e-12)
    with pytest.raises(ValueError):
        mimo.gain_correction(-1.0, 1.0, 1.0)


def test_sensitivity_plus_complementary_is_identity():
    plant = TransformedPlant(RotorModel.first_order(1, 0.1, 0.1, 1), 1, W, 0.3)
    ctrl = mimo.DiagonalController(0.2)
    w = np.array([0.05, 0.5])
    L = mimo.loop_gain(plant, ctrl, w)
    S = np.linalg.inv(np.eye(2) + L)
    assert np.allclose(S + mimo.complementary_sensitivity(plant, ctrl, w), np.eye(2))


def test_band_csv(tmp_path):
    plant = TransformedPlant(RotorModel.first_order(1, 0.1), 1, W, 0.0)
    band = mimo.gershgorin_bands(plant, mimo.DiagonalController(0.2), log_grid(0.1, 1, 4))
    band.write_csv(tmp_path / "b.csv")
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0] == "omega,re,im,radius" and len(lines) == 5
