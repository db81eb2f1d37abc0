import math

import numpy as np
import pytest

import nqn


def test_blockade_radius_and_target():
    c = nqn.ChainConfig.with_spacing_ratio(7, 2, 0.7)
    assert c.blockade_radius == pytest.approx(9.76, rel=1e-3)
    assert nqn.target_state(c) == "1010101"
    assert len(nqn.blockade_basis(5, 2)) == 13


def test_hamiltonian_is_symmetric():
    c = nqn.ChainConfig.with_spacing_ratio(4, 2, 0.7)
    h = nqn.build_full(c, 1.0, 0.5)
    assert h.shape == (16, 16)
    assert np.allclose(h, h.T, atol=1e-12)
    assert h[1, 1] == pytest.approx(-2 * math.pi * 0.5)


def test_propagation_conserves_norm():
    c = nqn.ChainConfig.with_spacing_ratio(3, 2, 0.7)
    s = nqn.linear_ramp(1.0, -12.0, 12.0, 1.8)
    psi0 = np.zeros(8, dtype=complex)
    psi0[0] = 1.0
    psi = nqn.propagate(c, s, psi0)
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-9)
    assert abs(psi[5]) ** 2 == pytest.approx(nqn.schedule_fidelity(c, s), abs=1e-6)


def test_measurement_model_and_landau_zener():
    assert round(nqn.measured_fidelity(1.0, 3), 4) == 0.8464
    assert round(nqn.measured_fidelity(1.0, 7), 4) == 0.7164
    rate = nqn.landau_zener_rate(1.0, 0.82)
    assert nqn.landau_zener(1.0, rate) == pytest.approx(0.82)
    with pytest.raises(ValueError):
        nqn.landau_zener(1.0, 1.0, "other")


def test_classify_nqn_and_schedule():
    c = nqn.ChainConfig.with_spacing_ratio(3, 2, 0.7)
    s = nqn.make_nqn_schedule(c, nqn.RampSpec(), [3, 2, 1, 0, -1, -2, -3])
    k = nqn.classify_nqn(s)
    assert k["label"] == "NQN"
    assert k["delta_n1_end_over_omega"] == pytest.approx(3.0)
    assert nqn.classify_nqn(nqn.linear_ramp(1.0, -12.0, 12.0, 1.8))["label"] == "unclassified"


def test_phase_scan():
    c = nqn.ChainConfig.with_spacing_ratio(5, 2, 0.7)
    rows = nqn.scan(c, "-4:12:3,1.4:1.4:1")
    assert [r[2] for r in rows][0] == "disordered"
    assert rows[-1][2] == "Z2"
    label, strength = nqn.classify_phase([1, 0, 1, 0, 1])
    assert label == nqn.Phase.Z2
    assert strength == pytest.approx(0.36)  # S(pi) of 10101


def test_small_optimisation_is_deterministic():
    c = nqn.ChainConfig.with_spacing_ratio(3, 2, 0.7)
    p = nqn.OptimizationProblem(c, restarts=1, seed=7)
    a = nqn.optimize(p)
    b = nqn.optimize(p)
    assert a.best_knots == b.best_knots
    assert a.best_knots[0] == -12.0 and a.best_knots[-1] == 12.0
    assert 0.0 <= a.best_fidelity <= 1.0


def test_config_errors_surface_as_value_error():
    c = nqn.ChainConfig.with_spacing_ratio(4, 2, 0.7)
    with pytest.raises(ValueError):
        c.validate()
