"""Smoke tests for the python bindings staged in the build tree."""

import numpy as np
import pytest

import ltomo


def test_version_present():
    assert ltomo.__version__


def test_fidelity_oracle():
    a = np.diag([0.7, 0.3]).astype(complex)
    b = np.diag([0.3, 0.7]).astype(complex)
    assert abs(ltomo.fidelity(a, b) - 0.84) < 1e-12


def test_loss_floor_oracles():
    assert ltomo.dof(8, 8) == 63
    assert abs(ltomo.min_loss(8, 8, 1e4) - 1.4175e-2) < 1e-15
    assert abs(ltomo.efficiency(2.15997e-6, 8, 8, 1e4) - 6562.59) < 0.01


def test_mub_shape_and_povm():
    x = ltomo.mub_protocol(3)
    assert x.rows.shape == (12, 3)
    assert x.row_count() == 12
    assert ltomo.povm_defect(x) < 1e-10


def test_reconstruction_round_trip():
    rho = ltomo.random_mixed_state(dim=3, rank=3, dominant_weight=0.7, seed=5)
    x = ltomo.normalize_exposure(ltomo.mub_protocol(3), rho, 1e4)
    rec = ltomo.sample_counts(x, rho, 11)
    res = ltomo.mle_reconstruct(rec)
    assert res.converged
    assert res.rho.shape == (3, 3)
    assert 1.0 - ltomo.fidelity(res.rho, rho) < 1e-2
    assert np.isfinite(res.condition)


def test_adapted_protocol_equalizes_counts():
    rho = ltomo.random_mixed_state(dim=4, rank=4, dominant_weight=0.9, seed=3)
    adapted = ltomo.adapt_protocol(rho, ltomo.mub_protocol(4), 0.9, 1e4)
    expected = np.asarray(adapted.weights) * np.asarray(ltomo.rates(adapted, rho))
    assert expected.max() / expected.min() < 1.0 + 1e-6
    assert abs(expected.sum() - 1e4) < 1e-4


def test_lorentz_centers_state():
    rho = ltomo.random_mixed_state(dim=4, rank=4, dominant_weight=0.7, seed=9)
    l = ltomo.lorentz_of_state(ltomo.sqrtm_psd(rho))
    image = l @ rho @ l.conj().T
    dd = np.linalg.det(rho).real ** (1.0 / 4.0)
    assert np.abs(image - dd * np.eye(4)).max() < 1e-10
    assert abs(np.linalg.det(l) - 1.0) < 1e-10


def test_errors_translate_to_python():
    with pytest.raises(ValueError):
        ltomo.mub_protocol(6)
    with pytest.raises(ValueError):
        ltomo.min_loss(8, 8, 0.0)


def test_short_tracking_run():
    cfg = ltomo.EvolutionConfig()
    cfg.dim = 2
    cfg.eps = 1e-3
    cfg.period = 10
    cfg.total_steps = 3
    cfg.sample_size = 2000.0
    cfg.target_weight = 0.9
    cfg.initial_weight = 0.95
    recs = ltomo.run_tracking(cfg)
    assert len(recs) == 3
    assert recs[0].step == 1
    assert recs[0].detection_fractions.shape == (6,)
    assert all(r.loss >= 0.0 for r in recs)


def test_verification_names_checks():
    results = ltomo.run_verification(corrupt_mub=True)
    by_name = {r.name: r for r in results}
    assert "mub_overlaps" in by_name
    assert not by_name["mub_overlaps"].pass_
