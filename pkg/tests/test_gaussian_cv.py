import numpy as np
import pytest

from maisense.errors import InvalidScenarioError
from maisense.gaussian_cv import (
    CvStrategy,
    GaussianScenario,
    cv_matrices,
    cv_xi2_closed,
    cv_xi2_matrix,
    noise_ratio,
)
from maisense.optimizer import EstimationTarget


def test_scenario_validation():
    with pytest.raises(InvalidScenarioError):
        GaussianScenario(r=-0.1)
    with pytest.raises(InvalidScenarioError):
        GaussianScenario(r=0.5, sigma=-1.0)
    with pytest.raises(InvalidScenarioError):
        GaussianScenario(r=np.inf)


def test_vacuum_covariance():
    md = cv_matrices(GaussianScenario(r=0.0))
    assert np.allclose(md.gamma, 0.5 * np.eye(4))
    assert np.allclose(md.f_sn, 2.0 * np.eye(2))


def test_linear_covariance_entries():
    md = cv_matrices(GaussianScenario(r=0.5))
    assert md.gamma[0, 0] == pytest.approx(np.cosh(1.0) / 2)
    assert md.gamma[0, 2] == pytest.approx(-np.sinh(1.0) / 2)
    assert md.gamma[1, 3] == pytest.approx(np.sinh(1.0) / 2)


def test_nonlocal_mai_unsqueezes_exactly():
    md = cv_matrices(GaussianScenario(r=0.5, strategy=CvStrategy.NONLOCAL_MAI, r_mai=0.5))
    assert np.allclose(md.gamma, 0.5 * np.eye(4))
    assert md.commutator[0, 1] == pytest.approx(-np.cosh(0.5))
    assert md.commutator[0, 3] == pytest.approx(np.sinh(0.5))


def test_noiseless_sensitivity_is_exp_2r():
    for strategy in CvStrategy:
        gs = GaussianScenario(r=0.5, strategy=strategy, r_mai=0.5)
        assert cv_xi2_matrix(gs).xi2_inv == pytest.approx(np.e, rel=1e-9)
        assert cv_xi2_closed(gs) == pytest.approx(np.e, rel=1e-12)


def test_vacuum_is_shot_noise_limited():
    for strategy in CvStrategy:
        gs = GaussianScenario(r=0.0, strategy=strategy, r_mai=0.3, sigma=0.0)
        assert cv_xi2_matrix(gs).xi2_inv == pytest.approx(1.0, rel=1e-9)


def test_noisy_linear_closed_form():
    gs = GaussianScenario(r=0.5, sigma=0.5)
    want = 1.0 / (np.exp(-1.0) + 0.5)
    assert cv_xi2_closed(gs) == pytest.approx(want, rel=1e-12)
    assert cv_xi2_matrix(gs).xi2_inv == pytest.approx(want, rel=1e-9)


def test_pipeline_matches_closed_forms():
    for r in (0.2, 0.7):
        for sigma in (0.0, 0.4, 1.0):
            for r_mai in (0.0, r, 2 * r):
                for strategy in CvStrategy:
                    gs = GaussianScenario(r, strategy, r_mai, sigma)
                    assert cv_xi2_matrix(gs).xi2_inv == pytest.approx(
                        cv_xi2_closed(gs), rel=1e-9
                    )


def test_noise_ratio_is_quotient_of_closed_forms():
    r, r_mai, sigma = 0.5, 0.5, 0.5
    lin = cv_xi2_closed(GaussianScenario(r, CvStrategy.LINEAR, sigma=sigma))
    mai = cv_xi2_closed(GaussianScenario(r, CvStrategy.NONLOCAL_MAI, r_mai, sigma))
    assert noise_ratio(r, r_mai, sigma) == pytest.approx(lin / mai, rel=1e-12)
    assert noise_ratio(r, r_mai, sigma) <= 1.0


def test_mai_noise_robustness():
    for sigma in (0.2, 0.6, 1.0):
        lin = cv_xi2_closed(GaussianScenario(0.5, CvStrategy.LINEAR, sigma=sigma))
        nl = cv_xi2_closed(GaussianScenario(0.5, CvStrategy.NONLOCAL_MAI, 0.5, sigma))
        assert nl > lin


def test_pipeline_rejects_wrong_target_size():
    with pytest.raises(InvalidScenarioError):
        cv_xi2_matrix(GaussianScenario(0.5), EstimationTarget.uniform(3))
