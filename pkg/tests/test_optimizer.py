import numpy as np
import pytest

from maisense.errors import EmptyRangeError, InvalidScenarioError
from maisense.optimizer import (
    EstimationTarget,
    GeneratorSpec,
    default_mai_range,
    golden_max,
    moment_for_measurement,
    moment_matrix,
    optimal_measurement,
    optimize_phi,
    optimize_scenario,
    scaling_sweep,
    squeezing_and_xi2,
    xi2_structured,
    xi2_structured_at_phi,
)
from maisense.spin_moments import Prep, SpinScenario, Strategy, spin_moment_data


def test_generator_rotation_orthonormal():
    for phi in (0.0, 0.3, 1.2):
        r = GeneratorSpec(phi).rotation(3)
        assert np.allclose(r @ r.T, np.eye(3), atol=1e-14)


def test_target_validation():
    with pytest.raises(InvalidScenarioError):
        EstimationTarget(np.array([1.0, 0.0]))
    with pytest.raises(InvalidScenarioError):
        EstimationTarget(np.array([0.8, 0.6]))
    t = EstimationTarget.uniform(4)
    assert np.allclose(t.n, 0.5)
    t2 = EstimationTarget(np.array([1.0, -1.0]) / np.sqrt(2))
    assert np.allclose(t2.signs, [1.0, -1.0])


def test_golden_max_parabola():
    x, v = golden_max(lambda x: -((x - 0.37) ** 2), 0.0, 1.0, tol=1e-8)
    assert x == pytest.approx(0.37, abs=1e-6)
    assert v == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(EmptyRangeError):
        golden_max(lambda x: x, 1.0, 0.0)


def test_optimal_measurement_saturates_bound():
    s = SpinScenario(12, 3, Prep.MODE_ENTANGLED, 0.4, Strategy.NONLOCAL_MAI, 0.3)
    md = spin_moment_data(s)
    g = GeneratorSpec(0.9)
    s_opt = optimal_measurement(md, g)
    assert np.allclose(s_opt @ s_opt.T, np.eye(3), atol=1e-9)
    bound = moment_matrix(md, g)
    direct = moment_for_measurement(md, g, s_opt)
    assert np.allclose(direct, bound, atol=1e-9)


def test_outcome_invariants():
    s = SpinScenario(20, 2, Prep.MODE_ENTANGLED, 0.3, Strategy.LOCAL_MAI, 0.2)
    out = optimize_scenario(s, EstimationTarget.uniform(2))
    assert out.gain_db == pytest.approx(10 * np.log10(out.xi2_inv), abs=1e-12)
    assert np.allclose(out.s_matrix @ out.s_matrix.T, np.eye(2), atol=1e-9)
    assert np.allclose(out.sigma, out.sigma.T)
    assert np.linalg.eigvalsh(out.sigma).min() > 0


def test_structured_equals_dense():
    rng = np.random.default_rng(3)
    from maisense.validation import CLOSED_FORM_COMBOS

    for _ in range(20):
        N = int(rng.choice([8, 12, 24]))
        M = int(rng.choice([m for m in (2, 3, 4) if N % m == 0]))
        prep, strategy = CLOSED_FORM_COMBOS[int(rng.integers(len(CLOSED_FORM_COMBOS)))]
        mu = float(rng.uniform(0.02, 1.0))
        mai = float(rng.uniform(0.02, 1.0))
        s = SpinScenario(N, M, prep, mu, strategy, mai)
        dense = optimize_phi(spin_moment_data(s), EstimationTarget.uniform(M)).xi2_inv
        fast, _ = xi2_structured(prep, strategy, s.local_atoms, M, mu, mai)
        assert abs(float(fast) - dense) / dense < 1e-9


def test_structured_at_phi_matches_max():
    s = SpinScenario(24, 2, Prep.MODE_ENTANGLED, 0.2, Strategy.NONLOCAL_MAI, 0.15)
    val, phi = xi2_structured(s.prep, s.strategy, s.local_atoms, s.M, s.mu, s.mu_mai)
    at = xi2_structured_at_phi(s.prep, s.strategy, s.local_atoms, s.M, s.mu, s.mu_mai, phi)
    assert float(at) == pytest.approx(float(val), rel=1e-12)


def test_sign_pattern_invariance():
    s = SpinScenario(16, 4, Prep.MODE_ENTANGLED, 0.3, Strategy.LOCAL_MAI, 0.25)
    md = spin_moment_data(s)
    g = GeneratorSpec(1.1)
    ref = squeezing_and_xi2(md, g, EstimationTarget.uniform(4))[1]
    t = EstimationTarget(np.array([1, -1, -1, 1]) / 2.0)
    assert squeezing_and_xi2(md, g, t)[1] == pytest.approx(ref, rel=1e-12)


def test_mai_beats_linear():
    for strategy in (Strategy.NONLOCAL_MAI, Strategy.LOCAL_MAI):
        s = SpinScenario(40, 2, Prep.MODE_ENTANGLED, 0.4, strategy)
        lin = SpinScenario(40, 2, Prep.MODE_ENTANGLED, 0.4, Strategy.LINEAR)
        t = EstimationTarget.uniform(2)
        assert optimize_scenario(s, t).xi2_inv >= optimize_scenario(lin, t).xi2_inv - 1e-9


def test_local_mai_degenerates_to_linear_at_single_atom_modes():
    # one atom per mode: S_z^2 is constant, so local MAI does nothing
    t = EstimationTarget.uniform(8)
    mai = optimize_scenario(
        SpinScenario(8, 8, Prep.MODE_ENTANGLED, 0.3, Strategy.LOCAL_MAI), t
    ).xi2_inv
    lin = optimize_scenario(
        SpinScenario(8, 8, Prep.MODE_ENTANGLED, 0.3, Strategy.LINEAR), t
    ).xi2_inv
    assert mai == pytest.approx(lin, rel=1e-9)


def test_default_mai_range():
    lo, hi = default_mai_range(SpinScenario(1000, 2, Prep.MODE_ENTANGLED, 0.05, Strategy.NONLOCAL_MAI))
    assert lo == 0.0
    assert 0.0 < hi <= np.pi


def test_empty_mai_range_rejected():
    s = SpinScenario(16, 2, Prep.MODE_ENTANGLED, 0.3, Strategy.LOCAL_MAI)
    with pytest.raises(EmptyRangeError):
        optimize_scenario(s, EstimationTarget.uniform(2), mai_range=(0.5, 0.1))


def test_scaling_sweep_needs_three_points():
    with pytest.raises(EmptyRangeError):
        scaling_sweep([64, 128], 2, Prep.MODE_ENTANGLED, Strategy.LINEAR)


def test_scaling_sweep_linear_small():
    res = scaling_sweep([32, 64, 128, 256], 2, Prep.MODE_ENTANGLED, Strategy.LINEAR)
    assert len(res.points) == 4
    xi2 = [p.xi2_inv for p in res.points]
    assert all(b > a for a, b in zip(xi2, xi2[1:]))
    assert 0.5 < res.slope < 0.8
