import numpy as np
import pytest

from maisense.errors import InvalidScenarioError
from maisense.spin_moments import (
    BlockSet,
    Prep,
    SpinScenario,
    Strategy,
    assemble_full,
    blocks_me_linear,
    blocks_ms_linear,
    spin_blocks,
    spin_moment_data,
)


def test_scenario_validation():
    with pytest.raises(InvalidScenarioError):
        SpinScenario(N=1, M=1, prep=Prep.MODE_SEPARABLE, mu=0.1)
    with pytest.raises(InvalidScenarioError):
        SpinScenario(N=10, M=3, prep=Prep.MODE_SEPARABLE, mu=0.1)
    with pytest.raises(InvalidScenarioError):
        SpinScenario(N=10, M=2, prep=Prep.MODE_SEPARABLE, mu=-0.1)
    s = SpinScenario(N=12, M=3, prep=Prep.MODE_ENTANGLED, mu=0.2)
    assert s.local_atoms == 4


def test_mu_zero_coherent_blocks():
    # untwisted coherent state: isotropic transverse variance NN/4, commutator
    # entries +-NN/2 from <S_x> = NN/2
    for prep in Prep:
        s = SpinScenario(N=8, M=2, prep=prep, mu=0.0, strategy=Strategy.LINEAR)
        b = spin_blocks(s)
        nn = s.local_atoms
        assert np.allclose(b.gamma_mm, np.eye(2) * nn / 4.0)
        assert np.allclose(b.gamma_mn, 0.0)
        assert np.allclose(b.c_mm, [[0.0, -nn / 2.0], [nn / 2.0, 0.0]])
        assert np.allclose(b.c_mn, 0.0)


def test_mai_at_zero_time_reduces_to_linear():
    for prep, strategy in [
        (Prep.MODE_SEPARABLE, Strategy.LOCAL_MAI),
        (Prep.MODE_ENTANGLED, Strategy.LOCAL_MAI),
        (Prep.MODE_ENTANGLED, Strategy.NONLOCAL_MAI),
    ]:
        s_mai = SpinScenario(8, 2, prep, 0.3, strategy, mu_mai=0.0)
        s_lin = SpinScenario(8, 2, prep, 0.3, Strategy.LINEAR)
        bm, bl = spin_blocks(s_mai), spin_blocks(s_lin)
        assert np.allclose(bm.gamma_mm, bl.gamma_mm, atol=1e-14)
        assert np.allclose(bm.gamma_mn, bl.gamma_mn, atol=1e-14)
        assert np.allclose(bm.c_mm, bl.c_mm, atol=1e-14)
        assert np.allclose(bm.c_mn, bl.c_mn, atol=1e-14)


def test_ms_blocks_independent_of_M():
    # per-mode preparation and readout cannot depend on how many modes exist
    b2 = blocks_ms_linear(SpinScenario(8, 2, Prep.MODE_SEPARABLE, 0.4))
    b4 = blocks_ms_linear(SpinScenario(16, 4, Prep.MODE_SEPARABLE, 0.4))
    assert np.allclose(b2.gamma_mm, b4.gamma_mm)
    assert np.allclose(b2.c_mm, b4.c_mm)


def test_me_linear_couples_modes():
    b = blocks_me_linear(SpinScenario(8, 2, Prep.MODE_ENTANGLED, 0.4))
    assert np.abs(b.gamma_mn).max() > 1e-3
    assert np.allclose(b.c_mn, 0.0)


def test_dispatch_rejects_ms_nonlocal():
    s = SpinScenario(8, 2, Prep.MODE_SEPARABLE, 0.3, Strategy.NONLOCAL_MAI, 0.2)
    with pytest.raises(InvalidScenarioError):
        spin_blocks(s)


def test_single_atom_modes_supported():
    # NN = 1 kills the (NN-1)-weighted terms; must not evaluate cos(...)**(-1)
    s = SpinScenario(4, 4, Prep.MODE_ENTANGLED, 0.3, Strategy.LOCAL_MAI, 0.2)
    b = spin_blocks(s)
    assert np.all(np.isfinite(b.gamma_mm))
    assert np.all(np.isfinite(b.c_mm))


def test_assemble_full_shapes_and_tiling():
    b = spin_blocks(SpinScenario(12, 3, Prep.MODE_ENTANGLED, 0.3, Strategy.NONLOCAL_MAI, 0.2))
    md = assemble_full(b, 3)
    assert md.gamma.shape == (6, 6)
    assert md.commutator.shape == (6, 6)
    assert md.modes == 3
    assert np.allclose(md.gamma[:2, :2], b.gamma_mm)
    assert np.allclose(md.gamma[:2, 2:4], b.gamma_mn)
    assert np.allclose(md.commutator[2:4, 4:6], b.c_mn)
    assert np.allclose(md.f_sn, 4.0 * np.eye(3))
    assert np.allclose(md.gamma, md.gamma.T)


def test_blockset_rejects_asymmetric_gamma():
    with pytest.raises(ValueError):
        BlockSet(
            gamma_mm=[[1.0, 0.2], [0.1, 1.0]],
            gamma_mn=np.zeros((2, 2)),
            c_mm=np.zeros((2, 2)),
            c_mn=np.zeros((2, 2)),
        )


def test_moment_data_from_scenario():
    md = spin_moment_data(SpinScenario(8, 2, Prep.MODE_ENTANGLED, 0.3))
    assert md.gamma.shape == (4, 4)
    w = np.linalg.eigvalsh(md.gamma)
    assert w.min() > 0
