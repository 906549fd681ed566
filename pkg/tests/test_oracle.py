import numpy as np
import pytest

from maisense.errors import DimensionCapError
from maisense.oracle import (
    CollectiveState,
    coherent_x_state,
    evolve_oat,
    mai_observable,
    observable_matrix,
    oracle_blocks,
)
from maisense.spin_moments import Prep, SpinScenario, Strategy, blocks_me_linear


def expect(st, ob):
    return np.real(np.vdot(st.amplitudes, ob @ st.amplitudes))


def test_coherent_single_spin():
    st = coherent_x_state(modes=1, nn=1)
    assert np.allclose(st.amplitudes, [1 / np.sqrt(2), 1 / np.sqrt(2)])


def test_coherent_two_modes_binomial():
    st = coherent_x_state(modes=2, nn=2)
    single = np.array([0.5, 1 / np.sqrt(2), 0.5])
    assert st.dim == 9
    assert np.allclose(st.amplitudes, np.kron(single, single))


def test_coherent_polarization():
    st = coherent_x_state(modes=2, nn=3)
    for m in range(2):
        sx = observable_matrix(2, 3, m, "x")
        sy = observable_matrix(2, 3, m, "y")
        sz = observable_matrix(2, 3, m, "z")
        assert expect(st, sx) == pytest.approx(1.5)
        assert expect(st, sy) == pytest.approx(0.0, abs=1e-12)
        assert expect(st, sz) == pytest.approx(0.0, abs=1e-12)
    assert np.linalg.norm(st.amplitudes) == pytest.approx(1.0)


def test_evolution_preserves_norm_and_zero_time():
    st = coherent_x_state(modes=2, nn=3)
    assert np.allclose(evolve_oat(st, 0.0).amplitudes, st.amplitudes)
    ev = evolve_oat(st, 0.7)
    assert np.linalg.norm(ev.amplitudes) == pytest.approx(1.0)


def test_collective_vs_local_twisting():
    st = coherent_x_state(modes=2, nn=2)
    allmodes = evolve_oat(st, 0.5, scope="all").amplitudes
    local = evolve_oat(evolve_oat(st, 0.5, scope=0), 0.5, scope=1).amplitudes
    # (S_z1 + S_z2)^2 has a cross term the local twists lack
    assert not np.allclose(allmodes, local)
    st1 = coherent_x_state(modes=1, nn=3)
    a = evolve_oat(st1, 0.5, scope="all").amplitudes
    b = evolve_oat(st1, 0.5, scope=0).amplitudes
    assert np.allclose(a, b, atol=1e-12)


def test_dimension_cap():
    with pytest.raises(DimensionCapError):
        coherent_x_state(modes=10, nn=9)


def test_mai_observable_is_conjugation():
    st = coherent_x_state(modes=2, nn=2)
    sy = observable_matrix(2, 2, 0, "y")
    conj = mai_observable(sy, 0.4, st, scope="all")
    # <psi| U^dag sy U |psi> == <U psi| sy |U psi>
    ev = evolve_oat(st, 0.4, scope="all")
    assert expect(st, conj) == pytest.approx(expect(ev, sy), abs=1e-12)


def test_oracle_matches_me_linear_closed_form():
    s = SpinScenario(4, 2, Prep.MODE_ENTANGLED, 0.5, Strategy.LINEAR)
    cf = blocks_me_linear(s)
    ob = oracle_blocks(s)
    assert np.allclose(ob.gamma_mm, cf.gamma_mm, atol=1e-10)
    assert np.allclose(ob.gamma_mn, cf.gamma_mn, atol=1e-10)
    assert np.allclose(ob.c_mm, cf.c_mm, atol=1e-10)
    assert np.allclose(ob.c_mn, cf.c_mn, atol=1e-10)


def test_oracle_handles_ms_nonlocal():
    # the one combination without a closed form
    s = SpinScenario(6, 2, Prep.MODE_SEPARABLE, 0.4, Strategy.NONLOCAL_MAI, 0.3)
    b = oracle_blocks(s)
    assert np.all(np.isfinite(b.gamma_mm))
    assert np.abs(b.c_mm).max() > 0


def test_collective_state_reshapes():
    st = coherent_x_state(modes=2, nn=2)
    assert st.tensor().shape == (3, 3)
    st2 = CollectiveState(st.tensor(), 2, 2)
    assert np.allclose(st2.amplitudes, st.amplitudes)
