"""Exact brute-force simulator for collective-spin scenarios.

Works in the per-mode symmetric sector |J = NN/2, m> tensored over M modes,
which is exact here: the initial state is an x-polarized product of per-mode
symmetric states and every Hamiltonian involved is built from collective
S_z operators.  The state dimension is (NN+1)**M instead of 2**N.

All twisting unitaries are diagonal in the product S_z basis, so evolution is
an elementwise phase and MAI conjugation of an observable is a phase sandwich.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import DimensionCapError, InvalidScenarioError
from .spin_moments import BlockSet, MomentData, Prep, SpinScenario, Strategy, assemble_full

__all__ = [
    "DIMENSION_CAP",
    "CollectiveState",
    "coherent_x_state",
    "evolve_oat",
    "observable_matrix",
    "mai_observable",
    "oracle_blocks",
    "oracle_moment_data",
    "oracle_xi2",
]

DIMENSION_CAP = 10**6


def _check_dim(modes: int, nn: int) -> int:
    dim = (nn + 1) ** modes
    if dim > DIMENSION_CAP:
        raise DimensionCapError(f"state dimension {(nn + 1)}**{modes} exceeds {DIMENSION_CAP}")
    return dim


@dataclass(frozen=True)
class CollectiveState:
    """State vector over the product of per-mode |J = NN/2, m_z> bases."""

    amplitudes: np.ndarray
    modes: int
    local_atoms: int

    def __post_init__(self):
        dim = (self.local_atoms + 1) ** self.modes
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(dim)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((self.local_atoms + 1,) * self.modes)


def _mz_values(nn: int) -> np.ndarray:
    # basis index k -> m_z = NN/2 - k
    return nn / 2.0 - np.arange(nn + 1)


def _spin_matrices(nn: int):
    """(S_x, S_y, S_z) for a single spin J = NN/2 in the |J, m> basis."""
    j = nn / 2.0
    mz = _mz_values(nn)
    # lowering: <m-1| S_- |m> = sqrt(j(j+1) - m(m-1))
    low = np.sqrt(j * (j + 1) - mz[:-1] * (mz[:-1] - 1))
    sm = np.diag(low, -1).astype(complex)
    sp = sm.conj().T
    sx = (sp + sm) / 2
    sy = (sp - sm) / (2j)
    sz = np.diag(mz).astype(complex)
    return sx, sy, sz


def coherent_x_state(modes: int, nn: int) -> CollectiveState:
    """Product of per-mode coherent states polarized along +x."""
    if nn < 1 or modes < 1:
        raise InvalidScenarioError("need modes >= 1 and local atom number >= 1")
    _check_dim(modes, nn)
    single = np.array([np.sqrt(comb(nn, k)) for k in range(nn + 1)]) / 2 ** (nn / 2.0)
    amps = single.astype(complex)
    for _ in range(modes - 1):
        amps = np.kron(amps, single)
    return CollectiveState(amps, modes, nn)


def _oat_phases(st: CollectiveState, mu: float, scope) -> np.ndarray:
    """Diagonal phases of exp(-i*(mu/2)*(sum_scope S_z)**2) on the product basis."""
    mz = _mz_values(st.local_atoms)
    shape = (st.local_atoms + 1,) * st.modes
    if scope == "all":
        m_tot = np.zeros(shape)
        for ax in range(st.modes):
            m_tot = m_tot + mz.reshape([-1 if a == ax else 1 for a in range(st.modes)])
        phase = np.exp(-1j * (mu / 2.0) * m_tot**2)
    else:
        ax = int(scope)
        if not 0 <= ax < st.modes:
            raise InvalidScenarioError(f"mode index {ax} out of range")
        phase = np.exp(-1j * (mu / 2.0) * mz**2).reshape(
            [-1 if a == ax else 1 for a in range(st.modes)]
        )
        phase = np.broadcast_to(phase, shape)
    return phase.reshape(st.dim)


def evolve_oat(st: CollectiveState, mu: float, scope="all") -> CollectiveState:
    """Apply the twisting unitary exp(-i*(mu/2)*(sum_scope S_z)**2).

    scope is "all" for the summed spin or a mode index for a single mode.
    """
    return CollectiveState(st.amplitudes * _oat_phases(st, mu, scope), st.modes, st.local_atoms)


def _evolve_local_all(st: CollectiveState, mu: float) -> CollectiveState:
    for m in range(st.modes):
        st = evolve_oat(st, mu, scope=m)
    return st


def _apply_local(vec: np.ndarray, op: np.ndarray, mode: int, modes: int, nn: int) -> np.ndarray:
    t = vec.reshape((nn + 1,) * modes)
    t = np.tensordot(op, t, axes=([1], [mode]))
    return np.moveaxis(t, 0, mode).reshape(vec.size)


def observable_matrix(modes: int, nn: int, mode: int, axis: str) -> np.ndarray:
    """Dense matrix of S_axis^(mode) on the full product basis."""
    if not 0 <= mode < modes:
        raise InvalidScenarioError(f"mode index {mode} out of range")
    _check_dim(modes, nn)
    sx, sy, sz = _spin_matrices(nn)
    small = {"x": sx, "y": sy, "z": sz}[axis]
    mat = np.eye(1, dtype=complex)
    for m in range(modes):
        mat = np.kron(mat, small if m == mode else np.eye(nn + 1, dtype=complex))
    return mat


def mai_observable(ob: np.ndarray, mu_mai: float, st_like: CollectiveState, scope="all") -> np.ndarray:
    """Conjugate an observable by the twisting unitary: U^dag ob U as a phase sandwich."""
    phases = _oat_phases(st_like, mu_mai, scope)
    return ob * np.outer(phases.conj(), phases)


def _prepared_state(s: SpinScenario) -> CollectiveState:
    st = coherent_x_state(s.M, s.local_atoms)
    if s.prep is Prep.MODE_ENTANGLED:
        return evolve_oat(st, s.mu, scope="all")
    return _evolve_local_all(st, s.mu)


def _mai_evolved(s: SpinScenario, st: CollectiveState) -> CollectiveState:
    """State after the MAI unitary; expectation values of the MAI-conjugated
    observables equal plain observables on this state.

    The MAI twist runs opposite to the preparation twist (a time-reversal
    echo), so matching preparation and MAI times cancel exactly.
    """
    if s.strategy is Strategy.LINEAR:
        return st
    if s.strategy is Strategy.NONLOCAL_MAI:
        return evolve_oat(st, -s.mu_mai, scope="all")
    return _evolve_local_all(st, -s.mu_mai)


def oracle_blocks(s: SpinScenario) -> BlockSet:
    """Exact covariance/commutator blocks for any prep/strategy combination.

    Covariances are symmetrized, <{A,B}>/2 - <A><B>; commutator entries are
    i<[L_i^(m), X_j^(n)]> with X the MAI-conjugated measured family, matching
    the closed-form convention in spin_moments.
    """
    nn, M = s.local_atoms, s.M
    _check_dim(M, nn)
    psi = _prepared_state(s)
    phi = _mai_evolved(s, psi)

    _, sy, sz = _spin_matrices(nn)
    ops = (sy, sz)

    # measured family applied to the MAI-evolved state, per mode 0 and 1
    n_cov_modes = min(M, 2)
    bvecs = [
        [_apply_local(phi.amplitudes, op, m, M, nn) for op in ops]
        for m in range(n_cov_modes)
    ]
    means = [[np.real(np.vdot(phi.amplitudes, bv)) for bv in row] for row in bvecs]

    def cov(m, i, n, j):
        raw = np.real(np.vdot(bvecs[m][i], bvecs[n][j]))
        return raw - means[m][i] * means[n][j]

    gamma_mm = np.array([[cov(0, i, 0, j) for j in (0, 1)] for i in (0, 1)])
    gamma_mm = (gamma_mm + gamma_mm.T) / 2
    if M >= 2:
        gamma_mn = np.array([[cov(0, i, 1, j) for j in (0, 1)] for i in (0, 1)])
        gamma_mn = (gamma_mn + gamma_mn.T) / 2
    else:
        gamma_mn = np.zeros((2, 2))

    # i<[L_i^(0), U^dag B_j^(n) U]> = -2 Im <U L_i^(0) psi | B_j^(n) | U psi>
    lvecs = []
    for op in ops:
        lv = _apply_local(psi.amplitudes, op, 0, M, nn)
        lst = CollectiveState(lv, M, nn)
        lvecs.append(_mai_evolved(s, lst).amplitudes)

    def comm(i, n, j):
        return -2.0 * np.imag(np.vdot(lvecs[i], bvecs[n][j]))

    c_mm = np.array([[comm(i, 0, j) for j in (0, 1)] for i in (0, 1)])
    if M >= 2:
        c_mn = np.array([[comm(i, 1, j) for j in (0, 1)] for i in (0, 1)])
    else:
        c_mn = np.zeros((2, 2))
    return BlockSet(gamma_mm, gamma_mn, c_mm, c_mn, local_atoms=nn)


def oracle_moment_data(s: SpinScenario) -> MomentData:
    """Exact MomentData assembled from oracle blocks (exchange symmetry is exact)."""
    return assemble_full(oracle_blocks(s), s.M)


def oracle_xi2(s: SpinScenario, target) -> float:
    """End-to-end xi^-2 computed from oracle matrices through the optimizer."""
    from .optimizer import optimize_phi

    return optimize_phi(oracle_moment_data(s), target).xi2_inv
