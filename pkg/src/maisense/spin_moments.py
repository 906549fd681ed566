"""Closed-form covariance and commutator blocks for OAT-prepared spin states.

An ensemble of N spin-1/2 atoms polarized along x is split into M modes of
NN = N/M atoms each, then evolved under a one-axis-twisting interaction for a
time mu = 2*chi*t.  The preparation is either mode-separable (per-mode local
twisting) or mode-entangled (twisting of the summed spin).  Before readout,
an optional measurement-after-interaction (MAI) twisting of time mu_mai is
applied, either per mode (local) or on the summed spin (nonlocal).

All second moments of the measured family (S_y, S_z per mode) are analytic in
(NN, M, mu, mu_mai) and exchange-symmetric in the mode index, so the full
2M x 2M covariance matrix Gamma and commutator matrix C are generated by four
2x2 blocks.  Commutator entries follow the convention

    (C_mn)_ij = i <[L_i^(m), X_j^(n)]>

with L = (S_y, S_z) the linear family and X the (possibly MAI-conjugated)
measured family.  The entry functions accept numpy arrays for mu/mu_mai and
broadcast, which the sweep drivers rely on.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidScenarioError

__all__ = [
    "Prep",
    "Strategy",
    "SpinScenario",
    "BlockSet",
    "MomentData",
    "blocks_ms_linear",
    "blocks_ms_local_mai",
    "blocks_me_linear",
    "blocks_me_nonlocal_mai",
    "blocks_me_local_mai",
    "spin_blocks",
    "assemble_full",
    "spin_moment_data",
]


class Prep(enum.Enum):
    MODE_SEPARABLE = "ms"
    MODE_ENTANGLED = "me"


class Strategy(enum.Enum):
    LINEAR = "linear"
    LOCAL_MAI = "local-mai"
    NONLOCAL_MAI = "nonlocal-mai"


@dataclass(frozen=True)
class SpinScenario:
    """Atom number N split into M modes, OAT time mu, readout strategy."""

    N: int
    M: int
    prep: Prep
    mu: float
    strategy: Strategy = Strategy.LINEAR
    mu_mai: float = 0.0

    def __post_init__(self):
        if self.N < 2 or self.M < 1:
            raise InvalidScenarioError(f"need N >= 2 and M >= 1, got N={self.N}, M={self.M}")
        if self.N % self.M != 0:
            raise InvalidScenarioError(f"N={self.N} not divisible by M={self.M}")
        if self.mu < 0 or self.mu_mai < 0:
            raise InvalidScenarioError("evolution times must be nonnegative")

    @property
    def local_atoms(self) -> int:
        return self.N // self.M


@dataclass(frozen=True)
class BlockSet:
    """The four 2x2 generators of the exchange-symmetric Gamma and C."""

    gamma_mm: np.ndarray
    gamma_mn: np.ndarray
    c_mm: np.ndarray
    c_mn: np.ndarray
    local_atoms: int = 0

    def __post_init__(self):
        for name in ("gamma_mm", "gamma_mn", "c_mm", "c_mn"):
            m = np.asarray(getattr(self, name), dtype=float)
            if m.shape != (2, 2):
                raise ValueError(f"{name} must be 2x2, got {m.shape}")
            object.__setattr__(self, name, m)
        if not np.array_equal(self.gamma_mm, self.gamma_mm.T):
            raise ValueError("gamma_mm must be symmetric")
        if not np.array_equal(self.gamma_mn, self.gamma_mn.T):
            raise ValueError("gamma_mn must be symmetric")


@dataclass(frozen=True)
class MomentData:
    """Assembled 2M x 2M covariance/commutator matrices plus shot-noise matrix."""

    gamma: np.ndarray
    commutator: np.ndarray
    f_sn: np.ndarray

    @property
    def modes(self) -> int:
        return self.f_sn.shape[0]


def _cospow(x, k: int):
    """cos-power with an integer exponent, stable for k up to ~1e4.

    Uses |x|**k (libm pow) with an explicit sign so negative bases are exact
    for integer exponents, unlike exp(k*log(x)).
    """
    if k == 0:
        return np.ones_like(np.asarray(x, dtype=float))
    x = np.asarray(x, dtype=float)
    mag = np.abs(x) ** k
    if k % 2 == 0:
        return mag
    return np.sign(x) * mag


def _term(coeff: float, base, k: int):
    # coeff == 0 guards the NN = 1 edge where k would be negative.
    if coeff == 0.0:
        return np.zeros_like(np.asarray(base, dtype=float))
    if k < 0:
        raise InvalidScenarioError(
            f"closed form needs cos(...)**{k} with nonzero weight; use the oracle instead"
        )
    return coeff * _cospow(base, k)


def _entries_ms_linear(nn: int, mu):
    gyy = nn / 8.0 * (nn + 1) - _term(nn * (nn - 1) / 8.0, np.cos(mu), nn - 2)
    gyz = _term(nn * (nn - 1) / 4.0, np.cos(mu / 2), nn - 2) * np.sin(mu / 2)
    k = _term(nn / 2.0, np.cos(mu / 2), nn - 1)
    return gyy, gyz, -k, k


def _blockset(nn, gyy, gyz, gzz, hyy, hyz, hzz, cyy, cyz, czy, dyy):
    gamma_mm = np.array([[gyy, gyz], [gyz, gzz]])
    gamma_mn = np.array([[hyy, hyz], [hyz, hzz]])
    c_mm = np.array([[cyy, cyz], [czy, 0.0]])
    c_mn = np.array([[dyy, 0.0], [0.0, 0.0]])
    return BlockSet(gamma_mm, gamma_mn, c_mm, c_mn, local_atoms=nn)


def blocks_ms_linear(s: SpinScenario) -> BlockSet:
    """Linear readout of a mode-separable OAT state: block-diagonal Gamma and C."""
    if s.prep is not Prep.MODE_SEPARABLE or s.strategy is not Strategy.LINEAR:
        raise InvalidScenarioError("blocks_ms_linear needs ModeSeparable prep and Linear strategy")
    nn = s.local_atoms
    gyy, gyz, cyz, czy = _entries_ms_linear(nn, s.mu)
    return _blockset(nn, gyy, gyz, nn / 4.0, 0.0, 0.0, 0.0, 0.0, cyz, czy, 0.0)


def _entries_ms_local_mai(nn: int, mu, mua):
    d = mu - mua
    gyy = nn / 8.0 * (nn + 1) - _term(nn * (nn - 1) / 8.0, np.cos(d), nn - 2)
    gyz = _term(nn * (nn - 1) / 4.0, np.cos(d / 2), nn - 2) * np.sin(d / 2)
    cyy = (
        _term(nn * (nn - 1) / 4.0, np.cos(mu - mua / 2), nn - 2)
        + _term(nn * (nn - 1) / 4.0, np.cos(mua / 2), nn - 2)
    ) * np.sin(mua / 2)
    cyz = -_term(nn / 2.0, np.cos(mu / 2), nn - 1)
    czy = _term(nn / 2.0, np.cos(d / 2), nn - 1)
    return gyy, gyz, cyy, cyz, czy


def blocks_ms_local_mai(s: SpinScenario) -> BlockSet:
    """Local MAI readout of a mode-separable OAT state."""
    if s.prep is not Prep.MODE_SEPARABLE or s.strategy is not Strategy.LOCAL_MAI:
        raise InvalidScenarioError("blocks_ms_local_mai needs ModeSeparable prep and LocalMAI strategy")
    nn = s.local_atoms
    gyy, gyz, cyy, cyz, czy = _entries_ms_local_mai(nn, s.mu, s.mu_mai)
    return _blockset(nn, gyy, gyz, nn / 4.0, 0.0, 0.0, 0.0, cyy, cyz, czy, 0.0)


def _entries_me_linear(nn: int, M: int, mu):
    nt = M * nn
    gyy = nn / 8.0 * (nn + 1) - _term(nn * (nn - 1) / 8.0, np.cos(mu), nt - 2)
    gyz = _term(nn * (nn - 1) / 4.0, np.cos(mu / 2), nt - 2) * np.sin(mu / 2)
    hyy = nn * nn / 8.0 * (1.0 - _cospow(np.cos(mu), nt - 2))
    hyz = nn * nn / 4.0 * _cospow(np.cos(mu / 2), nt - 2) * np.sin(mu / 2)
    k = nn / 2.0 * _cospow(np.cos(mu / 2), nt - 1)
    return gyy, gyz, hyy, hyz, -k, k


def blocks_me_linear(s: SpinScenario) -> BlockSet:
    """Linear readout of a mode-entangled OAT state: Gamma couples modes, C does not."""
    if s.prep is not Prep.MODE_ENTANGLED or s.strategy is not Strategy.LINEAR:
        raise InvalidScenarioError("blocks_me_linear needs ModeEntangled prep and Linear strategy")
    nn, M = s.local_atoms, s.M
    if M * nn < 2:
        raise InvalidScenarioError("need at least two atoms in total")
    gyy, gyz, hyy, hyz, cyz, czy = _entries_me_linear(nn, M, s.mu)
    if M == 1:
        hyy = hyz = 0.0
    return _blockset(nn, gyy, gyz, nn / 4.0, hyy, hyz, 0.0, 0.0, cyz, czy, 0.0)


def _entries_me_nonlocal_mai(nn: int, M: int, mu, mua):
    nt = M * nn
    d = mu - mua
    gyy = nn / 8.0 * (nn + 1) - _term(nn * (nn - 1) / 8.0, np.cos(d), nt - 2)
    gyz = _term(nn * (nn - 1) / 4.0, np.cos(d / 2), nt - 2) * np.sin(d / 2)
    hyy = nn * nn / 8.0 * (1.0 - _cospow(np.cos(d), nt - 2))
    hyz = nn * nn / 4.0 * _cospow(np.cos(d / 2), nt - 2) * np.sin(d / 2)
    echo = _cospow(np.cos(mu - mua / 2), nt - 2) + _cospow(np.cos(mua / 2), nt - 2)
    cyy = nn * (nn - 1) / 4.0 * echo * np.sin(mua / 2)
    cyz = -nn / 2.0 * _cospow(np.cos(mu / 2), nt - 1)
    czy = nn / 2.0 * _cospow(np.cos(d / 2), nt - 1)
    dyy = nn * nn / 4.0 * echo * np.sin(mua / 2)
    return gyy, gyz, hyy, hyz, cyy, cyz, czy, dyy


def blocks_me_nonlocal_mai(s: SpinScenario) -> BlockSet:
    """Nonlocal MAI readout of a mode-entangled OAT state: all four blocks active."""
    if s.prep is not Prep.MODE_ENTANGLED or s.strategy is not Strategy.NONLOCAL_MAI:
        raise InvalidScenarioError(
            "blocks_me_nonlocal_mai needs ModeEntangled prep and NonlocalMAI strategy"
        )
    nn, M = s.local_atoms, s.M
    gyy, gyz, hyy, hyz, cyy, cyz, czy, dyy = _entries_me_nonlocal_mai(nn, M, s.mu, s.mu_mai)
    if M == 1:
        hyy = hyz = dyy = 0.0
    return _blockset(nn, gyy, gyz, nn / 4.0, hyy, hyz, 0.0, cyy, cyz, czy, dyy)


def _entries_me_local_mai(nn: int, M: int, mu, mua):
    nt = M * nn
    d = mu - mua
    gyy = nn / 8.0 * (1 + nn) - _term(
        nn * (nn - 1) / 8.0, np.cos(d), nn - 2
    ) * _cospow(np.cos(mu), (M - 1) * nn)
    gyz = (
        _term(nn * (nn - 1) / 4.0, np.cos(d / 2), nn - 2)
        * _cospow(np.cos(mu / 2), (M - 1) * nn)
        * np.sin(d / 2)
    )
    hyy = nn * nn / 8.0 * (
        _cospow(np.cos(mua / 2), 2 * nn - 2)
        - _cospow(np.cos(mu), (M - 2) * nn) * _cospow(np.cos(mu - mua / 2), 2 * nn - 2)
    )
    hyz = (
        nn * nn / 4.0
        * _cospow(np.cos(mu / 2), (M - 1) * nn - 1)
        * _cospow(np.cos(d / 2), nn - 1)
        * np.sin(mu / 2)
    )
    cyy = (
        nn * (nn - 1) / 4.0
        * np.sin(mua / 2)
        * (
            _cospow(np.cos(mu), (M - 1) * nn) * _term(1.0, np.cos(mu - mua / 2), nn - 2)
            + _term(1.0, np.cos(mua / 2), nn - 2)
        )
        if nn > 1
        else np.zeros_like(np.asarray(mu, dtype=float) + np.asarray(mua, dtype=float))
    )
    cyz = -nn / 2.0 * _cospow(np.cos(mu / 2), nt - 1)
    czy = nn / 2.0 * _cospow(np.cos(mu / 2), (M - 1) * nn) * _cospow(np.cos(d / 2), nn - 1)
    return gyy, gyz, hyy, hyz, cyy, cyz, czy


def blocks_me_local_mai(s: SpinScenario) -> BlockSet:
    """Local MAI readout of a mode-entangled OAT state: C stays block diagonal."""
    if s.prep is not Prep.MODE_ENTANGLED or s.strategy is not Strategy.LOCAL_MAI:
        raise InvalidScenarioError("blocks_me_local_mai needs ModeEntangled prep and LocalMAI strategy")
    nn, M = s.local_atoms, s.M
    gyy, gyz, hyy, hyz, cyy, cyz, czy = _entries_me_local_mai(nn, M, s.mu, s.mu_mai)
    if M == 1:
        hyy = hyz = 0.0
    return _blockset(nn, gyy, gyz, nn / 4.0, hyy, hyz, 0.0, cyy, cyz, czy, 0.0)


_DISPATCH = {
    (Prep.MODE_SEPARABLE, Strategy.LINEAR): blocks_ms_linear,
    (Prep.MODE_SEPARABLE, Strategy.LOCAL_MAI): blocks_ms_local_mai,
    (Prep.MODE_ENTANGLED, Strategy.LINEAR): blocks_me_linear,
    (Prep.MODE_ENTANGLED, Strategy.NONLOCAL_MAI): blocks_me_nonlocal_mai,
    (Prep.MODE_ENTANGLED, Strategy.LOCAL_MAI): blocks_me_local_mai,
}


def spin_blocks(s: SpinScenario) -> BlockSet:
    """Dispatch to the closed form for the scenario's prep/strategy pair.

    NonlocalMAI on a ModeSeparable state has no closed form; only the exact
    oracle covers it.
    """
    fn = _DISPATCH.get((s.prep, s.strategy))
    if fn is None:
        raise InvalidScenarioError(
            f"no closed form for prep={s.prep.value}, strategy={s.strategy.value}"
        )
    return fn(s)


def assemble_full(b: BlockSet, M: int) -> MomentData:
    """Tile the four 2x2 blocks into the full 2M x 2M Gamma and C."""
    if M < 1:
        raise InvalidScenarioError("M must be >= 1")
    gamma = np.kron(np.eye(M), b.gamma_mm) + np.kron(np.ones((M, M)) - np.eye(M), b.gamma_mn)
    comm = np.kron(np.eye(M), b.c_mm) + np.kron(np.ones((M, M)) - np.eye(M), b.c_mn)
    f_sn = float(b.local_atoms) * np.eye(M)
    return MomentData(gamma=gamma, commutator=comm, f_sn=f_sn)


def spin_moment_data(s: SpinScenario) -> MomentData:
    """Closed-form MomentData for a spin scenario."""
    return assemble_full(spin_blocks(s), s.M)
