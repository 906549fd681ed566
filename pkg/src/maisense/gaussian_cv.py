"""Two-mode squeezed vacuum sensitivities under linear and MAI readout.

Quadratures x = (a + a^dag)/sqrt(2), p = -i(a - a^dag)/sqrt(2) with vacuum
variance 1/2; measurement family ordered (x_A, p_A, x_B, p_B).  The probe is
a TMSV state with squeezing r (phase fixed to 0).  MAI readout conjugates the
quadratures by a second two-mode squeezer (nonlocal, r_nl) or by per-mode
one-mode squeezers (local, r_loc).  Gaussian detection noise of standard
deviation sigma adds sigma^2 to every measured variance:

    Gamma -> Gamma + sigma^2 * I,   C unchanged.

The shot-noise matrix is 2*I, the vacuum-state optimized moment matrix, so
the vacuum probe sits exactly at xi^-2 = 1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidScenarioError
from .optimizer import EstimationTarget, SqueezingOutcome, optimize_phi
from .spin_moments import MomentData

__all__ = [
    "CvStrategy",
    "GaussianScenario",
    "cv_matrices",
    "cv_xi2_matrix",
    "cv_xi2_closed",
    "noise_ratio",
]


class CvStrategy(enum.Enum):
    LINEAR = "linear"
    NONLOCAL_MAI = "nonlocal-mai"
    LOCAL_MAI = "local-mai"


@dataclass(frozen=True)
class GaussianScenario:
    """TMSV squeezing r, MAI squeezing r_mai, detection noise sigma."""

    r: float
    strategy: CvStrategy = CvStrategy.LINEAR
    r_mai: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        for name in ("r", "r_mai", "sigma"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise InvalidScenarioError(f"{name} must be finite and >= 0, got {v}")


def _symplectic_gamma(r: float) -> np.ndarray:
    ch, sh = np.cosh(2 * r), np.sinh(2 * r)
    return 0.5 * np.array(
        [
            [ch, 0.0, -sh, 0.0],
            [0.0, ch, 0.0, sh],
            [-sh, 0.0, ch, 0.0],
            [0.0, sh, 0.0, ch],
        ]
    )


def cv_matrices(gs: GaussianScenario) -> MomentData:
    """Covariance (with detection noise) and commutator matrices, plus F_SN = 2I.

    The commutator matrix follows the spin-module convention
    (C)_ab = i<[L_a, X_b]> over the family (x_A, p_A, x_B, p_B).
    """
    c_linear = np.array(
        [
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
        ]
    )
    if gs.strategy is CvStrategy.LINEAR:
        gamma = _symplectic_gamma(gs.r)
        comm = c_linear
    elif gs.strategy is CvStrategy.NONLOCAL_MAI:
        gamma = _symplectic_gamma(gs.r - gs.r_mai)
        ch, sh = np.cosh(gs.r_mai), np.sinh(gs.r_mai)
        comm = np.array(
            [
                [0.0, -ch, 0.0, sh],
                [ch, 0.0, sh, 0.0],
                [0.0, sh, 0.0, -ch],
                [sh, 0.0, ch, 0.0],
            ]
        )
    else:
        e_p, e_m = np.exp(2 * gs.r_mai), np.exp(-2 * gs.r_mai)
        ch, sh = np.cosh(2 * gs.r), np.sinh(2 * gs.r)
        gamma = 0.5 * np.array(
            [
                [e_p * ch, 0.0, -e_p * sh, 0.0],
                [0.0, e_m * ch, 0.0, e_m * sh],
                [-e_p * sh, 0.0, e_p * ch, 0.0],
                [0.0, e_m * sh, 0.0, e_m * ch],
            ]
        )
        comm = np.array(
            [
                [0.0, -np.exp(-gs.r_mai), 0.0, 0.0],
                [np.exp(gs.r_mai), 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, -np.exp(-gs.r_mai)],
                [0.0, 0.0, np.exp(gs.r_mai), 0.0],
            ]
        )
    gamma = gamma + gs.sigma**2 * np.eye(4)
    return MomentData(gamma=gamma, commutator=comm, f_sn=2.0 * np.eye(2))


def cv_xi2_matrix(gs: GaussianScenario, t: EstimationTarget | None = None) -> SqueezingOutcome:
    """xi^-2 via the full matrix pipeline, optimized over the generator angle."""
    if t is None:
        t = EstimationTarget.uniform(2)
    if t.n.size != 2:
        raise InvalidScenarioError("the TMSV pipeline is two-mode; target must have M=2")
    return optimize_phi(cv_matrices(gs), t)


def cv_xi2_closed(gs: GaussianScenario) -> float:
    """Closed-form xi^-2 including detection noise."""
    r_mai = 0.0 if gs.strategy is CvStrategy.LINEAR else gs.r_mai
    return 1.0 / (np.exp(-2 * gs.r) + 2 * gs.sigma**2 * np.exp(-2 * r_mai))


def noise_ratio(r: float, r_mai: float, sigma: float) -> float:
    """Linear-to-MAI sensitivity ratio under detection noise; <= 1 when r_mai >= 0."""
    if min(r, r_mai, sigma) < 0:
        raise InvalidScenarioError("arguments must be nonnegative")
    return (np.exp(-2 * r) + 2 * sigma**2 * np.exp(-2 * r_mai)) / (
        np.exp(-2 * r) + 2 * sigma**2
    )
