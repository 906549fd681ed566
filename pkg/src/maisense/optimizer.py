"""Measurement-optimized moment matrix and xi^-2 pipeline.

Given assembled covariance (Gamma), commutator (C) and shot-noise (F_SN)
matrices, the best moment matrix over all row-orthonormal measurement
coefficient matrices S is R C Gamma^+ C^T R^T (matrix-valued Cauchy-Schwarz),
where R holds the generator coefficients.  From it follow the optimal
squeezing matrix, the estimator covariance at nu = 1, and the relative gain

    xi^-2(n) = (n^T Sigma_SN n) / (n^T Sigma n).

Generators are a common in-plane angle phi per mode, with per-mode signs taken
from the target vector n (flipping n_m is absorbed by flipping the generator),
which makes xi^-2 independent of the sign pattern by construction.

For exchange-symmetric inputs (all diagonal blocks equal, all off-diagonal
blocks equal) the whole pipeline block-diagonalizes into a "sum channel"
2x2 problem, giving an O(1)-in-M evaluation used by the sweep drivers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spin_moments as sm
from .errors import (
    DegenerateScenarioError,
    EmptyRangeError,
    InvalidScenarioError,
    SingularGammaError,
)
from .spin_moments import MomentData, Prep, SpinScenario, Strategy

__all__ = [
    "GeneratorSpec",
    "EstimationTarget",
    "SqueezingOutcome",
    "ScalingPoint",
    "ScalingResult",
    "moment_matrix",
    "optimal_measurement",
    "squeezing_and_xi2",
    "optimize_phi",
    "optimize_scenario",
    "scaling_sweep",
    "default_mai_range",
    "golden_max",
]

_PINV_RCOND = 1e-12


@dataclass(frozen=True)
class GeneratorSpec:
    """Common local generator angle: mode m carries cos(phi) S_y + sin(phi) S_z."""

    phi: float

    def rotation(self, M: int, signs=None) -> np.ndarray:
        """M x 2M generator coefficient matrix with orthonormal rows."""
        g = np.array([np.cos(self.phi), np.sin(self.phi)])
        if signs is None:
            signs = np.ones(M)
        r = np.zeros((M, 2 * M))
        for m in range(M):
            r[m, 2 * m : 2 * m + 2] = signs[m] * g
        return r


@dataclass(frozen=True)
class EstimationTarget:
    """Equal-weight linear combination of the M phases, entries +-1/sqrt(M)."""

    n: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.n, dtype=float).reshape(-1)
        if n.size < 1:
            raise InvalidScenarioError("target vector must be nonempty")
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise InvalidScenarioError("target vector must be normalized")
        if np.max(np.abs(np.abs(n) - 1.0 / np.sqrt(n.size))) > 1e-12:
            raise InvalidScenarioError("target entries must be +-1/sqrt(M)")
        object.__setattr__(self, "n", n)

    @classmethod
    def uniform(cls, M: int) -> "EstimationTarget":
        return cls(np.ones(M) / np.sqrt(M))

    @property
    def signs(self) -> np.ndarray:
        return np.sign(self.n)


@dataclass(frozen=True)
class SqueezingOutcome:
    xi2_inv: float
    gain_db: float
    phi_opt: float
    mu_mai_opt: float
    s_matrix: np.ndarray
    sigma: np.ndarray


def _psd_pinv(gamma: np.ndarray, commutator: np.ndarray):
    """Eigendecomposition pseudo-inverse of symmetric Gamma.

    Raises SingularGammaError if the commutator needs components of Gamma's
    discarded null space (silently truncating would inflate the sensitivity).
    """
    w, v = np.linalg.eigh((gamma + gamma.T) / 2)
    cutoff = _PINV_RCOND * np.max(np.abs(w)) if w.size else 0.0
    keep = np.abs(w) > cutoff
    if not np.all(keep):
        null = v[:, ~keep]
        # commutator contracts Gamma over its X (column) index
        residual = np.abs(commutator @ null).max() if null.size else 0.0
        scale = max(np.abs(commutator).max(), 1.0)
        if residual > 1e-9 * scale:
            raise SingularGammaError(
                "covariance matrix is singular along a measured direction"
            )
    inv_w = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
    return (v * inv_w) @ v.T


def _moment_full(md: MomentData) -> np.ndarray:
    gamma_inv = _psd_pinv(md.gamma, md.commutator)
    c = md.commutator
    full = c @ gamma_inv @ c.T
    return (full + full.T) / 2


def moment_matrix(md: MomentData, g: GeneratorSpec, signs=None) -> np.ndarray:
    """Measurement-optimized M x M moment matrix R (C Gamma^+ C^T) R^T."""
    r = g.rotation(md.modes, signs)
    out = r @ _moment_full(md) @ r.T
    return (out + out.T) / 2


def moment_for_measurement(md: MomentData, g: GeneratorSpec, s_matrix: np.ndarray, signs=None):
    """Moment matrix for an explicit measurement coefficient matrix S."""
    r = g.rotation(md.modes, signs)
    c_gx = s_matrix @ md.commutator.T @ r.T
    gamma_x = s_matrix @ md.gamma @ s_matrix.T
    return c_gx.T @ np.linalg.inv(gamma_x) @ c_gx


def optimal_measurement(md: MomentData, g: GeneratorSpec, signs=None) -> np.ndarray:
    """Row-orthonormal S saturating the matrix Cauchy-Schwarz bound."""
    r = g.rotation(md.modes, signs)
    w = r @ md.commutator @ _psd_pinv(md.gamma, md.commutator)
    u, sv, vt = np.linalg.svd(w, full_matrices=False)
    if np.min(sv) <= 1e-14 * max(np.max(sv), 1.0):
        raise DegenerateScenarioError("optimal measurement rows are linearly dependent")
    return u @ vt


def _sqrt_diag(d: np.ndarray) -> np.ndarray:
    return np.diag(np.sqrt(np.diag(d)))


def squeezing_and_xi2(md: MomentData, g: GeneratorSpec, t: EstimationTarget):
    """Optimal squeezing matrix and xi^-2 for target t at generator angle g.phi.

    Returns (xi2_opt_matrix, xi2_inv, sigma).
    """
    mr = moment_matrix(md, g, signs=t.signs)
    try:
        mr_inv = np.linalg.inv(mr)
    except np.linalg.LinAlgError as exc:
        raise DegenerateScenarioError("moment matrix is singular") from exc
    cond = np.linalg.cond(mr)
    if not np.isfinite(cond) or cond > 1e14:
        raise DegenerateScenarioError("moment matrix is numerically singular")
    f_half = _sqrt_diag(md.f_sn)
    xi2 = f_half @ mr_inv @ f_half
    sigma_sn = np.linalg.inv(md.f_sn)
    sn_half = _sqrt_diag(sigma_sn)
    sigma = sn_half @ xi2 @ sn_half
    n = t.n
    xi2_inv = float((n @ sigma_sn @ n) / (n @ sigma @ n))
    return xi2, xi2_inv, (sigma + sigma.T) / 2


def golden_max(f, a: float, b: float, tol: float = 1e-6):
    """Deterministic golden-section maximization of f on [a, b]."""
    if b < a:
        raise EmptyRangeError(f"empty interval [{a}, {b}]")
    invphi = (np.sqrt(5.0) - 1) / 2
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = (a + b) / 2
    return x, f(x)


def _outcome(md: MomentData, phi: float, mu_mai: float, t: EstimationTarget) -> SqueezingOutcome:
    g = GeneratorSpec(phi)
    _, xi2_inv, sigma = squeezing_and_xi2(md, g, t)
    s_matrix = optimal_measurement(md, g, signs=t.signs)
    return SqueezingOutcome(
        xi2_inv=xi2_inv,
        gain_db=10.0 * np.log10(xi2_inv),
        phi_opt=phi,
        mu_mai_opt=mu_mai,
        s_matrix=s_matrix,
        sigma=sigma,
    )


def optimize_phi(md: MomentData, t: EstimationTarget, grid: int = 128) -> SqueezingOutcome:
    """Maximize xi^-2 over the common generator angle for fixed matrices."""

    def f(phi):
        try:
            return squeezing_and_xi2(md, GeneratorSpec(phi), t)[1]
        except DegenerateScenarioError:
            return -np.inf

    phis = np.linspace(0.0, np.pi, grid, endpoint=False)
    vals = [f(p) for p in phis]
    best = int(np.argmax(vals))
    step = np.pi / grid
    phi_opt, _ = golden_max(f, phis[best] - step, phis[best] + step)
    return _outcome(md, phi_opt % np.pi, 0.0, t)


# ---------------------------------------------------------------------------
# structured (exchange-symmetric) fast path


def _entry_fn(prep: Prep, strategy: Strategy):
    table = {
        (Prep.MODE_SEPARABLE, Strategy.LINEAR): "ms_linear",
        (Prep.MODE_SEPARABLE, Strategy.LOCAL_MAI): "ms_local",
        (Prep.MODE_ENTANGLED, Strategy.LINEAR): "me_linear",
        (Prep.MODE_ENTANGLED, Strategy.NONLOCAL_MAI): "me_nonlocal",
        (Prep.MODE_ENTANGLED, Strategy.LOCAL_MAI): "me_local",
    }
    key = table.get((prep, strategy))
    if key is None:
        raise InvalidScenarioError(
            f"no closed form for prep={prep.value}, strategy={strategy.value}"
        )
    return key


def _sum_channel(prep: Prep, strategy: Strategy, nn: int, M: int, mu, mu_mai):
    """Sum-channel (a_s, c_s) 2x2 stacks, broadcasting over mu/mu_mai arrays."""
    key = _entry_fn(prep, strategy)
    zero = np.zeros(np.broadcast_shapes(np.shape(mu), np.shape(mu_mai)))
    if key == "ms_linear":
        gyy, gyz, cyz, czy = sm._entries_ms_linear(nn, mu)
        hyy = hyz = cyy = dyy = zero
    elif key == "ms_local":
        gyy, gyz, cyy, cyz, czy = sm._entries_ms_local_mai(nn, mu, mu_mai)
        hyy = hyz = dyy = zero
    elif key == "me_linear":
        gyy, gyz, hyy, hyz, cyz, czy = sm._entries_me_linear(nn, M, mu)
        cyy = dyy = zero
    elif key == "me_nonlocal":
        gyy, gyz, hyy, hyz, cyy, cyz, czy, dyy = sm._entries_me_nonlocal_mai(nn, M, mu, mu_mai)
    else:
        gyy, gyz, hyy, hyz, cyy, cyz, czy = sm._entries_me_local_mai(nn, M, mu, mu_mai)
        dyy = zero
        if M == 1:
            hyy = hyz = zero
    gzz = nn / 4.0
    br = np.broadcast_shapes(
        np.shape(gyy), np.shape(gyz), np.shape(hyy), np.shape(hyz),
        np.shape(cyy), np.shape(cyz), np.shape(czy), np.shape(dyy),
    )

    def full(x):
        return np.broadcast_to(np.asarray(x, dtype=float), br)

    ayy = full(gyy + (M - 1) * hyy)
    ayz = full(gyz + (M - 1) * hyz)
    azz = np.broadcast_to(np.asarray(gzz + zero, dtype=float), br)
    a_s = np.stack(
        [np.stack([ayy, ayz], axis=-1), np.stack([ayz, azz], axis=-1)], axis=-2
    )
    csyy = full(cyy + (M - 1) * dyy)
    c_s = np.stack(
        [
            np.stack([csyy, full(cyz)], axis=-1),
            np.stack([full(czy), np.zeros(br)], axis=-1),
        ],
        axis=-2,
    )
    return a_s, c_s


def _xi2_from_channels(a_s, c_s, nn: int):
    """Max over phi of the structured xi^-2, plus the maximizing angle."""
    a_inv = np.linalg.pinv(a_s, rcond=_PINV_RCOND, hermitian=True)
    q = c_s @ a_inv @ np.swapaxes(c_s, -1, -2)
    a = q[..., 0, 0]
    b = q[..., 0, 1]
    c = q[..., 1, 1]
    half = (a - c) / 2.0
    root = np.sqrt(half * half + b * b)
    lam = (a + c) / 2.0 + root
    vy = np.where(np.abs(b) > 0, b, np.where(a >= c, 1.0, 0.0))
    vz = np.where(np.abs(b) > 0, lam - a, np.where(a >= c, 0.0, 1.0))
    phi = np.mod(np.arctan2(vz, vy), np.pi)
    return lam / nn, phi


def xi2_structured(prep: Prep, strategy: Strategy, nn: int, M: int, mu, mu_mai):
    """Closed-form xi^-2 maximized over the generator angle; broadcasts."""
    a_s, c_s = _sum_channel(prep, strategy, nn, M, mu, mu_mai)
    return _xi2_from_channels(a_s, c_s, nn)


def xi2_structured_at_phi(prep: Prep, strategy: Strategy, nn: int, M: int, mu, mu_mai, phi):
    """Structured xi^-2 at a fixed generator angle; broadcasts over all grids."""
    a_s, c_s = _sum_channel(prep, strategy, nn, M, mu, mu_mai)
    a_inv = np.linalg.pinv(a_s, rcond=_PINV_RCOND, hermitian=True)
    q = c_s @ a_inv @ np.swapaxes(c_s, -1, -2)
    cp, sp = np.cos(phi), np.sin(phi)
    val = (
        q[..., 0, 0] * cp * cp
        + 2.0 * q[..., 0, 1] * cp * sp
        + q[..., 1, 1] * sp * sp
    )
    return val / nn


def default_mai_range(s: SpinScenario):
    """Accessible MAI time range when none is requested.

    The echo optimum sits near mu_mai ~ 2*mu, and the natural twisting time
    scale is set by the spin the MAI acts on: the total spin for the nonlocal
    strategy, a single mode for the local one.
    """
    n_scale = s.N if s.strategy is Strategy.NONLOCAL_MAI else s.local_atoms
    hi = max(2.5 * s.mu, 16.0 * np.pi / n_scale)
    return (0.0, float(min(hi, np.pi)))


def optimize_scenario(
    s: SpinScenario,
    t: EstimationTarget,
    mai_range=None,
    grid: int = 64,
    tol: float = 1e-6,
) -> SqueezingOutcome:
    """Maximize xi^-2 over phi in [0, pi) and mu_mai in mai_range.

    Coarse grid scan followed by per-axis golden-section refinement;
    deterministic for fixed inputs.
    """
    nn, M = s.local_atoms, s.M
    phis = np.linspace(0.0, np.pi, grid, endpoint=False)

    if s.strategy is Strategy.LINEAR:
        vals = xi2_structured_at_phi(s.prep, s.strategy, nn, M, s.mu, 0.0, phis)
        best = int(np.argmax(vals))
        step = np.pi / grid

        def f_phi(phi):
            return float(xi2_structured_at_phi(s.prep, s.strategy, nn, M, s.mu, 0.0, phi))

        phi_opt, _ = golden_max(f_phi, phis[best] - step, phis[best] + step, tol)
        md = sm.spin_moment_data(s)
        return _outcome(md, phi_opt % np.pi, 0.0, t)

    if mai_range is None:
        mai_range = default_mai_range(s)
    lo, hi = float(mai_range[0]), float(mai_range[1])
    if hi < lo:
        raise EmptyRangeError(f"empty MAI range [{lo}, {hi}]")
    mais = np.linspace(lo, hi, grid)

    vals = xi2_structured_at_phi(
        s.prep, s.strategy, nn, M, s.mu, mais[:, None], phis[None, :]
    )
    i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
    mai, phi = float(mais[i]), float(phis[j])

    def f(phi_, mai_):
        return float(xi2_structured_at_phi(s.prep, s.strategy, nn, M, s.mu, mai_, phi_))

    dmai = (hi - lo) / max(grid - 1, 1)
    dphi = np.pi / grid
    for _ in range(3):
        mai, _ = golden_max(
            lambda x: f(phi, x), max(lo, mai - dmai), min(hi, mai + dmai), tol
        )
        phi, _ = golden_max(lambda x: f(x, mai), phi - dphi, phi + dphi, tol)
        dmai /= 4.0
        dphi /= 4.0
    phi %= np.pi

    md = sm.spin_moment_data(
        SpinScenario(s.N, s.M, s.prep, s.mu, s.strategy, mu_mai=mai)
    )
    return _outcome(md, phi, mai, t)


@dataclass(frozen=True)
class ScalingPoint:
    N: int
    xi2_inv: float
    mu_opt: float
    mu_mai_opt: float


@dataclass(frozen=True)
class ScalingResult:
    points: list
    slope: float
    intercept: float
    residual: float


def _best_over_mai(prep, strategy, nn, M, mu, mai_hi, grid=64, tol=1e-6):
    """Max over (mu_mai, phi) at fixed mu, with phi eliminated analytically."""
    if strategy is Strategy.LINEAR:
        val, _ = xi2_structured(prep, strategy, nn, M, mu, 0.0)
        return float(val), 0.0
    mais = np.linspace(0.0, mai_hi, grid)
    vals, _ = xi2_structured(prep, strategy, nn, M, mu, mais)
    i = int(np.argmax(vals))
    dmai = mai_hi / max(grid - 1, 1)

    def f(x):
        return float(xi2_structured(prep, strategy, nn, M, mu, x)[0])

    mai, val = golden_max(f, max(0.0, mais[i] - dmai), min(mai_hi, mais[i] + dmai), tol)
    return val, mai


def scaling_sweep(
    N_list,
    M: int,
    prep: Prep,
    strategy: Strategy,
    t: EstimationTarget | None = None,
    mu_grid: int = 64,
) -> ScalingResult:
    """Optimized xi^-2 per N (jointly over mu, mu_mai, phi) and its log-log slope."""
    N_list = list(N_list)
    if len(N_list) < 3:
        raise EmptyRangeError("scaling fit needs at least 3 atom numbers")
    points = []
    for N in N_list:
        if N % M != 0:
            raise InvalidScenarioError(f"N={N} not divisible by M={M}")
        nn = N // M
        mus = np.geomspace(0.1 * N ** (-2.0 / 3.0), 10.0 * N**-0.5, mu_grid)
        n_scale = N if strategy is Strategy.NONLOCAL_MAI else nn
        mai_hi = min(np.pi, max(2.5 * mus[-1], 16.0 * np.pi / n_scale))
        best_val, best_mu, best_mai = -np.inf, mus[0], 0.0
        for mu in mus:
            val, mai = _best_over_mai(prep, strategy, nn, M, mu, mai_hi)
            if val > best_val:
                best_val, best_mu, best_mai = val, mu, mai
        # refine mu around the grid optimum
        ratio = mus[1] / mus[0]

        def f_mu(mu):
            return _best_over_mai(prep, strategy, nn, M, mu, mai_hi)[0]

        mu_opt, val = golden_max(f_mu, best_mu / ratio, best_mu * ratio, tol=1e-8)
        if val > best_val:
            best_val, best_mu = val, mu_opt
            _, best_mai = _best_over_mai(prep, strategy, nn, M, mu_opt, mai_hi)
        points.append(ScalingPoint(N=N, xi2_inv=best_val, mu_opt=best_mu, mu_mai_opt=best_mai))

    x = np.log(np.array([p.N for p in points], dtype=float))
    y = np.log(np.array([p.xi2_inv for p in points]))
    coeffs, res, _, _ = np.linalg.lstsq(np.stack([x, np.ones_like(x)], axis=1), y, rcond=None)
    residual = float(res[0]) if res.size else 0.0
    return ScalingResult(points=points, slope=float(coeffs[0]), intercept=float(coeffs[1]), residual=residual)
