"""Self-check suites: oracle equivalence, sign invariance, Cauchy-Schwarz.

Each check returns a dict with the measured worst deviation and its pass
threshold; `run_validation` bundles them into a machine-readable report.
"""

from __future__ import annotations

import numpy as np

from . import oracle as orc
from .gaussian_cv import CvStrategy, GaussianScenario, cv_xi2_closed, cv_xi2_matrix
from .optimizer import (
    EstimationTarget,
    GeneratorSpec,
    moment_for_measurement,
    moment_matrix,
    optimal_measurement,
    squeezing_and_xi2,
)
from .spin_moments import (
    MomentData,
    Prep,
    SpinScenario,
    Strategy,
    spin_blocks,
    spin_moment_data,
)

__all__ = [
    "block_deviation",
    "check_oracle_equivalence",
    "check_sign_invariance",
    "check_cauchy_schwarz",
    "check_cv_closed_forms",
    "run_validation",
]

CLOSED_FORM_COMBOS = (
    (Prep.MODE_SEPARABLE, Strategy.LINEAR),
    (Prep.MODE_SEPARABLE, Strategy.LOCAL_MAI),
    (Prep.MODE_ENTANGLED, Strategy.LINEAR),
    (Prep.MODE_ENTANGLED, Strategy.NONLOCAL_MAI),
    (Prep.MODE_ENTANGLED, Strategy.LOCAL_MAI),
)


def block_deviation(s: SpinScenario) -> float:
    """Worst absolute entry deviation between closed-form and oracle blocks."""
    cf = spin_blocks(s)
    ob = orc.oracle_blocks(s)
    return max(
        float(np.abs(cf.gamma_mm - ob.gamma_mm).max()),
        float(np.abs(cf.gamma_mn - ob.gamma_mn).max()),
        float(np.abs(cf.c_mm - ob.c_mm).max()),
        float(np.abs(cf.c_mn - ob.c_mn).max()),
    )


def _divisors(n: int):
    return [m for m in range(1, n + 1) if n % m == 0]


def check_oracle_equivalence(N_list=(4, 6, 8, 12), mu_step: float = 0.1, threshold=1e-9):
    """Compare every closed-form block entry against the exact simulator."""
    mus = np.arange(0.0, 3.1 + mu_step / 2, mu_step)
    worst, worst_case, count = 0.0, None, 0
    for N in N_list:
        for M in _divisors(N):
            for prep, strategy in CLOSED_FORM_COMBOS:
                mais = mus if strategy is not Strategy.LINEAR else np.array([0.0])
                for mu in mus:
                    for mai in mais:
                        s = SpinScenario(N, M, prep, float(mu), strategy, float(mai))
                        dev = block_deviation(s)
                        count += 1
                        if dev > worst:
                            worst = dev
                            worst_case = (N, M, prep.value, strategy.value, float(mu), float(mai))
    return {
        "name": "oracle_block_equivalence",
        "cases": count,
        "max_deviation": worst,
        "threshold": threshold,
        "worst_case": worst_case,
        "passed": worst < threshold,
    }


def check_sign_invariance(N: int = 8, mu: float = 0.4, mu_mai: float = 0.25, threshold=1e-10):
    """xi^-2 must not depend on the sign pattern of the target vector."""
    worst, count = 0.0, 0
    for M in (2, 4):
        base = EstimationTarget.uniform(M)
        for prep, strategy in CLOSED_FORM_COMBOS:
            s = SpinScenario(N, M, prep, mu, strategy, mu_mai)
            md = spin_moment_data(s)
            g = GeneratorSpec(0.7)
            ref = squeezing_and_xi2(md, g, base)[1]
            for bits in range(1, 2**M):
                signs = np.array([1.0 if bits >> m & 1 else -1.0 for m in range(M)])
                t = EstimationTarget(signs / np.sqrt(M))
                val = squeezing_and_xi2(md, g, t)[1]
                worst = max(worst, float(abs(val - ref) / ref))
                count += 1
    return {
        "name": "target_sign_invariance",
        "cases": count,
        "max_deviation": worst,
        "threshold": threshold,
        "passed": worst < threshold,
    }


def _random_row_orthonormal(rng, rows: int, cols: int) -> np.ndarray:
    a = rng.normal(size=(cols, rows))
    q, _ = np.linalg.qr(a)
    return q[:, :rows].T


def check_cauchy_schwarz(triples: int = 100, projections: int = 100, seed: int = 2024, threshold=1e-9):
    """The constructed optimal S saturates the bound and dominates random S in PSD order."""
    rng = np.random.default_rng(seed)
    worst_sat, worst_dom = 0.0, 0.0
    for _ in range(triples):
        M = int(rng.integers(2, 4))
        k = 2 * M
        a = rng.normal(size=(k, k))
        gamma = a @ a.T + 0.1 * np.eye(k)
        comm = rng.normal(size=(k, k))
        r = _random_row_orthonormal(rng, M, k)
        gamma_inv = np.linalg.inv(gamma)
        bound = r @ comm @ gamma_inv @ comm.T @ r.T

        w = r @ comm @ gamma_inv
        u, _, vt = np.linalg.svd(w, full_matrices=False)
        s_opt = u @ vt
        m_opt = (
            (s_opt @ comm.T @ r.T).T
            @ np.linalg.inv(s_opt @ gamma @ s_opt.T)
            @ (s_opt @ comm.T @ r.T)
        )
        worst_sat = max(worst_sat, float(np.abs(m_opt - bound).max()) / max(1.0, float(np.abs(bound).max())))
        for _ in range(projections):
            s_rand = _random_row_orthonormal(rng, M, k)
            m_rand = (
                (s_rand @ comm.T @ r.T).T
                @ np.linalg.inv(s_rand @ gamma @ s_rand.T)
                @ (s_rand @ comm.T @ r.T)
            )
            lam_min = float(np.linalg.eigvalsh(bound - m_rand).min())
            worst_dom = max(worst_dom, -lam_min)
    dev = max(worst_sat, worst_dom)
    return {
        "name": "matrix_cauchy_schwarz",
        "cases": triples * (projections + 1),
        "max_deviation": dev,
        "threshold": threshold,
        "passed": dev < threshold,
    }


def check_cv_closed_forms(threshold=1e-9):
    """Matrix pipeline equals the closed-form sensitivities on a parameter grid."""
    worst, count = 0.0, 0
    for r in np.arange(0.0, 1.01, 0.25):
        for sigma in np.arange(0.0, 1.01, 0.25):
            for r_mai in (0.0, r, 2 * r):
                for strategy in CvStrategy:
                    gs = GaussianScenario(float(r), strategy, float(r_mai), float(sigma))
                    closed = cv_xi2_closed(gs)
                    mat = cv_xi2_matrix(gs).xi2_inv
                    worst = max(worst, float(abs(mat - closed) / closed))
                    count += 1
    return {
        "name": "cv_pipeline_vs_closed_form",
        "cases": count,
        "max_deviation": worst,
        "threshold": threshold,
        "passed": worst < threshold,
    }


def check_measurement_saturation(seed: int = 7, threshold=1e-9):
    """On physical scenarios, the optimal S reproduces the optimized moment matrix."""
    rng = np.random.default_rng(seed)
    worst, count = 0.0, 0
    for _ in range(20):
        N = int(rng.choice([8, 12]))
        M = int(rng.choice([m for m in (2, 4) if N % m == 0]))
        prep, strategy = CLOSED_FORM_COMBOS[int(rng.integers(len(CLOSED_FORM_COMBOS)))]
        s = SpinScenario(N, M, prep, float(rng.uniform(0.05, 1.0)), strategy, float(rng.uniform(0.05, 1.0)))
        md = spin_moment_data(s)
        g = GeneratorSpec(float(rng.uniform(0, np.pi)))
        ref = moment_matrix(md, g)
        s_opt = optimal_measurement(md, g)
        direct = moment_for_measurement(md, g, s_opt)
        worst = max(worst, float(np.abs(direct - ref).max()) / max(1.0, float(np.abs(ref).max())))
        count += 1
    return {
        "name": "optimal_measurement_saturation",
        "cases": count,
        "max_deviation": worst,
        "threshold": threshold,
        "passed": worst < threshold,
    }


def run_validation(N_list=(4, 6, 8, 12), mu_step: float = 0.31, cs_triples: int = 20, cs_projections: int = 20):
    """Run every suite; returns a report dict with an overall pass flag."""
    checks = [
        check_oracle_equivalence(N_list=N_list, mu_step=mu_step),
        check_sign_invariance(),
        check_cauchy_schwarz(triples=cs_triples, projections=cs_projections),
        check_cv_closed_forms(),
        check_measurement_saturation(),
    ]
    return {"passed": all(c["passed"] for c in checks), "checks": checks}
