"""Self-check suites that pin the package against independent references.

Three checks are provided, each returning a :class:`CheckResult`:

* the sequential filter against a batch joint-Gaussian conditioning oracle,
* the analytic expected training-based SNR against a Monte Carlo average,
* the projected-gradient solver against the closed-form water-filling
  design on diagonal instances where both must coincide.

The same suites back the ``validate`` CLI subcommand and the acceptance
tests, so the tolerances live here as module constants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import design, kalman, sdp, snr
from ._linalg import hermitian_part
from .channel import ChannelSubspace, evolve, sample_initial, standard_circular

FILTER_REL_TOL = 1e-8
SOLVER_OBJ_REL_TOL = 1e-4
SOLVER_KKT_TOL = 1e-6
SOLVER_OFFDIAG_TOL = 1e-6
SOLVER_DIAG_REL_TOL = 1e-3
MC_SIGMA_BOUND = 3.0

_FADING_CHOICES = (0.0, 0.5, 0.9997)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one validation suite."""

    name: str
    passed: bool
    detail: str


def _random_subspace(rng: np.random.Generator, rank: int, a: float) -> ChannelSubspace:
    lam = np.sort(rng.uniform(0.2, 3.0, size=rank))[::-1]
    return ChannelSubspace(np.eye(rank, dtype=complex), lam, a)


def check_filter_vs_batch(
    n_instances: int = 50, seed: int = 20240 + 1
) -> CheckResult:
    """Sequential filtering must equal one-shot conditioning on all history.

    Random low-rank models (rank at most 4) are tracked for up to seven
    blocks with fresh pilots each block; the final filtered mean and
    covariance are compared against a batch oracle that conditions on the
    stacked observation record in a single solve.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n_instances):
        rank = int(rng.integers(1, 5))
        a = _FADING_CHOICES[i % len(_FADING_CHOICES)]
        sub = _random_subspace(rng, rank, a)
        n_hist = int(rng.integers(1, 8))
        noise_var = float(10.0 ** rng.uniform(-0.5, 0.5))
        state = sample_initial(sub, rng)
        belief = kalman.initial_belief(sub)
        pilots = []
        observations = []
        post = None
        for block in range(n_hist):
            if block > 0:
                state = evolve(state, sub, rng)
            t_t = int(rng.integers(1, rank + 2))
            scale = float(10.0 ** rng.uniform(-0.5, 0.5))
            pilot = scale * standard_circular(rng, (rank, t_t))
            obs = kalman.simulate_observation(state, pilot, noise_var, rng)
            post = kalman.update(belief, pilot, obs)
            belief = kalman.predict(post, sub)
            pilots.append(pilot)
            observations.append(obs)
        mean_ref, cov_ref = kalman.batch_mmse_oracle(
            pilots, observations, sub, n_hist - 1
        )
        mean_err = np.linalg.norm(post.mean - mean_ref) / max(
            1.0, np.linalg.norm(mean_ref)
        )
        cov_err = np.linalg.norm(post.cov - cov_ref) / max(
            1.0, np.linalg.norm(cov_ref)
        )
        worst = max(worst, float(mean_err), float(cov_err))
    return CheckResult(
        name="filter-vs-batch",
        passed=worst <= FILTER_REL_TOL,
        detail=(
            f"worst relative deviation {worst:.3e} over {n_instances} "
            f"instances (tolerance {FILTER_REL_TOL:.0e})"
        ),
    )


def _mc_snr_samples(
    belief: kalman.KalmanBelief,
    pilot: np.ndarray,
    gamma: float,
    n_samples: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Vectorized draw of the optimal post-training SNR for many channels.

    Channels are drawn from the belief, observed once through the pilot at
    unit noise power, filtered with the standard gain, and scored with the
    quadratic SNR form. The first few samples are cross-checked against the
    package's own update-and-score path to guard against drift between this
    vectorized replica and the sequential implementation.
    """
    dim = belief.dim
    evals, evecs = np.linalg.eigh(belief.cov)
    root = evecs * np.sqrt(np.clip(evals, 0.0, None))
    g = belief.mean[:, None] + root @ standard_circular(rng, (dim, n_samples))
    noise = standard_circular(rng, (pilot.shape[1], n_samples))
    y = pilot.conj().T @ g + noise
    innov_cov = np.eye(pilot.shape[1], dtype=complex) + pilot.conj().T @ (
        belief.cov @ pilot
    )
    gain = (np.linalg.solve(innov_cov, pilot.conj().T @ belief.cov)).conj().T
    cov_post = hermitian_part(belief.cov - gain @ (pilot.conj().T @ belief.cov))
    mean_post = belief.mean[:, None] + gain @ (y - pilot.conj().T @ belief.mean[:, None])
    shifted = cov_post + np.eye(dim) / gamma
    solved = np.linalg.solve(shifted, mean_post)
    samples = np.einsum("ij,ij->j", mean_post.conj(), solved).real
    for j in range(min(3, n_samples)):
        obs = kalman.Observation(y[:, j], 1.0)
        post = kalman.update(belief, pilot, obs)
        ref = snr.optimal_snr(post, gamma)
        if abs(samples[j] - ref) > 1e-8 * max(1.0, abs(ref)):
            raise RuntimeError(
                "vectorized SNR replica disagrees with the sequential path"
            )
    return samples


def check_analytic_vs_monte_carlo(
    n_beliefs: int = 5, n_samples: int = 100_000, seed: int = 20240 + 2
) -> CheckResult:
    """The closed-form expected SNR must match a large Monte Carlo mean.

    For random beliefs and pilots the analytic value is required to sit
    within ``MC_SIGMA_BOUND`` standard errors of the sample mean.
    """
    rng = np.random.default_rng(seed)
    worst_ratio = 0.0
    for _ in range(n_beliefs):
        dim = int(rng.integers(2, 7))
        mean = 0.7 * standard_circular(rng, (dim,))
        q, _ = np.linalg.qr(standard_circular(rng, (dim, dim)))
        lam = rng.uniform(0.1, 2.0, size=dim)
        cov = hermitian_part((q * lam) @ q.conj().T)
        belief = kalman.KalmanBelief(mean, cov)
        gamma = float(10.0 ** rng.uniform(-0.3, 1.0))
        t_t = int(rng.integers(1, dim + 1))
        budget = float(t_t * 10.0 ** rng.uniform(0.0, 1.0))
        raw = standard_circular(rng, (dim, t_t))
        pilot = raw * np.sqrt(budget) / np.linalg.norm(raw)
        obj = snr.build_objective(belief, gamma, budget)
        analytic = snr.expected_snr_analytic(obj, pilot @ pilot.conj().T)
        samples = _mc_snr_samples(belief, pilot, gamma, n_samples, rng)
        stderr = float(samples.std(ddof=1) / np.sqrt(n_samples))
        ratio = abs(analytic - float(samples.mean())) / stderr
        worst_ratio = max(worst_ratio, ratio)
    return CheckResult(
        name="analytic-vs-monte-carlo",
        passed=worst_ratio <= MC_SIGMA_BOUND,
        detail=(
            f"worst deviation {worst_ratio:.2f} standard errors over "
            f"{n_beliefs} beliefs x {n_samples} observations "
            f"(bound {MC_SIGMA_BOUND:.0f})"
        ),
    )


def check_solver_vs_waterfill(
    n_instances: int = 100, seed: int = 20240 + 3
) -> CheckResult:
    """On diagonal instances the solver must reproduce water-filling.

    Instances are drawn with a zero-mean belief and diagonal covariance and
    the power budget is shrunk until the unrestricted water-filling support
    fits within the training length; there the relaxed matrix optimum is the
    diagonal water-filling design, so objective, KKT residual, off-diagonal
    mass, and diagonal entries are all pinned.
    """
    rng = np.random.default_rng(seed)
    worst = {"obj": 0.0, "kkt": 0.0, "offdiag": 0.0, "diag": 0.0}
    n_uncertified = 0
    for _ in range(n_instances):
        rank = int(rng.integers(2, 17))
        t_t = int(rng.integers(1, rank + 1))
        lam = np.sort(10.0 ** rng.uniform(-1.0, 1.0, size=rank))[::-1]
        gamma = float(10.0 ** rng.uniform(-0.5, 1.2))
        rho = float(10.0 ** rng.uniform(-0.5, 1.2))
        offsets = gamma + 1.0 / lam
        for _ in range(200):
            _, levels = design.waterfill_nu(offsets, gamma, rho * t_t)
            if int(np.count_nonzero(levels > 0.0)) <= t_t:
                break
            rho *= 0.5
        else:
            raise RuntimeError("failed to shrink the budget to a small support")
        belief = kalman.KalmanBelief(
            np.zeros(rank, dtype=complex), np.diag(lam).astype(complex)
        )
        obj = snr.build_objective(belief, gamma, rho * t_t)
        result = sdp.solve_trace_inverse_sdp(obj)
        if not result.converged:
            n_uncertified += 1
        solution = design.design_block_iid(lam, gamma, rho, t_t)
        levels_full = np.zeros(rank)
        levels_full[solution.indices] = solution.levels
        f_ref = snr.objective_value(obj, np.diag(levels_full).astype(complex))
        x = result.solution
        diag = np.diag(x).real
        offdiag = float(np.linalg.norm(x - np.diag(np.diag(x))))
        worst["obj"] = max(
            worst["obj"], abs(result.objective - f_ref) / max(1.0, abs(f_ref))
        )
        worst["kkt"] = max(worst["kkt"], result.kkt_residual)
        worst["offdiag"] = max(
            worst["offdiag"], offdiag / max(1.0, float(np.linalg.norm(x)))
        )
        worst["diag"] = max(
            worst["diag"],
            float(np.max(np.abs(diag - levels_full))) / float(levels_full.max()),
        )
    passed = (
        worst["obj"] <= SOLVER_OBJ_REL_TOL
        and worst["kkt"] <= SOLVER_KKT_TOL
        and worst["offdiag"] <= SOLVER_OFFDIAG_TOL
        and worst["diag"] <= SOLVER_DIAG_REL_TOL
        and n_uncertified == 0
    )
    return CheckResult(
        name="solver-vs-waterfill",
        passed=passed,
        detail=(
            f"worst over {n_instances} instances: objective gap "
            f"{worst['obj']:.3e}, KKT residual {worst['kkt']:.3e}, "
            f"off-diagonal mass {worst['offdiag']:.3e}, diagonal deviation "
            f"{worst['diag']:.3e}, uncertified solves {n_uncertified}"
        ),
    )


def run_all(quick: bool = False) -> list[CheckResult]:
    """Run every suite; ``quick`` trades instance counts for speed."""
    if quick:
        return [
            check_filter_vs_batch(n_instances=15),
            check_analytic_vs_monte_carlo(n_beliefs=2, n_samples=20_000),
            check_solver_vs_waterfill(n_instances=25),
        ]
    return [
        check_filter_vs_batch(),
        check_analytic_vs_monte_carlo(),
        check_solver_vs_waterfill(),
    ]
