"""Pilot matrix constructions.

Four designers share the interface belief -> pilot matrix:

* ``design_sdr``: maximize the expected training-based received SNR by
  solving the trace-inverse relaxation over the pilot Gram matrix and
  extracting a pilot by exact factorization (when the relaxed optimum has
  rank <= train_len) or best-of-K Gaussian randomization.
* ``design_mse_min``: minimize the posterior estimation MSE through the same
  relaxation/extraction pipeline with the weight matrix set to identity.
* ``design_block_iid``: closed-form water-filling solution of the SNR design
  when consecutive blocks are independent; the objective is then diagonal and
  the optimal Gram matrix allocates power over the strongest eigendirections.
* ``design_orthogonal_baseline`` / ``design_random_baseline``: classical
  round-robin eigendirection sweep and isotropic random pilots.

All designers return pilots whose total power matches the block budget
``rho * train_len`` exactly (up to rescaling round-off).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._linalg import check_finite, floored_inverse, hermitian_part
from .channel import ChannelSubspace, standard_circular
from .kalman import KalmanBelief
from .sdp import SolverConfig, solve_trace_inverse_sdp
from .snr import DesignObjective, build_objective, expected_snr_analytic

_BUDGET_SLACK = 1e-9


class SolverConvergenceWarning(UserWarning):
    """Raised (as a warning) when a design uses an uncertified relaxed optimum."""


class DegeneratePilotWarning(UserWarning):
    """Raised (as a warning) when extraction yields an all-zero pilot."""


@dataclass(frozen=True)
class PilotMatrix:
    """Training symbols of one block, one column per training symbol."""

    symbols: np.ndarray
    power_budget: float

    def __post_init__(self):
        s = np.asarray(self.symbols, dtype=complex)
        if s.ndim != 2:
            raise ValueError("pilot symbols must form a matrix")
        if s.shape[1] > s.shape[0]:
            raise ValueError(
                f"train_len {s.shape[1]} exceeds channel rank {s.shape[0]}"
            )
        check_finite("pilot symbols", s)
        if not np.isfinite(self.power_budget) or self.power_budget <= 0:
            raise ValueError("power_budget must be finite and positive")
        power = float(np.linalg.norm(s) ** 2)
        if power > self.power_budget * (1.0 + _BUDGET_SLACK):
            raise ValueError(
                f"pilot power {power} exceeds the budget {self.power_budget}"
            )
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "symbols", s)

    @property
    def rank(self) -> int:
        return self.symbols.shape[0]

    @property
    def train_len(self) -> int:
        return self.symbols.shape[1]

    @property
    def power(self) -> float:
        return float(np.linalg.norm(self.symbols) ** 2)


@dataclass(frozen=True)
class RandomizationConfig:
    """Extraction settings for rank reduction of relaxed optima."""

    n_candidates: int = 50
    rank_tol: float = 1e-10

    def __post_init__(self):
        if self.n_candidates < 1:
            raise ValueError("n_candidates must be >= 1")
        if not 0.0 < self.rank_tol < 1.0:
            raise ValueError("rank_tol must lie in (0, 1)")


@dataclass(frozen=True)
class WaterfillSolution:
    """Closed-form power allocation over selected eigendirections."""

    indices: np.ndarray
    levels: np.ndarray
    nu: float

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int)
        lv = np.asarray(self.levels, dtype=float)
        if idx.ndim != 1 or lv.ndim != 1 or idx.size != lv.size:
            raise ValueError("indices and levels must be vectors of equal length")
        if np.unique(idx).size != idx.size:
            raise ValueError("indices must be distinct")
        if np.any(lv < 0) or not np.all(np.isfinite(lv)):
            raise ValueError("levels must be finite and non-negative")
        if not np.isfinite(self.nu) or self.nu <= 0:
            raise ValueError("nu must be finite and positive")
        idx = idx.copy()
        lv = lv.copy()
        idx.setflags(write=False)
        lv.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "levels", lv)


def _rescale(symbols: np.ndarray, budget: float) -> np.ndarray:
    power = float(np.linalg.norm(symbols) ** 2)
    if power == 0.0:
        warnings.warn(
            "extracted pilot is identically zero", DegeneratePilotWarning
        )
        return symbols
    return symbols * np.sqrt(budget / power)


def _extracted_pilot(
    obj: DesignObjective,
    train_len: int,
    solver_cfg: SolverConfig | None,
    rand_cfg: RandomizationConfig | None,
    rng: np.random.Generator | None,
    label: str,
) -> PilotMatrix:
    rand_cfg = rand_cfg or RandomizationConfig()
    result = solve_trace_inverse_sdp(obj, solver_cfg)
    if not result.converged:
        warnings.warn(
            f"{label}: relaxation not certified optimal "
            f"(KKT residual {result.kkt_residual:.2e} after "
            f"{result.iterations} iterations)",
            SolverConvergenceWarning,
        )
    symbols = factorize_or_randomize(
        result.solution,
        train_len,
        rand_cfg.n_candidates,
        obj,
        rng,
        rank_tol=rand_cfg.rank_tol,
    )
    return PilotMatrix(_rescale(symbols, obj.budget), obj.budget)


def design_sdr(
    belief: KalmanBelief,
    gamma: float,
    rho: float,
    train_len: int,
    solver_cfg: SolverConfig | None = None,
    rand_cfg: RandomizationConfig | None = None,
    rng: np.random.Generator | None = None,
) -> PilotMatrix:
    """SNR-maximizing pilot via the trace-inverse relaxation.

    ``rng`` feeds the randomized extraction and may be omitted only when the
    relaxed optimum factorizes exactly (rank <= train_len).
    """
    _check_power(rho, train_len, belief.dim)
    obj = build_objective(belief, gamma, rho * train_len)
    return _extracted_pilot(
        obj, train_len, solver_cfg, rand_cfg, rng, "snr design"
    )


def design_mse_min(
    belief: KalmanBelief,
    rho: float,
    train_len: int,
    solver_cfg: SolverConfig | None = None,
    rng: np.random.Generator | None = None,
    rand_cfg: RandomizationConfig | None = None,
) -> PilotMatrix:
    """Estimation-MSE-minimizing pilot through the same relaxation pipeline.

    The weight matrix is the identity, so the relaxed objective is the
    posterior error trace Tr((P^-1 + X)^-1); candidate extraction ranks by
    MSE reduction.
    """
    _check_power(rho, train_len, belief.dim)
    budget = rho * train_len
    p = belief.cov
    p_inv = floored_inverse(p)
    const = float(np.vdot(belief.mean, belief.mean).real) + float(
        np.trace(p).real
    )
    obj = DesignObjective(
        weight=np.eye(belief.dim),
        base=p_inv,
        budget=budget,
        gamma=1.0,
        const_term=const,
    )
    return _extracted_pilot(
        obj, train_len, solver_cfg, rand_cfg, rng, "mse design"
    )


def factorize_or_randomize(
    gram: np.ndarray,
    train_len: int,
    n_candidates: int,
    obj: DesignObjective,
    rng: np.random.Generator | None,
    rank_tol: float = 1e-10,
) -> np.ndarray:
    """Extract a pilot matrix whose Gram approximates a relaxed optimum.

    When at most ``train_len`` eigenvalues of ``gram`` are significant the
    factorization is exact (zero-padded eigen square root). Otherwise the
    best of ``n_candidates`` i.i.d. CN(0, gram) candidate matrices plus one
    deterministic top-eigenpair truncation is returned, each rescaled to the
    budget and ranked by the expected received SNR.
    """
    x = hermitian_part(np.asarray(gram, dtype=complex))
    if x.shape != obj.base.shape:
        raise ValueError("gram matrix has the wrong shape")
    n = x.shape[0]
    if not 1 <= train_len <= n:
        raise ValueError("train_len must lie in [1, rank]")
    w, v = np.linalg.eigh(x)
    w = w[::-1]
    v = v[:, ::-1]
    lam_max = max(float(w[0]), 0.0)
    if lam_max == 0.0:
        warnings.warn(
            "relaxed optimum is identically zero", DegeneratePilotWarning
        )
        return np.zeros((n, train_len), dtype=complex)
    significant = int(np.sum(w > rank_tol * lam_max))
    if significant <= train_len:
        cols = v[:, :significant] * np.sqrt(w[:significant])
        return np.concatenate(
            [cols, np.zeros((n, train_len - significant), dtype=complex)],
            axis=1,
        )
    if rng is None:
        raise ValueError(
            "relaxed optimum has rank > train_len; randomization requires rng"
        )
    budget = obj.budget
    root = v * np.sqrt(np.clip(w, 0.0, None))
    candidates = [_rescale_quiet(v[:, :train_len] * np.sqrt(w[:train_len]), budget)]
    for _ in range(n_candidates):
        draw = root @ standard_circular(rng, (n, train_len))
        candidates.append(_rescale_quiet(draw, budget))
    scores = [
        expected_snr_analytic(obj, s @ s.conj().T) for s in candidates
    ]
    return candidates[int(np.argmax(scores))]


def _rescale_quiet(symbols: np.ndarray, budget: float) -> np.ndarray:
    power = float(np.linalg.norm(symbols) ** 2)
    if power == 0.0:
        return symbols
    return symbols * np.sqrt(budget / power)


def design_block_iid(
    eigenvalues: np.ndarray, gamma: float, rho: float, train_len: int
) -> WaterfillSolution:
    """Closed-form SNR design for independent blocks.

    Selects the ``train_len`` largest eigenvalues (stable under ties) and
    water-fills the power budget over them.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise ValueError("eigenvalues must form a non-empty vector")
    if np.any(lam <= 0) or not np.all(np.isfinite(lam)):
        raise ValueError("eigenvalues must be finite and strictly positive")
    if not 1 <= train_len <= lam.size:
        raise ValueError("train_len must lie in [1, rank]")
    if not np.isfinite(gamma) or gamma <= 0:
        raise ValueError("gamma must be finite and positive")
    if not np.isfinite(rho) or rho <= 0:
        raise ValueError("rho must be finite and positive")
    order = np.argsort(-lam, kind="stable")[:train_len]
    offsets = gamma + 1.0 / lam[order]
    nu, levels = waterfill_nu(offsets, gamma, rho * train_len)
    return WaterfillSolution(indices=order, levels=levels, nu=nu)


def waterfill_nu(
    offsets: np.ndarray, gamma: float, budget: float
) -> tuple[float, np.ndarray]:
    """Bisection for the water level of the diagonal SNR design.

    Allocations follow ``x_i = max(-b_i + sqrt(b_i / (nu (b_i - gamma))), 0)``
    with ``b_i`` the diagonal offsets; the multiplier ``nu`` is bisected until
    the total power matches the budget within 1e-12 relative.
    """
    b = np.asarray(offsets, dtype=float)
    if b.ndim != 1 or b.size == 0:
        raise ValueError("offsets must form a non-empty vector")
    if not np.isfinite(gamma) or gamma <= 0:
        raise ValueError("gamma must be finite and positive")
    if np.any(b <= gamma) or not np.all(np.isfinite(b)):
        raise ValueError("offsets must be finite and exceed gamma")
    if not np.isfinite(budget) or budget <= 0:
        raise ValueError("budget must be finite and positive")

    def levels_at(nu: float) -> np.ndarray:
        return np.maximum(-b + np.sqrt(b / (nu * (b - gamma))), 0.0)

    lo = hi = 1.0
    for _ in range(4000):
        if levels_at(hi).sum() <= budget:
            break
        hi *= 2.0
    else:
        raise RuntimeError("failed to bracket the water level from above")
    for _ in range(4000):
        if levels_at(lo).sum() >= budget:
            break
        lo /= 2.0
    else:
        raise RuntimeError("failed to bracket the water level from below")
    nu = 0.5 * (lo + hi)
    for _ in range(200):
        nu = 0.5 * (lo + hi)
        total = levels_at(nu).sum()
        if abs(total - budget) <= 1e-12 * budget:
            break
        if total > budget:
            lo = nu
        else:
            hi = nu
    return nu, levels_at(nu)


def waterfill_pilot(
    solution: WaterfillSolution, rank: int, rho: float
) -> PilotMatrix:
    """Pilot matrix realizing a water-filling allocation.

    Column ``i`` trains eigendirection ``indices[i]`` with power
    ``levels[i]``.
    """
    train_len = solution.levels.size
    if np.any(solution.indices >= rank):
        raise ValueError("allocation indices exceed the channel rank")
    symbols = np.zeros((rank, train_len), dtype=complex)
    symbols[solution.indices, np.arange(train_len)] = np.sqrt(solution.levels)
    return PilotMatrix(symbols, rho * train_len)


def design_orthogonal_baseline(
    sub: ChannelSubspace, rho: float, train_len: int, block_index: int
) -> PilotMatrix:
    """Round-robin sweep of eigendirections at uniform power.

    Block ``l`` trains directions ``(l * train_len + i) mod rank`` for
    ``i = 0..train_len-1``, each with power ``rho``, so consecutive blocks
    cover the whole subspace.
    """
    _check_power(rho, train_len, sub.rank)
    if block_index < 0:
        raise ValueError("block_index must be non-negative")
    start = (block_index * train_len) % sub.rank
    symbols = np.zeros((sub.rank, train_len), dtype=complex)
    for i in range(train_len):
        symbols[(start + i) % sub.rank, i] = np.sqrt(rho)
    return PilotMatrix(symbols, rho * train_len)


def design_random_baseline(
    rank: int, rho: float, train_len: int, rng: np.random.Generator
) -> PilotMatrix:
    """Isotropic random pilot directions at uniform per-symbol power."""
    _check_power(rho, train_len, rank)
    symbols = standard_circular(rng, (rank, train_len))
    norms = np.linalg.norm(symbols, axis=0)
    symbols = symbols * (np.sqrt(rho) / norms)
    return PilotMatrix(symbols, rho * train_len)


def _check_power(rho: float, train_len: int, rank: int) -> None:
    if not np.isfinite(rho) or rho <= 0:
        raise ValueError("rho must be finite and positive")
    if not 1 <= train_len <= rank:
        raise ValueError(
            f"train_len must lie in [1, rank]; got {train_len} with rank {rank}"
        )
