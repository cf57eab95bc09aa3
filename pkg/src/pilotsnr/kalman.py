"""Kalman tracking of the reduced channel from pilot observations.

One fading block produces ``y = S^H g + n`` with ``n ~ CN(0, noise_var I)``.
The measurement update is the standard gain form

    K      = P S (noise_var I + S^H P S)^-1
    g_filt = g_pred + K (y - S^H g_pred)
    P_filt = (I - K S^H) P

with the innovation system solved by Cholesky factorization on the small
(train_len x train_len) side, and the time update follows the Gauss-Markov
recursion ``g_pred = a g_filt``, ``P_pred = a^2 P_filt + (1 - a^2) diag(lam)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ._linalg import check_finite, hermitian_part
from .channel import ChannelState, ChannelSubspace, standard_circular

_COV_PSD_TOL = 1e-10
_COV_HERM_TOL = 1e-12


def _check_cov(name: str, cov: np.ndarray) -> np.ndarray:
    cov = np.asarray(cov, dtype=complex)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError(f"{name} covariance must be square")
    check_finite(name, cov)
    scale = max(float(np.max(np.abs(cov))), 1.0)
    if np.max(np.abs(cov - cov.conj().T)) > _COV_HERM_TOL * scale:
        raise ValueError(f"{name} covariance is not Hermitian")
    cov = hermitian_part(cov)
    w = np.linalg.eigvalsh(cov)
    if w[0] < -_COV_PSD_TOL * max(float(w[-1]), 0.0):
        raise ValueError(f"{name} covariance is not PSD (min eig {w[0]:.3e})")
    return cov


@dataclass(frozen=True)
class KalmanBelief:
    """Predicted estimate and error covariance before observing a block."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=complex)
        if mean.ndim != 1:
            raise ValueError("belief mean must be a vector")
        check_finite("belief mean", mean)
        cov = _check_cov("belief", self.cov)
        if cov.shape[0] != mean.size:
            raise ValueError("belief mean/cov size mismatch")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class KalmanPosterior(KalmanBelief):
    """Filtered estimate and error covariance after the measurement update."""


@dataclass(frozen=True)
class Observation:
    """Received pilot samples of one block plus their noise variance."""

    y: np.ndarray
    noise_var: float

    def __post_init__(self):
        y = np.asarray(self.y, dtype=complex)
        if y.ndim != 1:
            raise ValueError("observation must be a vector")
        check_finite("observation", y)
        if not np.isfinite(self.noise_var) or self.noise_var <= 0:
            raise ValueError("noise_var must be finite and positive")
        object.__setattr__(self, "y", y)


def initial_belief(sub: ChannelSubspace) -> KalmanBelief:
    """Stationary prior: zero mean, covariance diag(lam)."""
    return KalmanBelief(
        mean=np.zeros(sub.rank, dtype=complex), cov=np.diag(sub.eigenvalues)
    )


def simulate_observation(
    state: ChannelState,
    pilot_symbols: np.ndarray,
    noise_var: float,
    rng: np.random.Generator,
) -> Observation:
    """Generate ``y = S^H g + n`` for one block."""
    s = np.asarray(pilot_symbols)
    if s.ndim != 2 or s.shape[0] != state.g.size:
        raise ValueError("pilot matrix does not match channel dimension")
    if not np.isfinite(noise_var) or noise_var <= 0:
        raise ValueError("noise_var must be finite and positive")
    noise = np.sqrt(noise_var) * standard_circular(rng, s.shape[1])
    return Observation(y=s.conj().T @ state.g + noise, noise_var=noise_var)


def update(
    belief: KalmanBelief, pilot_symbols: np.ndarray, obs: Observation
) -> KalmanPosterior:
    """Measurement update for one block of pilots."""
    s = np.asarray(pilot_symbols, dtype=complex)
    if s.ndim != 2 or s.shape[0] != belief.dim or s.shape[1] != obs.y.size:
        raise ValueError("pilot/observation dimensions do not match the belief")
    check_finite("pilot", s)
    p = belief.cov
    sh_p = s.conj().T @ p
    innov_cov = hermitian_part(obs.noise_var * np.eye(s.shape[1]) + sh_p @ s)
    factor = cho_factor(innov_cov, lower=True)
    gain = cho_solve(factor, sh_p).conj().T
    mean = belief.mean + gain @ (obs.y - s.conj().T @ belief.mean)
    cov = hermitian_part((np.eye(belief.dim) - gain @ s.conj().T) @ p)
    post = KalmanPosterior(mean=mean, cov=cov)
    tr_pred = float(np.trace(p).real)
    tr_filt = float(np.trace(post.cov).real)
    if tr_filt > tr_pred * (1.0 + 1e-12) + 1e-15:
        raise RuntimeError(
            f"measurement update increased uncertainty: {tr_filt} > {tr_pred}"
        )
    return post


def predict(post: KalmanPosterior, sub: ChannelSubspace) -> KalmanBelief:
    """Time update through the Gauss-Markov transition."""
    if post.dim != sub.rank:
        raise ValueError("posterior dimension does not match subspace rank")
    a = sub.fading_coeff
    cov = a * a * post.cov + (1.0 - a * a) * np.diag(sub.eigenvalues)
    return KalmanBelief(mean=a * post.mean, cov=hermitian_part(cov))


def nmse(state: ChannelState, post: KalmanPosterior) -> float:
    """Squared estimation error normalized by the true channel energy."""
    if state.g.size != post.dim:
        raise ValueError("state/posterior dimension mismatch")
    energy = float(np.vdot(state.g, state.g).real)
    if energy == 0.0:
        raise ValueError("true channel is zero; NMSE undefined")
    err = state.g - post.mean
    return float(np.vdot(err, err).real) / energy


def batch_mmse_oracle(
    pilots: list[np.ndarray],
    observations: list[Observation],
    sub: ChannelSubspace,
    block_index: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Joint-Gaussian conditional of g[l] given all observations up to l.

    Direct dense conditioning, cubic in the stacked observation length;
    intended as a small-scale reference for the recursive filter, not for
    production runs.

    Returns:
        (mean, cov) of g[block_index] given y[0..block_index].

    Raises:
        ValueError: if the history length does not equal block_index + 1.
    """
    n_hist = block_index + 1
    if len(pilots) != n_hist or len(observations) != n_hist:
        raise ValueError(
            f"history length mismatch: expected {n_hist} blocks, "
            f"got {len(pilots)} pilots / {len(observations)} observations"
        )
    a = sub.fading_coeff
    lam = sub.eigenvalues
    widths = [np.asarray(s).shape[1] for s in pilots]
    offsets = np.concatenate(([0], np.cumsum(widths)))
    total = offsets[-1]
    cov_yy = np.zeros((total, total), dtype=complex)
    cov_gy = np.zeros((sub.rank, total), dtype=complex)
    y_stack = np.concatenate([obs.y for obs in observations])
    for j, s_j in enumerate(pilots):
        s_j = np.asarray(s_j, dtype=complex)
        sl_j = slice(offsets[j], offsets[j + 1])
        cov_gy[:, sl_j] = (a ** abs(block_index - j)) * (lam[:, None] * s_j)
        for k, s_k in enumerate(pilots):
            s_k = np.asarray(s_k, dtype=complex)
            sl_k = slice(offsets[k], offsets[k + 1])
            block = (a ** abs(j - k)) * (s_j.conj().T @ (lam[:, None] * s_k))
            if j == k:
                block = block + observations[j].noise_var * np.eye(widths[j])
            cov_yy[sl_j, sl_k] = block
    solved = np.linalg.solve(cov_yy, np.concatenate([y_stack[:, None], cov_gy.conj().T], axis=1))
    mean = cov_gy @ solved[:, 0]
    cov = np.diag(lam) - cov_gy @ solved[:, 1:]
    return mean, hermitian_part(cov)
