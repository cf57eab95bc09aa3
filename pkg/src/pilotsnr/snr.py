"""Training-based received SNR and its pilot-design objective.

With a filtered channel estimate ``g_hat`` and error covariance ``P``, a unit
data symbol beamformed by ``w`` is received with

    snr(w) = gamma |w^H g_hat|^2 / (gamma w^H P w + w^H w)
           = |w^H g_hat|^2 / (w^H (P + I/gamma) w),        gamma = data SNR,

maximized by ``w* = (P + I/gamma)^-1 g_hat`` with value
``g_hat^H (P + I/gamma)^-1 g_hat``. Averaging that value over the upcoming
observation turns pilot design into minimizing ``Tr(A (B + X)^-1)`` over the
pilot Gram matrix ``X = S S^H``, where ``A = gamma (g_hat g_hat^H + P) + I``
and ``B = gamma I + P^-1`` are built from the predicted belief, and

    E[snr*] = gamma Tr(g_hat g_hat^H + P) - gamma Tr(A (B + X)^-1).

The constant in front is exposed as ``const_term``; at ``X = 0`` the
expression collapses back to the prior-only SNR, which the tests pin both
algebraically and by Monte Carlo.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ._linalg import check_finite, floored_inverse, hermitian_part
from .kalman import KalmanBelief, KalmanPosterior


@dataclass(frozen=True)
class DesignObjective:
    """Data of the pilot-design problem min Tr(weight (base + X)^-1).

    Attributes:
        weight: Hermitian positive definite numerator matrix.
        base: Hermitian positive definite offset added to the pilot Gram.
        budget: trace bound on feasible Gram matrices, > 0.
        gamma: data-phase SNR used to convert the trace objective into an
            expected received SNR.
        const_term: X-independent part of the expected received SNR.
    """

    weight: np.ndarray
    base: np.ndarray
    budget: float
    gamma: float
    const_term: float

    def __post_init__(self):
        for name in ("weight", "base"):
            m = np.asarray(getattr(self, name), dtype=complex)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError(f"{name} must be square")
            check_finite(name, m)
            scale = max(float(np.max(np.abs(m))), 1.0)
            if np.max(np.abs(m - m.conj().T)) > 1e-12 * scale:
                raise ValueError(f"{name} must be Hermitian")
            m = hermitian_part(m)
            if np.linalg.eigvalsh(m)[0] <= 0:
                raise ValueError(f"{name} must be positive definite")
            m = m.copy()
            m.setflags(write=False)
            object.__setattr__(self, name, m)
        if self.weight.shape != self.base.shape:
            raise ValueError("weight and base must have the same shape")
        if not np.isfinite(self.budget) or self.budget <= 0:
            raise ValueError("budget must be finite and positive")
        if not np.isfinite(self.gamma) or self.gamma <= 0:
            raise ValueError("gamma must be finite and positive")
        if not np.isfinite(self.const_term):
            raise ValueError("const_term must be finite")

    @property
    def dim(self) -> int:
        return self.weight.shape[0]


def optimal_beamformer(post: KalmanPosterior, gamma: float) -> np.ndarray:
    """Beamformer maximizing the training-based received SNR.

    Returns the zero vector when the estimate is zero (no preferred
    direction).
    """
    _check_gamma(gamma)
    if not np.any(post.mean):
        return np.zeros(post.dim, dtype=complex)
    m = hermitian_part(post.cov + np.eye(post.dim) / gamma)
    return cho_solve(cho_factor(m, lower=True), post.mean)


def received_snr(
    weights: np.ndarray, post: KalmanPosterior, gamma: float
) -> float:
    """Expected data SNR of an arbitrary beamformer under the posterior.

    A zero beamformer returns 0 by convention.
    """
    _check_gamma(gamma)
    w = np.asarray(weights, dtype=complex)
    if w.ndim != 1 or w.size != post.dim:
        raise ValueError("beamformer dimension does not match the posterior")
    check_finite("beamformer", w)
    if not np.any(w):
        return 0.0
    num = abs(np.vdot(w, post.mean)) ** 2
    den = float(
        np.vdot(w, (post.cov + np.eye(post.dim) / gamma) @ w).real
    )
    return num / den


def optimal_snr(post: KalmanPosterior, gamma: float) -> float:
    """Received SNR of the optimal beamformer: g^H (P + I/gamma)^-1 g."""
    _check_gamma(gamma)
    m = hermitian_part(post.cov + np.eye(post.dim) / gamma)
    val = np.vdot(post.mean, cho_solve(cho_factor(m, lower=True), post.mean))
    return max(float(val.real), 0.0)


def build_objective(
    belief: KalmanBelief, gamma: float, budget: float
) -> DesignObjective:
    """Assemble the design objective from a predicted belief.

    The predicted covariance is inverted through its eigendecomposition with
    eigenvalues floored at ``1e-12 * lam_max``, which regularizes
    near-singular beliefs; a belief with no positive eigenvalue is rejected.
    """
    _check_gamma(gamma)
    if not np.isfinite(budget) or budget <= 0:
        raise ValueError("budget must be finite and positive")
    p = belief.cov
    try:
        p_inv = floored_inverse(p)
    except ValueError:
        raise ValueError("predicted covariance is singular beyond repair")
    eye = np.eye(belief.dim)
    g = belief.mean
    weight = hermitian_part(gamma * (np.outer(g, g.conj()) + p) + eye)
    base = hermitian_part(gamma * eye + p_inv)
    const = gamma * (float(np.vdot(g, g).real) + float(np.trace(p).real))
    return DesignObjective(
        weight=weight, base=base, budget=budget, gamma=gamma, const_term=const
    )


def objective_value(obj: DesignObjective, gram: np.ndarray) -> float:
    """Evaluate Tr(weight (base + gram)^-1)."""
    x = np.asarray(gram)
    if x.shape != obj.base.shape:
        raise ValueError("gram matrix has the wrong shape")
    m = hermitian_part(obj.base + x)
    solved = cho_solve(cho_factor(m, lower=True), obj.weight)
    return float(np.trace(solved).real)


def expected_snr_analytic(obj: DesignObjective, gram: np.ndarray) -> float:
    """Expected optimal received SNR after training with Gram matrix ``gram``."""
    return obj.const_term - obj.gamma * objective_value(obj, gram)


def _check_gamma(gamma: float) -> None:
    if not np.isfinite(gamma) or gamma <= 0:
        raise ValueError("gamma must be finite and positive")
