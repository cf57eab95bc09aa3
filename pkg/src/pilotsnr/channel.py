"""Spatially correlated block-fading channel model.

The downlink channel is a first-order Gauss-Markov process on the reduced
coordinates of the transmit correlation matrix: an eigendecomposition
``R = U diag(lam) U^H`` defines the subspace, the reduced channel starts at
``CN(0, diag(lam))`` and evolves as

    g[l+1] = a * g[l] + sqrt(1 - a^2) * e[l],   e[l] ~ CN(0, diag(lam)),

which keeps ``diag(lam)`` as the stationary covariance for any ``a`` in
[0, 1]. The temporal coefficient ``a`` follows Jakes' model, evaluated at the
lag of one whole block of symbols.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import j0

from ._linalg import check_finite, is_exactly_hermitian

SPEED_OF_LIGHT_M_S = 2.99792458e8

# Relative floor below which a clipped eigenvalue counts as numerically zero.
_PSD_TOL = 1e-10


@dataclass(frozen=True)
class SpatialCorrelation:
    """Transmit-side channel correlation matrix.

    Attributes:
        matrix: Hermitian positive semidefinite matrix, one row/column per
            transmit antenna.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValueError("correlation matrix must be square and non-empty")
        check_finite("correlation matrix", m)
        if not is_exactly_hermitian(m):
            raise ValueError("correlation matrix must be Hermitian as stored")
        w = np.linalg.eigvalsh(m)
        if w[0] < -_PSD_TOL * max(float(w[-1]), 0.0):
            raise ValueError(
                f"correlation matrix is not PSD (min eigenvalue {w[0]:.3e})"
            )
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_antennas(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class ChannelSubspace:
    """Eigenbasis of the correlation matrix restricted to nonzero modes.

    Attributes:
        basis: semi-unitary matrix whose columns span the channel subspace
            (n_antennas x rank).
        eigenvalues: strictly positive mode powers, non-increasing.
        fading_coeff: per-block temporal correlation, in [0, 1].
    """

    basis: np.ndarray
    eigenvalues: np.ndarray
    fading_coeff: float

    def __post_init__(self):
        u = np.asarray(self.basis)
        lam = np.asarray(self.eigenvalues, dtype=float)
        if u.ndim != 2 or lam.ndim != 1 or u.shape[1] != lam.size:
            raise ValueError("basis and eigenvalues have inconsistent shapes")
        check_finite("subspace", u, lam)
        gram = u.conj().T @ u
        if np.max(np.abs(gram - np.eye(lam.size))) > 1e-12:
            raise ValueError("basis columns are not orthonormal")
        if np.any(lam <= 0):
            raise ValueError("eigenvalues must be strictly positive")
        if np.any(np.diff(lam) > 0):
            raise ValueError("eigenvalues must be non-increasing")
        if not 0.0 <= self.fading_coeff <= 1.0:
            raise ValueError(
                f"fading_coeff must lie in [0, 1], got {self.fading_coeff}"
            )
        u = u.copy()
        lam = lam.copy()
        u.setflags(write=False)
        lam.setflags(write=False)
        object.__setattr__(self, "basis", u)
        object.__setattr__(self, "eigenvalues", lam)

    @property
    def rank(self) -> int:
        return self.eigenvalues.size

    @property
    def n_antennas(self) -> int:
        return self.basis.shape[0]


@dataclass(frozen=True)
class ChannelState:
    """Reduced channel vector at one fading block."""

    g: np.ndarray
    block_index: int

    def __post_init__(self):
        g = np.asarray(self.g, dtype=complex)
        if g.ndim != 1:
            raise ValueError("channel state must be a vector")
        check_finite("channel state", g)
        if self.block_index < 0:
            raise ValueError("block_index must be non-negative")
        g = g.copy()
        g.setflags(write=False)
        object.__setattr__(self, "g", g)


@dataclass(frozen=True)
class JakesParams:
    """Inputs of the Jakes temporal-correlation model.

    Attributes:
        carrier_freq_hz: carrier frequency (Hz).
        symbol_duration_s: duration of one symbol (s).
        block_len: symbols per fading block; correlation is evaluated at a
            one-block lag.
        speed_ms: terminal speed (m/s).
    """

    carrier_freq_hz: float
    symbol_duration_s: float
    block_len: int
    speed_ms: float

    def __post_init__(self):
        for name in ("carrier_freq_hz", "symbol_duration_s"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be finite and positive")
        if self.block_len < 1:
            raise ValueError("block_len must be a positive integer")
        if not np.isfinite(self.speed_ms) or self.speed_ms < 0:
            raise ValueError("speed_ms must be finite and non-negative")

    @property
    def doppler_hz(self) -> float:
        return self.speed_ms * self.carrier_freq_hz / SPEED_OF_LIGHT_M_S


def build_exponential_correlation(n_antennas: int, r: float) -> SpatialCorrelation:
    """Exponential correlation profile: entry (i, j) equals r^(2|i-j|).

    Args:
        n_antennas: array size, >= 1.
        r: correlation parameter, 0 <= r < 1.

    Returns:
        SpatialCorrelation with unit diagonal.
    """
    if n_antennas < 1:
        raise ValueError("n_antennas must be >= 1")
    if not 0.0 <= r < 1.0:
        raise ValueError(f"r must lie in [0, 1), got {r}")
    idx = np.arange(n_antennas)
    matrix = (r * r) ** np.abs(idx[:, None] - idx[None, :])
    return SpatialCorrelation(matrix)


def eigen_subspace(
    corr: SpatialCorrelation, fading_coeff: float, rank_tol: float = 1e-10
) -> ChannelSubspace:
    """Extract the nonzero eigenmodes of a correlation matrix.

    Eigenpairs are sorted by non-increasing eigenvalue (stable for ties) and
    modes with ``lam <= rank_tol * lam_max`` are dropped. The retained pairs
    must reconstruct the input up to the discarded tail.

    Raises:
        ValueError: if no eigenvalue is positive, or rank_tol is outside
            (0, 1).
    """
    if not 0.0 < rank_tol < 1.0:
        raise ValueError("rank_tol must lie in (0, 1)")
    m = corr.matrix
    w, v = np.linalg.eigh(m)
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    if w[0] <= 0:
        raise ValueError("correlation matrix has no positive eigenvalue")
    keep = w > rank_tol * w[0]
    dropped = np.abs(w[~keep])
    recon = (v[:, keep] * w[keep]) @ v[:, keep].conj().T
    norm = np.linalg.norm(m)
    bound = np.linalg.norm(dropped) + 1e-10 * norm
    err = np.linalg.norm(recon - m)
    if err > bound:
        raise ValueError(
            f"retained modes do not reconstruct the input ({err:.3e} > {bound:.3e})"
        )
    return ChannelSubspace(
        basis=v[:, keep], eigenvalues=w[keep], fading_coeff=fading_coeff
    )


def jakes_coefficient(params: JakesParams) -> float:
    """Per-block temporal correlation J_0(2 pi f_d T_s T).

    Returns the raw Bessel value; for fast fading it can be negative, in
    which case it is not a valid ``fading_coeff`` and callers must reject it.
    """
    x = (
        2.0
        * np.pi
        * params.doppler_hz
        * params.symbol_duration_s
        * params.block_len
    )
    return float(j0(x))


def standard_circular(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard circularly symmetric complex Gaussian draws, CN(0, 1)."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def sample_complex_gaussian(
    cov: np.ndarray, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Columns drawn i.i.d. from CN(0, cov).

    Uses the eigendecomposition square root so rank-deficient covariances
    are handled exactly (negative round-off eigenvalues are clipped at zero).

    Returns:
        Array of shape (cov.shape[0], size).
    """
    cov = np.asarray(cov)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError("cov must be square")
    w, v = np.linalg.eigh(0.5 * (cov + cov.conj().T))
    w = np.clip(w, 0.0, None)
    root = v * np.sqrt(w)
    return root @ standard_circular(rng, (cov.shape[0], size))


def sample_initial(sub: ChannelSubspace, rng: np.random.Generator) -> ChannelState:
    """Draw the block-0 reduced channel from the stationary law CN(0, diag(lam))."""
    g = np.sqrt(sub.eigenvalues) * standard_circular(rng, sub.rank)
    return ChannelState(g=g, block_index=0)


def evolve(
    state: ChannelState, sub: ChannelSubspace, rng: np.random.Generator
) -> ChannelState:
    """Advance the reduced channel by one block of the Gauss-Markov recursion."""
    if state.g.size != sub.rank:
        raise ValueError("state dimension does not match subspace rank")
    a = sub.fading_coeff
    innovation = np.sqrt(sub.eigenvalues) * standard_circular(rng, sub.rank)
    g = a * state.g + np.sqrt(1.0 - a * a) * innovation
    return ChannelState(g=g, block_index=state.block_index + 1)


def lift(state: ChannelState, sub: ChannelSubspace) -> np.ndarray:
    """Map a reduced channel vector back to antenna coordinates."""
    if state.g.size != sub.rank:
        raise ValueError("state dimension does not match subspace rank")
    return sub.basis @ state.g
