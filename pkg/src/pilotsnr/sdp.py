"""Projected-gradient solver for trace-inverse minimization.

Solves the convex relaxation of the pilot-design problem,

    minimize    Tr(A (B + X)^-1)
    subject to  X >= 0 (PSD),  Tr(X) <= budget,

with projected gradient descent: gradient ``-(B+X)^-1 A (B+X)^-1``,
Barzilai-Borwein trial steps safeguarded by Armijo backtracking on the
gradient mapping, and Euclidean projection onto the feasible set by
eigenvalue clipping plus a simplex water-level shift. Each accepted iterate
is feasible and decreases the objective. A first-order KKT certificate
(stationarity, dual feasibility, complementary slackness) is evaluated as a
single scaled residual every iteration; the solver stops once the residual
passes the configured tolerance and reports convergence from that residual
alone. Objective stagnation (relative change below ``rel_obj_tol`` on
several consecutive steps) and ``max_iters`` bound the run when the
tolerance is unreachable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ._linalg import check_finite, hermitian_part
from .snr import DesignObjective

# Relative slack accepted on the trace bound and PSD cone when checking
# feasibility of externally supplied points.
_FEAS_TOL = 1e-9

# Consecutive sub-rel_obj_tol steps treated as stagnation.
_STALL_LIMIT = 25

# Safeguard interval for Barzilai-Borwein trial steps.
_STEP_MIN = 1e-12
_STEP_MAX = 1e12


@dataclass(frozen=True)
class SolverConfig:
    """Tuning knobs of the projected-gradient solver."""

    max_iters: int = 2000
    rel_obj_tol: float = 1e-9
    kkt_tol: float = 1e-6
    initial_step: float = 1.0
    backtrack_factor: float = 0.5
    armijo_c: float = 1e-4

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        for name in ("rel_obj_tol", "kkt_tol", "initial_step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if not 0.0 < self.armijo_c < 1.0:
            raise ValueError("armijo_c must lie in (0, 1)")


@dataclass(frozen=True)
class SolverResult:
    """Final iterate and convergence diagnostics."""

    solution: np.ndarray
    objective: float
    iterations: int
    kkt_residual: float
    converged: bool


def project_feasible(x: np.ndarray, budget: float) -> np.ndarray:
    """Frobenius projection onto {X PSD, Tr(X) <= budget}.

    Because the constraint set is unitarily invariant, the projection acts on
    eigenvalues only: negative ones are clipped, and if the trace bound is
    exceeded a uniform water-level shift projects them onto the simplex.
    """
    if not np.isfinite(budget) or budget <= 0:
        raise ValueError("budget must be finite and positive")
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError("matrix must be square")
    check_finite("projection input", x)
    return _project(hermitian_part(x), budget)


def _project(xh: np.ndarray, budget: float) -> np.ndarray:
    w, v = np.linalg.eigh(xh)
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if total > budget:
        u = np.sort(w)[::-1]
        cum = np.cumsum(u) - budget
        j = np.arange(1, u.size + 1)
        rho = np.max(j[u - cum / j > 0])
        tau = cum[rho - 1] / rho
        w = np.maximum(w - tau, 0.0)
    return hermitian_part((v * w) @ v.conj().T)


def _value(base, weight, x):
    m = hermitian_part(base + x)
    factor = cho_factor(m, lower=True)
    solved = cho_solve(factor, weight)
    return float(np.trace(solved).real), factor, solved


def _descent_direction(factor, solved):
    """G = (B+X)^-1 A (B+X)^-1, the negated objective gradient."""
    return hermitian_part(cho_solve(factor, solved.conj().T).conj().T)


def _certificate(grad_neg, x, budget):
    """KKT residual from the negated gradient at a feasible point."""
    g_norm = float(np.linalg.norm(grad_neg))
    lam_max = float(np.linalg.eigvalsh(grad_neg)[-1])
    trace_x = float(np.trace(x).real)
    if trace_x >= budget * (1.0 - 1e-8) and trace_x > 0:
        mu = float(np.trace(grad_neg @ x).real) / trace_x
    else:
        mu = 0.0
    stationarity = float(
        np.linalg.norm(grad_neg @ x - mu * x)
    ) / (1.0 + g_norm)
    dual_feas = max(0.0, lam_max - mu) / (1.0 + lam_max)
    comp_slack = abs(mu * (trace_x - budget)) / (1.0 + budget)
    return max(stationarity, dual_feas, comp_slack)


def kkt_residual(obj: DesignObjective, x: np.ndarray) -> float:
    """Scaled first-order optimality residual of a feasible point.

    Raises:
        ValueError: if ``x`` is not feasible within a 1e-9 relative slack.
    """
    x = np.asarray(x, dtype=complex)
    if x.shape != obj.base.shape:
        raise ValueError("matrix has the wrong shape")
    check_finite("kkt input", x)
    scale = max(float(np.max(np.abs(x))), 1.0)
    if np.max(np.abs(x - x.conj().T)) > 1e-9 * scale:
        raise ValueError("matrix is not Hermitian")
    xh = hermitian_part(x)
    w = np.linalg.eigvalsh(xh)
    if w[0] < -_FEAS_TOL * max(float(w[-1]), 1.0):
        raise ValueError(f"matrix is not PSD (min eig {w[0]:.3e})")
    trace_x = float(np.trace(xh).real)
    if trace_x > obj.budget * (1.0 + _FEAS_TOL):
        raise ValueError(f"trace {trace_x} exceeds the budget {obj.budget}")
    _, factor, solved = _value(obj.base, obj.weight, xh)
    return _certificate(_descent_direction(factor, solved), xh, obj.budget)


def solve_trace_inverse_sdp(
    obj: DesignObjective, config: SolverConfig | None = None
) -> SolverResult:
    """Minimize Tr(weight (base + X)^-1) over the trace-bounded PSD cone.

    Starts from the uniform feasible matrix ``(budget/n) I``; the first trial
    step is ``initial_step`` and subsequent trials use the Barzilai-Borwein
    spectral estimate, each cut back by ``backtrack_factor`` until the Armijo
    decrease holds. ``converged`` reflects the final KKT residual only.
    """
    cfg = config or SolverConfig()
    n = obj.dim
    budget = obj.budget
    base, weight = obj.base, obj.weight
    x = (budget / n) * np.eye(n)
    fval, factor, solved = _value(base, weight, x)
    grad_neg = _descent_direction(factor, solved)
    trial = cfg.initial_step
    iterations = 0
    stalled = 0
    for _ in range(cfg.max_iters):
        residual = _certificate(grad_neg, x, budget)
        if residual <= cfg.kkt_tol:
            break
        step = trial
        accepted = False
        while step > 1e-18:
            cand = _project(x + step * grad_neg, budget)
            diff = cand - x
            dist2 = float(np.linalg.norm(diff) ** 2)
            if dist2 == 0.0:
                break
            f_cand, factor_cand, solved_cand = _value(base, weight, cand)
            if f_cand <= fval - cfg.armijo_c / step * dist2:
                accepted = True
                break
            step *= cfg.backtrack_factor
        if not accepted:
            break
        if f_cand > fval + 1e-12 * max(1.0, abs(fval)):
            raise RuntimeError("projected gradient step increased the objective")
        grad_neg_new = _descent_direction(factor_cand, solved_cand)
        # BB1 spectral step from the accepted displacement/curvature pair.
        denom = float(np.sum((diff.conj() * (grad_neg - grad_neg_new)).real))
        if denom > 0.0:
            trial = min(max(dist2 / denom, _STEP_MIN), _STEP_MAX)
        else:
            trial = cfg.initial_step
        rel_change = abs(fval - f_cand) / max(1.0, abs(fval))
        x, fval, factor, solved = cand, f_cand, factor_cand, solved_cand
        grad_neg = grad_neg_new
        iterations += 1
        stalled = stalled + 1 if rel_change < cfg.rel_obj_tol else 0
        if stalled >= _STALL_LIMIT:
            break
    residual = _certificate(grad_neg, x, budget)
    return SolverResult(
        solution=x,
        objective=fval,
        iterations=iterations,
        kkt_residual=float(residual),
        converged=bool(residual <= cfg.kkt_tol),
    )
