"""Inner solver for one implicit time step.

Drives the step equation F(U) = 0 with a preconditioned primal-dual
iteration: the dual ascends along the preconditioned residual, is
extrapolated, and the primal descends along the Jacobian-transpose
action. Stops when the scaled residual norm falls below delta, and
flags divergence or iteration exhaustion instead of looping forever.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import ModelBlowup
from .spectral import precond_solve

CONVERGED = "converged"
MAX_ITERS = "max_iters"
DIVERGED = "diverged"


@dataclass(frozen=True)
class PdhgParams:
    """Stepsizes and stopping control for the inner iteration."""

    tau_u: float
    tau_p: float
    delta: float
    omega: float = 1.0
    max_iters: int = 5000
    divergence_factor: float = 1e4

    def __post_init__(self):
        if self.tau_u <= 0 or self.tau_p <= 0:
            raise ValueError("tau_u and tau_p must be positive")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.omega < 0:
            raise ValueError("omega must be nonnegative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.divergence_factor <= 1:
            raise ValueError("divergence_factor must exceed 1")


@dataclass
class StepTrace:
    """Residual history of one inner solve; length is iterations + 1."""

    residual_norms: np.ndarray
    iterations: int
    outcome: str


def _stacked_norm(f: np.ndarray) -> float:
    # systems stop on the sum of per-component norms
    return float(sum(np.linalg.norm(f[i]) for i in range(f.shape[0])))


def residual_norm(model, u, u_prev, h_t: float) -> float:
    """Norm of the scaled residual Res(U) = F(U) / h_t."""
    return _stacked_norm(model.residual(u, u_prev, h_t)) / h_t


def pdhg_step(model, u_prev: np.ndarray, h_t: float, params: PdhgParams):
    """Advance one implicit step from u_prev; returns (u, StepTrace).

    The returned iterate is only trustworthy when the trace outcome is
    CONVERGED; callers decide whether to commit it.
    """
    if h_t <= 0:
        raise ValueError("h_t must be positive")
    u = np.array(u_prev, dtype=float, copy=True)
    p = np.zeros_like(u)
    symbol = model.precond_symbol(h_t)
    spec = model.spec

    norms = []
    outcome = MAX_ITERS
    iterations = params.max_iters
    for n in range(params.max_iters + 1):
        try:
            f = model.residual(u, u_prev, h_t)
        except ModelBlowup:
            norms.append(np.inf)
            outcome, iterations = DIVERGED, n
            break
        res = _stacked_norm(f) / h_t
        norms.append(res)
        if res <= params.delta:
            outcome, iterations = CONVERGED, n
            break
        if not np.isfinite(res) or res > params.divergence_factor * norms[0]:
            outcome, iterations = DIVERGED, n
            break
        if n == params.max_iters:
            break
        g = np.stack([precond_solve(spec, symbol[i], f[i]) for i in range(f.shape[0])])
        p_next = p + params.tau_p * g
        p_tilde = p_next + params.omega * (p_next - p)
        u = u - params.tau_u * model.jacobian_transpose_apply(u, p_tilde, h_t)
        p = p_next

    return u, StepTrace(
        residual_norms=np.asarray(norms), iterations=iterations, outcome=outcome
    )
