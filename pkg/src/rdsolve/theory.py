"""Linear convergence-rate predictions for the preconditioned saddle-point iteration.

For an affine residual F(U) = AU - b with symmetric nonsingular A, the
primal-dual update with extrapolated dual is a fixed linear recursion whose
iteration matrix has a per-mode spectral radius with a closed form. This
module evaluates that closed form, the optimal stepsize product, and the
resulting best rate as a function of the condition number, and provides a
rate estimator for measured residual traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_ETA_SUP = float(np.nextafter(4.0 / 3.0, 0.0))


def rate_function(t):
    """Per-mode convergence factor f(t) for normalized stepsize product t.

    f(t) = sqrt(1 - t) on [0, 1] and t - 1 + sqrt(t^2 - t) beyond; f < 1
    exactly for 0 < t < 4/3. Accepts scalars or arrays, t >= 0.
    """
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0):
        raise ValueError("rate_function requires t >= 0")
    below = np.sqrt(np.clip(1.0 - arr, 0.0, None))
    above = arr - 1.0 + np.sqrt(np.clip(arr * arr - arr, 0.0, None))
    out = np.where(arr <= 1.0, below, above)
    return float(out) if np.isscalar(t) or arr.ndim == 0 else out


def spectral_radius_M(eigs, tau_u: float, tau_p: float) -> float:
    """Predicted spectral radius max_k f(tau_u tau_p lambda_k^2).

    eigs are the eigenvalues of the (symmetric) residual matrix A. A zero
    eigenvalue means the fixed point is not unique, so it is rejected.
    """
    eigs = np.asarray(eigs, dtype=float)
    if np.any(eigs == 0.0):
        raise ValueError("singular A: zero eigenvalue has no convergent mode")
    return float(np.max(rate_function(tau_u * tau_p * eigs**2)))


def iteration_matrix(a: np.ndarray, tau_u: float, tau_p: float, omega: float = 1.0) -> np.ndarray:
    """Dense block iteration matrix of the affine primal-dual recursion.

    With dual extrapolation weight omega the update reads
        P_{n+1} = P_n + tau_p (A U_n - b)
        U_{n+1} = U_n - tau_u A^T (P_n + (1 + omega) tau_p (A U_n - b))
    giving the block matrix
        [[I - (1+omega) tau_u tau_p A^T A,  -tau_u A^T],
         [tau_p A,                           I        ]].
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("iteration_matrix expects a square matrix")
    eye = np.eye(n)
    top = np.hstack([eye - (1.0 + omega) * tau_u * tau_p * (a.T @ a), -tau_u * a.T])
    bottom = np.hstack([tau_p * a, eye])
    return np.vstack([top, bottom])


def eta_star(kappa: float) -> float:
    """Optimal normalized stepsize product on [1, 4/3).

    Closed-form root of sqrt(1 - eta/kappa^2) = eta - 1 + sqrt(eta^2 - eta),
    the balance point where the slowest and fastest modes contract equally.
    """
    if kappa < 1.0:
        raise ValueError("condition number must be >= 1")
    k2 = kappa * kappa
    denom = (0.75 * k2 + 1.5 - 0.25 / k2) + (kappa - 1.0) / (2.0 * kappa) * math.sqrt(
        (kappa - 1.0) * (3.0 * kappa + 1.0)
    ) * math.sqrt(0.75 * k2 + 1.5 + 2.0 * kappa - 0.25 / k2)
    # the gap to 4/3 shrinks like 8/(27 kappa^2) and drops below double
    # resolution near kappa ~ 1e8; clamp so the range [1, 4/3) stays true
    return min(max(2.0 * k2 / denom, 1.0), _ETA_SUP)


def gamma_star(kappa: float) -> float:
    """Best achievable linear rate sqrt(1 - eta_star / kappa^2)."""
    return math.sqrt(max(0.0, 1.0 - eta_star(kappa) / (kappa * kappa)))


@dataclass(frozen=True)
class RatePrediction:
    """Optimal-stepsize summary for a given condition number."""

    kappa: float
    eta_star: float
    gamma_star: float
    tau_product_opt: float


def predict_rate(kappa: float, lambda_max: float = 1.0) -> RatePrediction:
    """Bundle eta*, gamma* and the stepsize product eta*/lambda_max^2."""
    e = eta_star(kappa)
    return RatePrediction(
        kappa=kappa,
        eta_star=e,
        gamma_star=gamma_star(kappa),
        tau_product_opt=e / lambda_max**2,
    )


def heat_condition_number(lambda_coef: float, n_x: int, h_t: float) -> float:
    """Condition number of I - lambda h_t Lap on the unit periodic grid.

    The smallest eigenvalue is 1 (constant mode); the largest comes from the
    highest resolvable frequency, giving 1 + 4 lambda n_x^2 h_t for even n_x.
    Odd n_x misses the Nyquist mode, picking up a cos^2(pi / 2 n_x) factor.
    """
    if n_x < 1:
        raise ValueError("n_x must be positive")
    peak = 4.0 * lambda_coef * n_x**2 * h_t
    if n_x % 2 == 0:
        return 1.0 + peak
    return 1.0 + peak * math.cos(math.pi / (2 * n_x)) ** 2


def fit_linear_rate(residual_norms) -> float:
    """Geometric-mean contraction ratio over the trailing half of a trace.

    Ignores the transient by fitting only entries from len//2 on; needs at
    least 10 positive entries to say anything meaningful.
    """
    arr = np.asarray(residual_norms, dtype=float)
    if arr.ndim != 1 or arr.size < 10:
        raise ValueError("need at least 10 residual norms to fit a rate")
    if np.any(arr <= 0.0):
        raise ValueError("residual norms must be positive to fit a log-linear rate")
    tail = np.log(arr[arr.size // 2 :])
    return float(np.exp((tail[-1] - tail[0]) / (tail.size - 1)))
