"""Implicit-step residuals, Jacobian adjoints, and preconditioner symbols.

Each model advances one backward time step of its equation: given the
previous state, the accepted new state is the root of residual(U) = 0.
Models expose three operations on stacked (n_components, n_x, n_x) arrays:

    residual(u, u_prev, h_t)            the nonlinear step equation F(U)
    jacobian_transpose_apply(u, p, h_t) the exact adjoint action dF(U)^T P
    precond_symbol(h_t)                 per-component symbol of G in the
                                        grid's transform basis

The adjoint is exact (not approximated), which the test suite checks
against central differences of the residual.
"""

from __future__ import annotations

import numpy as np

from .grid import NEUMANN, PERIODIC, GridSpec
from .spectral import (
    QuadraticKernel,
    gradient_x,
    gradient_x_transpose,
    gradient_y,
    gradient_y_transpose,
    lap_apply,
    laplacian_eigenvalues,
    midpoint_average_x,
    midpoint_average_x_transpose,
    midpoint_average_y,
    midpoint_average_y_transpose,
)


class ModelBlowup(ArithmeticError):
    """A residual evaluation produced non-finite values."""


def double_well(u):
    """W(u) = (u^2 - 1)^2 / 4."""
    return 0.25 * (u * u - 1.0) ** 2


def double_well_prime(u):
    """W'(u) = u^3 - u."""
    return u**3 - u


def _require_bc(spec: GridSpec, bc: str, model_name: str) -> None:
    if spec.bc != bc:
        raise ValueError(f"{model_name} requires {bc} boundary conditions, got {spec.bc}")


def _require_positive(**params) -> None:
    for name, value in params.items():
        if not value > 0:
            raise ValueError(f"parameter {name} must be positive, got {value}")


def _check_stack(u: np.ndarray, m: int, n: int) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (m, n, n):
        raise ValueError(f"expected state shape {(m, n, n)}, got {u.shape}")
    return u


def _mask_wall_edges_x(e: np.ndarray) -> None:
    e[:, 0] = 0.0
    e[:, -1] = 0.0


def _mask_wall_edges_y(e: np.ndarray) -> None:
    e[0, :] = 0.0
    e[-1, :] = 0.0


def _check_finite(f: np.ndarray, component: int) -> None:
    if not np.all(np.isfinite(f)):
        raise ModelBlowup(f"model blow-up: non-finite residual in component {component}")


class AllenCahn:
    """u_t = a Lap u + b (u - u^3), periodic."""

    n_components = 1

    def __init__(self, spec: GridSpec, a: float, b: float):
        _require_bc(spec, PERIODIC, "AllenCahn")
        _require_positive(a=a)
        if b < 0:
            raise ValueError(f"parameter b must be nonnegative, got {b}")
        self.spec = spec
        self.a = a
        self.b = b

    def residual(self, u, u_prev, h_t):
        u = _check_stack(u, 1, self.spec.n_x)
        u_prev = _check_stack(u_prev, 1, self.spec.n_x)
        v = u[0]
        f = v - u_prev[0] - h_t * (self.a * lap_apply(self.spec, v) + self.b * (v - v**3))
        _check_finite(f, 0)
        return f[None]

    def jacobian_transpose_apply(self, u, p, h_t):
        u = _check_stack(u, 1, self.spec.n_x)
        p = _check_stack(p, 1, self.spec.n_x)
        v, q = u[0], p[0]
        out = q - h_t * (self.a * lap_apply(self.spec, q) + self.b * (1.0 - 3.0 * v**2) * q)
        return out[None]

    def precond_symbol(self, h_t):
        lam = laplacian_eigenvalues(self.spec)
        sym = (1.0 - self.a * h_t * lam) ** 2
        return _checked_symbol(sym[None])


class CahnHilliard:
    """u_t = -a Lap^2 u + b Lap W'(u), periodic."""

    n_components = 1

    def __init__(self, spec: GridSpec, a: float, b: float):
        _require_bc(spec, PERIODIC, "CahnHilliard")
        _require_positive(a=a, b=b)
        self.spec = spec
        self.a = a
        self.b = b

    def residual(self, u, u_prev, h_t):
        u = _check_stack(u, 1, self.spec.n_x)
        u_prev = _check_stack(u_prev, 1, self.spec.n_x)
        v = u[0]
        lap_v = lap_apply(self.spec, v)
        f = (
            v
            + self.a * h_t * lap_apply(self.spec, lap_v)
            - u_prev[0]
            - h_t * lap_apply(self.spec, self.b * double_well_prime(v))
        )
        _check_finite(f, 0)
        return f[None]

    def jacobian_transpose_apply(self, u, p, h_t):
        u = _check_stack(u, 1, self.spec.n_x)
        p = _check_stack(p, 1, self.spec.n_x)
        v, q = u[0], p[0]
        lap_q = lap_apply(self.spec, q)
        out = (
            q
            + self.a * h_t * lap_apply(self.spec, lap_q)
            - h_t * self.b * (3.0 * v**2 - 1.0) * lap_q
        )
        return out[None]

    def precond_symbol(self, h_t):
        lam = laplacian_eigenvalues(self.spec)
        sym = (1.0 + self.a * h_t * lam**2) ** 2
        return _checked_symbol(sym[None])


class SixthOrder:
    """u_t = Lap (eps^2 Lap - W''(u) + eps^2) (eps^2 Lap u - W'(u)), periodic.

    Functionalized polymer free-boundary dynamics; W is the double well.
    """

    n_components = 1

    def __init__(self, spec: GridSpec, epsilon: float):
        _require_bc(spec, PERIODIC, "SixthOrder")
        _require_positive(epsilon=epsilon)
        self.spec = spec
        self.epsilon = epsilon

    def _inner(self, v):
        # w(U) = eps^2 Lap U - W'(U), the chemical-potential-like quantity
        return self.epsilon**2 * lap_apply(self.spec, v) - double_well_prime(v)

    def _middle_apply(self, v, w):
        # (eps^2 Lap - diag(W''(v)) + eps^2 I) w
        e2 = self.epsilon**2
        return e2 * lap_apply(self.spec, w) - (3.0 * v**2 - 1.0) * w + e2 * w

    def residual(self, u, u_prev, h_t):
        u = _check_stack(u, 1, self.spec.n_x)
        u_prev = _check_stack(u_prev, 1, self.spec.n_x)
        v = u[0]
        f = v - h_t * lap_apply(self.spec, self._middle_apply(v, self._inner(v))) - u_prev[0]
        _check_finite(f, 0)
        return f[None]

    def jacobian_transpose_apply(self, u, p, h_t):
        u = _check_stack(u, 1, self.spec.n_x)
        p = _check_stack(p, 1, self.spec.n_x)
        v, q = u[0], p[0]
        e2 = self.epsilon**2
        lap_q = lap_apply(self.spec, q)
        middle = self._middle_apply(v, lap_q)
        out = (
            q
            - h_t * (e2 * lap_apply(self.spec, middle) - (3.0 * v**2 - 1.0) * middle)
            + h_t * 6.0 * v * self._inner(v) * lap_q
        )
        return out[None]

    def precond_symbol(self, h_t):
        e2 = self.epsilon**2
        lam = laplacian_eigenvalues(self.spec)
        sym = (1.0 - h_t * e2 * lam**2 * (e2 * lam - (2.0 - e2))) ** 2
        return _checked_symbol(sym[None])


class Schnakenberg:
    """Activator-substrate kinetics with unequal diffusion, Neumann.

    u_t = D1 Lap u + kappa (a - u + u^2 v)
    v_t = D2 Lap v + kappa (b - u^2 v)
    """

    n_components = 2

    def __init__(self, spec: GridSpec, kappa: float, a: float, b: float, d1: float, d2: float):
        _require_bc(spec, NEUMANN, "Schnakenberg")
        _require_positive(kappa=kappa, a=a, b=b, d1=d1, d2=d2)
        self.spec = spec
        self.kappa = kappa
        self.a = a
        self.b = b
        self.d1 = d1
        self.d2 = d2

    def residual(self, u, u_prev, h_t):
        u = _check_stack(u, 2, self.spec.n_x)
        u_prev = _check_stack(u_prev, 2, self.spec.n_x)
        uu, vv = u[0], u[1]
        k = self.kappa
        f_u = uu - u_prev[0] - h_t * (
            self.d1 * lap_apply(self.spec, uu) + k * (self.a - uu + uu**2 * vv)
        )
        f_v = vv - u_prev[1] - h_t * (
            self.d2 * lap_apply(self.spec, vv) + k * (self.b - uu**2 * vv)
        )
        _check_finite(f_u, 0)
        _check_finite(f_v, 1)
        return np.stack([f_u, f_v])

    def jacobian_transpose_apply(self, u, p, h_t):
        u = _check_stack(u, 2, self.spec.n_x)
        p = _check_stack(p, 2, self.spec.n_x)
        uu, vv = u[0], u[1]
        pp, qq = p[0], p[1]
        k = self.kappa
        diff = pp - qq
        out_u = pp - h_t * (
            self.d1 * lap_apply(self.spec, pp) + k * (-pp + 2.0 * uu * vv * diff)
        )
        out_v = qq - h_t * (self.d2 * lap_apply(self.spec, qq) + k * uu**2 * diff)
        return np.stack([out_u, out_v])

    def precond_symbol(self, h_t):
        lam = laplacian_eigenvalues(self.spec)
        sym = np.stack([(1.0 - h_t * self.d1 * lam) ** 2, (1.0 - h_t * self.d2 * lam) ** 2])
        return _checked_symbol(sym)


class WolfDeer:
    """Predator-prey densities with nonlocal quadratic attraction, Neumann.

    rho_1 (deer) and rho_2 (wolves) diffuse, drift down the gradients of the
    convolved potentials Phi_1 = K(rho_1 - rho_2), Phi_2 = K(rho_1 + rho_2),
    and react through logistic growth plus saturating predation. The step
    residual discretizes div(rho grad Phi) in conservation form on cell edges
    with midpoint-averaged densities; with the forward-difference gradient D
    the discrete divergence is -D^T, so the drift enters the residual with a
    minus sign in front of the edge assembly. Wall edges carry no flux, which
    keeps the transport mass-conserving and the densities nonnegative up to
    the usual central-difference undershoot.
    """

    n_components = 2

    def __init__(self, spec: GridSpec, d: float, a: float, b: float, c: float):
        _require_bc(spec, NEUMANN, "WolfDeer")
        _require_positive(d=d, a=a, b=b, c=c)
        self.spec = spec
        self.d = d
        self.a = a
        self.b = b
        self.c = c
        self._kernel = QuadraticKernel(spec)

    def _edge_divergence(self, weight, phi):
        # D_x^T(avg_x(weight) . D_x phi) + D_y^T(avg_y(weight) . D_y phi),
        # restricted to interior edges: the wall edges carry zero flux
        s = self.spec
        ex = midpoint_average_x(s, weight) * gradient_x(s, phi)
        ey = midpoint_average_y(s, weight) * gradient_y(s, phi)
        _mask_wall_edges_x(ex)
        _mask_wall_edges_y(ey)
        return gradient_x_transpose(s, ex) + gradient_y_transpose(s, ey)

    def _reactions(self, r1, r2):
        predation = self.b * r1 * r2 / (1.0 + r1)
        return self.a * r1 * (1.0 - r1) - predation, predation - self.c * r2

    def residual(self, u, u_prev, h_t):
        u = _check_stack(u, 2, self.spec.n_x)
        u_prev = _check_stack(u_prev, 2, self.spec.n_x)
        r1, r2 = u[0], u[1]
        k1 = self._kernel.apply(r1)
        k2 = self._kernel.apply(r2)
        rc1, rc2 = self._reactions(r1, r2)
        f1 = r1 - u_prev[0] - h_t * (
            self.d * lap_apply(self.spec, r1) - self._edge_divergence(r1, k1 - k2) + rc1
        )
        f2 = r2 - u_prev[1] - h_t * (
            self.d * lap_apply(self.spec, r2) - self._edge_divergence(r2, k1 + k2) + rc2
        )
        _check_finite(f1, 0)
        _check_finite(f2, 1)
        return np.stack([f1, f2])

    def jacobian_transpose_apply(self, u, p, h_t):
        u = _check_stack(u, 2, self.spec.n_x)
        p = _check_stack(p, 2, self.spec.n_x)
        s = self.spec
        r1, r2 = u[0], u[1]
        pp, qq = p[0], p[1]
        k1 = self._kernel.apply(r1)
        k2 = self._kernel.apply(r2)
        phi1, phi2 = k1 - k2, k1 + k2

        dx_p, dy_p = gradient_x(s, pp), gradient_y(s, pp)
        dx_q, dy_q = gradient_x(s, qq), gradient_y(s, qq)
        # the drift adjoints below touch the dual only through these edge
        # gradients, so masking them here is exactly adjoint to the zero
        # wall-edge flux in the residual
        _mask_wall_edges_x(dx_p)
        _mask_wall_edges_x(dx_q)
        _mask_wall_edges_y(dy_p)
        _mask_wall_edges_y(dy_q)

        # adjoint of the drift terms splits into two parts: the potential
        # held fixed (midpoint-average transpose) and the density held
        # fixed (kernel applied to the edge divergence of the dual)
        adv1 = midpoint_average_x_transpose(s, gradient_x(s, phi1) * dx_p) + (
            midpoint_average_y_transpose(s, gradient_y(s, phi1) * dy_p)
        )
        adv2 = midpoint_average_x_transpose(s, gradient_x(s, phi2) * dx_q) + (
            midpoint_average_y_transpose(s, gradient_y(s, phi2) * dy_q)
        )
        g1 = gradient_x_transpose(s, midpoint_average_x(s, r1) * dx_p) + (
            gradient_y_transpose(s, midpoint_average_y(s, r1) * dy_p)
        )
        g2 = gradient_x_transpose(s, midpoint_average_x(s, r2) * dx_q) + (
            gradient_y_transpose(s, midpoint_average_y(s, r2) * dy_q)
        )
        kg1 = self._kernel.apply(g1)
        kg2 = self._kernel.apply(g2)

        denom = 1.0 + r1
        react_11 = self.a * (1.0 - 2.0 * r1) - self.b * r2 / denom**2
        react_12 = self.b * r1 / denom
        react_21 = self.b * r2 / denom**2
        react_22 = self.b * r1 / denom - self.c

        comp1 = (
            pp
            - h_t * (self.d * lap_apply(s, pp) - adv1 - kg1 + react_11 * pp)
            - h_t * (-kg2 + react_21 * qq)
        )
        comp2 = (
            qq
            - h_t * (self.d * lap_apply(s, qq) - adv2 - kg2 + react_22 * qq)
            - h_t * (kg1 - react_12 * pp)
        )
        return np.stack([comp1, comp2])

    def precond_symbol(self, h_t):
        lam = laplacian_eigenvalues(self.spec)
        sym = (1.0 - h_t * self.d * lam) ** 2
        return _checked_symbol(np.stack([sym, sym]))


def _checked_symbol(sym: np.ndarray) -> np.ndarray:
    if np.any(sym <= 0.0):
        raise ValueError("preconditioner symbol must be positive")
    return sym
