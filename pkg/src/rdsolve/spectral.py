"""Discrete Laplacians, fast transforms, and preconditioner inversion.

The 5-point Laplacian is applied directly as a stencil (cheap and exact);
transforms are used only where they are essential, namely to invert a
polynomial-in-Laplacian preconditioner in O(n^2 log n).

Periodic grids are diagonalized by the 2-D FFT with per-axis symbol
-(4/h^2) sin^2(pi k / n). Neumann grids (reflected ghost nodes) are
diagonalized by the orthonormal 2-D DCT-II with per-axis symbol
-(4/h^2) sin^2(pi k / (2 n)). Both symbols are validated against dense
eigendecompositions in the test suite.
"""

import numpy as np
import scipy.fft

from .grid import NEUMANN, PERIODIC, GridSpec


def laplacian_eigenvalues(spec: GridSpec) -> np.ndarray:
    """Symbol of the discrete Laplacian as an (n_x, n_x) array.

    Entry (k, l) is the eigenvalue attached to transform coefficient (k, l);
    all entries are <= 0 and exactly one (the constant mode) equals 0.
    """
    n, h = spec.n_x, spec.h_x
    k = np.arange(n)
    if spec.bc == PERIODIC:
        axis = -(4.0 / h**2) * np.sin(np.pi * k / n) ** 2
    else:
        axis = -(4.0 / h**2) * np.sin(np.pi * k / (2 * n)) ** 2
    return axis[:, None] + axis[None, :]


def lap_apply(spec: GridSpec, v: np.ndarray) -> np.ndarray:
    """5-point stencil Laplacian of an (n_x, n_x) array.

    Periodic wraps the neighbor indices; Neumann reflects them (ghost value
    equal to the boundary node), which reproduces the modified diagonal
    blocks of the Neumann Laplacian matrix.
    """
    if v.shape != (spec.n_x, spec.n_x):
        raise ValueError(f"field shape {v.shape} does not match grid n_x={spec.n_x}")
    if spec.bc == PERIODIC:
        nbr = (
            np.roll(v, 1, axis=0)
            + np.roll(v, -1, axis=0)
            + np.roll(v, 1, axis=1)
            + np.roll(v, -1, axis=1)
        )
    else:
        p = np.pad(v, 1, mode="edge")
        nbr = p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:]
    return (nbr - 4.0 * v) / spec.h_x**2


def transform_forward(spec: GridSpec, v: np.ndarray) -> np.ndarray:
    """Basis change that diagonalizes the Laplacian of this grid's BC."""
    if spec.bc == PERIODIC:
        return scipy.fft.fft2(v, norm="ortho")
    return scipy.fft.dctn(v, type=2, norm="ortho")


def transform_inverse(spec: GridSpec, c: np.ndarray) -> np.ndarray:
    """Inverse of :func:`transform_forward`."""
    if spec.bc == PERIODIC:
        return scipy.fft.ifft2(c, norm="ortho")
    return scipy.fft.idctn(c, type=2, norm="ortho")


def precond_solve(spec: GridSpec, symbol: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Solve G y = r where G has the given positive transform-domain symbol."""
    if np.any(symbol <= 0):
        raise ValueError("indefinite preconditioner: symbol has entries <= 0")
    c = transform_forward(spec, r) / symbol
    y = transform_inverse(spec, c)
    return y.real if np.iscomplexobj(y) else y


class QuadraticKernel:
    """Convolution with the kernel (h_x^4 / 2) ((i-k)^2 + (j-l)^2).

    The kernel depends on index differences only, so the double sum is a
    2-D Toeplitz product, evaluated here by zero-padded FFT against a cached
    kernel transform.
    """

    def __init__(self, spec: GridSpec):
        if spec.bc != NEUMANN:
            raise ValueError("quadratic kernel convolution is defined on Neumann grids")
        self.spec = spec
        n, h = spec.n_x, spec.h_x
        d = np.arange(-(n - 1), n)
        kernel = 0.5 * h**4 * (d[:, None] ** 2 + d[None, :] ** 2)
        self._pad = scipy.fft.next_fast_len(2 * n - 1)
        self._kernel_hat = scipy.fft.rfft2(kernel, s=(self._pad, self._pad))

    def apply(self, v: np.ndarray) -> np.ndarray:
        n = self.spec.n_x
        if v.shape != (n, n):
            raise ValueError(f"field shape {v.shape} does not match grid n_x={n}")
        v_hat = scipy.fft.rfft2(v, s=(self._pad, self._pad))
        full = scipy.fft.irfft2(v_hat * self._kernel_hat, s=(self._pad, self._pad))
        return full[n - 1 : 2 * n - 1, n - 1 : 2 * n - 1]


def quadratic_kernel_convolve(spec: GridSpec, v: np.ndarray) -> np.ndarray:
    """One-shot form of :class:`QuadraticKernel` for callers without state."""
    return QuadraticKernel(spec).apply(v)


def _require_neumann(spec: GridSpec):
    if spec.bc != NEUMANN:
        raise ValueError("edge operators are defined on Neumann grids only")


def gradient_x(spec: GridSpec, v: np.ndarray) -> np.ndarray:
    """Forward differences at x-midpoints, shape (n_x, n_x + 1).

    Interior edge m holds (v[:, m] - v[:, m-1]) / h_x; the two boundary
    half-index edges copy the adjacent interior difference.
    """
    _require_neumann(spec)
    n, h = spec.n_x, spec.h_x
    e = np.empty((n, n + 1))
    e[:, 1:n] = (v[:, 1:] - v[:, :-1]) / h
    e[:, 0] = e[:, 1]
    e[:, n] = e[:, n - 1]
    return e


def gradient_x_transpose(spec: GridSpec, e: np.ndarray) -> np.ndarray:
    """Exact adjoint of :func:`gradient_x`."""
    _require_neumann(spec)
    n, h = spec.n_x, spec.h_x
    u = np.zeros((n, n))
    u[:, 1:] += e[:, 1:n] / h
    u[:, :-1] -= e[:, 1:n] / h
    u[:, 1] += e[:, 0] / h
    u[:, 0] -= e[:, 0] / h
    u[:, n - 1] += e[:, n] / h
    u[:, n - 2] -= e[:, n] / h
    return u


def gradient_y(spec: GridSpec, v: np.ndarray) -> np.ndarray:
    """y-direction analogue of :func:`gradient_x`, shape (n_x + 1, n_x)."""
    return gradient_x(spec, v.T).T


def gradient_y_transpose(spec: GridSpec, e: np.ndarray) -> np.ndarray:
    return gradient_x_transpose(spec, e.T).T


def midpoint_average_x(spec: GridSpec, v: np.ndarray) -> np.ndarray:
    """Mean of adjacent nodes at x-midpoints; boundary edges copy the node."""
    _require_neumann(spec)
    n = spec.n_x
    e = np.empty((n, n + 1))
    e[:, 1:n] = 0.5 * (v[:, 1:] + v[:, :-1])
    e[:, 0] = v[:, 0]
    e[:, n] = v[:, n - 1]
    return e


def midpoint_average_x_transpose(spec: GridSpec, e: np.ndarray) -> np.ndarray:
    """Exact adjoint of :func:`midpoint_average_x`."""
    _require_neumann(spec)
    n = spec.n_x
    u = np.zeros((n, n))
    u[:, 1:] += 0.5 * e[:, 1:n]
    u[:, :-1] += 0.5 * e[:, 1:n]
    u[:, 0] += e[:, 0]
    u[:, n - 1] += e[:, n]
    return u


def midpoint_average_y(spec: GridSpec, v: np.ndarray) -> np.ndarray:
    return midpoint_average_x(spec, v.T).T


def midpoint_average_y_transpose(spec: GridSpec, e: np.ndarray) -> np.ndarray:
    return midpoint_average_x_transpose(spec, e.T).T
