"""Square-grid geometry, scalar fields, norms, and field serialization.

Everything downstream (stencils, transforms, models) shares the conventions
fixed here: fields are stored as flat row-major vectors of length n_x**2,
entry (i, j) lives at flat index i*n_x + j and corresponds to the physical
point (x, y) = (origin_x + j*h_x, origin_y + i*h_x).

Periodic grids exclude the duplicate boundary node, so h_x = L/n_x.
Neumann grids place nodes on the boundary, so h_x = L/(n_x - 1).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

PERIODIC = "periodic"
NEUMANN = "neumann"

_MAGIC = b"RDF1"


@dataclass(frozen=True)
class GridSpec:
    """Geometry of the uniform n_x by n_x grid on a square domain.

    Parameters
    ----------
    side_length : float
        Physical side length L of the square domain.
    n_x : int
        Number of grid points per side (at least 2).
    bc : str
        Boundary condition, either ``"periodic"`` or ``"neumann"``.
    origin : tuple of float
        Physical coordinates of node (0, 0). Defaults to (0, 0); domains
        like [-L/2, L/2]^2 set it to the lower-left corner.
    """

    side_length: float
    n_x: int
    bc: str
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.bc not in (PERIODIC, NEUMANN):
            raise ValueError(f"bc must be '{PERIODIC}' or '{NEUMANN}', got {self.bc!r}")
        if self.n_x < 2:
            raise ValueError(f"n_x must be at least 2, got {self.n_x}")
        if not (self.side_length > 0):
            raise ValueError(f"side_length must be positive, got {self.side_length}")

    @property
    def h_x(self) -> float:
        """Grid spacing; L/n_x for periodic grids, L/(n_x - 1) for Neumann."""
        if self.bc == PERIODIC:
            return self.side_length / self.n_x
        return self.side_length / (self.n_x - 1)

    @property
    def n_nodes(self) -> int:
        return self.n_x * self.n_x


@dataclass
class Field:
    """A real scalar field stored as a flat row-major vector on a grid."""

    data: np.ndarray
    spec: GridSpec

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float).ravel()
        if self.data.size != self.spec.n_nodes:
            raise ValueError(
                f"field length {self.data.size} does not match grid "
                f"({self.spec.n_x}^2 = {self.spec.n_nodes} nodes)"
            )

    def grid(self) -> np.ndarray:
        """Return the (n_x, n_x) view of the data, rows indexed by i (y)."""
        n = self.spec.n_x
        return self.data.reshape(n, n)


@dataclass
class SystemField:
    """An ordered collection of fields sharing one grid (1 or 2 components)."""

    components: list[Field] = field(default_factory=list)

    def __post_init__(self):
        if not self.components:
            raise ValueError("SystemField needs at least one component")
        spec = self.components[0].spec
        for c in self.components[1:]:
            if c.spec != spec:
                raise ValueError("all components must share one GridSpec")

    @property
    def spec(self) -> GridSpec:
        return self.components[0].spec

    @property
    def n_components(self) -> int:
        return len(self.components)

    def stack(self) -> np.ndarray:
        """Return the (m, n_x, n_x) array of component values."""
        return np.stack([c.grid() for c in self.components])

    @classmethod
    def from_stack(cls, spec: GridSpec, values: np.ndarray) -> "SystemField":
        values = np.asarray(values, dtype=float)
        if values.ndim == 2:
            values = values[None, :, :]
        if values.ndim != 3 or values.shape[1:] != (spec.n_x, spec.n_x):
            raise ValueError(f"expected (m, {spec.n_x}, {spec.n_x}) values, got {values.shape}")
        return cls([Field(values[k].copy(), spec) for k in range(values.shape[0])])


def linear_index(spec: GridSpec, i: int, j: int) -> int:
    """Flat index of node (row i, column j); row-major, zero-based."""
    assert 0 <= i < spec.n_x and 0 <= j < spec.n_x, (i, j)
    return i * spec.n_x + j


def unindex(spec: GridSpec, l: int) -> tuple[int, int]:
    """Inverse of :func:`linear_index`."""
    assert 0 <= l < spec.n_nodes, l
    return divmod(l, spec.n_x)


def coords(spec: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Physical coordinates (X, Y) of all nodes as (n_x, n_x) arrays.

    X[i, j] = origin_x + j*h_x and Y[i, j] = origin_y + i*h_x.
    """
    ax = np.arange(spec.n_x) * spec.h_x
    x = spec.origin[0] + ax
    y = spec.origin[1] + ax
    return np.meshgrid(x, y)


def sample(spec: GridSpec, f) -> Field:
    """Evaluate a function of physical coordinates on the grid.

    Parameters
    ----------
    spec : GridSpec
    f : callable
        Vectorized function of (x, y) numpy arrays.

    Returns
    -------
    Field
        Entry (i, j) holds f(origin_x + j*h_x, origin_y + i*h_x).

    Raises
    ------
    ValueError
        If any sampled value is not finite, naming the offending node.
    """
    x, y = coords(spec)
    values = np.asarray(f(x, y), dtype=float)
    values = np.broadcast_to(values, (spec.n_x, spec.n_x))
    bad = ~np.isfinite(values)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise ValueError(f"initial data is not finite at node (i={i}, j={j})")
    return Field(values.copy(), spec)


def l2_norm(v: Field) -> float:
    """Unweighted Euclidean norm of the coefficient vector."""
    return float(np.linalg.norm(v.data))


def total_mass(v: Field) -> float:
    """h_x**2 times the sum of all entries."""
    return float(v.spec.h_x ** 2 * v.data.sum())


def save_csv(path, field_: Field) -> None:
    """Write one field as CSV, row-major with n_x columns."""
    np.savetxt(path, field_.grid(), fmt="%.17g", delimiter=",")


def load_csv(path, spec: GridSpec) -> Field:
    """Read a field written by :func:`save_csv`."""
    values = np.loadtxt(path, delimiter=",", ndmin=2)
    if values.shape != (spec.n_x, spec.n_x):
        raise ValueError(f"CSV shape {values.shape} does not match grid n_x={spec.n_x}")
    return Field(values, spec)


def save_binary(path, system: SystemField) -> None:
    """Write a system field as little-endian float64 with a 16-byte header.

    Header layout: magic ``RDF1``, u32 n_x, u32 component count, u32 reserved.
    Component data follow back to back, each row-major.
    """
    spec = system.spec
    header = _MAGIC + struct.pack("<III", spec.n_x, system.n_components, 0)
    with open(path, "wb") as fh:
        fh.write(header)
        for c in system.components:
            fh.write(np.ascontiguousarray(c.data, dtype="<f8").tobytes())


def load_binary(path, spec: GridSpec) -> SystemField:
    """Read a system field written by :func:`save_binary`."""
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:4] != _MAGIC:
            raise ValueError(f"{path}: not a field file (bad magic)")
        n_x, n_comp, _ = struct.unpack("<III", header[4:])
        if n_x != spec.n_x:
            raise ValueError(f"{path}: header n_x={n_x} does not match grid n_x={spec.n_x}")
        raw = np.frombuffer(fh.read(), dtype="<f8")
    expected = n_comp * n_x * n_x
    if raw.size != expected:
        raise ValueError(f"{path}: expected {expected} values, found {raw.size}")
    parts = raw.reshape(n_comp, n_x * n_x)
    return SystemField([Field(parts[k].copy(), spec) for k in range(n_comp)])
