"""Trajectory diagnostics: front radius, crossing times, discrete energy."""

from dataclasses import dataclass

import numpy as np

from .grid import PERIODIC, Field
from .models import double_well


class FrontVanished(RuntimeError):
    """The zero level set is gone from the sampled ray."""


@dataclass(frozen=True)
class FrontSeries:
    """Front radius against time, with finite-difference speeds."""

    times: np.ndarray
    radii: np.ndarray
    speeds: np.ndarray

    @classmethod
    def from_radii(cls, times, radii) -> "FrontSeries":
        times = np.asarray(times, dtype=float)
        radii = np.asarray(radii, dtype=float)
        if times.ndim != 1 or times.shape != radii.shape:
            raise ValueError("times and radii must be 1-d arrays of equal length")
        if times.size < 2:
            raise ValueError("need at least two samples to differentiate")
        if np.any(radii < 0.0):
            raise ValueError("radii must be nonnegative")
        return cls(times, radii, np.gradient(radii, times))


def _nearest_node(spec, x, y):
    j = int(round((x - spec.origin[0]) / spec.h_x))
    i = int(round((y - spec.origin[1]) / spec.h_x))
    if not (0 <= i < spec.n_x and 0 <= j < spec.n_x):
        raise ValueError(f"probe ({x:g}, {y:g}) lies outside the grid")
    return i, j


def zero_level_radius(u: Field, center) -> float:
    """Zero-crossing distance along the +x ray from ``center``.

    Walks the grid row through the node nearest ``center``, rightward from
    that node, and linearly interpolates between the first adjacent pair of
    values with opposite signs.  The distance is measured from ``center``
    itself, so an off-node center does not bias the radius by a fraction
    of h_x.

    Raises
    ------
    FrontVanished
        If the values along the ray never change sign.
    """
    cx, cy = center
    spec = u.spec
    i0, j0 = _nearest_node(spec, cx, cy)
    row = u.grid()[i0]
    for j in range(j0, spec.n_x - 1):
        a = row[j]
        b = row[j + 1]
        x_j = spec.origin[0] + j * spec.h_x
        if a == 0.0:
            return x_j - cx
        if a * b < 0.0:
            return x_j + spec.h_x * a / (a - b) - cx
    if row[-1] == 0.0:
        return spec.origin[0] + (spec.n_x - 1) * spec.h_x - cx
    raise FrontVanished("front vanished")


def sign_crossing_time(report, probe) -> tuple[float, float]:
    """Bracket the first sign change of the probed nodal value.

    Scans the report's snapshots in order at the grid node nearest
    ``probe`` (component 0 for systems) and returns the consecutive pair
    of snapshot times between which the value flips sign.
    """
    snaps = report.snapshots
    if len(snaps) < 2:
        raise ValueError("need at least two snapshots to bracket a crossing")
    spec = snaps[0][1].spec
    i, j = _nearest_node(spec, probe[0], probe[1])
    times = [t for t, _ in snaps]
    values = [s.components[0].grid()[i, j] for _, s in snaps]
    for k in range(len(values) - 1):
        flips = values[k] * values[k + 1] < 0.0
        lands = values[k] != 0.0 and values[k + 1] == 0.0
        if flips or lands:
            return times[k], times[k + 1]
    raise ValueError(f"no sign change at the node nearest ({probe[0]:g}, {probe[1]:g})")


def discrete_energy(u: Field, a, b) -> float:
    """h_x**2 * sum of 0.5*a*|forward-difference grad u|**2 + b*W(u).

    Periodic grids difference across the wrap; Neumann grids difference
    interior pairs only.
    """
    g = u.grid()
    h = u.spec.h_x
    if u.spec.bc == PERIODIC:
        dx = (np.roll(g, -1, axis=1) - g) / h
        dy = (np.roll(g, -1, axis=0) - g) / h
    else:
        dx = (g[:, 1:] - g[:, :-1]) / h
        dy = (g[1:, :] - g[:-1, :]) / h
    grad_sq = np.sum(dx**2) + np.sum(dy**2)
    return float(h**2 * (0.5 * a * grad_sq + b * np.sum(double_well(g))))


def save_front_csv(path, series: FrontSeries) -> None:
    """Write a (time, radius, speed) CSV with a header row."""
    rows = np.column_stack([series.times, series.radii, series.speeds])
    np.savetxt(path, rows, delimiter=",", header="time,radius,speed", comments="", fmt="%.17g")


def save_energy_csv(path, times, energies, masses) -> None:
    """Write a (time, energy, mass) CSV with a header row."""
    rows = np.column_stack([np.asarray(times), np.asarray(energies), np.asarray(masses)])
    np.savetxt(path, rows, delimiter=",", header="time,energy,mass", comments="", fmt="%.17g")
