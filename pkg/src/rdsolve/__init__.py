"""Implicit reaction-diffusion solver driven by a preconditioned primal-dual
inner iteration, with spectral preconditioner inversion and convergence-rate
utilities."""

from .grid import Field, GridSpec, SystemField, NEUMANN, PERIODIC

__all__ = ["Field", "GridSpec", "SystemField", "NEUMANN", "PERIODIC"]
__version__ = "0.1.0"
