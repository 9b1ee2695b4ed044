"""Magnus expansion and related Lie-group integrators for linear and
nonlinear matrix ODEs."""

__version__ = "0.1.0"
