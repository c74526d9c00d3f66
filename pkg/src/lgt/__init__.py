"""Numerical toolkit for weighted norm inequalities on Lorentz-Gamma spaces."""

__version__ = "0.1.0"
