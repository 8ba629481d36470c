"""Boundary equilibrium bifurcations of regularized piecewise-smooth planar systems."""
from .model import (ARCTAN, ALGEBRAIC_SIGMOID, NormalFormParams, Theta, direct_tail,
                    full_field, validate_params)

__all__ = ["ARCTAN", "ALGEBRAIC_SIGMOID", "NormalFormParams", "Theta", "direct_tail",
           "full_field", "validate_params"]
