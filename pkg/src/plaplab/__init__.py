"""Numerical laboratory for the p-Laplace system in divergence form.

Building blocks: exact tensor nonlinearities (fluxmaps), uniform P1
triangulations with ball queries (grid), a damped Kacanov solver (solver),
discrete sharp maximal operators (maximal), exact rearrangement and Young
function calculus (rearrange), oscillation seminorms and potentials
(oscillation), and the experiment runner (lab).
"""

from .fluxmaps import Exponent, ShiftedPower, a_map, a_inverse, v_map
from .grid import ElemField, Mesh, NodalField, gradient, integrate
from .solver import DirichletProblem, SolverConfig, Solution, solve, solve_pharmonic

__all__ = [
    "Exponent", "ShiftedPower", "a_map", "a_inverse", "v_map",
    "Mesh", "NodalField", "ElemField", "gradient", "integrate",
    "DirichletProblem", "SolverConfig", "Solution", "solve", "solve_pharmonic",
]

__version__ = "0.1.0"
