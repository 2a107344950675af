"""Pseudo-spectral simulator and inequality diagnostics for incompressible
viscoelastoplastic flow with a co-rotational stress rate."""

from .fields import Grid, State, Trajectory, lp_norm, inner_product_l2, h1_seminorm, deviatoric_part
from .potentials import ZeroPotential, QuadraticPotential, YieldPotential
from .solver import SolverConfig, run, step
from .scenarios import ScenarioSpec, taylor_green, random_divfree, make_pair

__version__ = "0.1.0"
