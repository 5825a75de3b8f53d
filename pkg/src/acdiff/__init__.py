"""Inertial-particle Langevin dynamics on the torus, its acceleration-
corrected advection-diffusion approximation, and the numerical machinery
to compare them: path simulators with shared noise, a 1D kinetic
Fokker-Planck solver, implicit upwind advection-diffusion solvers, and
convergence-rate estimators.
"""

__version__ = "0.1.0"
