"""Numerical toolkit for SG-classical symbols, their trace functionals and Weyl laws."""

from . import calculus, expr, oracle, quadrature, residues, symbol, weyl
from .errors import *  # noqa: F401,F403
from .expr import parse, to_text, evaluate, differentiate, infer_degree
from .symbol import (
    Component, Excision, OrderPair, PrincipalTriple, SGClassicalSymbol,
    compactify, evaluate_symbol, make_symbol, principal_triple,
)
from .calculus import (
    Sector, check_ellipticity, check_lambda_ellipticity, compose, leibniz_corner,
    power_leading_triple,
)
from .quadrature import bisphere_integral, finite_part_radial, sphere_rule
from .residues import (
    angular_term, kernel_diag_poles, tr_e_hat, tr_psi_hat, tr_x_xi, wres,
    zeta_pole_structure,
)
from .weyl import aramaki_counting, laurent_from_functionals, weyl_constants
from .oracle import (
    convergence_study, counting_function, discretize_1d, eigenvalues_symmetric, fit_weyl,
)
from .presets import list_presets, load_preset, preset_symbol

__version__ = "0.1.0"
