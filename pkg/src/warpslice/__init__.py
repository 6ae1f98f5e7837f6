"""Star-shaped hypersurfaces in warped products ``dr^2 + lambda(r)^2 g_{S^(n-1)}``.

Curvature of radial graphs, Heintze-Karcher and Minkowski type integral
inequalities, and numerical rigidity of constant-sigma_p graphs.
"""

from .fiber import axisym_grid, covariant_hessian, full_s2_grid, integrate, make_grid
from .inequalities import full_report, heintze_karcher, minkowski
from .profile import (
    WarpingProfile,
    check_conditions,
    make_cosh,
    make_ds_schwarzschild,
    make_euclidean,
    ricci_radial_coefficient,
)
from .solver import rigidity_experiment, slice_locator, solve_constant_sigma_p
from .surface import graph_surface, make_perturbed, make_slice, second_fundamental_form
from .symfunc import cone_level, maclaurin_margins, sigma, sigma_truncated

__version__ = "0.1.0"
