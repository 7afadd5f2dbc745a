"""bergconc: exact and numerical verification of sharp concentration
bounds for derivatives of weighted Bergman-space functions.

The package has four layers:

* :mod:`bergconc.specfun` / :mod:`bergconc.quadrature` -- special-function
  kernel (Pochhammer, Gauss hypergeometric, Jacobi, Laguerre) and weighted
  quadrature with error estimates;
* :mod:`bergconc.bergman` -- norms, reproducing kernels, derivative growth
  envelopes and the measures of the concentration problem;
* :mod:`bergconc.concentration` / :mod:`bergconc.fock` -- the superlevel-set
  engine, the sharp-bound margin reports, and the Gaussian-weight limit;
* :mod:`bergconc.symmetric` -- the exact rational inequality chain
  (coefficient bounds, partial-fraction identities, Vieta data and the
  central S_l <= D_l scan, including the exploratory n >= 4 case).

``python -m bergconc`` (or the ``bergconc`` script) exposes the batch
verification front end.
"""

__version__ = "0.1.0"

from .bergman import (  # noqa: F401
    MU,
    NU,
    AnalyticPolynomial,
    SpaceParams,
    eval_kernel,
    growth_profile,
    kernel_polynomial,
    monomial_norm,
    norm_sq,
)
from .concentration import (  # noqa: F401
    ConcentrationProfile,
    LevelSetEngine,
    bound_report,
    concentration_profile,
    curvature_margin_scan,
    distribution_rho,
    level_density,
    ode_convexity_check,
    theta_bound,
    u_star,
)
from .exact import ExactScalar, as_exact, exact_str, pochhammer  # noqa: F401
from .fock import fock_bound, fock_convergence_table, fock_limit_check  # noqa: F401
from .quadrature import Estimate, integrate_01_weighted, integrate_halfline_exp  # noqa: F401
from .specfun import (  # noqa: F401
    HypergeomParams,
    hypergeom_series,
    hypergeom_terminating,
    jacobi_eval,
    laguerre_eval,
)
from .symmetric import (  # noqa: F401
    SymmetricFunctionTable,
    b_weights,
    build_table,
    c_coefficient,
    complete_homogeneous,
    d_bound,
    elementary_symmetric,
    main_inequality_scan,
    moment_bound_check,
    roots_and_residues,
    vandermonde_identity_check,
)
