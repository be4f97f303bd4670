"""Numerical laboratory for compressible flow with time-decaying friction.

Subpackages by capability:

    core         damping laws, integrating factor, case phase diagram
    specfun      hypergeometric series and the Riemann kernel identities
    burgers1d    exact characteristic model and its grid cross-check
    euler2d      method-of-lines solver for the 2-D (theta, u) system
    diagnostics  blowup functionals, ODE monitors, weighted energies
    testbench    empirical inequality benches on an analytic catalog
    cli          experiment orchestration (configs, sweeps, CSV artifacts)
"""

from .core import (
    CaseLabel,
    DampingLaw,
    GasLaw,
    alpha,
    classify_case,
    xi,
    xi_integral_converges,
    xi_inverse_integral,
)
from .specfun import (
    CharPoint,
    HyperParams,
    adjoint_residual,
    adjoint_rhs_bracket,
    delta0_search,
    from_characteristic,
    p_lower_bound,
    pochhammer_product,
    psi,
    psi_raised,
    psi_shifted,
    riemann_R,
    riemann_z,
    to_characteristic,
)
from .burgers1d import (
    CharacteristicFan,
    FoldError,
    InitialProfile,
    bump_profile,
    evolve_fan,
    fan_on_grid,
    grid_solve,
    lifespan,
    nwave_profile,
)
from .euler2d import (
    BlowupReport,
    FlowState2D,
    Grid2D,
    data_family,
    detect_blowup,
    init_state,
    rho_from_theta,
    run_euler2d,
    step,
    theta_from_rho,
    vorticity,
    vorticity_residual,
    wave_residual,
)
from .diagnostics import (
    BlowupData,
    energy_E,
    energy_calE,
    f_functional,
    f_source,
    monitor_ode_inequalities,
    p_functional,
    q0,
    q1,
    outward_push_data,
    sigma_minus,
)

__version__ = "0.1.0"
