"""cqedkit: design and verification toolkit for multilayer circuit-QED devices.

Submodules:
    quantum   - truncated Fock-space operators, states, Lindblad evolution
    circuit   - lumped-circuit coupling, transmon diagonalization, Hamiltonian
    geometry  - electrode outline curves and analytic dipole limits
    seams     - seam-loss model, TE101 admittance, lifetime budgets
    protocols - simulated measurement protocols producing TraceSeries
    fits      - parameter extraction matching each protocol
    config    - unit-suffixed run configuration files
    acceptance- the end-to-end verification criteria
"""

from .circuit import (
    CapacitanceNetwork,
    DispersiveSystem,
    ModeSpec,
    TransmonParams,
    beta,
    build_hamiltonian,
    cavity_self_kerr,
    chi_from_g,
    coupling_g,
    dephasing_time_from_t1_t2,
    ej_from_lj,
    g_from_chi,
    transmon_f01_alpha,
    transmon_spectrum,
    zero_point_voltage,
)
from .fits import (
    FitResult,
    fit_damped_fringes,
    fit_exponential,
    fit_loglog_intercept,
    fit_lorentzian_multiplet,
    fit_poissonian_decay,
    fit_revival_period,
)
from .geometry import (
    PlanarCurve,
    aperture_dipole,
    cardioid_outline,
    dipole_radiated_power,
    piriform_island,
    thin_annulus_dipole,
    write_curve_csv,
)
from .protocols import (
    ProtocolConfig,
    TraceSeries,
    q_from_lifetime,
    read_trace_csv,
    run_protocol,
    sim_cavity_decay,
    sim_number_splitting,
    sim_ramsey,
    sim_revival,
    sim_stark_slopes,
    sim_t1,
    stark_shift_traces,
    write_trace_csv,
)
from .quantum import (
    IntegrationError,
    ModeSpace,
    Operator,
    State,
    TruncationError,
    coherent_state,
    displace,
    evolve_lindblad,
    evolve_unitary,
    fock_state,
    identity,
    ladder,
    liouvillian_matrix,
    number_op,
    partial_trace,
)
from .seams import (
    QMeasurementSet,
    RectangularCavity,
    SeamSpec,
    budget_report,
    combine_t1_budget,
    fit_seam_conductance,
    purcell_t1_estimate,
    q_from_seam,
    t1_limit_from_seam,
    te101_seam_admittance,
    te101_seam_admittance_quadrature,
)
from .config import RunConfig, default_config_path, load_config, parse_quantity

__version__ = "0.1.0"
