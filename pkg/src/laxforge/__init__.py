"""Exact construction and verification of 2x2 Lax pairs for a family of
separable Hamiltonian systems parametrized by (n, m, r, sigma).

The subpackages split along the pipeline:

- ``algebra``: exact sparse polynomial ring, Laurent spectral layer, division,
  Poisson brackets, serialization.
- ``benenti``: system specs, basic potentials, metrics, Killing tensors,
  Hamiltonians, the symmetric-function coordinate map and its numeric oracle.
- ``lax``: the 2x2 spectral matrices, their flow companions, spectral
  determinants and gauge transformations.
- ``verify``: symbolic and numeric checks, the frozen worked examples,
  trajectory simulation, negative controls.
- ``cli``: command-line front end.
"""

from .algebra import (
    CoeffPoly,
    DivisionError,
    Rat,
    SpectralPoly,
    VarTable,
    divmod_spectral,
    invert_unit,
    phase_space_table,
    poisson,
    poisson_spectral,
)
from .benenti import (
    BenentiSpec,
    SeparationPoint,
    basic_potential,
    hamiltonians,
    killing_tensor,
    metric_tensor,
    oracle_hamiltonians,
    viete_map,
)
from .lax import (
    LaxMatrix,
    flow_matrix,
    gauge_transform,
    lax_matrix,
    spectral_determinant,
    u_poly,
    v_poly,
    w_poly,
)
from .fixtures import fixture_ids, get_fixture
from .verify import (
    CheckReport,
    SingularityError,
    TrajectoryReport,
    check_fixture,
    check_gauge_invariance,
    check_involution,
    check_lax_equation,
    check_oracle_agreement,
    check_spectral_curve,
    grid_specs,
    negative_controls,
    random_specs,
    run_grid,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "CoeffPoly",
    "SpectralPoly",
    "VarTable",
    "Rat",
    "DivisionError",
    "phase_space_table",
    "divmod_spectral",
    "invert_unit",
    "poisson",
    "poisson_spectral",
    "BenentiSpec",
    "SeparationPoint",
    "basic_potential",
    "metric_tensor",
    "killing_tensor",
    "hamiltonians",
    "viete_map",
    "oracle_hamiltonians",
    "LaxMatrix",
    "u_poly",
    "v_poly",
    "w_poly",
    "lax_matrix",
    "flow_matrix",
    "spectral_determinant",
    "gauge_transform",
    "fixture_ids",
    "get_fixture",
    "CheckReport",
    "TrajectoryReport",
    "SingularityError",
    "check_spectral_curve",
    "check_lax_equation",
    "check_involution",
    "check_gauge_invariance",
    "check_oracle_agreement",
    "check_fixture",
    "negative_controls",
    "grid_specs",
    "random_specs",
    "run_grid",
    "simulate",
    "__version__",
]
