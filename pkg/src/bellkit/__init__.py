"""Numerical toolkit for Bell inequality evaluation on spin systems:
exact spin algebra, a catalog of bipartite and symmetric states, the
surveyed Bell functionals, exact LHV bounds by deterministic-strategy
enumeration, and derivative-free violation search."""

__version__ = "0.1.0"

from .errors import (
    BellKitError,
    CapacityError,
    DegenerateConditionError,
    ValidationError,
)
from .spin import (
    HermitianObservable,
    SpinQuantum,
    SpinRep,
    UnitVector,
    build_spin_rep,
    clebsch_gordan,
    sign_projectors,
    spin_component,
)
from .states import (
    BipartiteState,
    MeasurementSetting,
    MultiQubitState,
    SymmetricState,
    angular_momentum_eigenstate,
    binned_joint_probability,
    conditioned_state,
    correlator,
    dicke,
    ghz,
    joint_distribution,
    joint_probability,
    maximally_entangled,
    relative_phase,
    rm_weighted,
    separable_mixture,
    singlet,
    uncertainty_margin,
    werner,
)
from .functionals import (
    BellFunctional,
    ViolationReport,
    cfrd_margin,
    cfrd_quadrature_margin,
    cglmp_I,
    cglmp_functional,
    chsh_value,
    drummond_margin,
    generalized_chsh_functional,
    mabk_value,
    mermin_check,
    reid_ratio,
    tura_value,
)
from .lhv import (
    DeterministicStrategy,
    LhvModel,
    Scenario,
    enumerate_lhv_bound,
    lhv_model_eval,
    symmetric_lhv_min,
)
from .search import (
    ScanSpec,
    SearchConfig,
    optimize_settings,
    optimize_weights_cfrd,
    scan_parameter,
)
