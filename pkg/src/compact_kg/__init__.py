"""Fourth-order compact finite difference solvers for the weakly nonlinear
Klein-Gordon equation, with a spectral reference integrator and a
convergence-study harness."""

from .compact import CompactOperator
from .diagnostics import (
    StabilityReport,
    continuous_energy,
    discrete_energy,
    error_functional,
    osc_stability_report,
    sigma_max_of,
    stability_report,
)
from .errors import (
    BlowUpError,
    ConfigError,
    GridMismatchError,
    KGError,
    NonlinearSolveError,
    NumericalError,
    SymmetryError,
)
from .ewi import ReferenceCache, ewi_init, ewi_integrate, ewi_step, reference_solution
from .fourier import SpectralCoefficients, dft, inverse_dft
from .grid import (
    GridFunction,
    PeriodicGrid,
    backward_diff,
    forward_diff,
    inner,
    norm_l2,
    norm_linf,
    second_diff,
)
from .oscillatory import (
    OscillatoryProblemSpec,
    Variant,
    osc_energy,
    osc_first_step,
    osc_integrate,
    osc_step,
    whole_space_problem,
)
from .schemes import (
    NonlinearSolverConfig,
    ProblemSpec,
    RunConfig,
    SchemeKind,
    SchemeState,
    Trajectory,
    first_step,
    integrate,
    step,
)
from .study import ConvergenceTable, StudyPlan, observed_order, preset_plan, run_study

__version__ = "0.1.0"
