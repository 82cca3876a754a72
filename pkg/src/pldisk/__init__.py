"""Phase-portrait engine on the Poincare-Lyapunov disk for the stationary
states of the 1D self-diffusion logistic equation."""

__version__ = "0.1.0"

from ._kernel import BACKEND as kernel_backend  # noqa: F401
from .model import (ModelParams, PhasePoint, SymmetryKind, make_params,  # noqa: F401
                    field_x, field_tau, time_rescale_factor, conserved_H,
                    potential_U, symmetry_apply, quasi_homogeneity_check,
                    appendix_b_params)
from .charts import (ChartId, ChartPoint, to_chart, from_chart,  # noqa: F401
                     chart_field, infinity_equilibria)
from .equilibria import (Equilibrium, Stability, eigen2,  # noqa: F401
                         numerical_jacobian, finite_equilibria, all_equilibria,
                         equilibrium_by_id)
from .orbits import (Orbit, Event, ArrivalSpec, StopSpec, integrate,  # noqa: F401
                     shoot_saddle, trace_through, detect_period,
                     reparameterize_to_x, fit_asymptotics, AsymptoticFit)
from .classify import (classify_endpoint, connection_graph, ConnectionGraph,  # noqa: F401
                       regime_report, RegimeReport, expected_types, regime_of,
                       bifurcation_scan, profile)
