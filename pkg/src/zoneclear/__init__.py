"""Zonal electricity-market clearing with HVDC loss factors.

Layers, bottom up:

* :mod:`zoneclear.model`        -- market domain objects and validation.
* :mod:`zoneclear.simplex`      -- bounded-variable primal simplex.
* :mod:`zoneclear.milp`         -- canonical problems and branch and bound.
* :mod:`zoneclear.calibration`  -- linear/piecewise loss-factor calibration.
* :mod:`zoneclear.formulations` -- clearing formulations (lossless, fixed
  losses, linear/piecewise loss factors, relaxed linear).
* :mod:`zoneclear.study`        -- five-scenario comparative study runner.
* :mod:`zoneclear.dataio`       -- CSV dataset IO and nodal aggregation.
* :mod:`zoneclear.report_plots` -- figure rendering for report output.
* :mod:`zoneclear.cli`          -- command-line interface.
"""

__version__ = "1.0.0"

from .model import (AC, HVDC, Generator, Interconnector, LinearLossFactors,
                    LossModel, MarketInstance, PwSegment, Zone,
                    validate_instance)
from .formulations import (FIXED_LOSSES, LINEAR_LF, LOSSLESS, PIECEWISE_LF,
                           RELAXED_LINEAR_LF, DispatchResult, FormulationSpec,
                           clear_instance, extract_result)
from .calibration import (FlowHistory, approximation_rmse, fleet_rmse,
                          linear_factors, piecewise_factors, quadratic_loss)
from .study import (SCENARIOS, ScenarioResult, StudyConfig, StudyReport,
                    calibrate_series, compare_scenarios, run_scenario)

__all__ = [
    "AC", "HVDC", "Generator", "Interconnector", "LinearLossFactors",
    "LossModel", "MarketInstance", "PwSegment", "Zone", "validate_instance",
    "FIXED_LOSSES", "LINEAR_LF", "LOSSLESS", "PIECEWISE_LF",
    "RELAXED_LINEAR_LF", "DispatchResult", "FormulationSpec",
    "clear_instance", "extract_result",
    "FlowHistory", "approximation_rmse", "fleet_rmse", "linear_factors",
    "piecewise_factors", "quadratic_loss",
    "SCENARIOS", "ScenarioResult", "StudyConfig", "StudyReport",
    "calibrate_series", "compare_scenarios", "run_scenario",
    "__version__",
]
