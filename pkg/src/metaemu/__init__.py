"""Meta-emulator for the social cost of carbon literature.

Fits weighted quantile regressions of published SCC estimates on modeling
assumptions, then emulates how the SCC distribution shifts under
alternative assumption distributions, with per-percentile confidence
intervals and precision-weighted bias combinations.
"""

from metaemu.core import (
    Assumption,
    AssumptionDistribution,
    BiasSummary,
    EmulationResult,
    EstimateRecord,
    ImpactKind,
    QuantileFit,
    RecordValidationError,
    validate_record,
)
from metaemu.emulator import (
    Alteration,
    combine_biases,
    combine_grids,
    emulate_cdf,
    emulate_shift,
    empirical_quantiles,
    shift_variance,
)
from metaemu.ingest import (
    coarsen,
    empirical_frequency,
    load_distribution,
    load_estimates,
)
from metaemu.regression import (
    DesignSpec,
    bootstrap_se,
    fit_grid,
    fit_quantile,
    fit_wls,
    pinball_loss,
)

__version__ = "0.1.0"

__all__ = [
    "Alteration",
    "Assumption",
    "AssumptionDistribution",
    "BiasSummary",
    "DesignSpec",
    "EmulationResult",
    "EstimateRecord",
    "ImpactKind",
    "QuantileFit",
    "RecordValidationError",
    "bootstrap_se",
    "coarsen",
    "combine_biases",
    "combine_grids",
    "emulate_cdf",
    "emulate_shift",
    "empirical_frequency",
    "empirical_quantiles",
    "fit_grid",
    "fit_quantile",
    "fit_wls",
    "load_distribution",
    "load_estimates",
    "pinball_loss",
    "shift_variance",
    "validate_record",
    "__version__",
]
