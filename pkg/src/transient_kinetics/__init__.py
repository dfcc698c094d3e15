"""Kinetics toolkit and lifecycle simulator for UV-degradable silicone composites."""

from .kinetics import (
    ArrheniusParams,
    ConversionSeries,
    ExposureSchedule,
    PhotolysisState,
    ScheduleSegment,
    arrhenius_rate,
    conversion_from_heat,
    conversion_rate,
    dsc_heat_flow,
    hf_concentration,
    integrate_conversion,
    isothermal_conversion,
    time_to_conversion,
)
from .dscfit import (
    ArrheniusFit,
    DscTrace,
    FitResult,
    conversion_profile,
    fit_arrhenius,
    fit_rate_constant,
    synthesize_trace,
    total_enthalpy,
)

__version__ = "0.1.0"

__all__ = [
    "ArrheniusFit",
    "ArrheniusParams",
    "ConversionSeries",
    "DscTrace",
    "ExposureSchedule",
    "FitResult",
    "PhotolysisState",
    "ScheduleSegment",
    "arrhenius_rate",
    "conversion_from_heat",
    "conversion_profile",
    "conversion_rate",
    "dsc_heat_flow",
    "fit_arrhenius",
    "fit_rate_constant",
    "hf_concentration",
    "integrate_conversion",
    "isothermal_conversion",
    "synthesize_trace",
    "time_to_conversion",
    "total_enthalpy",
    "__version__",
]
