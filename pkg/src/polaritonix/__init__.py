"""Elastic polariton spectra of molecules with Brownian vibrational dissipation.

The vibronic lineshape P(E) is built in closed form as a mixture of
Lorentzians and anti-Lorentzians, convolved with the electronic
susceptibility and inserted in the input-output cavity response.
"""
from .analysis import (
    Peak,
    PolaritonFeatures,
    PolaritonModel,
    absorption_fwhm,
    dominant_peaks,
    equal_linewidth_detuning,
    extract_features,
    find_peaks,
    fwhm,
    intensity_ratio,
    rabi_splitting,
)
from .errors import (
    AmbiguousSplittingError,
    ConfigurationError,
    CriticalDampingError,
    DomainError,
    IllConditionedError,
    NoPeaksError,
    NoSplittingError,
    NotBracketedError,
    OverlappingPeaksError,
    PolaritonixError,
)
from .lineshapes import Mixture, PoleAtom, convolve, convolve_all, eval_f, eval_g
from .oracle import (
    TimeGrid,
    closed_form_distance,
    convolution_table_errors,
    convolve_numeric,
    detailed_balance_error,
    j_numeric,
    p_numeric,
)
from .pe import (
    ThermalEnv,
    VibrationalMode,
    classify_regime,
    correlator_from_residues,
    exp_correlator_transform,
    matsubara_coefficients,
    residue_coefficients,
    single_mode_pe,
    total_pe,
)
from .response import (
    AbsorptionFunction,
    CavityParams,
    MoleculeParams,
    Spectrum,
    absorption_mixture,
    cavity_frequency_from_geometry,
    coupled_oscillator_reference,
    effective_kappa_m,
    elastic_spectrum,
    resonance_peaks,
    response_function,
    undamped_polariton_frequencies,
)

__version__ = "0.1.0"

__all__ = [
    "AbsorptionFunction",
    "AmbiguousSplittingError",
    "CavityParams",
    "ConfigurationError",
    "CriticalDampingError",
    "DomainError",
    "IllConditionedError",
    "Mixture",
    "MoleculeParams",
    "NoPeaksError",
    "NoSplittingError",
    "NotBracketedError",
    "OverlappingPeaksError",
    "Peak",
    "PolaritonFeatures",
    "PolaritonModel",
    "PolaritonixError",
    "PoleAtom",
    "Spectrum",
    "ThermalEnv",
    "TimeGrid",
    "VibrationalMode",
    "absorption_fwhm",
    "absorption_mixture",
    "cavity_frequency_from_geometry",
    "classify_regime",
    "closed_form_distance",
    "convolution_table_errors",
    "convolve",
    "convolve_all",
    "convolve_numeric",
    "correlator_from_residues",
    "coupled_oscillator_reference",
    "detailed_balance_error",
    "dominant_peaks",
    "effective_kappa_m",
    "elastic_spectrum",
    "equal_linewidth_detuning",
    "eval_f",
    "eval_g",
    "exp_correlator_transform",
    "extract_features",
    "find_peaks",
    "fwhm",
    "intensity_ratio",
    "j_numeric",
    "matsubara_coefficients",
    "p_numeric",
    "rabi_splitting",
    "residue_coefficients",
    "resonance_peaks",
    "response_function",
    "single_mode_pe",
    "total_pe",
    "undamped_polariton_frequencies",
]
