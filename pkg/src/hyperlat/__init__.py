"""Perturbed-lattice point processes: simulation, exact second-order
theory, estimation, fitting, and hyperuniformity diagnostics."""

__version__ = "0.1.0"

from .contrast import (ContrastSpec, FitResult, contrast, empirical_l_variance,
                       fit_min_contrast, fit_two_stage)
from .envelope import (CountHistogram, EnvelopeResult, count_histogram,
                       global_envelope_test)
from .errors import (ConfigError, CsvFormatError, HyperlatError, NumericalError)
from .estimators import (ExponentFit, ScatteringSpectrum, exponent_fit, fry_slab,
                         g_nearest_neighbor, k_empirical, nn_angle_histogram,
                         number_variance, pcf_empirical, pool_spectra,
                         rescale_to_unit_intensity, scattering_intensity)
from .gaussfield import (CovarianceModel, FieldBlock, check_embedding,
                         covariance_summability, simulate_block)
from .geometry import (BoxWindow, Lattice, PointPattern, SeedSpec, crop,
                       dual_lattice, integer_norm_table, lattice_points_in_ball)
from .io import (read_curve_csv, read_json, read_points_csv, window_sidecar_path,
                 write_curve_csv, write_envelope_csv, write_histogram_csv,
                 write_json, write_points_csv, write_spectrum_csv)
from .ktheory import (SummaryCurve, decay_exponent, default_shell_halfwidth,
                      hyperuniformity_condition_report, k_theoretical,
                      l_centered_from_k, spectral_variance_iid,
                      spectral_variance_stationarized)
from .latticesim import (PerturbedLatticeSpec, PoissonModel, recommended_buffer,
                         simulate, simulate_batch, simulate_binomial,
                         simulate_poisson)
from .special import (KernelJr, bessel_j, gauss_charfn_sq, jr_hat, jr_kernel,
                      noncentral_chisq_cdf, unit_ball_volume)

__all__ = [
    "__version__",
    # errors
    "HyperlatError", "ConfigError", "CsvFormatError", "NumericalError",
    # geometry
    "SeedSpec", "Lattice", "BoxWindow", "PointPattern", "crop", "dual_lattice",
    "integer_norm_table", "lattice_points_in_ball",
    # special functions
    "unit_ball_volume", "bessel_j", "KernelJr", "jr_kernel", "jr_hat",
    "noncentral_chisq_cdf", "gauss_charfn_sq",
    # gaussian fields
    "CovarianceModel", "FieldBlock", "simulate_block", "check_embedding",
    "covariance_summability",
    # lattice simulation
    "PerturbedLatticeSpec", "PoissonModel", "recommended_buffer", "simulate",
    "simulate_batch", "simulate_poisson", "simulate_binomial",
    # exact second-order theory
    "SummaryCurve", "k_theoretical", "l_centered_from_k",
    "default_shell_halfwidth", "spectral_variance_stationarized",
    "spectral_variance_iid", "decay_exponent", "hyperuniformity_condition_report",
    # estimators
    "k_empirical", "pcf_empirical", "g_nearest_neighbor", "number_variance",
    "scattering_intensity", "pool_spectra", "exponent_fit", "fry_slab",
    "nn_angle_histogram", "rescale_to_unit_intensity", "ScatteringSpectrum",
    "ExponentFit",
    # fitting
    "ContrastSpec", "FitResult", "contrast", "fit_min_contrast",
    "empirical_l_variance", "fit_two_stage",
    # envelope tests
    "EnvelopeResult", "CountHistogram", "global_envelope_test", "count_histogram",
    # file formats
    "window_sidecar_path", "write_points_csv", "read_points_csv",
    "write_curve_csv", "read_curve_csv", "write_spectrum_csv",
    "write_histogram_csv", "write_envelope_csv", "write_json", "read_json",
]
