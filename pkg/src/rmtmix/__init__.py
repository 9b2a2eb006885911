"""Mixed states from random-Hamiltonian ensembles and their spectral statistics.

Evolving one pure state under an ensemble of random Hamiltonians and
averaging the projectors yields a mixed state whose eigenvalue
correlations cross from the orthogonal to the unitary symmetry class as
time grows, even when every Hamiltonian in the ensemble is real.  This
package samples the ensembles (dense Gaussian matrices and disordered
Heisenberg rings), evolves and averages exactly, reduces spectra to
gap-ratio, spacing, density and number-variance statistics, and fits the
resulting curves to the analytic crossover form.
"""

from .accumulators import (HistogramAccumulator, MeanAccumulator,
                           NumberVarianceAccumulator, TimePartial)
from .artifact import (FitRecord, RunArtifact, TimeStatistics, emit_plot_data,
                       read_artifact)
from .config import (KINDS, ExperimentConfig, load_config, parse_config)
from .ensembles import (basis_state, crossover_hamiltonian, sample_antisymmetric,
                        sample_goe, sample_gue, sample_real_state,
                        semicircle_radius)
from .errors import (ConfigError, DiagonalizationError, RankDeficiencyError,
                     ResourceLimitError, UnfoldingError)
from .evolution import (SpectralDecomposition, decompose, mixed_state,
                        propagate, propagate_grid, purity, spectrum,
                        state_matrix_to_density)
from .fitting import (MODEL_SCALE_SHIFT, MODEL_SCALE_SHIFT_AMPLITUDE, FitResult,
                      fit_crossover, fit_crossover_with_range,
                      fit_range_from_scale)
from .presets import preset_config, preset_names, preset_text
from .rng import stream, stream_id
from .runner import CostEstimate, estimate_cost, run_experiment
from .short_time import (CrossoverMatrices, SeriesTerms, ShortTimeReport,
                         build_crossover_matrices, crossover_time,
                         series_density, series_terms, short_time_report,
                         sigma_bulk)
from .spectra import (R_TILDE_GOE, R_TILDE_GOE_SURMISE, R_TILDE_GUE,
                      R_TILDE_GUE_SURMISE, R_TILDE_POISSON, bulk_normalized,
                      central_bulk, chi_squared_counts, crossover_r_tilde,
                      marchenko_pastur_cdf, marchenko_pastur_density,
                      mean_r_tilde, number_variance, number_variance_reference,
                      quarter_circle_density, r_tilde_values,
                      rescale_eigenvalues, semicircle_density, spacings,
                      split_separated_top, truncate_spectrum, unfold,
                      wigner_surmise, wigner_surmise_cdf)
from .spin_chain import (DisorderRealization, SubspaceBasis, build_basis,
                         heisenberg, one_excitation_hamiltonian,
                         one_magnon_dispersion, sample_disorder)

__version__ = "0.1.0"
