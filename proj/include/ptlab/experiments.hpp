#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ptlab/pastur.hpp"
#include "ptlab/spectral.hpp"

namespace ptlab {

/// mu_O = sqrt(N) Delta / 2pi for the O-type classes, mu_A = sqrt(M) Delta / 2pi
/// for the A-type ones (independent of N).
double mu_zero(const EnsembleSpec& spec);

/// Central spectral window used for all Gaussian-family statistics; the
/// semicircle density varies by < 4% across it. Circular spectra use all
/// quasienergies (uniform mean spacing), so no window.
inline constexpr Window kCentralWindow{-0.5, 0.5};
std::optional<Window> default_window(const EnsembleSpec& spec);

/// 25 geometric points from 0.05 mu0 to 5 mu0, plus mu = 0 (units of mu0).
std::vector<double> default_mu_grid();

struct TransitionCurve {
  EnsembleSpec spec;                 // template; mu is taken from the grid
  double T = 1.0;
  std::vector<double> mu_over_mu0;   // grid in mu0 units
  std::vector<double> mu_raw;
  std::vector<double> fc_mean;
  std::vector<double> fc_stderr;
  int n_samples = 0;
  std::vector<std::uint64_t> cell_seeds;
  std::optional<double> mu_pt;       // crossing of f_c = 1/2, in mu0 units
  std::optional<double> g_of_T;      // same number; mu_PT = g(T) mu0
};

/// Monte Carlo f_c(mu) for each T in `T_values`. Every (T, mu) cell draws
/// `n_samples` matrices whose seeds derive from (master_seed, cell index,
/// sample index, class tag), so cells are bit-reproducible regardless of
/// worker scheduling.
std::vector<TransitionCurve> run_transition(const EnsembleSpec& spec_template,
                                            const std::vector<double>& T_values,
                                            const std::vector<double>& mu_grid_mu0,
                                            int n_samples, std::uint64_t master_seed,
                                            int workers = 1);

/// Isotonic regression of fc_mean followed by linear interpolation at 1/2.
/// Stores mu_pt and g_of_T on the curve and returns mu_pt (mu0 units).
/// Throws std::domain_error when the curve never crosses 1/2.
double find_mu_pt(TransitionCurve& curve);

struct GEstimate {
  double value = 1.0;
  bool anomalous = false;  // OA' below T_A ~ 1/N^2, where g grows as T -> 0
};

/// Perturbative estimate of g(T): (1 + 1/NT)^{-1/2} for OO/UO',
/// sqrt(T) for UO, 1 for the A-type classes (overlay/comparison only).
GEstimate predicted_scaling(EnsembleClass cls, double T, int N);

/// Level statistics in the hermitian limit (mu = 0 enforced). Superposed
/// mode merges eig(H+Gamma) and eig(H-Gamma) per draw (UO instead uses the
/// full mixed 2M spectrum; the circular family uses all quasienergies with
/// the wrap-around spacing). Single-sequence mode uses eig(H+Gamma) alone.
std::vector<SpacingHistogram> run_spacing(const EnsembleSpec& spec_template,
                                          const std::vector<double>& T_values, int n_samples,
                                          SpacingMode mode, std::uint64_t master_seed,
                                          int workers = 1, int bins = 40, double s_max = 4.0);

struct DensityComparison {
  DensityGrid grid;
  long n_complex = 0;        // classified-complex eigenvalues outside the axis band
  long n_outside_support = 0;
  double outside_fraction = 0.0;
  double axis_band = 0.01;   // |Im z| below this is excluded from the check
  double support_threshold = 1e-4;
  std::vector<double> slice_re;      // Re positions of the compared slices
  std::vector<double> slice_rel_l1;  // relative L1 mismatch per slice
  double mc_complex_mass_in_region = 0.0;  // complex eigenvalues per matrix / 2M
  double grid_mass_off_axis = 0.0;         // integral of rho outside the band
};

/// Overlay Monte Carlo spectra on the Pastur density: support containment of
/// the sampled complex eigenvalues and binned-density slices at fixed Re E.
DensityComparison run_density_comparison(const EnsembleSpec& spec, const GridRegion& region,
                                         int nx, int ny, int n_samples,
                                         std::uint64_t master_seed, int workers = 1);

struct ScalingFit {
  std::vector<double> x;  // log M
  std::vector<double> y;  // log fraction
  double slope = 0.0;
  double slope_stderr = 0.0;
};

/// Log-log fit of the windowed real fraction against M at fixed alpha = N/M,
/// T and mu/E_T. Throws std::domain_error for degenerate inputs (fewer than
/// 4 sizes, vanishing real fraction, or a flat curve).
ScalingFit run_m_scaling(EnsembleClass cls, double alpha, double T, double mu_over_ET,
                         const std::vector<int>& M_values, int n_samples,
                         std::uint64_t master_seed, int workers = 1);

/// Mean and standard error of the number of real eigenvalues of an M x M
/// matrix with iid standard Gaussian entries (real Schur block count).
std::pair<double, double> ginibre_real_count(int M, int n_samples, std::uint64_t master_seed,
                                             int workers = 1);

/// Log-log fit of the real-eigenvalue fraction of the real Ginibre ensemble.
ScalingFit ginibre_m_scaling(const std::vector<int>& M_values,
                             const std::vector<int>& n_samples, std::uint64_t master_seed,
                             int workers = 1);

}  // namespace ptlab
