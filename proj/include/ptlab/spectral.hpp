#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ptlab/ensembles.hpp"

namespace ptlab {

/// Relative threshold deciding |Im E| ~ 0; well below the level spacing
/// pi/M at desk scale M <= 1e3, well above eigensolver backward error.
inline constexpr double kRealThreshold = 1e-8;
inline constexpr double kPairTolerance = 1e-8;

struct Classified {
  int n_real = 0;
  std::vector<std::pair<int, int>> pairs;  // indices into the classified list
};

struct SpectrumSample {
  std::vector<Complex> eigenvalues;  // quasienergies for the circular family
  int n_real = 0;
  std::vector<std::pair<int, int>> pairs;
  EnsembleSpec spec;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

/// Half-open classification window on Re E.
struct Window {
  double lo;
  double hi;
};

/// All eigenvalues of a dense nonsymmetric matrix (LAPACK-backed Schur).
std::vector<Complex> eigenvalues(const ComplexMatrix& m);
/// Real input goes through the real Schur form, so real eigenvalues come out
/// with imaginary part exactly zero and conjugate pairs exactly paired.
std::vector<Complex> eigenvalues(const Matrix& m);

/// Sort by (Re, |Im|), mark reals by |Im| < kRealThreshold * scale, and
/// greedily match the rest into conjugate pairs. The input vector is
/// reordered; pair indices refer to the reordered list. Throws
/// SymmetryViolation if any non-real eigenvalue stays unmatched.
Classified classify(std::vector<Complex>& eigs, double scale);

/// max(1, spectral radius) of an eigenvalue list.
double classification_scale(const std::vector<Complex>& eigs);

/// E_n = i ln(lambda_n) on the principal branch (tau = 1).
/// Throws SolverFailure on lambda = 0.
std::vector<Complex> quasienergies(const std::vector<Complex>& map_eigs);

/// Draw one matrix for `spec` and classify its spectrum. Gaussian classes
/// with a real form are routed through the real Schur path; UO/UO' use the
/// complex path; the circular family diagonalizes the quantum map and
/// stores quasienergies.
SpectrumSample sample_spectrum(const EnsembleSpec& spec, std::uint64_t seed);

/// Classified fraction of complex eigenvalues, restricted to Re E inside
/// `window` when given. Throws std::invalid_argument on an empty window or
/// when no eigenvalue falls inside it.
double complex_fraction(const SpectrumSample& sample, std::optional<Window> window = {});
double real_fraction(const SpectrumSample& sample, std::optional<Window> window = {});

enum class SpacingMode { Superposed, SingleSequence };

struct SpacingHistogram {
  std::vector<double> bin_edges;   // units of the mean spacing
  std::vector<double> density;     // normalized so the histogram integrates to 1
  double mean_spacing = 0.0;       // pre-rescale mean
  SpacingMode mode = SpacingMode::Superposed;
  std::size_t n_spacings = 0;
  std::vector<double> spacings;    // rescaled sample, kept for KS-style tests
};

/// Nearest-neighbour spacings of the pooled level lists, rescaled to unit
/// mean and histogrammed on [0, s_max]. Each inner list is one draw's
/// (already windowed) sorted levels; spacings never straddle draws.
SpacingHistogram spacing_histogram(const std::vector<std::vector<double>>& level_lists,
                                   SpacingMode mode, int bins = 40, double s_max = 4.0);

/// Kolmogorov-Smirnov distance between the rescaled spacing sample and a
/// reference CDF.
double ks_distance(const std::vector<double>& sample, double (*cdf)(double));

double wigner_surmise_cdf(double s);          // GOE surmise, 1 - exp(-pi s^2/4)
double wigner_surmise_unitary_cdf(double s);  // GUE surmise

}  // namespace ptlab
