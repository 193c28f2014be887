#include "ptlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ptlab/errors.hpp"

namespace ptlab {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::vector<Complex> eigenvalues(const ComplexMatrix& m) {
  if (!m.allFinite()) throw std::invalid_argument("eigenvalues: matrix has non-finite entries");
  Eigen::ComplexEigenSolver<ComplexMatrix> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "complex eigensolver failed to converge on a " << m.rows() << "x" << m.cols()
        << " matrix (norm " << m.norm() << ")";
    throw SolverFailure(msg.str());
  }
  const auto& v = es.eigenvalues();
  return {v.data(), v.data() + v.size()};
}

std::vector<Complex> eigenvalues(const Matrix& m) {
  if (!m.allFinite()) throw std::invalid_argument("eigenvalues: matrix has non-finite entries");
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "real Schur eigensolver failed to converge on a " << m.rows() << "x" << m.cols()
        << " matrix (norm " << m.norm() << ")";
    throw SolverFailure(msg.str());
  }
  const auto& v = es.eigenvalues();
  return {v.data(), v.data() + v.size()};
}

double classification_scale(const std::vector<Complex>& eigs) {
  double r = 1.0;
  for (const auto& e : eigs) r = std::max(r, std::abs(e));
  return r;
}

Classified classify(std::vector<Complex>& eigs, double scale) {
  const double real_tol = kRealThreshold * scale;
  const double pair_tol = kPairTolerance * scale;
  std::sort(eigs.begin(), eigs.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return std::abs(a.imag()) < std::abs(b.imag());
  });
  Classified out;
  std::vector<int> complex_idx;
  for (int i = 0; i < static_cast<int>(eigs.size()); ++i) {
    if (std::abs(eigs[i].imag()) < real_tol)
      ++out.n_real;
    else
      complex_idx.push_back(i);
  }
  // partners share (Re, |Im|) up to rounding, so they are adjacent here
  for (std::size_t k = 0; k + 1 < complex_idx.size(); k += 2) {
    int i = complex_idx[k], j = complex_idx[k + 1];
    double defect = std::abs(eigs[i] - std::conj(eigs[j]));
    if (defect > pair_tol) {
      std::ostringstream msg;
      msg << "unpaired complex eigenvalue: " << eigs[i] << " vs conj " << eigs[j]
          << " (defect " << defect << ", tolerance " << pair_tol << ")";
      throw SymmetryViolation(msg.str());
    }
    out.pairs.emplace_back(i, j);
  }
  if (complex_idx.size() % 2 != 0) {
    std::ostringstream msg;
    msg << "odd number of complex eigenvalues (" << complex_idx.size()
        << "); last: " << eigs[complex_idx.back()];
    throw SymmetryViolation(msg.str());
  }
  return out;
}

std::vector<Complex> quasienergies(const std::vector<Complex>& map_eigs) {
  std::vector<Complex> out;
  out.reserve(map_eigs.size());
  for (const auto& l : map_eigs) {
    if (l == Complex(0.0, 0.0)) throw SolverFailure("quasienergies: singular map (eigenvalue 0)");
    out.emplace_back(-std::arg(l), std::log(std::abs(l)));
  }
  return out;
}

SpectrumSample sample_spectrum(const EnsembleSpec& spec, std::uint64_t seed) {
  SpectrumSample s;
  s.spec = spec;
  s.seed = seed;
  if (spec.family == Family::Gaussian) {
    auto h = build_hamiltonian(spec, seed);
    if (h.real_form) {
      if (spec.cls == EnsembleClass::OA) {
        // block diagonal: two independent M x M real problems
        const int M = spec.M;
        auto top = eigenvalues(Matrix(h.real_form->topLeftCorner(M, M)));
        auto bot = eigenvalues(Matrix(h.real_form->bottomRightCorner(M, M)));
        s.eigenvalues = std::move(top);
        s.eigenvalues.insert(s.eigenvalues.end(), bot.begin(), bot.end());
      } else {
        s.eigenvalues = eigenvalues(*h.real_form);
      }
    } else {
      s.eigenvalues = eigenvalues(h.matrix);
    }
  } else {
    auto f = build_quantum_map(spec, seed);
    s.eigenvalues = quasienergies(eigenvalues(f.matrix));
  }
  auto cls = classify(s.eigenvalues, classification_scale(s.eigenvalues));
  s.n_real = cls.n_real;
  s.pairs = std::move(cls.pairs);
  return s;
}

namespace {
double fraction_impl(const SpectrumSample& sample, std::optional<Window> window, bool want_complex) {
  const double real_tol = kRealThreshold * classification_scale(sample.eigenvalues);
  if (window && !(window->lo < window->hi))
    throw std::invalid_argument("complex_fraction: empty window");
  long total = 0, complex_count = 0;
  for (const auto& e : sample.eigenvalues) {
    if (window && (e.real() < window->lo || e.real() > window->hi)) continue;
    ++total;
    if (std::abs(e.imag()) >= real_tol) ++complex_count;
  }
  if (total == 0) throw std::invalid_argument("complex_fraction: no eigenvalues in window");
  double fc = static_cast<double>(complex_count) / static_cast<double>(total);
  return want_complex ? fc : 1.0 - fc;
}
}  // namespace

double complex_fraction(const SpectrumSample& sample, std::optional<Window> window) {
  return fraction_impl(sample, window, true);
}

double real_fraction(const SpectrumSample& sample, std::optional<Window> window) {
  return fraction_impl(sample, window, false);
}

SpacingHistogram spacing_histogram(const std::vector<std::vector<double>>& level_lists,
                                   SpacingMode mode, int bins, double s_max) {
  std::vector<double> spacings;
  for (const auto& levels : level_lists) {
    if (levels.size() < 2) continue;
    for (std::size_t i = 0; i + 1 < levels.size(); ++i)
      spacings.push_back(levels[i + 1] - levels[i]);
  }
  if (spacings.size() < 2)
    throw std::invalid_argument("spacing_histogram: fewer than 2 spacings in window");
  double mean = 0.0;
  for (double v : spacings) mean += v;
  mean /= static_cast<double>(spacings.size());
  for (double& v : spacings) v /= mean;

  SpacingHistogram h;
  h.mode = mode;
  h.mean_spacing = mean;
  h.n_spacings = spacings.size();
  h.bin_edges.resize(bins + 1);
  h.density.assign(bins, 0.0);
  const double w = s_max / bins;
  for (int b = 0; b <= bins; ++b) h.bin_edges[b] = b * w;
  long n_in = 0;
  for (double v : spacings) {
    int b = static_cast<int>(v / w);
    if (b >= 0 && b < bins) {
      h.density[b] += 1.0;
      ++n_in;
    }
  }
  if (n_in == 0) throw std::invalid_argument("spacing_histogram: all spacings beyond s_max");
  for (double& d : h.density) d /= static_cast<double>(n_in) * w;
  h.spacings = std::move(spacings);
  return h;
}

double ks_distance(const std::vector<double>& sample, double (*cdf)(double)) {
  std::vector<double> v = sample;
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double f = cdf(v[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

double wigner_surmise_cdf(double s) { return 1.0 - std::exp(-kPi * s * s / 4.0); }

double wigner_surmise_unitary_cdf(double s) {
  return std::erf(2.0 * s / std::sqrt(kPi)) - (4.0 * s / kPi) * std::exp(-4.0 * s * s / kPi);
}

}  // namespace ptlab
