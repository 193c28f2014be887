#include "ptlab/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ptlab/errors.hpp"
#include "ptlab/parallel.hpp"

namespace ptlab {

namespace {
constexpr double kPi = std::numbers::pi;

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

MeanStderr mean_stderr(const std::vector<double>& v) {
  MeanStderr out;
  const double n = static_cast<double>(v.size());
  for (double x : v) out.mean += x;
  out.mean /= n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.stderr_ = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

/// Pool-adjacent-violators: least-squares nondecreasing fit.
std::vector<double> isotonic(const std::vector<double>& y) {
  struct Block {
    double sum;
    int count;
  };
  std::vector<Block> blocks;
  blocks.reserve(y.size());
  for (double v : y) {
    blocks.push_back({v, 1});
    while (blocks.size() > 1) {
      auto& b = blocks[blocks.size() - 1];
      auto& a = blocks[blocks.size() - 2];
      if (a.sum / a.count <= b.sum / b.count) break;
      a.sum += b.sum;
      a.count += b.count;
      blocks.pop_back();
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const auto& b : blocks)
    out.insert(out.end(), b.count, b.sum / b.count);
  return out;
}

ScalingFit fit_loglog(const std::vector<double>& sizes, const std::vector<double>& fractions) {
  if (sizes.size() < 4) throw std::domain_error("scaling fit needs at least 4 sizes");
  ScalingFit fit;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (!(fractions[i] > 0.0))
      throw std::domain_error("scaling fit: vanishing fraction; widen sampling");
    fit.x.push_back(std::log(sizes[i]));
    fit.y.push_back(std::log(fractions[i]));
  }
  const double n = static_cast<double>(fit.x.size());
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < fit.x.size(); ++i) {
    xm += fit.x[i];
    ym += fit.y[i];
  }
  xm /= n;
  ym /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < fit.x.size(); ++i) {
    sxx += (fit.x[i] - xm) * (fit.x[i] - xm);
    sxy += (fit.x[i] - xm) * (fit.y[i] - ym);
    syy += (fit.y[i] - ym) * (fit.y[i] - ym);
  }
  if (syy < 1e-24) throw std::domain_error("scaling fit: degenerate (flat) data");
  fit.slope = sxy / sxx;
  double ss_resid = syy - fit.slope * sxy;
  fit.slope_stderr = std::sqrt(std::max(0.0, ss_resid / (n - 2.0)) / sxx);
  return fit;
}

}  // namespace

double mu_zero(const EnsembleSpec& spec) {
  ScalesReport r = scales(spec);
  return antihermitian_part(spec.cls) == AntihermitianPart::AAntisym ? r.mu_A : r.mu_O;
}

std::optional<Window> default_window(const EnsembleSpec& spec) {
  if (spec.family == Family::Gaussian) return kCentralWindow;
  return std::nullopt;
}

std::vector<double> default_mu_grid() {
  std::vector<double> grid{0.0};
  const int n = 25;
  for (int k = 0; k < n; ++k)
    grid.push_back(0.05 * std::pow(100.0, static_cast<double>(k) / (n - 1)));
  return grid;
}

std::vector<TransitionCurve> run_transition(const EnsembleSpec& spec_template,
                                            const std::vector<double>& T_values,
                                            const std::vector<double>& mu_grid_mu0,
                                            int n_samples, std::uint64_t master_seed,
                                            int workers) {
  if (n_samples < 1) throw std::invalid_argument("run_transition: n_samples must be >= 1");
  std::vector<TransitionCurve> curves(T_values.size());
  const std::size_t n_mu = mu_grid_mu0.size();
  for (std::size_t c = 0; c < T_values.size(); ++c) {
    auto& curve = curves[c];
    curve.spec = spec_template;
    curve.spec.T = T_values[c];
    curve.T = T_values[c];
    curve.n_samples = n_samples;
    double mu0 = mu_zero(curve.spec);
    curve.mu_over_mu0 = mu_grid_mu0;
    for (double m : mu_grid_mu0) curve.mu_raw.push_back(m * mu0);
    // cells are identified by their parameters, not their grid position, so
    // any sweep arrangement reproduces the same draws
    for (std::size_t k = 0; k < n_mu; ++k)
      curve.cell_seeds.push_back(rng::mix(master_seed, spec_template.class_tag(),
                                          std::bit_cast<std::uint64_t>(curve.T),
                                          std::bit_cast<std::uint64_t>(curve.mu_raw[k])));
  }

  // flatten (curve, mu, sample) into independent jobs
  const std::size_t jobs = T_values.size() * n_mu * static_cast<std::size_t>(n_samples);
  std::vector<double> fc(jobs);
  parallel_for(jobs, workers, [&](std::size_t j) {
    std::size_t c = j / (n_mu * n_samples);
    std::size_t rem = j % (n_mu * n_samples);
    std::size_t k = rem / n_samples;
    std::size_t s = rem % n_samples;
    EnsembleSpec spec = curves[c].spec;
    spec.mu = curves[c].mu_raw[k];
    std::uint64_t seed = rng::mix(curves[c].cell_seeds[k], s);
    auto sample = sample_spectrum(spec, seed);
    fc[j] = complex_fraction(sample, default_window(spec));
  });

  for (std::size_t c = 0; c < T_values.size(); ++c) {
    for (std::size_t k = 0; k < n_mu; ++k) {
      std::vector<double> cell(fc.begin() + (c * n_mu + k) * n_samples,
                               fc.begin() + (c * n_mu + k + 1) * n_samples);
      auto ms = mean_stderr(cell);
      curves[c].fc_mean.push_back(ms.mean);
      curves[c].fc_stderr.push_back(ms.stderr_);
    }
  }
  return curves;
}

double find_mu_pt(TransitionCurve& curve) {
  if (curve.fc_mean.size() != curve.mu_over_mu0.size() || curve.fc_mean.size() < 2)
    throw std::invalid_argument("find_mu_pt: malformed curve");
  std::vector<double> iso = isotonic(curve.fc_mean);
  const double target = 0.5;
  if (iso.front() > target || iso.back() < target)
    throw std::domain_error("find_mu_pt: curve does not cross f_c = 1/2");
  for (std::size_t i = 1; i < iso.size(); ++i) {
    if (iso[i] >= target) {
      double x0 = curve.mu_over_mu0[i - 1], x1 = curve.mu_over_mu0[i];
      double y0 = iso[i - 1], y1 = iso[i];
      double mu_pt = y1 == y0 ? x1 : x0 + (target - y0) / (y1 - y0) * (x1 - x0);
      curve.mu_pt = mu_pt;
      curve.g_of_T = mu_pt;
      return mu_pt;
    }
  }
  throw std::domain_error("find_mu_pt: curve does not cross f_c = 1/2");
}

GEstimate predicted_scaling(EnsembleClass cls, double T, int N) {
  switch (cls) {
    case EnsembleClass::OO:
    case EnsembleClass::UOprime:
      return {1.0 / std::sqrt(1.0 + 1.0 / (N * T)), false};
    case EnsembleClass::UO:
      return {std::sqrt(T), false};
    case EnsembleClass::OA:
      return {1.0, false};
    case EnsembleClass::OAprime:
      return {1.0, T < 1.0 / (static_cast<double>(N) * N)};
  }
  return {1.0, false};
}

namespace {

std::vector<double> windowed(const Eigen::VectorXd& levels, const std::optional<Window>& win) {
  std::vector<double> out;
  out.reserve(levels.size());
  for (Eigen::Index i = 0; i < levels.size(); ++i) {
    double e = levels(i);
    if (!win || (e >= win->lo && e <= win->hi)) out.push_back(e);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// One draw's sorted, windowed hermitian-limit levels for spacing statistics.
std::vector<double> spacing_levels(const EnsembleSpec& spec, SpacingMode mode,
                                   std::uint64_t seed) {
  const int M = spec.M;
  if (spec.family == Family::Circular) {
    if (mode == SpacingMode::SingleSequence)
      throw ConfigError("single-sequence spacing is defined for the Gaussian family");
    EnsembleSpec s = spec;
    s.mu = 0.0;
    auto map = build_quantum_map(s, seed);
    auto qe = quasienergies(eigenvalues(map.matrix));
    std::vector<double> phases;
    phases.reserve(qe.size());
    for (const auto& e : qe) phases.push_back(e.real());
    std::sort(phases.begin(), phases.end());
    phases.push_back(phases.front() + 2.0 * kPi);  // wrap-around spacing
    return phases;
  }

  auto gen = rng::engine(seed);
  Matrix Gamma = coupling_matrix(spec);
  auto win = default_window(spec);
  if (spec.cls == EnsembleClass::UO && mode == SpacingMode::Superposed) {
    // Gamma mixes the two sequences; use the full 2M hermitian spectrum
    ComplexMatrix H = sample_gue(M, gen);
    ComplexMatrix full(2 * M, 2 * M);
    full.topLeftCorner(M, M) = H;
    full.bottomRightCorner(M, M) = H.conjugate();
    full.topRightCorner(M, M) = Gamma.cast<Complex>();
    full.bottomLeftCorner(M, M) = Gamma.cast<Complex>();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(full, Eigen::EigenvaluesOnly);
    return windowed(es.eigenvalues(), win);
  }

  Matrix H = hermitian_part(spec.cls) == HermitianPart::O
                 ? sample_goe(M, gen)
                 : Matrix();  // UO single-sequence falls through below
  ComplexMatrix Hc;
  bool complex_h = hermitian_part(spec.cls) == HermitianPart::U;
  if (complex_h) Hc = sample_gue(M, gen);

  auto seq = [&](double sign) {
    if (complex_h) {
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(
          Hc + sign * Gamma.cast<Complex>(), Eigen::EigenvaluesOnly);
      return windowed(es.eigenvalues(), win);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(H + sign * Gamma, Eigen::EigenvaluesOnly);
    return windowed(es.eigenvalues(), win);
  };

  std::vector<double> plus = seq(1.0);
  if (mode == SpacingMode::SingleSequence) return plus;
  std::vector<double> minus = seq(-1.0);
  plus.insert(plus.end(), minus.begin(), minus.end());
  std::sort(plus.begin(), plus.end());
  return plus;
}

}  // namespace

std::vector<SpacingHistogram> run_spacing(const EnsembleSpec& spec_template,
                                          const std::vector<double>& T_values, int n_samples,
                                          SpacingMode mode, std::uint64_t master_seed,
                                          int workers, int bins, double s_max) {
  std::vector<SpacingHistogram> out;
  out.reserve(T_values.size());
  for (std::size_t c = 0; c < T_values.size(); ++c) {
    EnsembleSpec spec = spec_template;
    spec.T = T_values[c];
    spec.mu = 0.0;
    spec.validate();
    std::vector<std::vector<double>> lists(n_samples);
    parallel_for(static_cast<std::size_t>(n_samples), workers, [&](std::size_t s) {
      std::uint64_t seed =
          rng::mix(master_seed, spec.class_tag(), std::bit_cast<std::uint64_t>(spec.T), s);
      lists[s] = spacing_levels(spec, mode, seed);
    });
    out.push_back(spacing_histogram(lists, mode, bins, s_max));
  }
  return out;
}

DensityComparison run_density_comparison(const EnsembleSpec& spec, const GridRegion& region,
                                         int nx, int ny, int n_samples,
                                         std::uint64_t master_seed, int workers) {
  if (spec.family != Family::Gaussian)
    throw ConfigError("density comparison is defined for the Gaussian family");
  DensityComparison rep;
  rep.grid = density_grid(region, nx, ny, variant_for_class(spec.cls), pastur_params(spec),
                          workers);

  std::vector<SpectrumSample> samples(n_samples);
  parallel_for(static_cast<std::size_t>(n_samples), workers, [&](std::size_t s) {
    samples[s] = sample_spectrum(spec, rng::mix(master_seed, spec.class_tag(), s));
  });

  const double dx = rep.grid.re_axis[1] - rep.grid.re_axis[0];
  const double dy = rep.grid.im_axis[1] - rep.grid.im_axis[0];
  auto support_at = [&](double x, double y) {
    // inside if any surrounding converged node carries density above threshold
    int ix = static_cast<int>(std::floor((x - rep.grid.re_axis.front()) / dx));
    int iy = static_cast<int>(std::floor((y - rep.grid.im_axis.front()) / dy));
    for (int a = 0; a <= 1; ++a)
      for (int b = 0; b <= 1; ++b) {
        int jx = ix + a, jy = iy + b;
        if (jx < 0 || jy < 0 || jx >= static_cast<int>(rep.grid.re_axis.size()) ||
            jy >= static_cast<int>(rep.grid.im_axis.size()))
          continue;
        if (rep.grid.ok(jy, jx) && rep.grid.at(jy, jx) > rep.support_threshold) return true;
      }
    return false;
  };

  long total_eigs = 0;
  const double real_band = rep.axis_band;
  for (const auto& s : samples) {
    total_eigs += s.size();
    double tol = kRealThreshold * classification_scale(s.eigenvalues);
    for (const auto& e : s.eigenvalues) {
      if (std::abs(e.imag()) < tol) continue;       // real eigenvalue
      if (std::abs(e.imag()) < real_band) continue; // excluded axis band
      ++rep.n_complex;
      if (!support_at(e.real(), e.imag())) ++rep.n_outside_support;
    }
  }
  rep.outside_fraction =
      rep.n_complex > 0 ? static_cast<double>(rep.n_outside_support) / rep.n_complex : 0.0;
  rep.mc_complex_mass_in_region = static_cast<double>(rep.n_complex) / total_eigs;
  for (std::size_t iy = 0; iy < rep.grid.im_axis.size(); ++iy) {
    if (std::abs(rep.grid.im_axis[iy]) < real_band) continue;
    for (std::size_t ix = 0; ix < rep.grid.re_axis.size(); ++ix)
      if (rep.grid.ok(iy, ix)) rep.grid_mass_off_axis += rep.grid.at(iy, ix) * dx * dy;
  }

  // binned density slices at fixed Re E
  for (double slice : {0.0, -1.0, 1.0}) {
    if (slice < region.re_min || slice > region.re_max) continue;
    std::size_t ix = 0;
    for (std::size_t i = 0; i < rep.grid.re_axis.size(); ++i)
      if (std::abs(rep.grid.re_axis[i] - slice) < std::abs(rep.grid.re_axis[ix] - slice)) ix = i;
    const double half_width = dx;  // slice band of width 2 dx
    double l1 = 0.0, ref = 0.0;
    for (std::size_t iy = 0; iy < rep.grid.im_axis.size(); ++iy) {
      if (std::abs(rep.grid.im_axis[iy]) < real_band || !rep.grid.ok(iy, ix)) continue;
      long count = 0;
      for (const auto& s : samples)
        for (const auto& e : s.eigenvalues) {
          if (std::abs(e.real() - rep.grid.re_axis[ix]) > half_width) continue;
          if (std::abs(e.imag() - rep.grid.im_axis[iy]) > dy / 2.0) continue;
          ++count;
        }
      double mc_density = static_cast<double>(count) / (total_eigs * 2.0 * half_width * dy);
      l1 += std::abs(mc_density - rep.grid.at(iy, ix)) * dy;
      ref += rep.grid.at(iy, ix) * dy;
    }
    if (ref > 0.0) {
      rep.slice_re.push_back(rep.grid.re_axis[ix]);
      rep.slice_rel_l1.push_back(l1 / ref);
    }
  }
  return rep;
}

ScalingFit run_m_scaling(EnsembleClass cls, double alpha, double T, double mu_over_ET,
                         const std::vector<int>& M_values, int n_samples,
                         std::uint64_t master_seed, int workers) {
  std::vector<double> fractions(M_values.size());
  std::vector<double> sizes(M_values.size());
  for (std::size_t m = 0; m < M_values.size(); ++m) {
    EnsembleSpec spec;
    spec.cls = cls;
    spec.family = Family::Gaussian;
    spec.M = M_values[m];
    spec.N = static_cast<int>(std::lround(alpha * M_values[m]));
    spec.T = T;
    spec.mu = mu_over_ET * scales(spec).e_thouless;
    spec.validate();
    std::vector<double> fr(n_samples);
    parallel_for(static_cast<std::size_t>(n_samples), workers, [&](std::size_t s) {
      auto sample = sample_spectrum(
          spec, rng::mix(master_seed, spec.class_tag(), static_cast<std::uint64_t>(spec.M), s));
      fr[s] = real_fraction(sample, default_window(spec));
    });
    fractions[m] = mean_stderr(fr).mean;
    sizes[m] = static_cast<double>(M_values[m]);
  }
  return fit_loglog(sizes, fractions);
}

std::pair<double, double> ginibre_real_count(int M, int n_samples, std::uint64_t master_seed,
                                             int workers) {
  if (M < 2) throw std::invalid_argument("ginibre_real_count: M must be >= 2");
  std::vector<double> counts(n_samples);
  parallel_for(static_cast<std::size_t>(n_samples), workers, [&](std::size_t s) {
    auto gen = rng::engine(rng::mix(master_seed, 0x617ebull, static_cast<std::uint64_t>(M), s));
    std::normal_distribution<double> nd(0.0, 1.0);
    Matrix A(M, M);
    for (int j = 0; j < M; ++j)
      for (int i = 0; i < M; ++i) A(i, j) = nd(gen);
    auto eigs = eigenvalues(A);
    long n_real = 0;
    for (const auto& e : eigs)
      if (e.imag() == 0.0) ++n_real;  // 1x1 Schur blocks are exactly real
    counts[s] = static_cast<double>(n_real);
  });
  auto ms = mean_stderr(counts);
  return {ms.mean, ms.stderr_};
}

ScalingFit ginibre_m_scaling(const std::vector<int>& M_values,
                             const std::vector<int>& n_samples, std::uint64_t master_seed,
                             int workers) {
  if (M_values.size() != n_samples.size())
    throw std::invalid_argument("ginibre_m_scaling: size mismatch");
  std::vector<double> sizes, fractions;
  for (std::size_t i = 0; i < M_values.size(); ++i) {
    auto [mean, se] = ginibre_real_count(M_values[i], n_samples[i],
                                         rng::mix(master_seed, i), workers);
    sizes.push_back(static_cast<double>(M_values[i]));
    fractions.push_back(mean / M_values[i]);
  }
  return fit_loglog(sizes, fractions);
}

}  // namespace ptlab
