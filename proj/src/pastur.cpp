#include "ptlab/pastur.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "ptlab/errors.hpp"
#include "ptlab/parallel.hpp"

namespace ptlab {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI{0.0, 1.0};

using Matrix2c = Eigen::Matrix<Complex, 2, 2>;
using Vector32 = Eigen::Matrix<double, 32, 1>;
using Matrix32 = Eigen::Matrix<double, 32, 32>;

/// Stieltjes transform of the radius-2 semicircle, g(w) = (w - sqrt(w-2)sqrt(w+2))/2,
/// analytic off [-2,2] and decaying like 1/w. The principal-branch product
/// places the cut exactly on the segment, which matches the anchor
/// G0(0;lambda->0) = -i sigma_x (x) 1.
Complex semicircle_resolvent(Complex w) {
  return (w - std::sqrt(w - 2.0) * std::sqrt(w + 2.0)) / 2.0;
}

Complex semicircle_resolvent_deriv(Complex w) {
  Complex h = std::sqrt(w - 2.0) * std::sqrt(w + 2.0);
  return (1.0 - w / h) / 2.0;
}

/// g applied to a symmetric 2x2 block via Sylvester's interpolation.
Matrix2c resolvent_of_block(const Matrix2c& b, const PasturPoint& p) {
  Complex tr2 = (b(0, 0) + b(1, 1)) / 2.0;
  Complex disc = std::sqrt((b(0, 0) - b(1, 1)) * (b(0, 0) - b(1, 1)) / 4.0 + b(0, 1) * b(1, 0));
  Complex wp = tr2 + disc, wm = tr2 - disc;
  double sep = std::abs(wp - wm);
  if (sep < 1e-12 * (std::abs(wp) + std::abs(wm) + 1.0)) {
    // near-defective block: first-order expansion around the mean eigenvalue
    if (std::abs(tr2 * tr2 / 4.0 - 1.0) < 1e-10) {
      std::ostringstream msg;
      msg << "g0_uncoupled: defective block at a branch point (z=" << p.z
          << ", z*=" << p.z_star << ", mu=" << p.mu << ", lambda=" << p.lambda
          << "); retry with perturbed lambda";
      throw SolverFailure(msg.str());
    }
    Matrix2c out = semicircle_resolvent(tr2) * Matrix2c::Identity();
    out += semicircle_resolvent_deriv(tr2) * (b - tr2 * Matrix2c::Identity());
    return out;
  }
  Matrix2c id = Matrix2c::Identity();
  return (semicircle_resolvent(wp) * (b - wm * id) - semicircle_resolvent(wm) * (b - wp * id)) /
         (wp - wm);
}

Matrix4c s_map(const Matrix4c& g, PasturVariant v, double mu) {
  switch (v) {
    case PasturVariant::OO_UOprime:
      return g;
    case PasturVariant::UO: {
      // keep only entries with both indices in {0,2} or both in {1,3}
      Matrix4c out = Matrix4c::Zero();
      for (int i : {0, 2})
        for (int j : {0, 2}) out(i, j) = g(i, j);
      for (int i : {1, 3})
        for (int j : {1, 3}) out(i, j) = g(i, j);
      return out;
    }
    case PasturVariant::OA:
    case PasturVariant::OAprime: {
      Eigen::Vector4d r;
      if (v == PasturVariant::OA)
        r << 1.0, 1.0, -1.0, -1.0;
      else
        r << 1.0, -1.0, -1.0, 1.0;
      r *= mu;
      Matrix4c rgr = r.cast<Complex>().asDiagonal() * g * r.cast<Complex>().asDiagonal();
      return g - rgr;
    }
  }
  return g;
}

Matrix4c invert_or_throw(const Matrix4c& m, const PasturPoint& p) {
  Eigen::FullPivLU<Matrix4c> lu(m);
  if (!lu.isInvertible()) {
    std::ostringstream msg;
    msg << "singular inversion in Pastur residual at z=" << p.z << ", z*=" << p.z_star
        << ", alpha=" << p.alpha << ", lambda=" << p.lambda;
    throw SolverFailure(msg.str());
  }
  return lu.inverse();
}

Matrix4c pastur_rhs(const Matrix4c& g, const PasturPoint& p, PasturVariant v) {
  Matrix4c s = s_map(g, v, p.mu);
  Matrix4c ug = u_matrix(p, p.gamma, v);
  Matrix4c u0 = u_matrix(p, 0.0, v);
  return p.alpha * invert_or_throw(ug - s, p) + (1.0 - p.alpha) * invert_or_throw(u0 - s, p);
}

Vector32 realify(const Matrix4c& g) {
  Vector32 v;
  for (int k = 0; k < 16; ++k) {
    v(2 * k) = g(k / 4, k % 4).real();
    v(2 * k + 1) = g(k / 4, k % 4).imag();
  }
  return v;
}

Matrix4c complexify(const Vector32& v) {
  Matrix4c g;
  for (int k = 0; k < 16; ++k) g(k / 4, k % 4) = Complex(v(2 * k), v(2 * k + 1));
  return g;
}

}  // namespace

PasturVariant variant_for_class(EnsembleClass c) {
  switch (c) {
    case EnsembleClass::OO:
    case EnsembleClass::UOprime:
      return PasturVariant::OO_UOprime;
    case EnsembleClass::UO:
      return PasturVariant::UO;
    case EnsembleClass::OA:
      return PasturVariant::OA;
    case EnsembleClass::OAprime:
      return PasturVariant::OAprime;
  }
  return PasturVariant::OO_UOprime;
}

PasturParams pastur_params(const EnsembleSpec& spec) {
  PasturParams p;
  p.alpha = static_cast<double>(spec.N) / spec.M;
  p.gamma = coupling_gamma(spec.T);
  p.mu = spec.mu;
  return p;
}

Matrix4c u_matrix(const PasturPoint& p, double gamma_value) {
  Matrix4c u = Matrix4c::Zero();
  u(0, 0) = p.z + kI * p.mu;
  u(1, 1) = p.z - kI * p.mu;
  u(2, 2) = p.z_star - kI * p.mu;
  u(3, 3) = p.z_star + kI * p.mu;
  u(0, 1) = u(1, 0) = -gamma_value;
  u(2, 3) = u(3, 2) = -gamma_value;
  u(0, 2) = u(2, 0) = kI * p.lambda;
  u(1, 3) = u(3, 1) = kI * p.lambda;
  return u;
}

Matrix4c u_matrix(const PasturPoint& p, double gamma_value, PasturVariant v) {
  if (v == PasturVariant::OA || v == PasturVariant::OAprime) {
    PasturPoint q = p;
    q.mu = 0.0;
    return u_matrix(q, gamma_value);
  }
  return u_matrix(p, gamma_value);
}

GreenReduced g0_uncoupled(const PasturPoint& p) {
  Matrix4c u0 = u_matrix(p, 0.0);
  // u0 decouples into the (0,2) and (1,3) index blocks
  Matrix2c b1, b2;
  b1 << u0(0, 0), u0(0, 2), u0(2, 0), u0(2, 2);
  b2 << u0(1, 1), u0(1, 3), u0(3, 1), u0(3, 3);
  Matrix2c g1 = resolvent_of_block(b1, p);
  Matrix2c g2 = resolvent_of_block(b2, p);
  GreenReduced out;
  out.g(0, 0) = g1(0, 0);
  out.g(0, 2) = g1(0, 1);
  out.g(2, 0) = g1(1, 0);
  out.g(2, 2) = g1(1, 1);
  out.g(1, 1) = g2(0, 0);
  out.g(1, 3) = g2(0, 1);
  out.g(3, 1) = g2(1, 0);
  out.g(3, 3) = g2(1, 1);
  out.residual = (out.g * (u0 - out.g) - Matrix4c::Identity()).norm();
  return out;
}

Matrix4c pastur_residual(const Matrix4c& g, const PasturPoint& p, PasturVariant v) {
  return pastur_rhs(g, p, v) - g;
}

GreenReduced solve_point(const PasturPoint& p, PasturVariant v, const GreenReduced& from) {
  Matrix4c g = from.g;
  Matrix4c f = pastur_residual(g, p, v);
  double r = f.norm();

  const int max_newton = 60;
  bool newton_stalled = false;
  for (int it = 0; it < max_newton && r >= kPasturTolerance; ++it) {
    const double h = 1e-7 * std::max(1.0, g.norm());
    Matrix32 jac;
    Vector32 g_vec = realify(g);
    Vector32 f_vec = realify(f);
    for (int k = 0; k < 32; ++k) {
      Vector32 pert = g_vec;
      pert(k) += h;
      Matrix4c fp;
      try {
        fp = pastur_residual(complexify(pert), p, v);
      } catch (const SolverFailure&) {
        fp = f;  // degenerate column; the line search will sort it out
      }
      jac.col(k) = (realify(fp) - f_vec) / h;
    }
    Vector32 step = jac.partialPivLu().solve(-f_vec);
    if (!step.allFinite()) {
      newton_stalled = true;
      break;
    }
    double t = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 10; ++bt, t *= 0.5) {
      Matrix4c g_try = complexify(g_vec + t * step);
      try {
        Matrix4c f_try = pastur_residual(g_try, p, v);
        double r_try = f_try.norm();
        if (r_try < (1.0 - 0.25 * t) * r) {
          g = g_try;
          f = f_try;
          r = r_try;
          accepted = true;
          break;
        }
      } catch (const SolverFailure&) {
        // step left the domain; keep halving
      }
    }
    if (!accepted) {
      newton_stalled = true;
      break;
    }
  }

  if (r >= kPasturTolerance) {
    // relaxed fixed-point fallback (also mops up an exhausted Newton loop)
    (void)newton_stalled;
    const double eta = 0.5;
    for (int it = 0; it < 400 && r >= kPasturTolerance; ++it) {
      Matrix4c rhs = pastur_rhs(g, p, v);
      g = (1.0 - eta) * g + eta * rhs;
      r = pastur_residual(g, p, v).norm();
    }
  }

  if (r >= kPasturTolerance) {
    std::ostringstream msg;
    msg << "solve_point did not converge (residual " << r << ") at z=" << p.z
        << ", z*=" << p.z_star << ", alpha=" << p.alpha << ", mu=" << p.mu
        << ", lambda=" << p.lambda;
    throw SolverFailure(msg.str());
  }

  // polish: central differences downstream divide by 1e-5, so push the
  // residual as far below tolerance as a few extra iterations allow
  for (int it = 0; it < 3 && r > 1e-13; ++it) {
    Matrix4c rhs = pastur_rhs(g, p, v);
    Matrix4c g_try = 0.5 * g + 0.5 * rhs;
    double r_try = pastur_residual(g_try, p, v).norm();
    if (r_try >= r) break;
    g = g_try;
    r = r_try;
  }

  return {g, r};
}

namespace {

/// Continue the solution along point(s), s in [0,1], with adaptive halving.
GreenReduced continue_leg(GreenReduced g, const std::function<PasturPoint(double)>& point,
                          int n_steps, double min_fraction, PasturVariant v) {
  double s = 0.0;
  double ds = 1.0 / std::max(1, n_steps);
  int successes = 0;
  while (s < 1.0) {
    double s_next = std::min(1.0, s + ds);
    try {
      g = solve_point(point(s_next), v, g);
      s = s_next;
      if (++successes >= 2 && ds < 0.5) {
        ds *= 1.5;
        successes = 0;
      }
    } catch (const SolverFailure& e) {
      ds *= 0.5;
      successes = 0;
      if (ds < min_fraction / std::max(1, n_steps)) {
        std::ostringstream msg;
        msg << "continuation breakdown below step floor: " << e.what();
        throw SolverFailure(msg.str());
      }
    }
  }
  return g;
}

}  // namespace

GreenReduced solve_homotopy(Complex z, PasturVariant v, const PasturParams& params,
                            const HomotopyOptions& opt) {
  const bool a_type = v == PasturVariant::OA || v == PasturVariant::OAprime;
  const double lam_anchor = std::max(params.alpha, params.lambda);

  PasturPoint pt;
  pt.z = opt.z0;
  pt.z_star = std::conj(opt.z0);
  pt.gamma = params.gamma;
  pt.alpha = 0.0;
  pt.mu = a_type ? 0.0 : params.mu;  // A-type non-hermiticity is continued separately
  pt.lambda = lam_anchor;

  if (params.alpha == 0.0 && !(a_type && params.mu > 0.0)) {
    // G0 is exact for any z at alpha = 0; just evaluate at the request
    PasturPoint target = pt;
    target.z = z;
    target.z_star = std::conj(z);
    target.lambda = params.lambda;
    return g0_uncoupled(target);
  }
  GreenReduced g = g0_uncoupled(pt);

  // (i)-(ii): couple the interface
  if (params.alpha > 0.0) {
    g = continue_leg(
        g,
        [&](double s) {
          PasturPoint q = pt;
          q.alpha = s * params.alpha;
          return q;
        },
        opt.alpha_steps, opt.min_step_fraction, v);
    pt.alpha = params.alpha;
  }

  // A-type: raise mu from the hermitian anchor
  if (a_type && params.mu > 0.0) {
    g = continue_leg(
        g,
        [&](double s) {
          PasturPoint q = pt;
          q.mu = s * params.mu;
          return q;
        },
        opt.mu_steps, opt.min_step_fraction, v);
    pt.mu = params.mu;
  }

  // (iii): relax the regularizer
  if (pt.lambda != params.lambda) {
    double lam_from = pt.lambda;
    g = continue_leg(
        g,
        [&](double s) {
          PasturPoint q = pt;
          q.lambda = lam_from + s * (params.lambda - lam_from);
          return q;
        },
        opt.lambda_steps, opt.min_step_fraction, v);
    pt.lambda = params.lambda;
  }

  // (iv): walk z
  Complex dz = z - pt.z;
  if (std::abs(dz) > 0.0) {
    int n = std::max(1, static_cast<int>(std::ceil(std::abs(dz) / opt.z_step)));
    Complex z_from = pt.z;
    g = continue_leg(
        g,
        [&](double s) {
          PasturPoint q = pt;
          q.z = z_from + s * dz;
          q.z_star = std::conj(q.z);
          return q;
        },
        n, opt.min_step_fraction, v);
  }
  return g;
}

DensityValue density_from(const GreenReduced& center, Complex z, PasturVariant v,
                          const PasturParams& params) {
  const double h = 1e-5 * std::max(1.0, std::abs(z));
  PasturPoint pt;
  pt.z = z;
  pt.gamma = params.gamma;
  pt.mu = params.mu;
  pt.alpha = params.alpha;
  pt.lambda = params.lambda;

  pt.z_star = std::conj(z) + h;
  GreenReduced gp = solve_point(pt, v, center);
  pt.z_star = std::conj(z) - h;
  GreenReduced gm = solve_point(pt, v, center);

  Complex deriv = ((gp.g(0, 0) + gp.g(1, 1)) - (gm.g(0, 0) + gm.g(1, 1))) / (2.0 * h);
  Complex rho_c = deriv / (2.0 * kPi);

  DensityValue out;
  out.im_residue = rho_c.imag();
  out.residual = std::max({center.residual, gp.residual, gm.residual});
  double rho = rho_c.real();
  if (rho < -kDensityClip) {
    std::ostringstream msg;
    msg << "negative density " << rho << " beyond clip threshold at z=" << z
        << " (alpha=" << params.alpha << ", gamma=" << params.gamma << ", mu=" << params.mu
        << ", lambda=" << params.lambda << "); branch tracking suspect";
    throw SolverFailure(msg.str());
  }
  out.clipped = rho < 0.0;
  out.rho = std::max(rho, 0.0);
  return out;
}

DensityValue density(Complex z, PasturVariant v, const PasturParams& params,
                     const HomotopyOptions& opt) {
  GreenReduced center = solve_homotopy(z, v, params, opt);
  return density_from(center, z, v, params);
}

double DensityGrid::integral() const {
  if (re_axis.size() < 2 || im_axis.size() < 2) return 0.0;
  double dx = re_axis[1] - re_axis[0];
  double dy = im_axis[1] - im_axis[0];
  double sum = 0.0;
  for (std::size_t iy = 0; iy < im_axis.size(); ++iy)
    for (std::size_t ix = 0; ix < re_axis.size(); ++ix)
      if (ok(iy, ix)) sum += at(iy, ix);
  return sum * dx * dy;
}

DensityGrid density_grid(const GridRegion& region, int nx, int ny, PasturVariant v,
                         const PasturParams& params, int workers, const HomotopyOptions& opt) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("density_grid: need at least a 2x2 grid");
  DensityGrid grid;
  grid.variant = v;
  grid.params = params;
  grid.re_axis.resize(nx);
  grid.im_axis.resize(ny);
  for (int i = 0; i < nx; ++i)
    grid.re_axis[i] = region.re_min + (region.re_max - region.re_min) * i / (nx - 1);
  for (int i = 0; i < ny; ++i)
    grid.im_axis[i] = region.im_min + (region.im_max - region.im_min) * i / (ny - 1);
  grid.rho.assign(static_cast<std::size_t>(nx) * ny, std::numeric_limits<double>::quiet_NaN());
  grid.residual.assign(static_cast<std::size_t>(nx) * ny, 0.0);
  grid.converged.assign(static_cast<std::size_t>(nx) * ny, 0);

  // walk the first column down so each row has a warm start
  std::vector<std::optional<GreenReduced>> row_start(ny);
  for (int iy = 0; iy < ny; ++iy) {
    Complex z(grid.re_axis[0], grid.im_axis[iy]);
    try {
      if (iy == 0 || !row_start[iy - 1]) {
        row_start[iy] = solve_homotopy(z, v, params, opt);
      } else {
        PasturPoint pt;
        pt.gamma = params.gamma;
        pt.mu = params.mu;
        pt.alpha = params.alpha;
        pt.lambda = params.lambda;
        Complex z_prev(grid.re_axis[0], grid.im_axis[iy - 1]);
        GreenReduced g = *row_start[iy - 1];
        Complex dz = z - z_prev;
        int n = std::max(1, static_cast<int>(std::ceil(std::abs(dz) / opt.z_step)));
        double s = 0.0, ds = 1.0 / n;
        while (s < 1.0) {
          double s_next = std::min(1.0, s + ds);
          pt.z = z_prev + s_next * dz;
          pt.z_star = std::conj(pt.z);
          try {
            g = solve_point(pt, v, g);
            s = s_next;
          } catch (const SolverFailure&) {
            ds *= 0.5;
            if (ds < opt.min_step_fraction / n) throw;
          }
        }
        row_start[iy] = g;
      }
    } catch (const SolverFailure&) {
      row_start[iy].reset();  // the row sweep will retry with a fresh homotopy
    }
  }

  std::atomic<long> clipped{0}, failed{0};
  auto sweep_row = [&](std::size_t iy) {
    std::optional<GreenReduced> warm = row_start[iy];
    for (int ix = 0; ix < nx; ++ix) {
      Complex z(grid.re_axis[ix], grid.im_axis[iy]);
      PasturPoint pt;
      pt.z = z;
      pt.z_star = std::conj(z);
      pt.gamma = params.gamma;
      pt.mu = params.mu;
      pt.alpha = params.alpha;
      pt.lambda = params.lambda;
      std::size_t idx = iy * static_cast<std::size_t>(nx) + ix;
      try {
        GreenReduced center;
        if (warm) {
          center = solve_point(pt, v, *warm);
        } else {
          HomotopyOptions o = opt;
          center = solve_homotopy(z, v, params, o);
        }
        warm = center;
        DensityValue val = density_from(center, z, v, params);
        if (val.clipped) ++clipped;
        grid.rho[idx] = val.rho;
        grid.residual[idx] = val.residual;
        grid.converged[idx] = 1;
      } catch (const SolverFailure&) {
        ++failed;
        // leave the cell missing; retry the next cell from a fresh homotopy
        warm.reset();
      }
    }
  };

  parallel_for(static_cast<std::size_t>(ny), workers, sweep_row);
  grid.n_clipped = clipped.load();
  grid.n_failed = failed.load();
  return grid;
}

double cubic_identity_defect(const Matrix4c& g, const PasturPoint& p) {
  Matrix4c ug = u_matrix(p, p.gamma);
  Matrix4c u0 = u_matrix(p, 0.0);
  Matrix4c ua = u_matrix(p, (1.0 - p.alpha) * p.gamma);
  return ((ug - g) * g * (u0 - g) - (ua - g)).norm();
}

}  // namespace ptlab
