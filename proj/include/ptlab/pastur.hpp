#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "ptlab/ensembles.hpp"

namespace ptlab {

using Matrix4c = Eigen::Matrix<Complex, 4, 4>;

/// The four self-consistency equations for the reduced 4x4 Green function.
/// Each variant carries a fixed substitution S(G) inside the inverses:
///   OO_UOprime: S(G) = G
///   UO:         S(G) = P1 G P1 + P2 G P2,  P1 = diag(1,0,1,0), P2 = diag(0,1,0,1)
///   OA:         S(G) = G - R G R,   R  = mu diag(1,1,-1,-1), with u -> u|_{mu=0}
///   OAprime:    S(G) = G - R'G R',  R' = mu diag(1,-1,-1,1), with u -> u|_{mu=0}
enum class PasturVariant { OO_UOprime, UO, OA, OAprime };

PasturVariant variant_for_class(EnsembleClass c);

/// One evaluation point. z and z_star are formally independent complex
/// variables; lambda > 0 regularizes branch cuts during continuation.
struct PasturPoint {
  Complex z{0.0, 0.0};
  Complex z_star{0.0, 0.0};
  double alpha = 0.0;
  double gamma = 0.0;
  double mu = 0.0;
  double lambda = 1e-3;
};

struct GreenReduced {
  Matrix4c g = Matrix4c::Zero();
  double residual = 0.0;
};

struct PasturParams {
  double alpha = 0.0;
  double gamma = 0.0;
  double mu = 0.0;
  double lambda = 1e-3;  // final regularizer
};

/// alpha, gamma(T), mu and the default lambda for a Gaussian ensemble spec.
PasturParams pastur_params(const EnsembleSpec& spec);

struct HomotopyOptions {
  Complex z0{0.0, 0.0};
  int alpha_steps = 10;
  int mu_steps = 8;
  int lambda_steps = 8;
  double z_step = 0.05;
  double min_step_fraction = 1e-4;  // substep floor before giving up
};

inline constexpr double kPasturTolerance = 1e-10;
inline constexpr double kDensityClip = 1e-6;

/// The 4x4 coefficient matrix u_gamma as printed: diagonal
/// (z+imu, z-imu, z*-imu, z*+imu), -gamma on the (1,2)/(3,4) couplings and
/// i lambda on the (1,3)/(2,4) regulator entries.
Matrix4c u_matrix(const PasturPoint& p, double gamma_value);
/// Variant-aware form: OA/OA' use u~ = u|_{mu=0}.
Matrix4c u_matrix(const PasturPoint& p, double gamma_value, PasturVariant v);

/// Exact alpha = 0 solution G0 = u0/2 + (u0^2/4 - 1)^{1/2}, branch anchored
/// at G0(z=z*=0; mu=0, lambda->0) = -i sigma_x (x) 1_2 and continued through
/// the scalar semicircle resolvent applied to the two decoupled 2x2 blocks.
GreenReduced g0_uncoupled(const PasturPoint& p);

/// Fixed-point defect F(G) = alpha (u_g - S(G))^-1 + (1-alpha)(u_0 - S(G))^-1 - G.
Matrix4c pastur_residual(const Matrix4c& g, const PasturPoint& p, PasturVariant v);

/// Damped Newton on the realified 32-dimensional system, with a relaxed
/// fixed-point fallback. Converges to ||F(G)|| < kPasturTolerance or throws
/// SolverFailure (the caller is expected to shrink its continuation step).
GreenReduced solve_point(const PasturPoint& p, PasturVariant v, const GreenReduced& from);

/// Anchor at G0(z0; lambda = max(alpha, lambda_target)), continue alpha up,
/// (for A-type variants) mu up, lambda down, then walk z to the request.
GreenReduced solve_homotopy(Complex z, PasturVariant v, const PasturParams& params,
                            const HomotopyOptions& opt = {});

struct DensityValue {
  double rho = 0.0;
  double im_residue = 0.0;  // imaginary part of the numerical derivative
  double residual = 0.0;
  bool clipped = false;     // a small negative value was clipped to zero
};

/// rho(z, z*) = (1/2pi) d(G11 + G22)/dz*, via a central difference in z*
/// (step 1e-5 max(1,|z|)) around a converged solution. Values below
/// -kDensityClip abort with diagnostics; tiny negatives are clipped.
DensityValue density_from(const GreenReduced& center, Complex z, PasturVariant v,
                          const PasturParams& params);
DensityValue density(Complex z, PasturVariant v, const PasturParams& params,
                     const HomotopyOptions& opt = {});

struct GridRegion {
  double re_min, re_max;
  double im_min, im_max;
};

struct DensityGrid {
  std::vector<double> re_axis;
  std::vector<double> im_axis;
  // row-major [im][re]
  std::vector<double> rho;
  std::vector<double> residual;
  std::vector<std::uint8_t> converged;
  PasturVariant variant = PasturVariant::OO_UOprime;
  PasturParams params;
  long n_clipped = 0;
  long n_failed = 0;

  double& at(std::size_t iy, std::size_t ix) { return rho[iy * re_axis.size() + ix]; }
  double at(std::size_t iy, std::size_t ix) const { return rho[iy * re_axis.size() + ix]; }
  bool ok(std::size_t iy, std::size_t ix) const { return converged[iy * re_axis.size() + ix] != 0; }
  /// Integral of rho over the converged cells (uniform-cell quadrature).
  double integral() const;
};

/// Row-wise sweep with warm starts from grid neighbours; per-point failures
/// are recorded as missing cells, not errors. Rows are independent jobs once
/// the first column has been walked.
DensityGrid density_grid(const GridRegion& region, int nx, int ny, PasturVariant v,
                         const PasturParams& params, int workers = 1,
                         const HomotopyOptions& opt = {});

/// Defect of the cubic rearrangement (u_g - G) G (u_0 - G) = u_{(1-a)g} - G
/// (an identity for OO_UOprime solutions; used as an independent check).
double cubic_identity_defect(const Matrix4c& g, const PasturPoint& p);

}  // namespace ptlab
