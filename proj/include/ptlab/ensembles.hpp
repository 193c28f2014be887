#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "ptlab/errors.hpp"
#include "ptlab/rng.hpp"

namespace ptlab {

using Matrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

enum class HermitianPart { O, U };
enum class AntihermitianPart { OUniform, AAntisym };
enum class TimeReversal { PT, PTTprime };
enum class Family { Gaussian, Circular };
enum class CircularKind { COE, CUE };

/// The five coupled-resonator symmetry classes. OO is shared between the
/// two time-reversal conventions; a trailing `prime` marks the variant in
/// which time reversal is combined with transposition.
enum class EnsembleClass { OO, UO, UOprime, OA, OAprime };

HermitianPart hermitian_part(EnsembleClass c);
AntihermitianPart antihermitian_part(EnsembleClass c);
TimeReversal time_reversal(EnsembleClass c);

/// Validates (hermitian, antihermitian, time-reversal) against the five
/// admissible combinations; throws ConfigError otherwise.
EnsembleClass make_class(HermitianPart h, AntihermitianPart x, TimeReversal tr);

/// "GOOE", "CUOE'", ... (G for Gaussian, C for circular).
std::string ensemble_name(EnsembleClass c, Family f);
/// Inverse of ensemble_name; accepts a trailing ' or p for primed classes.
std::pair<EnsembleClass, Family> parse_ensemble_name(const std::string& name);

struct EnsembleSpec {
  EnsembleClass cls = EnsembleClass::OO;
  Family family = Family::Gaussian;
  int M = 0;      // modes per resonator
  int N = 0;      // open interface channels
  double T = 1.0; // interface transparency
  double mu = 0.0;// amplification/absorption rate (raw energy units)

  void validate() const;
  std::uint64_t class_tag() const;
};

struct ScalesReport {
  double delta;       // mean level spacing
  double e_thouless;  // N T delta / 2pi
  double mu_O;        // sqrt(N) delta / 2pi
  double mu_A;        // sqrt(M) delta / 2pi
  double t_O;         // 1/N
  double t_A;         // 1/N^2
  double alpha;       // N/M
  double tau;         // map time step (1 for circular family)
};

ScalesReport scales(const EnsembleSpec& spec);

/// 2M x 2M effective Hamiltonian with block structure
///   [ H_L - i X_L , Gamma ; Gamma , H_R + i X_R ].
/// `real_form` holds a real similarity transform of `matrix` for the
/// classes with real H (OO, OA, OA'), so their spectra can be computed
/// with a real Schur decomposition.
struct EffectiveHamiltonian {
  ComplexMatrix matrix;
  EnsembleSpec spec;
  std::uint64_t seed = 0;
  std::optional<Matrix> real_form;
};

struct QuantumMap {
  ComplexMatrix matrix;  // 2M x 2M, unitary at mu = 0
  EnsembleSpec spec;
  std::uint64_t seed = 0;
};

/// gamma = sqrt(T) / (1 + sqrt(1 - T)); throws std::domain_error outside [0,1].
double coupling_gamma(double T);

/// GOE draw, off-diagonal variance 1/M, diagonal variance 2/M
/// (the convention that gives the radius-2 semicircle).
Matrix sample_goe(int M, std::mt19937_64& gen);
Matrix sample_goe(int M, std::uint64_t seed);

/// GUE draw, E|H_lm|^2 = 1/M off the diagonal, diagonal variance 1/M.
ComplexMatrix sample_gue(int M, std::mt19937_64& gen);
ComplexMatrix sample_gue(int M, std::uint64_t seed);

/// Real antisymmetric Gaussian draw with per-element variance mu^2/(M-1),
/// which makes E[tr AA^T]/M = mu^2 exact at finite M.
Matrix sample_antisym(int M, double mu, std::mt19937_64& gen);
Matrix sample_antisym(int M, double mu, std::uint64_t seed);

/// Haar unitary (CUE) via phase-fixed QR of a complex Ginibre matrix;
/// COE is U^T U with U Haar.
ComplexMatrix sample_circular(int M, CircularKind kind, std::mt19937_64& gen);
ComplexMatrix sample_circular(int M, CircularKind kind, std::uint64_t seed);

/// Gamma = gamma(T) * diag(1_N, 0_{M-N}).
Matrix coupling_matrix(const EnsembleSpec& spec);

EffectiveHamiltonian build_hamiltonian(const EnsembleSpec& spec, std::uint64_t seed);

/// U H U with U = 2^{-1/2} (sigma_x + sigma_z) (x) 1_M. Block-diagonalizes
/// every class at mu = 0 except UO, where the off-diagonal block is i Im H.
ComplexMatrix build_p_basis(const EffectiveHamiltonian& h);

QuantumMap build_quantum_map(const EnsembleSpec& spec, std::uint64_t seed);

}  // namespace ptlab
