#include "ptlab/ensembles.hpp"

#include <cmath>
#include <numbers>

namespace ptlab {

namespace {
constexpr double kPi = std::numbers::pi;
const Complex kI{0.0, 1.0};
}  // namespace

HermitianPart hermitian_part(EnsembleClass c) {
  switch (c) {
    case EnsembleClass::UO:
    case EnsembleClass::UOprime:
      return HermitianPart::U;
    default:
      return HermitianPart::O;
  }
}

AntihermitianPart antihermitian_part(EnsembleClass c) {
  switch (c) {
    case EnsembleClass::OA:
    case EnsembleClass::OAprime:
      return AntihermitianPart::AAntisym;
    default:
      return AntihermitianPart::OUniform;
  }
}

TimeReversal time_reversal(EnsembleClass c) {
  switch (c) {
    case EnsembleClass::UOprime:
    case EnsembleClass::OAprime:
      return TimeReversal::PTTprime;
    default:
      return TimeReversal::PT;  // for OO the two conventions coincide
  }
}

EnsembleClass make_class(HermitianPart h, AntihermitianPart x, TimeReversal tr) {
  if (h == HermitianPart::O && x == AntihermitianPart::OUniform) return EnsembleClass::OO;
  if (h == HermitianPart::U && x == AntihermitianPart::OUniform)
    return tr == TimeReversal::PT ? EnsembleClass::UO : EnsembleClass::UOprime;
  if (h == HermitianPart::O && x == AntihermitianPart::AAntisym)
    return tr == TimeReversal::PT ? EnsembleClass::OA : EnsembleClass::OAprime;
  throw ConfigError("no such symmetry class: UA combinations are not admissible");
}

std::string ensemble_name(EnsembleClass c, Family f) {
  std::string s = f == Family::Gaussian ? "G" : "C";
  switch (c) {
    case EnsembleClass::OO: s += "OO"; break;
    case EnsembleClass::UO: s += "UO"; break;
    case EnsembleClass::UOprime: s += "UO"; break;
    case EnsembleClass::OA: s += "OA"; break;
    case EnsembleClass::OAprime: s += "OA"; break;
  }
  s += "E";
  if (time_reversal(c) == TimeReversal::PTTprime && c != EnsembleClass::OO) s += "'";
  return s;
}

std::pair<EnsembleClass, Family> parse_ensemble_name(const std::string& name) {
  std::string s = name;
  bool prime = false;
  if (!s.empty() && (s.back() == '\'' || s.back() == 'p' || s.back() == 'P')) {
    prime = true;
    s.pop_back();
  }
  Family family;
  if (s.size() == 4 && (s[0] == 'G' || s[0] == 'g')) family = Family::Gaussian;
  else if (s.size() == 4 && (s[0] == 'C' || s[0] == 'c')) family = Family::Circular;
  else throw ConfigError("unknown ensemble name: " + name);
  std::string body = s.substr(1, 2);
  for (auto& ch : body) ch = static_cast<char>(std::toupper(ch));
  EnsembleClass cls;
  if (body == "OO") {
    cls = EnsembleClass::OO;
    if (prime) cls = EnsembleClass::OO;  // OO and OO' coincide
  } else if (body == "UO") {
    cls = prime ? EnsembleClass::UOprime : EnsembleClass::UO;
  } else if (body == "OA") {
    cls = prime ? EnsembleClass::OAprime : EnsembleClass::OA;
  } else {
    throw ConfigError("unknown ensemble name: " + name);
  }
  if ((s.back() != 'E' && s.back() != 'e')) throw ConfigError("unknown ensemble name: " + name);
  EnsembleSpec probe;
  probe.cls = cls;
  probe.family = family;
  probe.M = 1;
  probe.N = 1;
  probe.validate();  // rejects circular A-type
  return {cls, family};
}

void EnsembleSpec::validate() const {
  if (M < 1) throw ConfigError("M must be a positive integer");
  if (N < 0 || N > M) throw ConfigError("N must satisfy 0 <= N <= M");
  if (!(T >= 0.0 && T <= 1.0)) throw ConfigError("T out of [0,1]");
  if (!(mu >= 0.0)) throw ConfigError("mu must be nonnegative");
  if (family == Family::Circular && antihermitian_part(cls) == AntihermitianPart::AAntisym)
    throw ConfigError("circular family is defined only for uniform amplification (O-type X)");
}

std::uint64_t EnsembleSpec::class_tag() const {
  return static_cast<std::uint64_t>(cls) * 2u + (family == Family::Circular ? 1u : 0u);
}

ScalesReport scales(const EnsembleSpec& spec) {
  spec.validate();
  ScalesReport r{};
  r.delta = (spec.family == Family::Gaussian ? kPi : 2.0 * kPi) / spec.M;
  r.e_thouless = spec.N * spec.T * r.delta / (2.0 * kPi);
  r.mu_O = std::sqrt(static_cast<double>(spec.N)) * r.delta / (2.0 * kPi);
  r.mu_A = std::sqrt(static_cast<double>(spec.M)) * r.delta / (2.0 * kPi);
  r.t_O = spec.N > 0 ? 1.0 / spec.N : 0.0;
  r.t_A = spec.N > 0 ? 1.0 / (static_cast<double>(spec.N) * spec.N) : 0.0;
  r.alpha = static_cast<double>(spec.N) / spec.M;
  r.tau = 1.0;
  return r;
}

double coupling_gamma(double T) {
  if (!(T >= 0.0 && T <= 1.0)) throw std::domain_error("transparency T out of [0,1]");
  return std::sqrt(T) / (1.0 + std::sqrt(1.0 - T));
}

Matrix sample_goe(int M, std::mt19937_64& gen) {
  if (M < 1) throw std::invalid_argument("sample_goe: M must be >= 1");
  std::normal_distribution<double> offdiag(0.0, std::sqrt(1.0 / M));
  std::normal_distribution<double> diag(0.0, std::sqrt(2.0 / M));
  Matrix H(M, M);
  for (int i = 0; i < M; ++i) {
    H(i, i) = diag(gen);
    for (int j = i + 1; j < M; ++j) H(i, j) = H(j, i) = offdiag(gen);
  }
  return H;
}

ComplexMatrix sample_gue(int M, std::mt19937_64& gen) {
  if (M < 1) throw std::invalid_argument("sample_gue: M must be >= 1");
  std::normal_distribution<double> offdiag(0.0, std::sqrt(0.5 / M));
  std::normal_distribution<double> diag(0.0, std::sqrt(1.0 / M));
  ComplexMatrix H(M, M);
  for (int i = 0; i < M; ++i) {
    H(i, i) = diag(gen);
    for (int j = i + 1; j < M; ++j) {
      Complex v(offdiag(gen), offdiag(gen));
      H(i, j) = v;
      H(j, i) = std::conj(v);
    }
  }
  return H;
}

Matrix sample_antisym(int M, double mu, std::mt19937_64& gen) {
  if (mu < 0.0) throw std::invalid_argument("sample_antisym: mu must be >= 0");
  if (M < 2) {
    if (mu > 0.0)
      throw std::invalid_argument("sample_antisym: M < 2 admits no nonzero antisymmetric matrix");
    return Matrix::Zero(std::max(M, 0), std::max(M, 0));
  }
  Matrix A = Matrix::Zero(M, M);
  if (mu == 0.0) return A;
  std::normal_distribution<double> elem(0.0, mu / std::sqrt(static_cast<double>(M - 1)));
  for (int i = 0; i < M; ++i)
    for (int j = i + 1; j < M; ++j) {
      A(i, j) = elem(gen);
      A(j, i) = -A(i, j);
    }
  return A;
}

Matrix sample_goe(int M, std::uint64_t seed) {
  auto gen = rng::engine(seed);
  return sample_goe(M, gen);
}
ComplexMatrix sample_gue(int M, std::uint64_t seed) {
  auto gen = rng::engine(seed);
  return sample_gue(M, gen);
}
Matrix sample_antisym(int M, double mu, std::uint64_t seed) {
  auto gen = rng::engine(seed);
  return sample_antisym(M, mu, gen);
}

ComplexMatrix sample_circular(int M, CircularKind kind, std::mt19937_64& gen) {
  if (M < 1) throw std::invalid_argument("sample_circular: M must be >= 1");
  std::normal_distribution<double> nd(0.0, 1.0);
  ComplexMatrix G(M, M);
  for (int j = 0; j < M; ++j)
    for (int i = 0; i < M; ++i) G(i, j) = Complex(nd(gen), nd(gen));
  Eigen::HouseholderQR<ComplexMatrix> qr(G);
  ComplexMatrix Q = qr.householderQ();
  // make the factorization unique (R diagonal positive) for exact Haar measure
  for (int j = 0; j < M; ++j) {
    Complex r = qr.matrixQR()(j, j);
    Q.col(j) *= r / std::abs(r);
  }
  if (kind == CircularKind::COE) return Q.transpose() * Q;
  return Q;
}

ComplexMatrix sample_circular(int M, CircularKind kind, std::uint64_t seed) {
  auto gen = rng::engine(seed);
  return sample_circular(M, kind, gen);
}

Matrix coupling_matrix(const EnsembleSpec& spec) {
  Matrix G = Matrix::Zero(spec.M, spec.M);
  double g = coupling_gamma(spec.T);
  for (int n = 0; n < spec.N; ++n) G(n, n) = g;
  return G;
}

EffectiveHamiltonian build_hamiltonian(const EnsembleSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (spec.family != Family::Gaussian)
    throw ConfigError("effective Hamiltonians exist for the Gaussian family only");
  const int M = spec.M;
  auto gen = rng::engine(seed);
  Matrix Gamma = coupling_matrix(spec);

  EffectiveHamiltonian out;
  out.spec = spec;
  out.seed = seed;
  out.matrix = ComplexMatrix::Zero(2 * M, 2 * M);
  auto TL = out.matrix.topLeftCorner(M, M);
  auto TR = out.matrix.topRightCorner(M, M);
  auto BL = out.matrix.bottomLeftCorner(M, M);
  auto BR = out.matrix.bottomRightCorner(M, M);
  TR = Gamma.cast<Complex>();
  BL = Gamma.cast<Complex>();

  switch (spec.cls) {
    case EnsembleClass::OO: {
      Matrix H = sample_goe(M, gen);
      TL = H.cast<Complex>() - kI * spec.mu * Matrix::Identity(M, M).cast<Complex>();
      BR = H.cast<Complex>() + kI * spec.mu * Matrix::Identity(M, M).cast<Complex>();
      // [[H+Gamma, mu],[-mu, H-Gamma]] is similar to the P-basis form
      Matrix rf = Matrix::Zero(2 * M, 2 * M);
      rf.topLeftCorner(M, M) = H + Gamma;
      rf.bottomRightCorner(M, M) = H - Gamma;
      rf.topRightCorner(M, M) = spec.mu * Matrix::Identity(M, M);
      rf.bottomLeftCorner(M, M) = -spec.mu * Matrix::Identity(M, M);
      out.real_form = std::move(rf);
      break;
    }
    case EnsembleClass::UO:
    case EnsembleClass::UOprime: {
      ComplexMatrix H = sample_gue(M, gen);
      TL = H - kI * spec.mu * ComplexMatrix::Identity(M, M);
      if (spec.cls == EnsembleClass::UO)
        BR = H.conjugate() + kI * spec.mu * ComplexMatrix::Identity(M, M);
      else
        BR = H + kI * spec.mu * ComplexMatrix::Identity(M, M);
      break;
    }
    case EnsembleClass::OA:
    case EnsembleClass::OAprime: {
      Matrix H = sample_goe(M, gen);
      Matrix A = sample_antisym(M, spec.mu, gen);
      TL = (H + A).cast<Complex>();
      Matrix rf = Matrix::Zero(2 * M, 2 * M);
      if (spec.cls == EnsembleClass::OA) {
        BR = (H + A).cast<Complex>();
        rf.topLeftCorner(M, M) = H + A + Gamma;
        rf.bottomRightCorner(M, M) = H + A - Gamma;
      } else {
        BR = (H - A).cast<Complex>();
        rf.topLeftCorner(M, M) = H + Gamma;
        rf.bottomRightCorner(M, M) = H - Gamma;
        rf.topRightCorner(M, M) = A;
        rf.bottomLeftCorner(M, M) = A;
      }
      out.real_form = std::move(rf);
      break;
    }
  }
  return out;
}

ComplexMatrix build_p_basis(const EffectiveHamiltonian& h) {
  const int M = h.spec.M;
  auto W = h.matrix.topLeftCorner(M, M);
  auto V = h.matrix.bottomRightCorner(M, M);
  auto G = h.matrix.topRightCorner(M, M);
  // U H U with U = 2^{-1/2}(sigma_x + sigma_z) (x) 1 collapses to
  // [[(W+V)/2 + Gamma, (W-V)/2], [(W-V)/2, (W+V)/2 - Gamma]].
  ComplexMatrix out(2 * M, 2 * M);
  out.topLeftCorner(M, M) = (W + V) / 2.0 + G;
  out.bottomRightCorner(M, M) = (W + V) / 2.0 - G;
  out.topRightCorner(M, M) = (W - V) / 2.0;
  out.bottomLeftCorner(M, M) = (W - V) / 2.0;
  return out;
}

QuantumMap build_quantum_map(const EnsembleSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (spec.family != Family::Circular)
    throw ConfigError("quantum maps exist for the circular family only");
  const int M = spec.M;
  auto gen = rng::engine(seed);

  ComplexMatrix F;
  if (hermitian_part(spec.cls) == HermitianPart::O)
    F = sample_circular(M, CircularKind::COE, gen);
  else
    F = sample_circular(M, CircularKind::CUE, gen);
  ComplexMatrix FL = F;
  ComplexMatrix FR =
      time_reversal(spec.cls) == TimeReversal::PT ? ComplexMatrix(F.transpose()) : F;

  // sqrt(C) from gamma~ = sqrt(sqrt(R) + i sqrt(T)); unimodular for all T
  Complex gt = std::sqrt(Complex(std::sqrt(1.0 - spec.T), std::sqrt(spec.T)));
  Eigen::VectorXcd diagP = Eigen::VectorXcd::Zero(M);
  for (int n = 0; n < spec.N; ++n) diagP(n) = 1.0;
  Eigen::VectorXcd on = gt.real() * diagP + (Eigen::VectorXcd::Ones(M) - diagP);
  Eigen::VectorXcd off = -kI * gt.imag() * diagP;

  ComplexMatrix sqrtC = ComplexMatrix::Zero(2 * M, 2 * M);
  sqrtC.topLeftCorner(M, M).diagonal() = on;
  sqrtC.bottomRightCorner(M, M).diagonal() = on;
  sqrtC.topRightCorner(M, M).diagonal() = off;
  sqrtC.bottomLeftCorner(M, M).diagonal() = off;

  ComplexMatrix inner = ComplexMatrix::Zero(2 * M, 2 * M);
  inner.topLeftCorner(M, M) = std::exp(-spec.mu) * FL;
  inner.bottomRightCorner(M, M) = std::exp(spec.mu) * FR;

  QuantumMap out;
  out.spec = spec;
  out.seed = seed;
  out.matrix = sqrtC * inner * sqrtC;
  return out;
}

}  // namespace ptlab
