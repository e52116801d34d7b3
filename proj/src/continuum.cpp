#include "keldysh/continuum.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace keldysh {

namespace {

constexpr Complex kI{0.0, 1.0};

// Maps one occupation eigenvalue to ρ, enforcing the statistics bounds.
double rho_of_eigenvalue(double n, Statistics stat, const Tolerances& tol) {
  auto reject = [&](const char* why) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "occupation " << n << " " << why << " for " << to_string(stat) << "s";
    throw Error(ErrorCode::OccupationOutOfRange, msg.str());
  };
  if (!std::isfinite(n)) reject("is not finite");
  if (n < -tol.eigenvalue) reject("is negative");
  n = std::max(n, 0.0);
  if (stat.is_boson()) return n / (1.0 + n);
  if (n > 1.0 + tol.eigenvalue) reject("exceeds 1");
  if (n >= 1.0 - tol.eigenvalue) reject("is 1: distribution parameter diverges");
  return n / (1.0 - n);
}

}  // namespace

const char* to_string(KeldyshComponent c) noexcept {
  switch (c) {
    case KeldyshComponent::Retarded: return "R";
    case KeldyshComponent::Advanced: return "A";
    case KeldyshComponent::Keldysh: return "K";
    case KeldyshComponent::Zero: return "qq";
  }
  return "?";
}

const char* to_string(ContourComponent c) noexcept {
  switch (c) {
    case ContourComponent::PlusPlus: return "++";
    case ContourComponent::PlusMinus: return "+-";
    case ContourComponent::MinusPlus: return "-+";
    case ContourComponent::MinusMinus: return "--";
  }
  return "?";
}

double rho_from_nbar(double nbar, Statistics stat, const Tolerances& tol) {
  return rho_of_eigenvalue(nbar, stat, tol);
}

ComplexMatrix rho_from_nbar(const ComplexMatrix& nbar, Statistics stat, const Tolerances& tol) {
  const HermitianEigen eig = hermitian_eigen(nbar, tol);
  return apply_spectral(eig, [&](double n) { return rho_of_eigenvalue(n, stat, tol); });
}

double thermal_nbar(double epsilon, double mu, double temperature, Statistics stat) {
  if (!std::isfinite(epsilon) || !std::isfinite(mu) || !std::isfinite(temperature))
    throw Error(ErrorCode::NonFinite, "thermal parameters must be finite");
  if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
  const double x = (epsilon - mu) / temperature;
  if (stat.is_boson()) {
    if (!(x > 0.0))
      throw Error(ErrorCode::ThermalDivergence, "bosonic occupation requires epsilon > mu");
    return 1.0 / std::expm1(x);
  }
  return 1.0 / (std::exp(x) + 1.0);
}

double normalization_prefactor(double nbar, Statistics stat, const Tolerances& tol) {
  const double rho = rho_from_nbar(nbar, stat, tol);
  const int zeta = stat.zeta();
  return std::pow(1.0 - zeta * rho, zeta);
}

double normalization_prefactor(const ComplexMatrix& nbar, Statistics stat, const Tolerances& tol) {
  const RealVector spectrum = hermitian_eigen(nbar, tol).values;
  double out = 1.0;
  for (Index k = 0; k < spectrum.size(); ++k) out *= normalization_prefactor(spectrum(k), stat, tol);
  return out;
}

double initial_boundary_ratio(double nbar) {
  if (std::isnan(nbar) || nbar < 0.0)
    throw Error(ErrorCode::OccupationOutOfRange, "bosonic occupation must be non-negative");
  return 1.0 / (1.0 + 2.0 * nbar);
}

BosonFields keldysh_rotate_boson(Complex phi_plus, Complex phi_minus) noexcept {
  const double s = std::numbers::sqrt2 / 2.0;
  return {s * (phi_plus + phi_minus), s * (phi_plus - phi_minus)};
}

std::array<Complex, 2> keldysh_unrotate_boson(const BosonFields& f) noexcept {
  const double s = std::numbers::sqrt2 / 2.0;
  return {s * (f.classical + f.quantum), s * (f.classical - f.quantum)};
}

FermionFields keldysh_rotate_fermion(Complex phi_plus, Complex phi_minus, Complex phibar_plus,
                                     Complex phibar_minus) noexcept {
  const double s = std::numbers::sqrt2 / 2.0;
  return {s * (phi_plus + phi_minus), s * (phi_plus - phi_minus), s * (phibar_plus - phibar_minus),
          s * (phibar_plus + phibar_minus)};
}

std::array<Complex, 4> keldysh_unrotate_fermion(const FermionFields& f) noexcept {
  const double s = std::numbers::sqrt2 / 2.0;
  return {s * (f.phi1 + f.phi2), s * (f.phi1 - f.phi2), s * (f.phibar1 + f.phibar2),
          s * (f.phibar2 - f.phibar1)};
}

KeldyshComponent rotated_layout(Statistics stat, int row, int col) {
  if (row < 0 || row > 1 || col < 0 || col > 1)
    throw Error(ErrorCode::IndexOutOfRange, "rotated block index must be 0 or 1");
  static constexpr KeldyshComponent boson[2][2] = {
      {KeldyshComponent::Keldysh, KeldyshComponent::Retarded},
      {KeldyshComponent::Advanced, KeldyshComponent::Zero}};
  static constexpr KeldyshComponent fermion[2][2] = {
      {KeldyshComponent::Retarded, KeldyshComponent::Keldysh},
      {KeldyshComponent::Zero, KeldyshComponent::Advanced}};
  return stat.is_boson() ? boson[row][col] : fermion[row][col];
}

// ---------------------------------------------------------------------------

FreeGreenFunction::FreeGreenFunction(const LevelSystem& sys, const Tolerances& tol)
    : sys_(validate_system(sys, tol)), propagator_(sys_.epsilon, tol) {
  const Index d = sys_.dimension();
  weight_ = ComplexMatrix::Identity(d, d) + (2.0 * sys_.statistics.zeta()) * sys_.nbar.transpose();
}

ComplexMatrix FreeGreenFunction::retarded(double t, double t_prime) const {
  const double theta = step(t - t_prime);
  if (theta == 0.0) return ComplexMatrix::Zero(dimension(), dimension());
  return (-kI * theta) * propagator_(t - t_prime);
}

ComplexMatrix FreeGreenFunction::advanced(double t, double t_prime) const {
  const double theta = step(t_prime - t);
  if (theta == 0.0) return ComplexMatrix::Zero(dimension(), dimension());
  return (kI * theta) * propagator_(t - t_prime);
}

ComplexMatrix FreeGreenFunction::keldysh(double t, double t_prime, double t_ref) const {
  return -kI * (propagator_(t - t_ref) * weight_ * propagator_(t_ref - t_prime));
}

ComplexMatrix FreeGreenFunction::component(KeldyshComponent c, double t, double t_prime, double t_ref) const {
  switch (c) {
    case KeldyshComponent::Retarded: return retarded(t, t_prime);
    case KeldyshComponent::Advanced: return advanced(t, t_prime);
    case KeldyshComponent::Keldysh: return keldysh(t, t_prime, t_ref);
    case KeldyshComponent::Zero: break;
  }
  return ComplexMatrix::Zero(dimension(), dimension());
}

ComplexMatrix FreeGreenFunction::contour(ContourComponent c, double t, double t_prime, double t_ref) const {
  const ComplexMatrix r = retarded(t, t_prime);
  const ComplexMatrix a = advanced(t, t_prime);
  const ComplexMatrix k = keldysh(t, t_prime, t_ref);
  switch (c) {
    case ContourComponent::PlusPlus: return 0.5 * (k + r + a);
    case ContourComponent::MinusMinus: return 0.5 * (k - r - a);
    case ContourComponent::PlusMinus: return 0.5 * (k - r + a);
    case ContourComponent::MinusPlus: return 0.5 * (k + r - a);
  }
  return ComplexMatrix::Zero(dimension(), dimension());
}

ComplexMatrix FreeGreenFunction::rotated_block(int row, int col, double t, double t_prime, double t_ref) const {
  return component(rotated_layout(sys_.statistics, row, col), t, t_prime, t_ref);
}

ComplexMatrix gf_component(const LevelSystem& sys, KeldyshComponent c, double t, double t_prime, double t_ref) {
  return FreeGreenFunction(sys).component(c, t, t_prime, t_ref);
}

ComplexMatrix contour_component(const LevelSystem& sys, ContourComponent c, double t, double t_prime,
                                double t_ref) {
  return FreeGreenFunction(sys).contour(c, t, t_prime, t_ref);
}

// ---------------------------------------------------------------------------
// General solution and boundary conditions

const ComplexMatrix& SolutionConstants::at(int row, int col) const {
  if (row == 0) return col == 0 ? a : b;
  return col == 0 ? c : d;
}

namespace {

bool carries_jump(Statistics stat, int row, int col) {
  // Bosons: off-diagonal (cl,q)/(q,cl) blocks; fermions: diagonal (1,1)/(2,2).
  return stat.is_boson() ? row != col : row == col;
}

ComplexMatrix general_block(const UnitaryPropagator& u, Statistics stat, const ComplexMatrix& constant, int row,
                            int col, double t, double t_prime, double t_ref) {
  ComplexMatrix out = u(t - t_ref) * constant * u(t_ref - t_prime);
  if (carries_jump(stat, row, col)) out += step(t - t_prime) * u(t - t_prime);
  return -kI * out;
}

}  // namespace

ComplexMatrix general_solution(const LevelSystem& sys, const SolutionConstants& k, int row, int col, double t,
                               double t_prime, double t_ref) {
  const UnitaryPropagator u(sys.epsilon);
  return general_block(u, sys.statistics, k.at(row, col), row, col, t, t_prime, t_ref);
}

SolutionConstants fix_constants(const LevelSystem& input, double t_initial, double t_final, const Tolerances& tol) {
  const LevelSystem sys = validate_system(input, tol);
  if (!(t_final > t_initial)) throw Error(ErrorCode::InvalidArgument, "t_final must exceed t_initial");

  const Index d = sys.dimension();
  const Index block = d * d;
  const Index unknowns = 4 * block;
  const UnitaryPropagator u(sys.epsilon, tol);
  const ComplexMatrix weight =
      ComplexMatrix::Identity(d, d) + (2.0 * sys.statistics.zeta()) * sys.nbar.transpose();
  const double t_sample = 0.5 * (t_initial + t_final);

  auto unpack = [&](const Eigen::VectorXcd& x) {
    SolutionConstants k;
    ComplexMatrix* slots[4] = {&k.a, &k.b, &k.c, &k.d};
    for (int s = 0; s < 4; ++s) *slots[s] = Eigen::Map<const ComplexMatrix>(x.data() + s * block, d, d);
    return k;
  };

  // Row 1 of the rotated structure vanishes at t_f; at tᵢ, row 0 equals
  // −(I + 2ζn̄ᵀ) times row 1.
  auto residual = [&](const Eigen::VectorXcd& x) {
    const SolutionConstants k = unpack(x);
    auto g = [&](int row, int col, double t) {
      return general_block(u, sys.statistics, k.at(row, col), row, col, t, t_sample, t_initial);
    };
    Eigen::VectorXcd r(unknowns);
    ComplexMatrix eqs[4] = {g(1, 0, t_final), g(1, 1, t_final),
                            g(0, 0, t_initial) + weight * g(1, 0, t_initial),
                            g(0, 1, t_initial) + weight * g(1, 1, t_initial)};
    for (int s = 0; s < 4; ++s) r.segment(s * block, block) = Eigen::Map<const Eigen::VectorXcd>(eqs[s].data(), block);
    return r;
  };

  const Eigen::VectorXcd r0 = residual(Eigen::VectorXcd::Zero(unknowns));
  ComplexMatrix system(unknowns, unknowns);
  for (Index j = 0; j < unknowns; ++j) {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(unknowns);
    e(j) = 1.0;
    system.col(j) = residual(e) - r0;
  }

  Inversion inv;
  try {
    inv = dense_invert(system, tol);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Singular) throw;
    throw Error(ErrorCode::DegenerateBoundarySystem, e.what());
  }
  return unpack(-(inv.inverse * r0));
}

SolutionConstants fix_constants(Statistics stat, double nbar) {
  return fix_constants(LevelSystem::single_level(0.0, nbar, stat), 0.0, 1.0);
}

}  // namespace keldysh
