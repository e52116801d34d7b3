#pragma once

#include <array>

#include "keldysh/core.hpp"
#include "keldysh/linalg.hpp"

namespace keldysh {

// Rotated-basis components. Bosons arrange them as (cl,q) x (cl,q) blocks
// [[K, R], [A, 0]]; fermions as (1,2) x (1,2) blocks [[R, K], [0, A]].
enum class KeldyshComponent { Retarded, Advanced, Keldysh, Zero };

// Contour-basis components, indexed by the branch of t and of t'.
enum class ContourComponent { PlusPlus, PlusMinus, MinusPlus, MinusMinus };

const char* to_string(KeldyshComponent c) noexcept;
const char* to_string(ContourComponent c) noexcept;

/// Step function with θ(0) = 1/2.
constexpr double step(double x) noexcept { return x > 0.0 ? 1.0 : (x < 0.0 ? 0.0 : 0.5); }

// ---------------------------------------------------------------------------
// Occupations and the initial distribution

/// ρ = n̄ / (1 + ζ n̄). Fermions at n̄ = 1 have no finite ρ and are rejected.
double rho_from_nbar(double nbar, Statistics stat, const Tolerances& tol = {});

/// Matrix version: the scalar map applied to the spectrum of nbar.
ComplexMatrix rho_from_nbar(const ComplexMatrix& nbar, Statistics stat, const Tolerances& tol = {});

/// n̄ = 1 / (exp((ε − μ)/T) − ζ).
double thermal_nbar(double epsilon, double mu, double temperature, Statistics stat);

/// (1 − ζρ)^ζ, i.e. 1/Tr ρ̂: 1/(1+n̄) for bosons, 1 − n̄ for fermions.
double normalization_prefactor(double nbar, Statistics stat, const Tolerances& tol = {});

/// det(I − ζρ)^ζ for a one-body density matrix.
double normalization_prefactor(const ComplexMatrix& nbar, Statistics stat, const Tolerances& tol = {});

/// |φ^q(tᵢ)| / |φ^cl(tᵢ)| = 1 / (1 + 2n̄) for bosons.
double initial_boundary_ratio(double nbar);

// ---------------------------------------------------------------------------
// Keldysh rotations

struct BosonFields {
  Complex classical;
  Complex quantum;
};

struct FermionFields {
  Complex phi1, phi2;
  Complex phibar1, phibar2;
};

BosonFields keldysh_rotate_boson(Complex phi_plus, Complex phi_minus) noexcept;
std::array<Complex, 2> keldysh_unrotate_boson(const BosonFields& rotated) noexcept;

FermionFields keldysh_rotate_fermion(Complex phi_plus, Complex phi_minus, Complex phibar_plus,
                                     Complex phibar_minus) noexcept;
// Returns (φ⁺, φ⁻, φ̄⁺, φ̄⁻).
std::array<Complex, 4> keldysh_unrotate_fermion(const FermionFields& rotated) noexcept;

// ---------------------------------------------------------------------------
// Closed-form Green's functions

/// Constants of the general solution of the rotated equations of motion,
/// laid out by block position: a at (0,0), b at (0,1), c at (1,0), d at (1,1).
struct SolutionConstants {
  ComplexMatrix a, b, c, d;

  const ComplexMatrix& at(int row, int col) const;
};

/// Fixes the constants by solving the boundary conditions at tᵢ and t_f as a
/// linear system in the 4d² unknowns, with t' sampled inside (tᵢ, t_f).
SolutionConstants fix_constants(const LevelSystem& sys, double t_initial, double t_final,
                                const Tolerances& tol = {});

/// Scalar convenience overload (single level, ε = 0, contour [0, 1]).
SolutionConstants fix_constants(Statistics stat, double nbar);

/// Evaluates block (row, col) of the general solution for given constants:
/// −i [U(t−t_ref) X U(t_ref−t') + J θ(t−t') U(t−t')], where J = 1 on the
/// blocks carrying the equal-time jump.
ComplexMatrix general_solution(const LevelSystem& sys, const SolutionConstants& k, int row, int col,
                               double t, double t_prime, double t_ref);

/// Closed-form non-interacting Green's function of a validated level system.
/// Holds the eigendecomposition of ε so repeated evaluation is cheap.
class FreeGreenFunction {
 public:
  explicit FreeGreenFunction(const LevelSystem& sys, const Tolerances& tol = {});

  const LevelSystem& system() const noexcept { return sys_; }
  Index dimension() const noexcept { return sys_.dimension(); }

  ComplexMatrix propagator(double s) const { return propagator_(s); }

  ComplexMatrix retarded(double t, double t_prime) const;
  ComplexMatrix advanced(double t, double t_prime) const;
  ComplexMatrix keldysh(double t, double t_prime, double t_ref) const;

  ComplexMatrix component(KeldyshComponent c, double t, double t_prime, double t_ref) const;
  ComplexMatrix contour(ContourComponent c, double t, double t_prime, double t_ref) const;

  /// Block of the rotated 2x2 structure: (cl,q) for bosons, (1,2) for fermions.
  ComplexMatrix rotated_block(int row, int col, double t, double t_prime, double t_ref) const;

  /// I + 2ζ n̄ᵀ, the occupation factor in G^K.
  const ComplexMatrix& keldysh_weight() const noexcept { return weight_; }

 private:
  LevelSystem sys_;
  UnitaryPropagator propagator_;
  ComplexMatrix weight_;
};

/// Which component occupies block (row, col) of the rotated structure.
KeldyshComponent rotated_layout(Statistics stat, int row, int col);

ComplexMatrix gf_component(const LevelSystem& sys, KeldyshComponent c, double t, double t_prime,
                           double t_ref);
ComplexMatrix contour_component(const LevelSystem& sys, ContourComponent c, double t, double t_prime,
                                double t_ref);

}  // namespace keldysh
