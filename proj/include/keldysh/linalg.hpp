#pragma once

#include <cmath>

#include "keldysh/core.hpp"

namespace keldysh {

double max_abs(const ComplexMatrix& m) noexcept;
bool all_finite(const ComplexMatrix& m) noexcept;

// ‖M − M†‖_max
double hermiticity_defect(const ComplexMatrix& m);

// Throws NonHermitian unless ‖M − M†‖_max ≤ tol.hermitian_rel · ‖M‖_max.
void require_hermitian(const ComplexMatrix& m, const Tolerances& tol, const char* what);

struct HermitianEigen {
  RealVector values;     // ascending
  ComplexMatrix vectors; // columns are orthonormal eigenvectors
};

HermitianEigen hermitian_eigen(const ComplexMatrix& m, const Tolerances& tol = {});

/// V f(Λ) V† for Hermitian M = V Λ V†.
template <class F>
ComplexMatrix apply_spectral(const HermitianEigen& eig, F&& f) {
  Eigen::VectorXcd mapped(eig.values.size());
  for (Index k = 0; k < eig.values.size(); ++k) mapped(k) = Complex(f(eig.values(k)));
  return eig.vectors * mapped.asDiagonal() * eig.vectors.adjoint();
}

/// exp(−i M s) for Hermitian M, via eigendecomposition.
ComplexMatrix hermitian_expm(const ComplexMatrix& m, double s, const Tolerances& tol = {});

/// Precomputed eigendecomposition of a Hermitian generator, so that
/// exp(−i M s) can be evaluated repeatedly for many s.
class UnitaryPropagator {
 public:
  UnitaryPropagator() = default;
  explicit UnitaryPropagator(const ComplexMatrix& generator, const Tolerances& tol = {});

  ComplexMatrix operator()(double s) const;
  Index dimension() const noexcept { return eig_.values.size(); }

 private:
  HermitianEigen eig_;
};

struct Inversion {
  ComplexMatrix inverse;
  Complex determinant;
  double condition = 1.0;    // 1-norm condition estimate
  double residual = 0.0;     // ‖M·M⁻¹ − I‖_max
  bool ill_conditioned = false;
};

/// LU-based inversion. Throws Singular when a pivot falls below
/// n·ε_mach·max|pivot|; a condition estimate above tol.ill_conditioned is
/// reported through `ill_conditioned`, not thrown.
Inversion dense_invert(const ComplexMatrix& m, const Tolerances& tol = {});

/// Determinant from the same LU factorization used by dense_invert.
Complex lu_determinant(const ComplexMatrix& m);

}  // namespace keldysh
