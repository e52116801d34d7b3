#include "keldysh/linalg.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace keldysh {

double max_abs(const ComplexMatrix& m) noexcept {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool all_finite(const ComplexMatrix& m) noexcept {
  for (Index k = 0; k < m.size(); ++k) {
    const Complex z = m.data()[k];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

double hermiticity_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::InvalidArgument, "Hermiticity requires a square matrix");
  return max_abs(m - m.adjoint());
}

void require_hermitian(const ComplexMatrix& m, const Tolerances& tol, const char* what) {
  const double defect = hermiticity_defect(m);
  if (defect > tol.hermitian_rel * max_abs(m))
    throw Error(ErrorCode::NonHermitian,
                std::string(what) + " is not Hermitian (defect " + std::to_string(defect) + ")");
}

HermitianEigen hermitian_eigen(const ComplexMatrix& m, const Tolerances& tol) {
  require_hermitian(m, tol, "matrix");
  if (!all_finite(m)) throw Error(ErrorCode::NonFinite, "eigendecomposition of non-finite matrix");
  // Symmetrize so roundoff-level anti-Hermitian parts do not leak into the solver.
  const ComplexMatrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::InvalidArgument, "Hermitian eigendecomposition did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

UnitaryPropagator::UnitaryPropagator(const ComplexMatrix& generator, const Tolerances& tol)
    : eig_(hermitian_eigen(generator, tol)) {}

ComplexMatrix UnitaryPropagator::operator()(double s) const {
  const Index d = dimension();
  if (s == 0.0) return ComplexMatrix::Identity(d, d);
  if (d == 1) return ComplexMatrix::Constant(1, 1, std::exp(Complex(0.0, -eig_.values(0) * s)));
  return apply_spectral(eig_, [s](double lambda) { return std::exp(Complex(0.0, -lambda * s)); });
}

ComplexMatrix hermitian_expm(const ComplexMatrix& m, double s, const Tolerances& tol) {
  return UnitaryPropagator(m, tol)(s);
}

namespace {

Eigen::PartialPivLU<ComplexMatrix> factorize(const ComplexMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw Error(ErrorCode::InvalidArgument, "inversion requires a non-empty square matrix");
  if (!all_finite(m)) throw Error(ErrorCode::NonFinite, "matrix has non-finite entries");

  Eigen::PartialPivLU<ComplexMatrix> lu(m);
  const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
  const double largest = pivots.maxCoeff();
  const double threshold = static_cast<double>(m.rows()) * std::numeric_limits<double>::epsilon() * largest;
  if (largest == 0.0 || pivots.minCoeff() <= threshold)
    throw Error(ErrorCode::Singular, "pivot " + std::to_string(pivots.minCoeff()) + " below threshold");
  return lu;
}

}  // namespace

Inversion dense_invert(const ComplexMatrix& m, const Tolerances& tol) {
  const auto lu = factorize(m);
  Inversion out;
  out.inverse = lu.inverse();
  out.determinant = lu.determinant();
  const double rcond = lu.rcond();
  out.condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  out.ill_conditioned = out.condition > tol.ill_conditioned;
  out.residual = max_abs(m * out.inverse - ComplexMatrix::Identity(m.rows(), m.cols()));
  return out;
}

Complex lu_determinant(const ComplexMatrix& m) { return factorize(m).determinant(); }

}  // namespace keldysh
