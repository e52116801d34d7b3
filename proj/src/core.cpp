#include "keldysh/core.hpp"

#include <cmath>
#include <sstream>

#include "keldysh/linalg.hpp"

namespace keldysh {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NonHermitian: return "NonHermitian";
    case ErrorCode::OccupationOutOfRange: return "OccupationOutOfRange";
    case ErrorCode::ThermalDivergence: return "ThermalDivergence";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::DegenerateBoundarySystem: return "DegenerateBoundarySystem";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::GridTooLarge: return "GridTooLarge";
  }
  return "Unknown";
}

const char* to_string(Statistics stat) noexcept { return stat.is_boson() ? "boson" : "fermion"; }

LevelSystem LevelSystem::single_level(double epsilon, double nbar, Statistics stat) {
  LevelSystem sys;
  sys.epsilon = ComplexMatrix::Constant(1, 1, epsilon);
  sys.nbar = ComplexMatrix::Constant(1, 1, nbar);
  sys.statistics = stat;
  return sys;
}

LevelSystem LevelSystem::diagonal(const RealVector& epsilon, const RealVector& nbar, Statistics stat) {
  if (epsilon.size() != nbar.size())
    throw Error(ErrorCode::InvalidArgument, "epsilon and nbar diagonals differ in length");
  LevelSystem sys;
  sys.epsilon = epsilon.cast<Complex>().asDiagonal();
  sys.nbar = nbar.cast<Complex>().asDiagonal();
  sys.statistics = stat;
  return sys;
}

LevelSystem validate_system(LevelSystem sys, const Tolerances& tol) {
  const Index d = sys.epsilon.rows();
  if (d < 1 || sys.epsilon.cols() != d)
    throw Error(ErrorCode::InvalidArgument, "epsilon must be a non-empty square matrix");
  if (sys.nbar.rows() != d || sys.nbar.cols() != d)
    throw Error(ErrorCode::InvalidArgument, "nbar shape does not match epsilon");
  if (!all_finite(sys.epsilon)) throw Error(ErrorCode::NonFinite, "epsilon has non-finite entries");
  if (!all_finite(sys.nbar)) throw Error(ErrorCode::NonFinite, "nbar has non-finite entries");

  require_hermitian(sys.epsilon, tol, "epsilon");
  require_hermitian(sys.nbar, tol, "nbar");

  const RealVector spectrum = hermitian_eigen(sys.nbar, tol).values;
  const double upper = sys.statistics.is_boson() ? INFINITY : 1.0 + tol.eigenvalue;
  for (Index k = 0; k < spectrum.size(); ++k) {
    const double lambda = spectrum(k);
    if (lambda < -tol.eigenvalue || lambda > upper) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "occupation eigenvalue " << lambda << " outside "
          << (sys.statistics.is_boson() ? "[0, inf)" : "[0, 1]") << " for " << to_string(sys.statistics)
          << "s";
      throw Error(ErrorCode::OccupationOutOfRange, msg.str());
    }
  }
  return sys;
}

TimeGrid::TimeGrid(double t_initial, double t_final, int n_slices)
    : t_initial_(t_initial), t_final_(t_final), n_slices_(n_slices), dt_(0.0) {
  if (!std::isfinite(t_initial) || !std::isfinite(t_final))
    throw Error(ErrorCode::NonFinite, "grid endpoints must be finite");
  if (!(t_final > t_initial)) throw Error(ErrorCode::InvalidArgument, "t_final must exceed t_initial");
  if (n_slices < 1) throw Error(ErrorCode::InvalidArgument, "n_slices must be at least 1");
  dt_ = (t_final - t_initial) / n_slices;
  if (!(dt_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "time step underflows to zero");
}

double TimeGrid::time(int n) const {
  if (n < 0 || n > n_slices_) throw Error(ErrorCode::IndexOutOfRange, "grid index " + std::to_string(n));
  if (n == n_slices_) return t_final_;
  return t_initial_ + n * dt_;
}

}  // namespace keldysh
