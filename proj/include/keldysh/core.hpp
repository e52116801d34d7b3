#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace keldysh {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class ErrorCode {
  InvalidArgument,
  NonFinite,
  NonHermitian,
  OccupationOutOfRange,
  ThermalDivergence,
  Singular,
  DegenerateBoundarySystem,
  IndexOutOfRange,
  GridTooLarge,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

enum class Particle { Boson, Fermion };

struct Statistics {
  Particle kind = Particle::Boson;

  // +1 for bosons, -1 for fermions.
  constexpr int zeta() const noexcept { return kind == Particle::Boson ? 1 : -1; }
  constexpr bool is_boson() const noexcept { return kind == Particle::Boson; }

  static constexpr Statistics boson() noexcept { return {Particle::Boson}; }
  static constexpr Statistics fermion() noexcept { return {Particle::Fermion}; }

  friend constexpr bool operator==(Statistics, Statistics) = default;
};

const char* to_string(Statistics stat) noexcept;

/// Numerical tolerances shared by validation and the linear-algebra kernel.
/// `hermitian_rel` is relative to the max-norm of the tested matrix; the
/// others are absolute.
struct Tolerances {
  double hermitian_rel = 1e-10;
  double eigenvalue = 1e-10;
  double unitary = 1e-10;
  double inverse = 1e-10;
  double ill_conditioned = 1e12;
};

/// Non-interacting system of d levels: one-body energy matrix epsilon and
/// one-body density matrix nbar (n̄_ij = <a_i^† a_j>), both d x d.
struct LevelSystem {
  ComplexMatrix epsilon;
  ComplexMatrix nbar;
  Statistics statistics;

  Index dimension() const noexcept { return epsilon.rows(); }

  static LevelSystem single_level(double epsilon, double nbar, Statistics stat);
  static LevelSystem diagonal(const RealVector& epsilon, const RealVector& nbar, Statistics stat);
};

/// Returns `sys` unchanged if it is a valid level system: square matching
/// shapes, finite entries, Hermitian epsilon and nbar, and an nbar spectrum
/// inside [0, inf) for bosons or [0, 1] for fermions (up to tol.eigenvalue).
LevelSystem validate_system(LevelSystem sys, const Tolerances& tol = {});

/// Uniform slicing of [t_initial, t_final] into N intervals.
class TimeGrid {
 public:
  TimeGrid(double t_initial, double t_final, int n_slices);

  double t_initial() const noexcept { return t_initial_; }
  double t_final() const noexcept { return t_final_; }
  int n_slices() const noexcept { return n_slices_; }
  double dt() const noexcept { return dt_; }
  double duration() const noexcept { return t_final_ - t_initial_; }

  // t_n for n = 0..N; the endpoints are returned exactly.
  double time(int n) const;

 private:
  double t_initial_;
  double t_final_;
  int n_slices_;
  double dt_;
};

enum class Branch { Forward, Backward };

struct ContourIndex {
  Branch branch;
  int slot;

  friend constexpr bool operator==(ContourIndex, ContourIndex) = default;
};

}  // namespace keldysh
