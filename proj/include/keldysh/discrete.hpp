#pragma once

#include "keldysh/continuum.hpp"
#include "keldysh/core.hpp"
#include "keldysh/linalg.hpp"

namespace keldysh {

struct DiscreteOptions {
  // Cap on the total dimension 2N·d of the contour matrix.
  Index max_dimension = 8192;
  Tolerances tolerances;
};

/// Block index bookkeeping for the contour-ordered basis
///   ψ = (φ₁⁺, …, φ_N⁺, φ_{N−1}⁻, …, φ₀⁻),
/// each entry a d-block. Forward slots 1..N sit at t₁..t_N, backward slots
/// 0..N−1 at t₀..t_{N−1}; φ₀⁺ and φ_N⁻ are eliminated.
class ContourLayout {
 public:
  ContourLayout(int n_slices, Index levels);

  int n_slices() const noexcept { return n_; }
  Index levels() const noexcept { return d_; }
  Index n_positions() const noexcept { return 2 * static_cast<Index>(n_); }
  Index dimension() const noexcept { return n_positions() * d_; }

  bool valid(ContourIndex idx) const noexcept;
  // 0-based position in contour order; throws IndexOutOfRange.
  Index position(ContourIndex idx) const;
  ContourIndex index_at(Index position) const;

 private:
  int n_;
  Index d_;
};

/// Matrix D of the discrete quadratic form, exponent −ψ̄·D·ψ.
struct ContourMatrix {
  ComplexMatrix matrix;
  TimeGrid grid;
  LevelSystem system;
  ContourLayout layout;

  double time_of(ContourIndex idx) const;
};

ContourMatrix build_contour_matrix(const LevelSystem& sys, const TimeGrid& grid, const DiscreteOptions& opts = {});

/// Contour-ordered discrete Green's function G = −i D⁻¹.
struct DiscreteGf {
  ComplexMatrix values;
  TimeGrid grid;
  ContourLayout layout;
  Complex determinant;  // det D, from the inversion's LU factors
  double condition = 1.0;
  bool ill_conditioned = false;
};

DiscreteGf discrete_green(const LevelSystem& sys, const TimeGrid& grid, const DiscreteOptions& opts = {});

/// Z = (1 − ζρ)^ζ det(D)^(−ζ), with det(I − ζρ)^ζ for many levels.
Complex discrete_partition_function(const LevelSystem& sys, const TimeGrid& grid, const DiscreteOptions& opts = {});

/// Same normalization applied to an already computed det D.
Complex partition_from_determinant(const LevelSystem& sys, Complex determinant, const Tolerances& tol = {});

struct ComponentBlock {
  ComplexMatrix value;
  double t = 0.0;
  double t_prime = 0.0;
};

/// Block of G for the branch pair selected by `comp`, with row slot n (time
/// t) and column slot m (time t').
ComponentBlock extract_component(const DiscreteGf& gf, ContourComponent comp, int n, int m);

/// Branch of the row (first) and column (second) argument of a contour component.
std::pair<Branch, Branch> branches_of(ContourComponent comp) noexcept;

}  // namespace keldysh
