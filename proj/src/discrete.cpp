#include "keldysh/discrete.hpp"

#include <cmath>
#include <string>

namespace keldysh {

namespace {

constexpr Complex kI{0.0, 1.0};

std::string describe(ContourIndex idx) {
  return std::string(idx.branch == Branch::Forward ? "forward" : "backward") + " slot " + std::to_string(idx.slot);
}

void check_dimension(const ContourLayout& layout, const DiscreteOptions& opts) {
  if (layout.dimension() > opts.max_dimension)
    throw Error(ErrorCode::GridTooLarge, "contour dimension " + std::to_string(layout.dimension()) +
                                             " exceeds the cap " + std::to_string(opts.max_dimension));
}

}  // namespace

ContourLayout::ContourLayout(int n_slices, Index levels) : n_(n_slices), d_(levels) {
  if (n_slices < 1) throw Error(ErrorCode::InvalidArgument, "n_slices must be at least 1");
  if (levels < 1) throw Error(ErrorCode::InvalidArgument, "level count must be at least 1");
}

bool ContourLayout::valid(ContourIndex idx) const noexcept {
  if (idx.branch == Branch::Forward) return idx.slot >= 1 && idx.slot <= n_;
  return idx.slot >= 0 && idx.slot <= n_ - 1;
}

Index ContourLayout::position(ContourIndex idx) const {
  if (!valid(idx)) throw Error(ErrorCode::IndexOutOfRange, describe(idx) + " is not a contour variable");
  if (idx.branch == Branch::Forward) return idx.slot - 1;
  return 2 * static_cast<Index>(n_) - 1 - idx.slot;
}

ContourIndex ContourLayout::index_at(Index position) const {
  if (position < 0 || position >= n_positions())
    throw Error(ErrorCode::IndexOutOfRange, "contour position " + std::to_string(position));
  if (position < n_) return {Branch::Forward, static_cast<int>(position + 1)};
  return {Branch::Backward, static_cast<int>(2 * static_cast<Index>(n_) - 1 - position)};
}

double ContourMatrix::time_of(ContourIndex idx) const {
  layout.position(idx);
  return grid.time(idx.slot);
}

ContourMatrix build_contour_matrix(const LevelSystem& input, const TimeGrid& grid, const DiscreteOptions& opts) {
  const LevelSystem sys = validate_system(input, opts.tolerances);
  const Index d = sys.dimension();
  const int n = grid.n_slices();
  const ContourLayout layout(n, d);
  check_dimension(layout, opts);

  const ComplexMatrix identity = ComplexMatrix::Identity(d, d);
  const ComplexMatrix forward_step = identity - (kI * grid.dt()) * sys.epsilon;   // h
  const ComplexMatrix backward_step = identity + (kI * grid.dt()) * sys.epsilon;  // h̄
  const ComplexMatrix rho = rho_from_nbar(ComplexMatrix(sys.nbar.transpose()), sys.statistics, opts.tolerances);

  ComplexMatrix m = ComplexMatrix::Zero(layout.dimension(), layout.dimension());
  auto block = [&](Index row, Index col) { return m.block(row * d, col * d, d, d); };

  const Index positions = layout.n_positions();
  for (Index j = 0; j < positions; ++j) block(j, j) = identity;
  // Forward rows φ̄ₙ⁺ couple to φₙ₋₁⁺ through h; the backward rows φ̄ₙ⁻
  // couple to φₙ₊₁⁻ through h̄, and the first backward row reaches across the
  // turning point to φ_N⁺ = φ_N⁻.
  for (Index j = 1; j < n; ++j) block(j, j - 1) = -forward_step;
  for (Index j = n; j < positions; ++j) block(j, j - 1) = -backward_step;
  // φ̄₁⁺ couples to the eliminated φ₀⁺ = ζρ φ₀⁻.
  block(0, positions - 1) = -(static_cast<double>(sys.statistics.zeta()) * forward_step * rho);

  return {std::move(m), grid, sys, layout};
}

DiscreteGf discrete_green(const LevelSystem& sys, const TimeGrid& grid, const DiscreteOptions& opts) {
  const ContourMatrix cm = build_contour_matrix(sys, grid, opts);
  const Inversion inv = dense_invert(cm.matrix, opts.tolerances);
  return {-kI * inv.inverse, cm.grid, cm.layout, inv.determinant, inv.condition, inv.ill_conditioned};
}

Complex discrete_partition_function(const LevelSystem& sys, const TimeGrid& grid, const DiscreteOptions& opts) {
  const ContourMatrix cm = build_contour_matrix(sys, grid, opts);
  return partition_from_determinant(cm.system, lu_determinant(cm.matrix), opts.tolerances);
}

Complex partition_from_determinant(const LevelSystem& sys, Complex determinant, const Tolerances& tol) {
  const double prefactor = normalization_prefactor(sys.nbar, sys.statistics, tol);
  // Gaussian integral: det⁻¹ for bosons, det for fermions.
  return prefactor * (sys.statistics.is_boson() ? 1.0 / determinant : determinant);
}

std::pair<Branch, Branch> branches_of(ContourComponent comp) noexcept {
  switch (comp) {
    case ContourComponent::PlusPlus: return {Branch::Forward, Branch::Forward};
    case ContourComponent::PlusMinus: return {Branch::Forward, Branch::Backward};
    case ContourComponent::MinusPlus: return {Branch::Backward, Branch::Forward};
    case ContourComponent::MinusMinus: break;
  }
  return {Branch::Backward, Branch::Backward};
}

ComponentBlock extract_component(const DiscreteGf& gf, ContourComponent comp, int n, int m) {
  const auto [row_branch, col_branch] = branches_of(comp);
  const Index row = gf.layout.position({row_branch, n});
  const Index col = gf.layout.position({col_branch, m});
  const Index d = gf.layout.levels();
  return {gf.values.block(row * d, col * d, d, d), gf.grid.time(n), gf.grid.time(m)};
}

}  // namespace keldysh
