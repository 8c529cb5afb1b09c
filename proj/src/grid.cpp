#include "kppfront/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kppfront/errors.hpp"

namespace kpp {

CrossSectionGrid::CrossSectionGrid(double length, int intervals)
    : length_(length), intervals_(intervals) {
  if (!(length > 0.0) || !std::isfinite(length))
    throw InvalidArgument("cross-section length must be positive, got " + std::to_string(length));
  if (intervals < kMinResolution)
    throw InvalidArgument("cross-section resolution must be at least " +
                          std::to_string(kMinResolution) + ", got " + std::to_string(intervals));
  spacing_ = length / intervals;
  nodes_.resize(intervals + 1);
  weights_.assign(intervals + 1, spacing_);
  for (int j = 0; j <= intervals; ++j)
    nodes_[j] = j * spacing_;
  nodes_.back() = length;
  weights_.front() = weights_.back() = 0.5 * spacing_;
}

double CrossSectionGrid::normal_at(int boundary_node) const {
  if (boundary_node == 0)
    return -1.0;
  if (boundary_node == intervals_)
    return 1.0;
  throw InvalidArgument("node " + std::to_string(boundary_node) + " is not on the boundary");
}

double CrossSectionGrid::distance_to_boundary(double y) const noexcept {
  return std::min(y, length_ - y);
}

double CrossSectionGrid::interpolate(std::span<const double> samples, double y) const {
  if (static_cast<int>(samples.size()) != size())
    throw InvalidArgument("interpolate: sample count does not match grid");
  const double t = std::clamp(y / spacing_, 0.0, static_cast<double>(intervals_));
  const int j = std::min(static_cast<int>(t), intervals_ - 1);
  const double s = t - j;
  return (1.0 - s) * samples[j] + s * samples[j + 1];
}

namespace {
void require_size(const CrossSectionGrid& grid, std::span<const double> samples, const char* op) {
  if (static_cast<int>(samples.size()) != grid.size())
    throw InvalidArgument(std::string(op) + ": expected " + std::to_string(grid.size()) +
                          " samples, got " + std::to_string(samples.size()));
}
} // namespace

double integrate(const CrossSectionGrid& grid, std::span<const double> samples) {
  require_size(grid, samples, "integrate");
  const auto& w = grid.weights();
  double sum = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j)
    sum += w[j] * samples[j];
  return sum;
}

double boundary_sum(const CrossSectionGrid& grid, std::span<const double> samples) {
  require_size(grid, samples, "boundary_sum");
  return samples.front() + samples.back();
}

double l2_norm(const CrossSectionGrid& grid, std::span<const double> samples) {
  require_size(grid, samples, "l2_norm");
  const auto& w = grid.weights();
  double sum = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j)
    sum += w[j] * samples[j] * samples[j];
  return std::sqrt(sum);
}

CylinderGrid::CylinderGrid(double half_length, int axial_intervals, CrossSectionGrid cross)
    : half_length_(half_length), axial_intervals_(axial_intervals), cross_(std::move(cross)) {
  if (!(half_length > 0.0))
    throw InvalidArgument("cylinder half-length must be positive");
  if (axial_intervals < 2)
    throw InvalidArgument("cylinder needs at least 2 axial intervals");
  axial_spacing_ = 2.0 * half_length / axial_intervals;
}

} // namespace kpp
