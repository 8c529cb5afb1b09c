#pragma once

#include <span>
#include <vector>

namespace kpp {

/// Uniform discretization of the cross-section (0, L) with trapezoid weights.
///
/// Nodes are y_j = j L / N for j = 0..N. The boundary consists of the two
/// endpoints with outward normals -1 at y = 0 and +1 at y = L.
class CrossSectionGrid {
public:
  static constexpr int kMinResolution = 8;

  CrossSectionGrid(double length, int intervals);

  double length() const noexcept { return length_; }
  int intervals() const noexcept { return intervals_; }
  int size() const noexcept { return intervals_ + 1; }
  double spacing() const noexcept { return spacing_; }

  double node(int j) const noexcept { return j * spacing_; }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  // Outward normal at node 0 (-1) or node N (+1).
  double normal_at(int boundary_node) const;

  // d(y, boundary) = min(y, L - y).
  double distance_to_boundary(double y) const noexcept;

  // Samples fn at every node.
  template <class Fn>
  std::vector<double> sample(Fn&& fn) const {
    std::vector<double> out(nodes_.size());
    for (std::size_t j = 0; j < nodes_.size(); ++j)
      out[j] = fn(nodes_[j]);
    return out;
  }

  // Linear interpolation of nodal values at an arbitrary y in [0, L].
  double interpolate(std::span<const double> samples, double y) const;

private:
  double length_;
  int intervals_;
  double spacing_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

// Trapezoid rule over the cross-section.
double integrate(const CrossSectionGrid& grid, std::span<const double> samples);

// "Surface integral" over the two boundary points: samples[0] + samples[N].
double boundary_sum(const CrossSectionGrid& grid, std::span<const double> samples);

// Trapezoid L2 norm.
double l2_norm(const CrossSectionGrid& grid, std::span<const double> samples);

/// Tensor-product grid on the truncated cylinder [-a, a] x (0, L).
class CylinderGrid {
public:
  CylinderGrid(double half_length, int axial_intervals, CrossSectionGrid cross);

  double half_length() const noexcept { return half_length_; }
  int axial_intervals() const noexcept { return axial_intervals_; }
  int axial_size() const noexcept { return axial_intervals_ + 1; }
  double axial_spacing() const noexcept { return axial_spacing_; }
  double x(int i) const noexcept { return -half_length_ + i * axial_spacing_; }
  const CrossSectionGrid& cross() const noexcept { return cross_; }

  int node_count() const noexcept { return axial_size() * cross_.size(); }
  // Flat index, y fastest.
  int index(int i, int j) const noexcept { return i * cross_.size() + j; }

private:
  double half_length_;
  int axial_intervals_;
  double axial_spacing_;
  CrossSectionGrid cross_;
};

} // namespace kpp
