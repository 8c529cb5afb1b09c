#pragma once

#include <string>
#include <vector>

#include "kppfront/grid.hpp"

namespace kpp::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = true;
};

struct Axes {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_x = false;
  bool log_y = false;
};

// Line plot; nonpositive values are dropped on log axes.
std::string plot(const Axes& axes, const std::vector<Series>& series);

// Nodal field on the cylinder grid, viridis-like ramp, x horizontal.
std::string heatmap(const std::string& title, const CylinderGrid& grid,
                    const std::vector<double>& values);

} // namespace kpp::svg
