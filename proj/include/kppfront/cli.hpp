#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "kppfront/models.hpp"

namespace kpp {

struct Config {
  // [geometry]
  double length = 1.0;
  int n = 0;                 // 0: derived from the mesh rule of the experiment
  double half_length = 44.0; // a
  int axial_intervals = 0;   // 0: derived from axial_spacing
  double axial_spacing = 0.2;

  // [physics]
  FlowSpec flow;
  ReactionSpec reaction;
  double lewis = 1.0;
  double q = 1.0;
  double heat_loss = 0.0; // constant g for problem = interior

  // [family]
  FamilySpec family;
  std::vector<int> ks{4, 8, 16, 32};

  // [experiment]
  std::string experiment = "eigencurve";
  std::string problem = "interior"; // interior | robin | member
  int member_k = 4;
  double window_lo = -1.0;
  double window_hi = 1.0;
  int window_points = 41;
  std::vector<double> probes{0.0};
  std::vector<double> speeds;     // minspeed table; empty: c* + {0.25, 0.5, 1, 2}
  double speed = std::numeric_limits<double>::quiet_NaN(); // front speed; NaN: c* + offset
  double speed_offset = 0.5;
  double box_half_width = 42.0;
  int reference_n = 2048;
  int front_reference_n = 256;
  int min_front_n = 64;
  int nodes_per_layer = 16;
  std::string solver = "newton"; // newton | alternating

  // [output]
  std::string out_dir = ".";
  bool plots = false;
  double solver_tolerance = 1e-10;
  double residual_gate = 1e-6;
  int max_iterations = 400;

  // Canonical key = value listing of every field, used for the hash and the echo.
  std::string canonical() const;
};

// Raises InvalidArgument with the line number on parse errors and with the key
// name on unknown keys or range violations.
Config parse_config(const std::string& text, const std::string& origin = "<string>");
Config load_config(const std::string& path);

// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);
std::string config_hash(const Config& config);

// Exit codes: 0 success, 1 usage/config/I-O error, 2 hypothesis violation,
// 3 numerical failure.
int run(int argc, const char* const* argv);

} // namespace kpp
