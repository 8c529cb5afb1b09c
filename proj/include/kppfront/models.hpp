#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "kppfront/grid.hpp"

namespace kpp {

using ScalarField = std::function<double(double)>;
using ReactionField = std::function<double(double /*y*/, double /*T*/)>;

/// Zero-average shear flow u(y) sampled on a cross-section grid.
///
/// The trapezoid mean is subtracted at construction, so the stored samples
/// satisfy integrate(u) = 0 up to rounding.
class FlowProfile {
public:
  FlowProfile(const CrossSectionGrid& grid, std::vector<double> raw, double amplitude = 0.0);

  static FlowProfile zero(const CrossSectionGrid& grid);
  // u(y) = A cos(2 pi m y / L).
  static FlowProfile cosine(const CrossSectionGrid& grid, double amplitude, int modes);

  const CrossSectionGrid& grid() const noexcept { return grid_; }
  const std::vector<double>& samples() const noexcept { return samples_; }
  double amplitude() const noexcept { return amplitude_; }
  double max_abs() const noexcept { return max_abs_; }

private:
  CrossSectionGrid grid_;
  std::vector<double> samples_;
  double amplitude_;
  double max_abs_;
};

// Grid-independent flow description, resampled per grid.
struct FlowSpec {
  enum class Kind { Zero, Cosine };
  Kind kind = Kind::Zero;
  double amplitude = 0.0;
  int modes = 1;

  FlowProfile on(const CrossSectionGrid& grid) const;
  std::string describe() const;
};

/// KPP reaction f(y, T) together with the constants of its local expansion:
/// f(y, s) >= f'(y, 0) s - M s^(1 + alpha) on [0, s0].
struct ReactionModel {
  std::string name;
  ReactionField f;
  ReactionField dfdT;
  ScalarField fprime0;
  double s0 = std::numeric_limits<double>::infinity();
  double alpha = 1.0;
  double kpp_defect = 0.0; // M

  std::vector<double> fprime0_samples(const CrossSectionGrid& grid) const;
  double max_fprime0(const CrossSectionGrid& grid) const;

  // f = a(y) T. Equality case of the KPP bound; M = 0 and s0 = infinity.
  static ReactionModel linear(ScalarField a, std::string label = "linear");
  static ReactionModel linear(double a);
  // f = a(y) ln(1 + T), with M = max(a) / 2, alpha = 1, s0 = 1.
  static ReactionModel log_kpp(ScalarField a, double max_a, std::string label = "log_kpp");
  static ReactionModel log_kpp(double a);
  // f = 0. Not admissible as a KPP reaction; used as a negative control.
  static ReactionModel zero();
};

struct ReactionSpec {
  enum class Kind { Linear, LogKpp };
  Kind kind = Kind::Linear;
  double a = 1.0;

  ReactionModel model() const;
  std::string describe() const;
};

struct ValidationCheck {
  std::string name;
  bool passed = true;
  double worst_violation = 0.0;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool ok() const;
  const ValidationCheck& check(const std::string& name) const;
};

// Checks f(.,0) = 0 < f(.,T) <= f'(.,0) T, monotonicity in T, unbounded growth
// and the M, alpha lower bound near T = 0.
ValidationReport validate_reaction(const ReactionModel& model, const CrossSectionGrid& grid,
                                   std::span<const double> temperatures);

/// Linear heat loss h(y, T) = g(y) T.
class HeatLossModel {
public:
  HeatLossModel(const CrossSectionGrid& grid, std::vector<double> coefficient);

  const CrossSectionGrid& grid() const noexcept { return grid_; }
  const std::vector<double>& coefficient() const noexcept { return g_; }
  double bound() const noexcept { return bound_; } // K = max g
  double operator()(int node, double temperature) const { return g_[node] * temperature; }

private:
  CrossSectionGrid grid_;
  std::vector<double> g_;
  double bound_;
};

ValidationReport validate_heatloss(const HeatLossModel& model);

/// One member of a heat-loss family concentrating on the boundary.
struct DiracFamilyMember {
  int k = 0;
  double layer_width = 0.0; // epsilon_k
  double q = 0.0;
  ScalarField profile;      // g_k as a function of y
  HeatLossModel heat_loss;
};

// g_k(y) = q 3k^3 (min(0, d(y) - 1/k))^2, epsilon_k = 1/k.
DiracFamilyMember make_quadratic_family(int k, double q, const CrossSectionGrid& grid);

// g_k(y) = (q / eps) m(d(y) / eps) inside the layer, 0 outside, eps = 1/k.
// The shape must be nonnegative, integrate to 1 on [0, 1] and vanish at 1.
DiracFamilyMember make_mollifier_family(const ScalarField& shape, int k, double q,
                                        const CrossSectionGrid& grid);

// Named mollifier shapes: "quadratic" 3(1-s)^2, "hat" 2(1-s), "cubic" 4(1-s)^3.
ScalarField mollifier_shape(const std::string& name);

// Minimal number of intervals resolving a layer of width 1/k with 32 nodes.
int layer_resolution(int k, double length);

struct MemberHypotheses {
  int k = 0;
  double layer_width = 0.0;
  double sup_outside_layer = 0.0; // must tend to 0
  double scaled_sup = 0.0;        // eps_k * max g_k, must stay bounded
  double flux_low = 0.0;          // layer flux at y = 0, must tend to q
  double flux_high = 0.0;         // layer flux at y = L
  double integral = 0.0;          // integrate(g_k)
  bool support_ok = false;
};

struct FamilyReport {
  std::vector<MemberHypotheses> members;
  bool support_ok = false;   // every member supported in its layer, layers shrinking
  bool scaled_bounded = false;
  bool flux_converges = false;
  double max_scaled_sup = 0.0;
  double final_flux_error = 0.0;

  bool ok() const { return support_ok && scaled_bounded && flux_converges; }
};

// Members must be sorted by increasing k and each sampled on a grid with at
// least layer_resolution(k, L) intervals; otherwise a ResolutionError is raised.
FamilyReport check_family_hypotheses(std::span<const DiracFamilyMember> members);

/// Grid-independent family description used by the sweeps and the CLI.
struct FamilySpec {
  enum class Kind { Quadratic, Mollifier, Frozen };
  Kind kind = Kind::Quadratic;
  double q = 1.0;
  std::string shape = "quadratic";
  int frozen_k = 4; // Frozen: g_k = g_{frozen_k} for every k

  DiracFamilyMember member(int k, const CrossSectionGrid& grid) const;
  std::string describe() const;
};

} // namespace kpp
