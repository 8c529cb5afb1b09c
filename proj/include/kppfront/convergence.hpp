#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kppfront/dispersion.hpp"
#include "kppfront/eigen.hpp"
#include "kppfront/models.hpp"

namespace kpp {

// N = max(256, ceil(32 k L)).
int default_mesh_rule(int k, double length);

/// Physical setup and sweep parameters shared by the boundary-layer sweeps.
struct SweepSetup {
  double length = 1.0;
  FlowSpec flow;
  ScalarField fprime0 = [](double) { return 1.0; };
  std::vector<int> ks{4, 8, 16, 32};
  double window_lo = -1.0;
  double window_hi = 1.0;
  int window_points = 41;
  std::vector<double> probes{0.0};
  int reference_n = 2048;
  std::function<int(int, double)> mesh_rule = default_mesh_rule;
  double test_speed_offset = 0.5; // c_test = c*_q + offset
  bool require_hypotheses = true;
};

struct ConvergenceRow {
  int k = 0;
  double layer_width = 0.0;
  int n = 0;
  // Eigencurve part.
  double sup_error = 0.0;                // sup over the window of |mu_{h_k} - nu_q|
  std::vector<double> l2_distance;       // per probe
  std::vector<double> dirichlet_energy;  // per probe
  bool rayleigh_chain_ok = true;         // mu_{h_k}(lambda) <= R_k(psi_{q,lambda})
  // Speed part.
  bool has_speed = false;
  double mu0 = 0.0;
  double c_star = 0.0;
  double speed_error = 0.0;
  bool has_test_root = false;            // c_test > c*_{h_k}
  double lambda_test = 0.0;
  double lambda_bound = 0.0;             // concavity bracket for lambda_k
  bool bracket_ok = true;
};

struct ConvergenceReport {
  std::string family;
  double q = 0.0;
  int reference_n = 0;
  std::vector<double> window;
  std::vector<double> probes;
  std::vector<double> reference_curve; // nu_q on the window
  std::vector<ConvergenceRow> rows;    // sorted by k
  bool family_ok = true;

  bool has_speeds = false;
  double nu0 = 0.0;
  double c_star_q = 0.0;
  double lambda_star_q = 0.0;
  double c_test = 0.0;
  double lambda_inf = 0.0;

  std::vector<double> sup_errors() const;
  std::vector<double> l2_distances(std::size_t probe) const;
  std::vector<double> speed_errors() const;
  double max_dirichlet_energy() const;
  bool energy_bounded() const; // max over k <= 2 x (first row) + 1, per probe
  bool rayleigh_chain_ok() const;
};

bool strictly_decreasing(std::span<const double> values);
// (max - min) / max <= relative: the sequence does not converge to zero.
bool plateaued(std::span<const double> values, double relative = 0.05);
// Least-squares slope of -log(err) against log(k).
double fitted_order(std::span<const int> ks, std::span<const double> errors);

// Trapezoid L2 distance between nodal functions on two grids of the same
// length, evaluated on the finer grid with the coarser one interpolated.
// The second function is sign-aligned with the first.
double l2_distance(const CrossSectionGrid& ga, std::span<const double> a,
                   const CrossSectionGrid& gb, std::span<const double> b);

// |integrate(g_k phi^2) - q boundary_sum(phi^2)|.
double lemma1_gap(const DiracFamilyMember& member, std::span<const double> phi, double q);

ConvergenceReport theorem2_sweep(const FamilySpec& family, const SweepSetup& setup);

// Raises HypothesisViolation unless nu_q(0) < 0.
ConvergenceReport speed_convergence(const FamilySpec& family, const SweepSetup& setup);

// Copies the speed columns of `speeds` into the matching rows of `report`.
void attach_speeds(ConvergenceReport& report, const ConvergenceReport& speeds);

std::string convergence_csv(const ConvergenceReport& report);
std::string convergence_json(const ConvergenceReport& report);

} // namespace kpp
