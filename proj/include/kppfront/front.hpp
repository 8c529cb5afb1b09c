#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kppfront/convergence.hpp"
#include "kppfront/dispersion.hpp"
#include "kppfront/eigen.hpp"
#include "kppfront/grid.hpp"
#include "kppfront/models.hpp"

namespace kpp {

/// Traveling-front system on the truncated cylinder [-a, a] x (0, L):
///   Delta T + (c - u) T_x + f(y, T) Y - g(y) T = 0       (interior loss)
///   Delta T + (c - u) T_x + f(y, T) Y = 0, dT/dn + qT = 0 (Robin limit)
///   Le^-1 Delta Y + (c - u) Y_x - f(y, T) Y = 0
class FrontProblem {
public:
  enum class Variant { InteriorLoss, RobinLimit };

  static FrontProblem interior_loss(double c, double lewis, CylinderGrid grid, const FlowSpec& flow,
                                    ReactionModel reaction, std::vector<double> heat_loss,
                                    int k = 0);
  static FrontProblem robin_limit(double c, double lewis, CylinderGrid grid, const FlowSpec& flow,
                                  ReactionModel reaction, double q);

  Variant variant() const noexcept { return variant_; }
  bool is_robin() const noexcept { return variant_ == Variant::RobinLimit; }
  int k() const noexcept { return k_; }
  double speed() const noexcept { return c_; }
  double lewis() const noexcept { return lewis_; }
  const CylinderGrid& grid() const noexcept { return grid_; }
  const FlowProfile& flow() const noexcept { return flow_; }
  const FlowSpec& flow_spec() const noexcept { return flow_spec_; }
  const ReactionModel& reaction() const noexcept { return reaction_; }
  const std::vector<double>& heat_loss() const noexcept { return heat_loss_; }
  double q() const noexcept { return q_; }
  std::vector<double> fprime0() const;

  // Cross-section eigenproblem (mu_h or nu_q) of the linearization at T = 0.
  EigenProblemSpec eigen_template() const;
  std::string label() const;

private:
  FrontProblem(Variant variant, int k, double c, double lewis, CylinderGrid grid,
               const FlowSpec& flow, ReactionModel reaction, std::vector<double> heat_loss,
               double q);

  Variant variant_;
  int k_;
  double c_;
  double lewis_;
  CylinderGrid grid_;
  FlowSpec flow_spec_;
  FlowProfile flow_;
  ReactionModel reaction_;
  std::vector<double> heat_loss_;
  double q_;
};

struct AuxiliaryRates {
  double beta = 0.0;
  double rho = 0.0;    // rho(beta Le)
  double margin = 0.0; // rho(beta Le) - beta^2 + c beta Le
  std::vector<double> chi; // sup-normalized
  int halvings = 0;
};

// rho(lambda): principal eigenvalue of -chi'' - lambda u chi with Neumann conditions.
double auxiliary_eigenvalue(const FlowProfile& flow, double lambda);

// Largest beta in {beta0 / 2^j}, beta0 = min(1, inf_lambda / 2), with beta < inf_lambda
// and rho(beta Le) - beta^2 + c beta Le > 0.
AuxiliaryRates build_auxiliary_rates(double c, double lewis, const FlowProfile& flow,
                                     double inf_lambda);

struct MemberBarrier {
  int k = 0;
  bool robin = false;
  double c_star = 0.0;
  double lambda = 0.0;       // lambda_k
  double slope_margin = 0.0; // c - a_k'(lambda_k)
  double eta = 0.0;          // eta_k = Lambda_2 - lambda_k
  double epsilon = 0.0;      // c Lambda_2 - a_k(Lambda_2)
  double rho = 0.0;          // rho(beta Le) on this member's grid
  std::vector<double> phi;      // phi_{lambda_k}
  std::vector<double> phi_eta;  // phi_{Lambda_2}
  std::vector<double> chi;      // chi_{beta Le}
};

struct SandwichConstants {
  double C1 = 0.0, C2 = 0.0, C3 = 0.0, Lambda1 = 0.0, Lambda2 = 0.0;
};

/// k-uniform sub- and super-solutions of the front system.
///   T^(x, y) = phi_k(y) e^{-lambda_k x}
///   T_(x, y) = max(0, phi_k(y) e^{-lambda_k x} - delta phi_{k,eta}(y) e^{-Lambda_2 x})
///   Y_(x, y) = max(0, 1 - gamma chi(y) e^{-beta x})
struct SubSuperSolutions {
  double c = 0.0;
  double lewis = 1.0;
  double beta = 0.0;
  double gamma = 0.0;
  double eta = 0.0;
  double delta = 0.0;
  double x0 = 0.0;
  double lambda_inf = 0.0;
  double Lambda1 = 0.0;
  double Lambda2 = 0.0;
  double epsilon_margin = 0.0; // c Lambda_2 - a(Lambda_2) for the limit problem
  double aux_margin = 0.0;     // min over members of rho - beta^2 + c beta Le
  double M = 0.0;
  double alpha = 1.0;
  double s0 = 0.0;
  double max_fprime0 = 0.0;
  double K1 = 0.0, K2 = 0.0, K3 = 0.0, K4 = 0.0;
  double chi_min = 0.0;
  int eta_halvings = 0;
  int beta_halvings = 0;
  std::vector<MemberBarrier> members;

  std::size_t member_index(int k, bool robin) const;

  double T_upper(std::size_t m, double x, int j) const;
  double T_lower_branch(std::size_t m, double x, int j) const;
  double T_lower(std::size_t m, double x, int j) const;
  double Y_lower_branch(std::size_t m, double x, int j) const;
  double Y_lower(std::size_t m, double x, int j) const;

  SandwichConstants sandwich() const;
};

// Members share c, Le, flow and reaction; `limit` supplies lambda_inf and the
// margin epsilon. Raises HypothesisViolation if c <= c* for some member and
// NumericalFailure if no admissible eta exists.
SubSuperSolutions build_subsupersolutions(std::span<const FrontProblem> members,
                                          const FrontProblem& limit);

struct CertificateCheck {
  std::string name;
  bool passed = true;
  double worst = 0.0;     // signed residual at the worst node
  double allowance = 0.0; // discretization allowance at the worst node
  int worst_i = -1, worst_j = -1;
  int checked = 0;
  int excluded = 0; // kink nodes
};

struct CertificateReport {
  std::vector<CertificateCheck> checks;
  double base_tolerance = 1e-6;

  bool ok() const;
  const CertificateCheck& check(const std::string& name) const;
};

// Evaluates the discrete operators on the barriers of member m over the
// problem's grid. Super: residual <= tol; subs: residual >= -tol, with
// tol = 1e-6 max(1, |value|) + the x-discretization defect of the exponentials.
CertificateReport verify_ordered_pair(const SubSuperSolutions& sss, std::size_t m,
                                      const FrontProblem& problem);

struct IterationRecord {
  int iteration = 0;
  double residual = 0.0;
  double step = 0.0;
  double time_step = 0.0;
};

struct FrontSolverOptions {
  enum class Method { PseudoTransientNewton, Alternating };
  Method method = Method::PseudoTransientNewton;
  double tolerance = 1e-10; // residual sup-norm relative to max(1, max T)
  int max_iterations = 400;
  double initial_time_step = 0.5;
  double initial_cap = 0.1;       // cold start: T = max(T_, min(T^, cap)), Y = 1
  int max_sweeps = 10000;        // alternating
  double sweep_tolerance = 1e-10; // alternating: successive sup-change
  double residual_gate = 1e-6;
  std::function<void(const IterationRecord&)> on_iteration; // progress hook
};


struct FrontProfile {
  CylinderGrid grid;
  double c = 0.0;
  std::vector<double> T{};
  std::vector<double> Y{};
  double residual_T = 0.0; // sup-norm, relative to scale_T
  double residual_Y = 0.0;
  double scale_T = 1.0;
  double active_fraction = 0.0;
  bool projection_warning = false;
  bool upwind = false;
  int iterations = 0;
  std::vector<IterationRecord> log{};

  double T_at(int i, int j) const { return T[grid.index(i, j)]; }
  double Y_at(int i, int j) const { return Y[grid.index(i, j)]; }
};

// Bilinear resampling onto another cylinder grid of the same cross-section length.
FrontProfile resample_profile(const FrontProfile& profile, const CylinderGrid& grid);

// Solves the discretized front system for member m of sss. The iterate is
// projected onto [T_, T^] x [Y_, 1] after every step.
FrontProfile solve_front(const FrontProblem& problem, const SubSuperSolutions& sss, std::size_t m,
                         const FrontSolverOptions& opts = {},
                         const FrontProfile* initial = nullptr);

// Discrete residuals (R_T, R_Y) of the front system at a given state.
std::pair<std::vector<double>, std::vector<double>> front_residual(const FrontProblem& problem,
                                                                  std::span<const double> T,
                                                                  std::span<const double> Y);

struct FrontDiagnostics {
  double reaction_integral = 0.0;   // int f(T) Y
  double loss_integral = 0.0;       // int g T, or q int_{dOmega} T
  double end_flux = 0.0;            // int_omega [T_x + (c - u) T]_{-a}^{a}
  double energy_defect = 0.0;       // relative
  double grad_Y_energy = 0.0;       // int |grad Y|^2
  double grad_T_energy = 0.0;
  double grad_Y_bound = 0.0;        // (Le / 2) int |c - u|
  double y_envelope_min = 0.0;      // min (Y - Y_)
  double tail_rate = 0.0;           // fitted decay rate of max_y T on the right tail
  double tail_rate_error = 0.0;     // |tail_rate - lambda_k| / lambda_k
  double lambda = 0.0;
  SandwichConstants sandwich;
  double sandwich_upper_violation = 0.0; // max (T - C1 e^{-lambda x}), <= 0 expected
  double sandwich_lower_violation = 0.0; // max (lower - T), <= 0 expected
  double y_infinity = 0.0;
  double max_T = 0.0;
  double min_T = 0.0;
  double min_Y = 0.0;
  double max_Y = 0.0;
};

FrontDiagnostics front_diagnostics(const FrontProfile& profile, const FrontProblem& problem,
                                   const SubSuperSolutions& sss, std::size_t m);

// Sup-norm distance between two profiles on the coarser grid's nodes.
double profile_sup_distance(const FrontProfile& a, const FrontProfile& b);

// L2 distances of T and Y on the box [-X, X] x omega. Both profiles must share
// the axial grid; the cross-sections may differ.
std::pair<double, double> box_l2_distance(const FrontProfile& a, const FrontProfile& b,
                                          double half_width);

struct CorollarySetup {
  FamilySpec family;
  double length = 1.0;
  FlowSpec flow;
  ReactionModel reaction = ReactionModel::linear(3.0);
  double lewis = 1.0;
  double speed_offset = 0.5; // c = c*_q + offset
  std::vector<int> ks{4, 8, 16, 32};
  double half_length = 44.0;
  double axial_spacing = 0.2;
  int reference_n = 256;       // Robin front cross-section resolution
  int eigen_reference_n = 2048; // c*_q
  int min_front_n = 64;
  int nodes_per_layer = 16;     // front mesh N = max(min_front_n, nodes_per_layer k L)
  double box_half_width = 42.0;
  FrontSolverOptions solver;

  int front_mesh(int k) const;
};

struct FrontConvergenceRow {
  int k = 0;
  int n = 0;
  bool skipped = false; // c <= c*_{h_k}
  double c_star = 0.0;
  double lambda = 0.0;
  double T_error = 0.0;
  double Y_error = 0.0;
  double max_T_box = 0.0;
  double residual = 0.0;
  double active_fraction = 0.0;
  bool certificate_ok = false;
  int iterations = 0;
};

struct FrontConvergenceReport {
  std::string family;
  double c = 0.0;
  double c_star_q = 0.0;
  double lambda_inf = 0.0;
  double box_half_width = 0.0;
  std::vector<FrontConvergenceRow> rows;
  SandwichConstants sandwich;
  SubSuperSolutions barriers;
  double limit_max_T_box = 0.0;
  double limit_sub_max_box = 0.0;
  double limit_residual = 0.0;
  bool limit_certificate_ok = false;

  std::vector<double> T_errors() const;
  std::vector<double> Y_errors() const;
  bool nontrivial() const { return limit_max_T_box > 0.9 * limit_sub_max_box && limit_max_T_box > 0; }
};

// Raises HypothesisViolation unless c = c*_q + offset > max(0, c*_q) is well defined.
FrontConvergenceReport corollary_experiment(const CorollarySetup& setup);

std::string front_csv(const FrontProfile& profile);
std::string front_json(const FrontProfile& profile, const FrontDiagnostics& diag,
                       const SubSuperSolutions& sss, const CertificateReport& cert);
std::string corollary_csv(const FrontConvergenceReport& report);
std::string corollary_json(const FrontConvergenceReport& report);

} // namespace kpp
