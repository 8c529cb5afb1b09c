#pragma once

#include <span>
#include <string>
#include <vector>

#include "kppfront/grid.hpp"
#include "kppfront/models.hpp"

namespace kpp {

struct BoundaryCondition {
  enum class Kind { Neumann, Robin };
  Kind kind = Kind::Neumann;
  double q = 0.0;

  static BoundaryCondition neumann() { return {}; }
  static BoundaryCondition robin(double q) { return {Kind::Robin, q}; }
  bool is_robin() const noexcept { return kind == Kind::Robin; }
};

/// Cross-section problem  -phi'' - lambda u phi + V phi = mu phi  with a
/// Neumann or Robin condition at both endpoints.
struct EigenProblemSpec {
  FlowProfile flow;
  std::vector<double> potential; // V
  BoundaryCondition bc;
  double lambda = 0.0;

  const CrossSectionGrid& grid() const noexcept { return flow.grid(); }
  EigenProblemSpec at(double new_lambda) const;

  // V = g - f'(.,0), Neumann: the interior heat-loss problem (mu_h).
  static EigenProblemSpec interior_loss(const FlowProfile& flow, std::span<const double> g,
                                        std::span<const double> fprime0, double lambda = 0.0);
  // V = -f'(.,0), Robin(q): the boundary heat-loss problem (nu_q).
  static EigenProblemSpec robin(const FlowProfile& flow, double q,
                                std::span<const double> fprime0, double lambda = 0.0);
  // V = 0, Neumann: the auxiliary problem whose eigenvalue is rho.
  static EigenProblemSpec plain(const FlowProfile& flow, double lambda = 0.0);
  // Arbitrary potential and boundary condition.
  static EigenProblemSpec general(const FlowProfile& flow, std::vector<double> potential,
                                  BoundaryCondition bc, double lambda = 0.0);
};

/// Second-order finite-difference operator of an EigenProblemSpec.
///
/// The row form A (ghost nodes eliminated) is not symmetric at the endpoints;
/// with trapezoid weights W = diag(1/2, 1, ..., 1, 1/2) the product W A is.
/// The stored matrix is the symmetric similarity transform W^(1/2) A W^(-1/2).
struct DiscreteOperator {
  std::vector<double> diagonal;     // symmetric form
  std::vector<double> off_diagonal; // symmetric form, size N
  std::vector<double> sqrt_weights; // W^(1/2), unscaled by the spacing

  int size() const noexcept { return static_cast<int>(diagonal.size()); }
  // Applies the row form A to nodal values.
  std::vector<double> apply_row_form(std::span<const double> phi) const;
  // Infinity norm of the symmetric form.
  double norm() const;
};

DiscreteOperator assemble(const EigenProblemSpec& spec);

struct EigenPair {
  double lambda = 0.0;
  double value = 0.0;               // mu_h(lambda), nu_q(lambda) or rho(lambda)
  std::vector<double> eigenfunction; // positive, trapezoid-L2 normalized
  double residual = 0.0;            // relative residual of the symmetric form
};

// Smallest eigenvalue of the operator and its positive eigenvector. The value
// is refined by the Rayleigh quotient of the computed eigenvector.
EigenPair principal_eigenpair(const DiscreteOperator& op, const CrossSectionGrid& grid);
EigenPair principal_eigenpair(const EigenProblemSpec& spec);

// Discrete Dirichlet energy sum (phi_{j+1} - phi_j)^2 / dy.
double dirichlet_energy(const CrossSectionGrid& grid, std::span<const double> phi);

// Quadratic form of the spec divided by the squared trapezoid norm of phi.
double rayleigh(const EigenProblemSpec& spec, std::span<const double> phi);

// -integral(u phi^2): derivative of the eigenvalue with respect to lambda.
double curve_slope(const EigenPair& pair, const FlowProfile& flow);

struct EigenCurve {
  std::vector<double> lambdas;
  std::vector<double> values;
  std::vector<double> slopes;
  std::vector<EigenPair> pairs; // empty unless requested
  double max_second_difference = 0.0;
  bool concave = true;
};

EigenCurve eigencurve(const EigenProblemSpec& templ, std::span<const double> lambdas,
                      bool keep_pairs = false);

// Linearly spaced grid of count points on [lo, hi].
std::vector<double> linspace(double lo, double hi, int count);

std::string curve_csv(const EigenCurve& curve);

} // namespace kpp
