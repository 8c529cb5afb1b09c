#include "kppfront/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kppfront/errors.hpp"

namespace kpp {

EigenProblemSpec EigenProblemSpec::at(double new_lambda) const {
  EigenProblemSpec copy = *this;
  copy.lambda = new_lambda;
  return copy;
}

EigenProblemSpec EigenProblemSpec::interior_loss(const FlowProfile& flow, std::span<const double> g,
                                                 std::span<const double> fprime0, double lambda) {
  const auto n = static_cast<std::size_t>(flow.grid().size());
  if (g.size() != n || fprime0.size() != n)
    throw InvalidArgument("interior_loss: coefficient sizes do not match the grid");
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j)
    v[j] = g[j] - fprime0[j];
  return {flow, std::move(v), BoundaryCondition::neumann(), lambda};
}

EigenProblemSpec EigenProblemSpec::robin(const FlowProfile& flow, double q,
                                         std::span<const double> fprime0, double lambda) {
  const auto n = static_cast<std::size_t>(flow.grid().size());
  if (fprime0.size() != n)
    throw InvalidArgument("robin: coefficient size does not match the grid");
  if (!(q >= 0.0))
    throw InvalidArgument("robin: q must be nonnegative");
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j)
    v[j] = -fprime0[j];
  return {flow, std::move(v), BoundaryCondition::robin(q), lambda};
}

EigenProblemSpec EigenProblemSpec::plain(const FlowProfile& flow, double lambda) {
  return {flow, std::vector<double>(flow.grid().size(), 0.0), BoundaryCondition::neumann(), lambda};
}

EigenProblemSpec EigenProblemSpec::general(const FlowProfile& flow, std::vector<double> potential,
                                           BoundaryCondition bc, double lambda) {
  if (static_cast<int>(potential.size()) != flow.grid().size())
    throw InvalidArgument("general: potential size does not match the grid");
  return {flow, std::move(potential), bc, lambda};
}

// ---------------------------------------------------------------- operator

DiscreteOperator assemble(const EigenProblemSpec& spec) {
  const auto& grid = spec.grid();
  const int n = grid.size();
  if (static_cast<int>(spec.potential.size()) != n)
    throw InvalidArgument("assemble: potential size does not match the grid");
  const double h = grid.spacing();
  const double inv_h2 = 1.0 / (h * h);
  const auto& u = spec.flow.samples();

  DiscreteOperator op;
  op.diagonal.resize(n);
  op.off_diagonal.assign(n - 1, -inv_h2);
  op.sqrt_weights.assign(n, 1.0);
  op.sqrt_weights.front() = op.sqrt_weights.back() = std::sqrt(0.5);

  for (int j = 0; j < n; ++j)
    op.diagonal[j] = 2.0 * inv_h2 + spec.potential[j] - spec.lambda * u[j];
  // Ghost elimination at the endpoints: phi_{-1} = phi_1 - 2 h q phi_0.
  if (spec.bc.is_robin()) {
    op.diagonal.front() += 2.0 * spec.bc.q / h;
    op.diagonal.back() += 2.0 * spec.bc.q / h;
  }
  // Row form has -2/h^2 next to the endpoints; the similarity transform turns
  // both endpoint couplings into -sqrt(2)/h^2.
  op.off_diagonal.front() = -std::sqrt(2.0) * inv_h2;
  op.off_diagonal.back() = -std::sqrt(2.0) * inv_h2;
  return op;
}

std::vector<double> DiscreteOperator::apply_row_form(std::span<const double> phi) const {
  const int n = size();
  if (static_cast<int>(phi.size()) != n)
    throw InvalidArgument("apply_row_form: size mismatch");
  // A = W^(-1/2) S W^(1/2)
  std::vector<double> out(n);
  for (int j = 0; j < n; ++j) {
    double acc = diagonal[j] * sqrt_weights[j] * phi[j];
    if (j > 0)
      acc += off_diagonal[j - 1] * sqrt_weights[j - 1] * phi[j - 1];
    if (j + 1 < n)
      acc += off_diagonal[j] * sqrt_weights[j + 1] * phi[j + 1];
    out[j] = acc / sqrt_weights[j];
  }
  return out;
}

double DiscreteOperator::norm() const {
  double best = 0.0;
  const int n = size();
  for (int j = 0; j < n; ++j) {
    double row = std::abs(diagonal[j]);
    if (j > 0)
      row += std::abs(off_diagonal[j - 1]);
    if (j + 1 < n)
      row += std::abs(off_diagonal[j]);
    best = std::max(best, row);
  }
  return best;
}

// ---------------------------------------------------------------- solver

namespace {

// Number of eigenvalues of the symmetric tridiagonal matrix below x.
int sturm_count(const DiscreteOperator& op, double x) {
  const int n = op.size();
  constexpr double tiny = 1e-300;
  int count = 0;
  double pivot = op.diagonal[0] - x;
  if (pivot < 0.0)
    ++count;
  for (int j = 1; j < n; ++j) {
    if (std::abs(pivot) < tiny)
      pivot = -tiny;
    const double e = op.off_diagonal[j - 1];
    pivot = op.diagonal[j] - x - e * e / pivot;
    if (pivot < 0.0)
      ++count;
  }
  return count;
}

// Solves (S - shift I) z = rhs for a symmetric positive definite shifted
// tridiagonal matrix (shift below the spectrum).
std::vector<double> solve_shifted(const DiscreteOperator& op, double shift,
                                  std::vector<double> rhs) {
  const int n = op.size();
  std::vector<double> c(n - 1);
  double pivot = op.diagonal[0] - shift;
  c[0] = op.off_diagonal[0] / pivot;
  rhs[0] /= pivot;
  for (int j = 1; j < n; ++j) {
    const double e = op.off_diagonal[j - 1];
    pivot = op.diagonal[j] - shift - e * c[j - 1];
    if (pivot == 0.0)
      pivot = std::numeric_limits<double>::min();
    if (j + 1 < n)
      c[j] = op.off_diagonal[j] / pivot;
    rhs[j] = (rhs[j] - e * rhs[j - 1]) / pivot;
  }
  for (int j = n - 2; j >= 0; --j)
    rhs[j] -= c[j] * rhs[j + 1];
  return rhs;
}

double euclidean_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v)
    s += x * x;
  return std::sqrt(s);
}

} // namespace

EigenPair principal_eigenpair(const DiscreteOperator& op, const CrossSectionGrid& grid) {
  const int n = op.size();
  if (n != grid.size())
    throw InvalidArgument("principal_eigenpair: operator and grid sizes differ");

  // Gershgorin bracket of the spectrum.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int j = 0; j < n; ++j) {
    double radius = 0.0;
    if (j > 0)
      radius += std::abs(op.off_diagonal[j - 1]);
    if (j + 1 < n)
      radius += std::abs(op.off_diagonal[j]);
    lo = std::min(lo, op.diagonal[j] - radius);
    hi = std::max(hi, op.diagonal[j] + radius);
  }
  lo -= 1.0;
  // Bisection: count(lo) = 0, count(hi) >= 1.
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    if (sturm_count(op, mid) >= 1)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= 1e-15 * std::max(std::abs(lo), std::abs(hi)))
      break;
  }

  // Inverse iteration with a shift just below the smallest eigenvalue.
  const double scale = op.norm();
  const double shift = lo - 1e-13 * (1.0 + scale);
  std::vector<double> v(n, 1.0);
  for (int iter = 0; iter < 4; ++iter) {
    v = solve_shifted(op, shift, v);
    const double nv = euclidean_norm(v);
    for (double& x : v)
      x /= nv;
  }

  // Sign fix: largest-magnitude entry positive, then require positivity.
  const auto big = std::max_element(v.begin(), v.end(),
                                     [](double a, double b) { return std::abs(a) < std::abs(b); });
  if (*big < 0.0)
    for (double& x : v)
      x = -x;

  EigenPair pair;
  // Nodal eigenfunction phi = W^(-1/2) v, trapezoid norm: sum h W phi^2 = h |v|^2.
  const double h = grid.spacing();
  pair.eigenfunction.resize(n);
  const double norm_scale = 1.0 / std::sqrt(h);
  for (int j = 0; j < n; ++j) {
    if (!(v[j] > 0.0))
      throw NumericalFailure("principal eigenvector changes sign at node " + std::to_string(j) +
                             " (value " + std::to_string(v[j]) + ")");
    pair.eigenfunction[j] = norm_scale * v[j] / op.sqrt_weights[j];
  }

  // Residual of the symmetric form and the Rayleigh quotient value.
  double quad = 0.0;
  std::vector<double> sv(n);
  for (int j = 0; j < n; ++j) {
    double acc = op.diagonal[j] * v[j];
    if (j > 0)
      acc += op.off_diagonal[j - 1] * v[j - 1];
    if (j + 1 < n)
      acc += op.off_diagonal[j] * v[j + 1];
    sv[j] = acc;
    quad += acc * v[j];
  }
  pair.value = quad;
  double res = 0.0;
  for (int j = 0; j < n; ++j)
    res += (sv[j] - quad * v[j]) * (sv[j] - quad * v[j]);
  pair.residual = std::sqrt(res) / (scale > 0.0 ? scale : 1.0);
  if (pair.residual > 1e-8)
    throw NumericalFailure("principal eigenpair residual " + std::to_string(pair.residual) +
                           " exceeds 1e-8");
  return pair;
}

EigenPair principal_eigenpair(const EigenProblemSpec& spec) {
  EigenPair pair = principal_eigenpair(assemble(spec), spec.grid());
  pair.lambda = spec.lambda;
  // The difference form of the quadratic form avoids the cancellation of the
  // h^-2 stencil and reproduces the discrete eigenvalue to rounding.
  pair.value = rayleigh(spec, pair.eigenfunction);
  return pair;
}

double dirichlet_energy(const CrossSectionGrid& grid, std::span<const double> phi) {
  if (static_cast<int>(phi.size()) != grid.size())
    throw InvalidArgument("dirichlet_energy: size mismatch");
  const double h = grid.spacing();
  double e = 0.0;
  for (std::size_t j = 0; j + 1 < phi.size(); ++j) {
    const double d = phi[j + 1] - phi[j];
    e += d * d;
  }
  return e / h;
}

double rayleigh(const EigenProblemSpec& spec, std::span<const double> phi) {
  const auto& grid = spec.grid();
  if (static_cast<int>(phi.size()) != grid.size())
    throw InvalidArgument("rayleigh: size mismatch");
  const auto& w = grid.weights();
  const auto& u = spec.flow.samples();
  double mass = 0.0, potential = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) {
    const double p2 = phi[j] * phi[j];
    mass += w[j] * p2;
    potential += w[j] * (spec.potential[j] - spec.lambda * u[j]) * p2;
  }
  if (!(mass > 0.0))
    throw InvalidArgument("rayleigh: trial function is zero");
  double form = dirichlet_energy(grid, phi) + potential;
  if (spec.bc.is_robin())
    form += spec.bc.q * (phi.front() * phi.front() + phi.back() * phi.back());
  return form / mass;
}

double curve_slope(const EigenPair& pair, const FlowProfile& flow) {
  const auto& grid = flow.grid();
  const auto& u = flow.samples();
  if (pair.eigenfunction.size() != u.size())
    throw InvalidArgument("curve_slope: eigenfunction and flow sizes differ");
  const auto& w = grid.weights();
  double s = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j)
    s += w[j] * u[j] * pair.eigenfunction[j] * pair.eigenfunction[j];
  return -s;
}

EigenCurve eigencurve(const EigenProblemSpec& templ, std::span<const double> lambdas,
                      bool keep_pairs) {
  if (!std::is_sorted(lambdas.begin(), lambdas.end()))
    throw InvalidArgument("eigencurve: lambda grid must be sorted");
  EigenCurve curve;
  curve.lambdas.assign(lambdas.begin(), lambdas.end());
  for (double lambda : lambdas) {
    EigenPair pair = principal_eigenpair(templ.at(lambda));
    curve.values.push_back(pair.value);
    curve.slopes.push_back(curve_slope(pair, templ.flow));
    if (keep_pairs)
      curve.pairs.push_back(std::move(pair));
  }
  // Concavity on a possibly nonuniform grid: divided second differences.
  for (std::size_t i = 1; i + 1 < curve.values.size(); ++i) {
    const double h0 = curve.lambdas[i] - curve.lambdas[i - 1];
    const double h1 = curve.lambdas[i + 1] - curve.lambdas[i];
    const double s0 = (curve.values[i] - curve.values[i - 1]) / h0;
    const double s1 = (curve.values[i + 1] - curve.values[i]) / h1;
    const double second = (s1 - s0) * 0.5 * (h0 + h1);
    const double mu = std::abs(curve.values[i]);
    curve.max_second_difference = std::max(curve.max_second_difference, second);
    if (second > 1e-8 * (1.0 + mu))
      curve.concave = false;
  }
  return curve;
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 2)
    throw InvalidArgument("linspace needs at least two points");
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i)
    out[i] = lo + (hi - lo) * i / (count - 1);
  out.back() = hi;
  return out;
}

std::string curve_csv(const EigenCurve& curve) {
  std::ostringstream os;
  os.precision(17);
  os << "# lambda,value,slope\n";
  for (std::size_t i = 0; i < curve.lambdas.size(); ++i)
    os << curve.lambdas[i] << ',' << curve.values[i] << ',' << curve.slopes[i] << '\n';
  return os.str();
}

} // namespace kpp
