#include "kppfront/front.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#ifdef KPP_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif
#include <json.hpp>

#include "kppfront/errors.hpp"

namespace kpp {

// ------------------------------------------------------------------ problem

FrontProblem::FrontProblem(Variant variant, int k, double c, double lewis, CylinderGrid grid,
                           const FlowSpec& flow, ReactionModel reaction,
                           std::vector<double> heat_loss, double q)
    : variant_(variant), k_(k), c_(c), lewis_(lewis), grid_(std::move(grid)), flow_spec_(flow),
      flow_(flow.on(grid_.cross())), reaction_(std::move(reaction)),
      heat_loss_(std::move(heat_loss)), q_(q) {
  if (!(c > 0.0))
    throw InvalidArgument("front speed must be positive, got c = " + std::to_string(c));
  if (!(lewis > 0.0))
    throw InvalidArgument("Lewis number must be positive");
  if (variant_ == Variant::InteriorLoss &&
      static_cast<int>(heat_loss_.size()) != grid_.cross().size())
    throw InvalidArgument("front: heat-loss samples do not match the cross-section grid");
  if (variant_ == Variant::RobinLimit && !(q >= 0.0))
    throw InvalidArgument("front: q must be nonnegative");
}

FrontProblem FrontProblem::interior_loss(double c, double lewis, CylinderGrid grid,
                                         const FlowSpec& flow, ReactionModel reaction,
                                         std::vector<double> heat_loss, int k) {
  return FrontProblem(Variant::InteriorLoss, k, c, lewis, std::move(grid), flow,
                      std::move(reaction), std::move(heat_loss), 0.0);
}

FrontProblem FrontProblem::robin_limit(double c, double lewis, CylinderGrid grid,
                                       const FlowSpec& flow, ReactionModel reaction, double q) {
  return FrontProblem(Variant::RobinLimit, 0, c, lewis, std::move(grid), flow,
                      std::move(reaction), {}, q);
}

std::vector<double> FrontProblem::fprime0() const {
  return reaction_.fprime0_samples(grid_.cross());
}

EigenProblemSpec FrontProblem::eigen_template() const {
  const auto fp = fprime0();
  if (is_robin())
    return EigenProblemSpec::robin(flow_, q_, fp);
  return EigenProblemSpec::interior_loss(flow_, heat_loss_, fp);
}

std::string FrontProblem::label() const {
  std::ostringstream os;
  if (is_robin())
    os << "robin_limit(q=" << q_ << ")";
  else
    os << "interior_loss(k=" << k_ << ")";
  return os.str();
}

// ----------------------------------------------------------- auxiliary rates

double auxiliary_eigenvalue(const FlowProfile& flow, double lambda) {
  return principal_eigenpair(EigenProblemSpec::plain(flow, lambda)).value;
}

namespace {

std::vector<double> sup_normalized(std::vector<double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  for (double& x : v)
    x /= m;
  return v;
}

double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }
double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

} // namespace

AuxiliaryRates build_auxiliary_rates(double c, double lewis, const FlowProfile& flow,
                                     double inf_lambda) {
  if (!(c > 0.0))
    throw InvalidArgument("traveling fronts only exist with positive speeds, got c = " +
                          std::to_string(c));
  if (!(inf_lambda > 0.0))
    throw InvalidArgument("build_auxiliary_rates: inf lambda_k must be positive");
  AuxiliaryRates out;
  double beta = std::min(1.0, 0.5 * inf_lambda);
  for (int j = 0; j <= 60; ++j, beta *= 0.5) {
    const EigenPair pair = principal_eigenpair(EigenProblemSpec::plain(flow, beta * lewis));
    const double margin = pair.value - beta * beta + c * beta * lewis;
    if (beta < inf_lambda && margin > 0.0) {
      out.beta = beta;
      out.rho = pair.value;
      out.margin = margin;
      out.chi = sup_normalized(pair.eigenfunction);
      out.halvings = j;
      return out;
    }
  }
  throw NumericalFailure("degenerate speed: no admissible beta after 60 halvings");
}

// ----------------------------------------------------------- sub/super pair

std::size_t SubSuperSolutions::member_index(int k, bool robin) const {
  for (std::size_t m = 0; m < members.size(); ++m)
    if (members[m].robin == robin && (robin || members[m].k == k))
      return m;
  throw InvalidArgument("SubSuperSolutions: no member with k = " + std::to_string(k));
}

double SubSuperSolutions::T_upper(std::size_t m, double x, int j) const {
  const auto& b = members[m];
  return b.phi[j] * std::exp(-b.lambda * x);
}

double SubSuperSolutions::T_lower_branch(std::size_t m, double x, int j) const {
  const auto& b = members[m];
  return b.phi[j] * std::exp(-b.lambda * x) - delta * b.phi_eta[j] * std::exp(-Lambda2 * x);
}

double SubSuperSolutions::T_lower(std::size_t m, double x, int j) const {
  return std::max(0.0, T_lower_branch(m, x, j));
}

double SubSuperSolutions::Y_lower_branch(std::size_t m, double x, int j) const {
  return 1.0 - gamma * members[m].chi[j] * std::exp(-beta * x);
}

double SubSuperSolutions::Y_lower(std::size_t m, double x, int j) const {
  return std::max(0.0, Y_lower_branch(m, x, j));
}

SandwichConstants SubSuperSolutions::sandwich() const {
  return {K2, K1, delta * K4, Lambda1, Lambda2};
}

SubSuperSolutions build_subsupersolutions(std::span<const FrontProblem> problems,
                                          const FrontProblem& limit) {
  if (problems.empty())
    throw InvalidArgument("build_subsupersolutions: no members");
  SubSuperSolutions s;
  s.c = limit.speed();
  s.lewis = limit.lewis();
  for (const auto& p : problems)
    if (std::abs(p.speed() - s.c) > 1e-14 * s.c || std::abs(p.lewis() - s.lewis) > 1e-14)
      throw InvalidArgument("build_subsupersolutions: members must share c and Le");
  const double c = s.c;

  auto dispersion_of = [&](const FrontProblem& p) {
    DispersionResult d = minimal_speed(p.eigen_template());
    if (!(c > d.c_star)) {
      std::ostringstream msg;
      msg.precision(12);
      msg << p.label() << ": speed c = " << c << " does not exceed c* = " << d.c_star;
      throw HypothesisViolation(msg.str());
    }
    return d;
  };

  s.K1 = std::numeric_limits<double>::infinity();
  s.K2 = 0.0;
  std::vector<DispersionResult> disp;
  for (const auto& p : problems) {
    disp.push_back(dispersion_of(p));
    const DispersionResult& d = disp.back();
    const DispersionRoot root = lambda_root(c, d);
    if (root.double_root)
      throw HypothesisViolation(p.label() + ": c equals c*, double root");
    MemberBarrier b;
    b.k = p.k();
    b.robin = p.is_robin();
    b.c_star = d.c_star;
    b.lambda = root.lambda;
    b.slope_margin = slope_margin(c, d);
    b.phi = principal_eigenpair(p.eigen_template().at(b.lambda)).eigenfunction;
    s.K1 = std::min(s.K1, min_of(b.phi));
    s.K2 = std::max(s.K2, max_of(b.phi));
    s.members.push_back(std::move(b));
  }
  if (!(s.K1 > 0.0))
    throw NumericalFailure("eigenfunction positivity violated: K1 <= 0");
  const DispersionResult limit_disp = dispersion_of(limit);
  s.lambda_inf = lambda_root(c, limit_disp).lambda;

  double inf_lambda = std::numeric_limits<double>::infinity();
  double sup_lambda = 0.0;
  for (const auto& b : s.members) {
    inf_lambda = std::min(inf_lambda, b.lambda);
    sup_lambda = std::max(sup_lambda, b.lambda);
  }
  const AuxiliaryRates aux = build_auxiliary_rates(c, s.lewis, problems[0].flow(), inf_lambda);
  s.beta = aux.beta;
  s.beta_halvings = aux.halvings;
  s.chi_min = std::numeric_limits<double>::infinity();
  s.aux_margin = std::numeric_limits<double>::infinity();
  s.max_fprime0 = 0.0;
  for (std::size_t m = 0; m < problems.size(); ++m) {
    const EigenPair pair =
        principal_eigenpair(EigenProblemSpec::plain(problems[m].flow(), s.beta * s.lewis));
    auto& b = s.members[m];
    b.rho = pair.value;
    b.chi = sup_normalized(pair.eigenfunction);
    s.chi_min = std::min(s.chi_min, min_of(b.chi));
    s.aux_margin = std::min(s.aux_margin, b.rho - s.beta * s.beta + c * s.beta * s.lewis);
    s.max_fprime0 = std::max(s.max_fprime0, max_of(problems[m].fprime0()));
  }
  if (!(s.aux_margin > 0.0))
    throw NumericalFailure("beta condition fails on a member grid");

  s.gamma = 1.0 / s.chi_min;
  if (s.max_fprime0 > 0.0)
    s.gamma = std::max(s.gamma,
                       1.01 * s.K2 * s.max_fprime0 * s.lewis / (s.aux_margin * s.chi_min));
  s.x0 = std::max(0.0, std::log(s.gamma) / s.beta);

  const auto& reaction = problems[0].reaction();
  s.alpha = reaction.alpha;
  s.M = reaction.kpp_defect;
  s.s0 = reaction.s0;

  const EigenProblemSpec limit_spec = limit.eigen_template();
  double eta = 0.9 * std::min({s.beta, s.lambda_inf, s.alpha * inf_lambda});
  bool admissible = false;
  for (int h = 0; h <= 60 && !admissible; ++h) {
    if (h > 0)
      eta *= 0.5;
    const double L2 = s.lambda_inf + eta;
    const double eps = c * L2 - (L2 * L2 - principal_eigenpair(limit_spec.at(L2)).value);
    admissible = eps > 0.0;
    for (std::size_t m = 0; m < problems.size() && admissible; ++m) {
      auto& b = s.members[m];
      b.eta = L2 - b.lambda;
      const EigenPair pair = principal_eigenpair(problems[m].eigen_template().at(L2));
      b.epsilon = c * L2 - (L2 * L2 - pair.value);
      b.phi_eta = pair.eigenfunction;
      admissible = b.eta > 0.0 && b.eta < std::min(s.beta, s.alpha * b.lambda) && b.epsilon > 0.0;
    }
    if (admissible) {
      s.eta = eta;
      s.eta_halvings = h;
      s.Lambda2 = L2;
      s.epsilon_margin = eps;
    }
  }
  if (!admissible)
    throw NumericalFailure("no admissible eta: the k-uniform root offset does not exist for "
                           "this member list");

  s.K3 = std::numeric_limits<double>::infinity();
  s.K4 = 0.0;
  double eps_min = std::numeric_limits<double>::infinity();
  for (const auto& b : s.members) {
    s.K3 = std::min(s.K3, min_of(b.phi_eta));
    s.K4 = std::max(s.K4, max_of(b.phi_eta));
    eps_min = std::min(eps_min, b.epsilon);
  }
  if (!(s.K3 > 0.0))
    throw NumericalFailure("eigenfunction positivity violated: K3 <= 0");

  // Lower bounds on B = delta K3 from the closed forms of the delta conditions.
  const double A = s.K2, L2 = s.Lambda2;
  double B = A * std::exp((L2 - inf_lambda) * s.x0);
  if (std::isfinite(s.s0))
    for (double l : {inf_lambda, sup_lambda})
      B = std::max(B, A * l / L2 * std::pow(A * (1.0 - l / L2) / s.s0, (L2 - l) / l));
  const double source = s.gamma * s.K2 * s.max_fprime0 + s.M * std::pow(s.K2, 1.0 + s.alpha);
  s.delta = 1.01 * std::max(B / s.K3, source / (eps_min * s.K3));
  s.Lambda1 = sup_lambda;
  return s;
}

// ----------------------------------------------------------------- stencils

namespace {

struct Coefficients {
  double minus = 0.0, center = 0.0, plus = 0.0;
};

bool needs_upwind(const FrontProblem& p) {
  return (p.speed() + p.flow().max_abs()) * p.grid().axial_spacing() / 2.0 > 1.0;
}

// d v_xx + b v_x.
Coefficients axial(double d, double b, double dx, bool upwind) {
  Coefficients a{d / (dx * dx), -2.0 * d / (dx * dx), d / (dx * dx)};
  if (!upwind) {
    a.minus -= b / (2.0 * dx);
    a.plus += b / (2.0 * dx);
  } else if (b > 0.0) {
    a.plus += b / dx;
    a.center -= b / dx;
  } else {
    a.minus -= b / dx;
    a.center += b / dx;
  }
  return a;
}

// d v_yy with mirror (q = 0) or Robin ghost nodes at both ends.
Coefficients transverse(double d, int j, int n, double dy, double q) {
  const double h2 = dy * dy;
  if (j == 0)
    return {0.0, -2.0 * d / h2 - 2.0 * d * q / dy, 2.0 * d / h2};
  if (j == n)
    return {2.0 * d / h2, -2.0 * d / h2 - 2.0 * d * q / dy, 0.0};
  return {d / h2, -2.0 * d / h2, d / h2};
}

// x-discretization defect of d v_xx + b v_x on e^{-kappa x}, divided by e^{-kappa x}.
double exponential_defect(double d, double b, double kappa, double dx, bool upwind) {
  const double diffusion = d * ((2.0 * std::cosh(kappa * dx) - 2.0) / (dx * dx) - kappa * kappa);
  double advection;
  if (!upwind)
    advection = b * (kappa - std::sinh(kappa * dx) / dx);
  else if (b > 0.0)
    advection = b * ((std::exp(-kappa * dx) - 1.0) / dx + kappa);
  else
    advection = b * ((1.0 - std::exp(kappa * dx)) / dx + kappa);
  return diffusion + advection;
}

struct Discretization {
  int M = 0, N = 0;
  double dx = 0.0, dy = 0.0;
  bool upwind = false;
  std::vector<Coefficients> axT, axY, trT, trY;
  std::vector<double> g, y;

  explicit Discretization(const FrontProblem& p) {
    const auto& grid = p.grid();
    M = grid.axial_intervals();
    N = grid.cross().intervals();
    dx = grid.axial_spacing();
    dy = grid.cross().spacing();
    upwind = needs_upwind(p);
    const auto& u = p.flow().samples();
    const double dY = 1.0 / p.lewis();
    const double qT = p.is_robin() ? p.q() : 0.0;
    for (int j = 0; j <= N; ++j) {
      const double b = p.speed() - u[j];
      axT.push_back(axial(1.0, b, dx, upwind));
      axY.push_back(axial(dY, b, dx, upwind));
      trT.push_back(transverse(1.0, j, N, dy, qT));
      trY.push_back(transverse(dY, j, N, dy, 0.0));
    }
    g = p.is_robin() ? std::vector<double>(N + 1, 0.0) : p.heat_loss();
    y = grid.cross().nodes();
  }

  // Operator value at an interior axial node i (0 < i < M) for nodal access v(i, j).
  template <class V>
  double apply(const Coefficients& ax, const Coefficients& tr, int i, int j, V&& v) const {
    double r = ax.minus * v(i - 1, j) + (ax.center + tr.center) * v(i, j) + ax.plus * v(i + 1, j);
    if (j > 0)
      r += tr.minus * v(i, j - 1);
    if (j < N)
      r += tr.plus * v(i, j + 1);
    return r;
  }
};

} // namespace

// ----------------------------------------------------------- certificates

bool CertificateReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const CertificateCheck& CertificateReport::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name)
      return c;
  throw InvalidArgument("no certificate check named " + name);
}

CertificateReport verify_ordered_pair(const SubSuperSolutions& sss, std::size_t m,
                                      const FrontProblem& problem) {
  if (m >= sss.members.size())
    throw InvalidArgument("verify_ordered_pair: member index out of range");
  const auto& b = sss.members[m];
  const auto& grid = problem.grid();
  if (static_cast<int>(b.phi.size()) != grid.cross().size())
    throw InvalidArgument("verify_ordered_pair: barrier and problem grids differ");
  const Discretization D(problem);
  const auto& f = problem.reaction().f;
  const auto& u = problem.flow().samples();
  CertificateReport report;
  const double base = report.base_tolerance;

  auto X = [&](int i) { return grid.x(i); };
  auto Tup = [&](int i, int j) { return sss.T_upper(m, X(i), j); };
  auto Tlb = [&](int i, int j) { return sss.T_lower_branch(m, X(i), j); };
  auto Tlo = [&](int i, int j) { return std::max(0.0, Tlb(i, j)); };
  auto Ylb = [&](int i, int j) { return sss.Y_lower_branch(m, X(i), j); };
  auto Ylo = [&](int i, int j) { return std::max(0.0, Ylb(i, j)); };

  auto record = [](CertificateCheck& c, double margin_violation, double residual, double allow,
                   int i, int j) {
    // margin_violation > 0 means the inequality fails beyond tolerance.
    if (c.worst_i < 0 || margin_violation > c.worst) {
      c.worst = margin_violation;
      c.allowance = allow;
      c.worst_i = i;
      c.worst_j = j;
    }
    (void)residual;
  };

  CertificateCheck ordering{"ordering"};
  for (int i = 0; i <= D.M; ++i)
    for (int j = 0; j <= D.N; ++j) {
      const double up = Tup(i, j), lo = Tlo(i, j), yl = Ylo(i, j);
      const double v = std::max({lo - up * (1.0 + 1e-14), -yl, yl - 1.0 + 1e-15});
      ++ordering.checked;
      record(ordering, v, v, 0.0, i, j);
    }
  ordering.passed = ordering.worst <= 0.0;
  report.checks.push_back(ordering);

  auto straddles = [&](auto&& branch, int i, int j) {
    const bool s = branch(i, j) > 0.0;
    return (branch(i - 1, j) > 0.0) != s || (branch(i + 1, j) > 0.0) != s ||
           (j > 0 && (branch(i, j - 1) > 0.0) != s) || (j < D.N && (branch(i, j + 1) > 0.0) != s);
  };

  CertificateCheck super{"super_T"}, subT{"sub_T"}, subY{"sub_Y"};
  for (int i = 1; i < D.M; ++i) {
    const double x = X(i);
    for (int j = 0; j <= D.N; ++j) {
      const double bj = problem.speed() - u[j];
      // Super-solution with Y = 1.
      {
        const double T = Tup(i, j);
        const double r = D.apply(D.axT[j], D.trT[j], i, j, Tup) + f(D.y[j], T) - D.g[j] * T;
        const double allow =
            std::abs(T * exponential_defect(1.0, bj, b.lambda, D.dx, D.upwind));
        const double tol = base * std::max(1.0, std::abs(T)) + allow;
        ++super.checked;
        record(super, r - tol, r, allow, i, j);
      }
      // Sub-solution for T with Y = Y_, where T_ > 0.
      if (Tlb(i, j) > 0.0) {
        if (straddles(Tlb, i, j)) {
          ++subT.excluded;
        } else {
          const double T = Tlb(i, j);
          const double r = D.apply(D.axT[j], D.trT[j], i, j, Tlo) + f(D.y[j], T) * Ylo(i, j) -
                           D.g[j] * T;
          const double first = b.phi[j] * std::exp(-b.lambda * x);
          const double second = sss.delta * b.phi_eta[j] * std::exp(-sss.Lambda2 * x);
          const double allow =
              std::abs(first * exponential_defect(1.0, bj, b.lambda, D.dx, D.upwind)) +
              std::abs(second * exponential_defect(1.0, bj, sss.Lambda2, D.dx, D.upwind));
          const double tol = base * std::max(1.0, std::abs(T)) + allow;
          ++subT.checked;
          record(subT, -r - tol, r, allow, i, j);
        }
      }
      // Sub-solution for Y with T = T^, where Y_ > 0.
      if (Ylb(i, j) > 0.0) {
        if (straddles(Ylb, i, j)) {
          ++subY.excluded;
        } else {
          const double Yv = Ylb(i, j);
          const double r =
              D.apply(D.axY[j], D.trY[j], i, j, Ylo) - f(D.y[j], Tup(i, j)) * Yv;
          const double comp = sss.gamma * b.chi[j] * std::exp(-sss.beta * x);
          const double allow = std::abs(
              comp * exponential_defect(1.0 / problem.lewis(), bj, sss.beta, D.dx, D.upwind));
          const double tol = base + allow;
          ++subY.checked;
          record(subY, -r - tol, r, allow, i, j);
        }
      }
    }
  }
  super.passed = super.worst <= 0.0;
  subT.passed = subT.checked == 0 || subT.worst <= 0.0;
  subY.passed = subY.checked == 0 || subY.worst <= 0.0;
  report.checks.push_back(super);
  report.checks.push_back(subT);
  report.checks.push_back(subY);

  const SandwichConstants k = sss.sandwich();
  CertificateCheck sandwich{"sandwich"};
  for (int i = 0; i <= D.M; ++i) {
    const double x = X(i);
    const double lower = std::max(0.0, k.C2 * std::exp(-k.Lambda1 * x) - k.C3 * std::exp(-k.Lambda2 * x));
    const double upper = k.C1 * std::exp(-b.lambda * x);
    for (int j = 0; j <= D.N; ++j) {
      const double up = Tup(i, j), lo = Tlo(i, j);
      const double scale = 1e-12 * std::max(1.0, up);
      const double v = std::max(lower - lo, up - upper) - scale;
      ++sandwich.checked;
      record(sandwich, v, v, 0.0, i, j);
    }
  }
  sandwich.passed = sandwich.worst <= 0.0;
  report.checks.push_back(sandwich);
  return report;
}

// ------------------------------------------------------------------ solver

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
#ifdef KPP_HAVE_UMFPACK
using SparseSolver = Eigen::UmfPackLU<SpMat>;
#else
using SparseSolver = Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>;
#endif

struct FrontState {
  const FrontProblem& problem;
  Discretization D;
  const CylinderGrid& grid;
  int nodes;
  std::vector<double> Tlo, Thi, Ylo;

  FrontState(const FrontProblem& p, const SubSuperSolutions& sss, std::size_t m)
      : problem(p), D(p), grid(p.grid()), nodes(p.grid().node_count()) {
    Tlo.resize(nodes);
    Thi.resize(nodes);
    Ylo.resize(nodes);
    for (int i = 0; i <= D.M; ++i)
      for (int j = 0; j <= D.N; ++j) {
        const int n = grid.index(i, j);
        Tlo[n] = sss.T_lower(m, grid.x(i), j);
        Thi[n] = sss.T_upper(m, grid.x(i), j);
        Ylo[n] = sss.Y_lower(m, grid.x(i), j);
      }
  }

  int left(int i) const { return i == 0 ? 1 : i - 1; }

  // Sum of the residuals at axial row i < M.
  void residual(std::span<const double> T, std::span<const double> Y, std::vector<double>& RT,
                std::vector<double>& RY) const {
    RT.assign(nodes, 0.0);
    RY.assign(nodes, 0.0);
    const auto& f = problem.reaction().f;
    for (int i = 0; i < D.M; ++i) {
      const int il = left(i);
      for (int j = 0; j <= D.N; ++j) {
        const int n = grid.index(i, j);
        auto stencil = [&](std::span<const double> v, const Coefficients& ax,
                           const Coefficients& tr) {
          double r = ax.minus * v[grid.index(il, j)] + (ax.center + tr.center) * v[n] +
                     ax.plus * v[grid.index(i + 1, j)];
          if (j > 0)
            r += tr.minus * v[n - 1];
          if (j < D.N)
            r += tr.plus * v[n + 1];
          return r;
        };
        const double fr = f(D.y[j], T[n]);
        RT[n] = stencil(T, D.axT[j], D.trT[j]) + fr * Y[n] - D.g[j] * T[n];
        RY[n] = stencil(Y, D.axY[j], D.trY[j]) - fr * Y[n];
      }
    }
  }

  // Linear part of one field: operator rows for i < M, identity for i = M.
  void add_operator(std::vector<Triplet>& t, bool temperature, int stride, int offset,
                    const std::vector<double>& diagonal, double shift) const {
    for (int i = 0; i <= D.M; ++i)
      for (int j = 0; j <= D.N; ++j) {
        const int n = grid.index(i, j);
        const int row = stride * n + offset;
        if (i == D.M) {
          t.emplace_back(row, row, 1.0);
          continue;
        }
        const Coefficients& ax = temperature ? D.axT[j] : D.axY[j];
        const Coefficients& tr = temperature ? D.trT[j] : D.trY[j];
        t.emplace_back(row, stride * grid.index(left(i), j) + offset, ax.minus);
        t.emplace_back(row, row, ax.center + tr.center + diagonal[n] - shift);
        t.emplace_back(row, stride * grid.index(i + 1, j) + offset, ax.plus);
        if (j > 0)
          t.emplace_back(row, row - stride, tr.minus);
        if (j < D.N)
          t.emplace_back(row, row + stride, tr.plus);
      }
  }

  int project(std::vector<double>& T, std::vector<double>& Y) const {
    int active = 0;
    for (int n = 0; n < nodes; ++n) {
      const double t = std::clamp(T[n], Tlo[n], Thi[n]);
      const double y = std::clamp(Y[n], Ylo[n], 1.0);
      if (t != T[n] || y != Y[n])
        ++active;
      T[n] = t;
      Y[n] = y;
    }
    return active;
  }

  void apply_dirichlet(std::vector<double>& T, std::vector<double>& Y) const {
    for (int j = 0; j <= D.N; ++j) {
      const int n = grid.index(D.M, j);
      T[n] = Tlo[n];
      Y[n] = Ylo[n];
    }
  }

  double scale_T(std::span<const double> T) const {
    return std::max(1.0, *std::max_element(T.begin(), T.end()));
  }

  std::pair<double, double> norms(std::span<const double> T, const std::vector<double>& RT,
                                  const std::vector<double>& RY) const {
    double rt = 0.0, ry = 0.0;
    for (int n = 0; n < nodes; ++n) {
      rt = std::max(rt, std::abs(RT[n]));
      ry = std::max(ry, std::abs(RY[n]));
    }
    return {rt / scale_T(T), ry};
  }
};

std::string history(const std::vector<IterationRecord>& log) {
  std::ostringstream os;
  os.precision(3);
  const std::size_t from = log.size() > 8 ? log.size() - 8 : 0;
  for (std::size_t i = from; i < log.size(); ++i)
    os << " [" << log[i].iteration << ": r=" << log[i].residual << " dt=" << log[i].time_step
       << "]";
  return os.str();
}

double sample_bilinear(const FrontProfile& p, const std::vector<double>& v, double x, double y) {
  const auto& g = p.grid;
  const double tx = std::clamp((x + g.half_length()) / g.axial_spacing(), 0.0,
                               static_cast<double>(g.axial_intervals()));
  const int i = std::min(static_cast<int>(tx), g.axial_intervals() - 1);
  const double sx = tx - i;
  const double ty = std::clamp(y / g.cross().spacing(), 0.0,
                               static_cast<double>(g.cross().intervals()));
  const int j = std::min(static_cast<int>(ty), g.cross().intervals() - 1);
  const double sy = ty - j;
  auto at = [&](int a, int b) { return v[g.index(a, b)]; };
  return (1 - sx) * ((1 - sy) * at(i, j) + sy * at(i, j + 1)) +
         sx * ((1 - sy) * at(i + 1, j) + sy * at(i + 1, j + 1));
}

} // namespace

std::pair<std::vector<double>, std::vector<double>> front_residual(const FrontProblem& problem,
                                                                  std::span<const double> T,
                                                                  std::span<const double> Y) {
  const int nodes = problem.grid().node_count();
  if (static_cast<int>(T.size()) != nodes || static_cast<int>(Y.size()) != nodes)
    throw InvalidArgument("front_residual: state size does not match the grid");
  const Discretization D(problem);
  std::vector<double> RT(nodes, 0.0), RY(nodes, 0.0);
  const auto& grid = problem.grid();
  const auto& f = problem.reaction().f;
  for (int i = 0; i < D.M; ++i)
    for (int j = 0; j <= D.N; ++j) {
      const int n = grid.index(i, j);
      const int il = i == 0 ? 1 : i - 1;
      auto vT = [&](int a, int b) { return T[grid.index(a == -1 ? il : a, b)]; };
      auto vY = [&](int a, int b) { return Y[grid.index(a == -1 ? il : a, b)]; };
      auto stencil = [&](auto&& v, const Coefficients& ax, const Coefficients& tr) {
        double r = ax.minus * v(il, j) + (ax.center + tr.center) * v(i, j) + ax.plus * v(i + 1, j);
        if (j > 0)
          r += tr.minus * v(i, j - 1);
        if (j < D.N)
          r += tr.plus * v(i, j + 1);
        return r;
      };
      const double fr = f(D.y[j], T[n]);
      RT[n] = stencil(vT, D.axT[j], D.trT[j]) + fr * Y[n] - D.g[j] * T[n];
      RY[n] = stencil(vY, D.axY[j], D.trY[j]) - fr * Y[n];
    }
  return {RT, RY};
}

FrontProfile resample_profile(const FrontProfile& profile, const CylinderGrid& grid) {
  if (std::abs(grid.cross().length() - profile.grid.cross().length()) > 1e-12)
    throw InvalidArgument("resample_profile: cross-section lengths differ");
  FrontProfile out{grid, profile.c};
  out.T.resize(grid.node_count());
  out.Y.resize(grid.node_count());
  for (int i = 0; i <= grid.axial_intervals(); ++i)
    for (int j = 0; j <= grid.cross().intervals(); ++j) {
      const int n = grid.index(i, j);
      out.T[n] = sample_bilinear(profile, profile.T, grid.x(i), grid.cross().node(j));
      out.Y[n] = sample_bilinear(profile, profile.Y, grid.x(i), grid.cross().node(j));
    }
  return out;
}

namespace {

FrontProfile finish(const FrontState& S, std::vector<double> T, std::vector<double> Y, double c,
                    std::vector<IterationRecord> log, int active, const FrontSolverOptions& opts) {
  std::vector<double> RT, RY;
  S.residual(T, Y, RT, RY);
  const auto [rt, ry] = S.norms(T, RT, RY);
  FrontProfile out{S.grid, c};
  out.scale_T = S.scale_T(T);
  out.T = std::move(T);
  out.Y = std::move(Y);
  out.residual_T = rt;
  out.residual_Y = ry;
  out.upwind = S.D.upwind;
  out.iterations = static_cast<int>(log.size());
  out.log = std::move(log);
  const int free_nodes = S.nodes - (S.D.N + 1);
  out.active_fraction = static_cast<double>(active) / free_nodes;
  out.projection_warning = out.active_fraction > 0.2;
  if (std::max(rt, ry) > opts.residual_gate)
    throw NumericalFailure("front solve: residual gate failed (" + std::to_string(std::max(rt, ry)) +
                           ")" + history(out.log));
  return out;
}

FrontProfile solve_newton(const FrontState& S, std::vector<double> T, std::vector<double> Y,
                          const FrontSolverOptions& opts) {
  const auto& f = S.problem.reaction().f;
  const auto& dfdT = S.problem.reaction().dfdT;
  const int n2 = 2 * S.nodes;
  std::vector<double> RT, RY;
  S.residual(T, Y, RT, RY);
  auto [rt, ry] = S.norms(T, RT, RY);
  double res = std::max(rt, ry);
  double tau = opts.initial_time_step;
  std::vector<IterationRecord> log;
  SparseSolver lu;
  bool analyzed = false;
  int active = 0;
  std::vector<double> diagT(S.nodes), diagY(S.nodes);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const double sigma = tau > 1e12 ? 0.0 : 1.0 / tau;
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(n2) * 7);
    for (int i = 0; i <= S.D.M; ++i)
      for (int j = 0; j <= S.D.N; ++j) {
        const int n = S.grid.index(i, j);
        const double fr = f(S.D.y[j], T[n]);
        const double fd = dfdT(S.D.y[j], T[n]);
        diagT[n] = fd * Y[n] - S.D.g[j];
        diagY[n] = -fr;
        if (i < S.D.M) {
          t.emplace_back(2 * n, 2 * n + 1, -fr);
          t.emplace_back(2 * n + 1, 2 * n, fd * Y[n]);
        }
      }
    // sigma I - J for the free rows; identity rows for the Dirichlet end.
    std::vector<Triplet> ops;
    S.add_operator(ops, true, 2, 0, diagT, sigma);
    S.add_operator(ops, false, 2, 1, diagY, sigma);
    for (auto& op : ops) {
      const bool dirichlet = op.row() / 2 >= S.grid.index(S.D.M, 0);
      t.emplace_back(op.row(), op.col(), dirichlet ? op.value() : -op.value());
    }
    SpMat A(n2, n2);
    A.setFromTriplets(t.begin(), t.end());
    A.makeCompressed();
    if (!analyzed) {
      lu.analyzePattern(A);
      analyzed = true;
    }
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
      throw NumericalFailure("front solve: sparse factorization failed");
    Eigen::VectorXd rhs(n2);
    for (int n = 0; n < S.nodes; ++n) {
      rhs[2 * n] = RT[n];
      rhs[2 * n + 1] = RY[n];
    }
    const Eigen::VectorXd delta = lu.solve(rhs);
    double step = 0.0;
    for (int n = 0; n < S.nodes; ++n) {
      T[n] += delta[2 * n];
      Y[n] += delta[2 * n + 1];
      step = std::max({step, std::abs(delta[2 * n]), std::abs(delta[2 * n + 1])});
    }
    S.apply_dirichlet(T, Y);
    active = S.project(T, Y);
    S.residual(T, Y, RT, RY);
    std::tie(rt, ry) = S.norms(T, RT, RY);
    const double next = std::max(rt, ry);
    log.push_back({it, next, step, tau});
    if (opts.on_iteration)
      opts.on_iteration(log.back());
    const double ratio = next > 0.0 ? res / next : 10.0;
    tau = tau * std::clamp(ratio, 0.2, 10.0);
    res = next;
    const bool converged = res <= opts.tolerance && step <= 1e-8 * S.scale_T(T);
    const bool rounding_floor = res <= opts.residual_gate && step <= 1e-9 * S.scale_T(T);
    if (converged || rounding_floor)
      return finish(S, std::move(T), std::move(Y), S.problem.speed(), std::move(log), active, opts);
  }
  throw NumericalFailure("front solve did not converge in " + std::to_string(opts.max_iterations) +
                         " iterations:" + history(log));
}

FrontProfile solve_alternating(const FrontState& S, std::vector<double> T, std::vector<double> Y,
                               const FrontSolverOptions& opts) {
  const auto& f = S.problem.reaction().f;
  const double K = std::max(0.0, max_of(S.problem.fprime0()));
  std::vector<double> zeros(S.nodes, 0.0), diagY(S.nodes);
  // T-step operator: Delta + (c - u) d_x - g - K, constant across sweeps.
  std::vector<double> diagT(S.nodes);
  for (int i = 0; i <= S.D.M; ++i)
    for (int j = 0; j <= S.D.N; ++j)
      diagT[S.grid.index(i, j)] = -S.D.g[j];
  std::vector<Triplet> tT;
  S.add_operator(tT, true, 1, 0, diagT, K);
  SpMat AT(S.nodes, S.nodes);
  AT.setFromTriplets(tT.begin(), tT.end());
  SparseSolver luT, luY;
  luT.compute(AT);
  if (luT.info() != Eigen::Success)
    throw NumericalFailure("alternating solve: T factorization failed");
  std::vector<IterationRecord> log;
  int active = 0;
  std::vector<double> RT, RY;
  bool analyzedY = false;
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    Eigen::VectorXd rhs(S.nodes);
    for (int i = 0; i <= S.D.M; ++i)
      for (int j = 0; j <= S.D.N; ++j) {
        const int n = S.grid.index(i, j);
        rhs[n] = i == S.D.M ? S.Tlo[n] : -(f(S.D.y[j], T[n]) * Y[n] + K * T[n]);
      }
    Eigen::VectorXd Tn = luT.solve(rhs);
    double change = 0.0;
    for (int n = 0; n < S.nodes; ++n) {
      change = std::max(change, std::abs(Tn[n] - T[n]));
      T[n] = Tn[n];
    }
    for (int n = 0; n < S.nodes; ++n)
      T[n] = std::clamp(T[n], S.Tlo[n], S.Thi[n]);
    for (int i = 0; i <= S.D.M; ++i)
      for (int j = 0; j <= S.D.N; ++j) {
        const int n = S.grid.index(i, j);
        diagY[n] = -f(S.D.y[j], T[n]);
      }
    std::vector<Triplet> tY;
    S.add_operator(tY, false, 1, 0, diagY, 0.0);
    SpMat AY(S.nodes, S.nodes);
    AY.setFromTriplets(tY.begin(), tY.end());
    if (!analyzedY) {
      luY.analyzePattern(AY);
      analyzedY = true;
    }
    luY.factorize(AY);
    if (luY.info() != Eigen::Success)
      throw NumericalFailure("alternating solve: Y factorization failed");
    for (int i = 0; i <= S.D.M; ++i)
      for (int j = 0; j <= S.D.N; ++j) {
        const int n = S.grid.index(i, j);
        rhs[n] = i == S.D.M ? S.Ylo[n] : 0.0;
      }
    Eigen::VectorXd Yn = luY.solve(rhs);
    for (int n = 0; n < S.nodes; ++n) {
      change = std::max(change, std::abs(Yn[n] - Y[n]));
      Y[n] = Yn[n];
    }
    active = S.project(T, Y);
    S.residual(T, Y, RT, RY);
    const auto [rt, ry] = S.norms(T, RT, RY);
    log.push_back({sweep, std::max(rt, ry), change, 0.0});
    if (opts.on_iteration)
      opts.on_iteration(log.back());
    if (change <= opts.sweep_tolerance * S.scale_T(T) && std::max(rt, ry) <= opts.residual_gate)
      return finish(S, std::move(T), std::move(Y), S.problem.speed(), std::move(log), active, opts);
  }
  throw NumericalFailure("alternating front solve did not converge in " +
                         std::to_string(opts.max_sweeps) + " sweeps:" + history(log));
}

} // namespace

FrontProfile solve_front(const FrontProblem& problem, const SubSuperSolutions& sss, std::size_t m,
                         const FrontSolverOptions& opts, const FrontProfile* initial) {
  if (m >= sss.members.size())
    throw InvalidArgument("solve_front: member index out of range");
  const auto& b = sss.members[m];
  if (static_cast<int>(b.phi.size()) != problem.grid().cross().size())
    throw InvalidArgument("solve_front: barrier and problem grids differ");
  const double a = problem.grid().half_length();
  const double needed = std::max(sss.x0 + 5.0 / sss.beta, 5.0 / b.lambda);
  if (a < needed) {
    std::ostringstream msg;
    msg.precision(6);
    msg << "solve_front: cylinder too short, a = " << a << " < " << needed;
    throw InvalidArgument(msg.str());
  }
  FrontState S(problem, sss, m);
  std::vector<double> T, Y;
  if (initial) {
    const FrontProfile r = resample_profile(*initial, problem.grid());
    T = r.T;
    Y = r.Y;
  } else {
    T = S.Tlo;
    Y.assign(S.nodes, 1.0);
    if (opts.initial_cap > 0.0)
      for (int n = 0; n < S.nodes; ++n)
        T[n] = std::max(S.Tlo[n], std::min(S.Thi[n], opts.initial_cap));
  }
  S.apply_dirichlet(T, Y);
  S.project(T, Y);
  if (opts.method == FrontSolverOptions::Method::Alternating)
    return solve_alternating(S, std::move(T), std::move(Y), opts);
  return solve_newton(S, std::move(T), std::move(Y), opts);
}

// ------------------------------------------------------------- diagnostics

FrontDiagnostics front_diagnostics(const FrontProfile& profile, const FrontProblem& problem,
                                   const SubSuperSolutions& sss, std::size_t m) {
  const auto& grid = problem.grid();
  const auto& cross = grid.cross();
  if (profile.grid.node_count() != grid.node_count())
    throw InvalidArgument("front_diagnostics: profile and problem grids differ");
  const int M = grid.axial_intervals(), N = cross.intervals();
  const double dx = grid.axial_spacing(), dy = cross.spacing();
  const auto& wy = cross.weights();
  const auto& u = problem.flow().samples();
  const auto& f = problem.reaction().f;
  const std::vector<double> g =
      problem.is_robin() ? std::vector<double>(N + 1, 0.0) : problem.heat_loss();
  auto wx = [&](int i) { return (i == 0 || i == M) ? 0.5 * dx : dx; };
  const auto& T = profile.T;
  const auto& Y = profile.Y;
  auto at = [&](const std::vector<double>& v, int i, int j) { return v[grid.index(i, j)]; };

  FrontDiagnostics d;
  d.lambda = sss.members.at(m).lambda;
  d.sandwich = sss.sandwich();
  d.min_T = d.min_Y = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= M; ++i)
    for (int j = 0; j <= N; ++j) {
      const double t = at(T, i, j), yv = at(Y, i, j);
      const double w = wx(i) * wy[j];
      d.reaction_integral += w * f(cross.node(j), t) * yv;
      d.loss_integral += w * g[j] * t;
      d.max_T = std::max(d.max_T, t);
      d.min_T = std::min(d.min_T, t);
      d.max_Y = std::max(d.max_Y, yv);
      d.min_Y = std::min(d.min_Y, yv);
    }
  if (problem.is_robin())
    for (int i = 0; i <= M; ++i)
      d.loss_integral += problem.q() * wx(i) * (at(T, i, 0) + at(T, i, N));

  for (int j = 0; j <= N; ++j) {
    const double b = problem.speed() - u[j];
    const double tx_right = (3 * at(T, M, j) - 4 * at(T, M - 1, j) + at(T, M - 2, j)) / (2 * dx);
    const double tx_left = (-3 * at(T, 0, j) + 4 * at(T, 1, j) - at(T, 2, j)) / (2 * dx);
    d.end_flux += wy[j] * ((tx_right + b * at(T, M, j)) - (tx_left + b * at(T, 0, j)));
  }
  d.energy_defect = std::abs(d.end_flux - d.loss_integral + d.reaction_integral) /
                    std::max(d.reaction_integral, std::numeric_limits<double>::min());

  for (int i = 0; i <= M; ++i)
    for (int j = 0; j <= N; ++j) {
      if (i < M) {
        const double gy = (at(Y, i + 1, j) - at(Y, i, j)) / dx;
        const double gt = (at(T, i + 1, j) - at(T, i, j)) / dx;
        d.grad_Y_energy += dx * wy[j] * gy * gy;
        d.grad_T_energy += dx * wy[j] * gt * gt;
      }
      if (j < N) {
        const double gy = (at(Y, i, j + 1) - at(Y, i, j)) / dy;
        const double gt = (at(T, i, j + 1) - at(T, i, j)) / dy;
        d.grad_Y_energy += wx(i) * dy * gy * gy;
        d.grad_T_energy += wx(i) * dy * gt * gt;
      }
    }
  std::vector<double> speed_gap(N + 1);
  for (int j = 0; j <= N; ++j)
    speed_gap[j] = std::abs(problem.speed() - u[j]);
  d.grad_Y_bound = 0.5 * problem.lewis() * integrate(cross, speed_gap);

  d.y_envelope_min = std::numeric_limits<double>::infinity();
  d.sandwich_upper_violation = -std::numeric_limits<double>::infinity();
  d.sandwich_lower_violation = -std::numeric_limits<double>::infinity();
  const auto& k = d.sandwich;
  for (int i = 0; i <= M; ++i) {
    const double x = grid.x(i);
    const double lower =
        std::max(0.0, k.C2 * std::exp(-k.Lambda1 * x) - k.C3 * std::exp(-k.Lambda2 * x));
    const double upper = k.C1 * std::exp(-d.lambda * x);
    for (int j = 0; j <= N; ++j) {
      d.y_envelope_min = std::min(d.y_envelope_min, at(Y, i, j) - sss.Y_lower(m, x, j));
      d.sandwich_upper_violation = std::max(d.sandwich_upper_violation, at(T, i, j) - upper);
      d.sandwich_lower_violation = std::max(d.sandwich_lower_violation, lower - at(T, i, j));
    }
  }

  // Right tail: last quarter of [-a, a] minus 5 cells.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (int i = 0; i <= M - 5; ++i) {
    const double x = grid.x(i);
    if (x < 0.5 * grid.half_length())
      continue;
    double top = 0.0;
    for (int j = 0; j <= N; ++j)
      top = std::max(top, at(T, i, j));
    if (!(top > 0.0))
      continue;
    const double ly = std::log(top);
    sx += x;
    sy += ly;
    sxx += x * x;
    sxy += x * ly;
    ++count;
  }
  if (count >= 2) {
    d.tail_rate = -(count * sxy - sx * sy) / (count * sxx - sx * sx);
    d.tail_rate_error = std::abs(d.tail_rate - d.lambda) / d.lambda;
  }

  std::vector<double> left(N + 1);
  for (int j = 0; j <= N; ++j)
    left[j] = at(Y, 0, j);
  d.y_infinity = integrate(cross, left) / cross.length();
  return d;
}

double profile_sup_distance(const FrontProfile& a, const FrontProfile& b) {
  const FrontProfile& coarse = a.grid.node_count() <= b.grid.node_count() ? a : b;
  const FrontProfile& fine = &coarse == &a ? b : a;
  double d = 0.0;
  for (int i = 0; i <= coarse.grid.axial_intervals(); ++i)
    for (int j = 0; j <= coarse.grid.cross().intervals(); ++j) {
      const double x = coarse.grid.x(i), y = coarse.grid.cross().node(j);
      const int n = coarse.grid.index(i, j);
      d = std::max(d, std::abs(coarse.T[n] - sample_bilinear(fine, fine.T, x, y)));
      d = std::max(d, std::abs(coarse.Y[n] - sample_bilinear(fine, fine.Y, x, y)));
    }
  return d;
}

std::pair<double, double> box_l2_distance(const FrontProfile& a, const FrontProfile& b,
                                          double half_width) {
  const auto& ga = a.grid;
  const auto& gb = b.grid;
  if (ga.axial_intervals() != gb.axial_intervals() ||
      std::abs(ga.half_length() - gb.half_length()) > 1e-12)
    throw InvalidArgument("box_l2_distance: profiles must share the axial grid");
  if (half_width > ga.half_length() - 10.0 * ga.axial_spacing() + 1e-12)
    throw InvalidArgument("box_l2_distance: box must stay 10 cells away from x = +-a");
  const bool a_fine = ga.cross().intervals() >= gb.cross().intervals();
  const FrontProfile& fine = a_fine ? a : b;
  const FrontProfile& coarse = a_fine ? b : a;
  const auto& cf = fine.grid.cross();
  const auto& cc = coarse.grid.cross();
  std::vector<int> box;
  for (int i = 0; i <= ga.axial_intervals(); ++i)
    if (std::abs(ga.x(i)) <= half_width + 1e-12)
      box.push_back(i);
  double sT = 0.0, sY = 0.0;
  std::vector<double> ct(cc.size()), cy(cc.size()), dT(cf.size()), dY(cf.size());
  for (std::size_t k = 0; k < box.size(); ++k) {
    const int i = box[k];
    const double w = (k == 0 || k + 1 == box.size()) ? 0.5 * ga.axial_spacing() : ga.axial_spacing();
    for (int j = 0; j < cc.size(); ++j) {
      ct[j] = coarse.T[coarse.grid.index(i, j)];
      cy[j] = coarse.Y[coarse.grid.index(i, j)];
    }
    for (int j = 0; j < cf.size(); ++j) {
      const double y = cf.node(j);
      const int n = fine.grid.index(i, j);
      const double t = fine.T[n] - cc.interpolate(ct, y);
      const double v = fine.Y[n] - cc.interpolate(cy, y);
      dT[j] = t * t;
      dY[j] = v * v;
    }
    sT += w * integrate(cf, dT);
    sY += w * integrate(cf, dY);
  }
  return {std::sqrt(sT), std::sqrt(sY)};
}

// --------------------------------------------------------------- corollary

int CorollarySetup::front_mesh(int k) const {
  return std::max(min_front_n, static_cast<int>(std::ceil(nodes_per_layer * k * length - 1e-9)));
}

std::vector<double> FrontConvergenceReport::T_errors() const {
  std::vector<double> out;
  for (const auto& r : rows)
    if (!r.skipped)
      out.push_back(r.T_error);
  return out;
}

std::vector<double> FrontConvergenceReport::Y_errors() const {
  std::vector<double> out;
  for (const auto& r : rows)
    if (!r.skipped)
      out.push_back(r.Y_error);
  return out;
}

FrontConvergenceReport corollary_experiment(const CorollarySetup& setup) {
  FrontConvergenceReport report;
  report.family = setup.family.describe();
  report.box_half_width = setup.box_half_width;
  const int M = static_cast<int>(std::lround(2.0 * setup.half_length / setup.axial_spacing));
  const double dx = 2.0 * setup.half_length / M;
  if (setup.box_half_width > setup.half_length - 10.0 * dx + 1e-12)
    throw InvalidArgument("corollary: box must stay 10 cells away from x = +-a");

  {
    CrossSectionGrid eg(setup.length, setup.eigen_reference_n);
    const auto fp = setup.reaction.fprime0_samples(eg);
    const EigenProblemSpec robin = EigenProblemSpec::robin(setup.flow.on(eg), setup.family.q, fp);
    const double nu0 = principal_eigenpair(robin).value;
    if (!(nu0 < 0.0)) {
      std::ostringstream msg;
      msg.precision(10);
      msg << "corollary requires nu_q(0) < 0, got " << nu0;
      throw HypothesisViolation(msg.str());
    }
    report.c_star_q = minimal_speed(robin).c_star;
  }
  report.c = report.c_star_q + setup.speed_offset;
  if (!(report.c > std::max(0.0, report.c_star_q)))
    throw HypothesisViolation("corollary requires c > max(0, c*_q)");
  const double c = report.c;

  const FrontProblem limit = FrontProblem::robin_limit(
      c, setup.lewis, CylinderGrid(setup.half_length, M, CrossSectionGrid(setup.length, setup.reference_n)),
      setup.flow, setup.reaction, setup.family.q);

  std::vector<FrontProblem> members;
  for (int k : setup.ks) {
    CrossSectionGrid cross(setup.length, setup.front_mesh(k));
    const DiracFamilyMember member = setup.family.member(k, cross);
    FrontProblem p = FrontProblem::interior_loss(c, setup.lewis, CylinderGrid(setup.half_length, M, cross),
                                                 setup.flow, setup.reaction,
                                                 member.heat_loss.coefficient(), k);
    FrontConvergenceRow row;
    row.k = k;
    row.n = cross.intervals();
    const DispersionResult d = minimal_speed(p.eigen_template());
    row.c_star = d.c_star;
    row.skipped = !(c > d.c_star);
    report.rows.push_back(row);
    if (!row.skipped)
      members.push_back(std::move(p));
  }
  std::vector<FrontProblem> all = members;
  all.push_back(limit);
  report.barriers = build_subsupersolutions(all, limit);
  report.sandwich = report.barriers.sandwich();
  report.lambda_inf = report.barriers.lambda_inf;
  const std::size_t mr = all.size() - 1;

  const FrontProfile reference = solve_front(limit, report.barriers, mr, setup.solver);
  report.limit_residual = std::max(reference.residual_T, reference.residual_Y);
  report.limit_certificate_ok = verify_ordered_pair(report.barriers, mr, limit).ok();
  for (int i = 0; i <= M; ++i) {
    const double x = limit.grid().x(i);
    if (std::abs(x) > setup.box_half_width + 1e-12)
      continue;
    for (int j = 0; j <= setup.reference_n; ++j) {
      report.limit_max_T_box = std::max(report.limit_max_T_box, reference.T_at(i, j));
      report.limit_sub_max_box =
          std::max(report.limit_sub_max_box, report.barriers.T_lower(mr, x, j));
    }
  }

  std::size_t m = 0;
  for (auto& row : report.rows) {
    if (row.skipped)
      continue;
    const FrontProblem& p = all[m];
    row.lambda = report.barriers.members[m].lambda;
    const FrontProfile prof = solve_front(p, report.barriers, m, setup.solver, &reference);
    row.residual = std::max(prof.residual_T, prof.residual_Y);
    row.active_fraction = prof.active_fraction;
    row.iterations = prof.iterations;
    row.certificate_ok = verify_ordered_pair(report.barriers, m, p).ok();
    const auto [dt, dyv] = box_l2_distance(prof, reference, setup.box_half_width);
    row.T_error = dt;
    row.Y_error = dyv;
    for (int i = 0; i <= M; ++i)
      if (std::abs(p.grid().x(i)) <= setup.box_half_width + 1e-12)
        for (int j = 0; j <= row.n; ++j)
          row.max_T_box = std::max(row.max_T_box, prof.T_at(i, j));
    ++m;
  }
  return report;
}

// ----------------------------------------------------------------- outputs

namespace {

nlohmann::json sandwich_json(const SandwichConstants& k) {
  return {{"C1", k.C1}, {"C2", k.C2}, {"C3", k.C3}, {"Lambda1", k.Lambda1}, {"Lambda2", k.Lambda2}};
}

nlohmann::json barrier_json(const SubSuperSolutions& s) {
  nlohmann::json j;
  j["c"] = s.c;
  j["lewis"] = s.lewis;
  j["beta"] = s.beta;
  j["gamma"] = s.gamma;
  j["eta"] = s.eta;
  j["delta"] = s.delta;
  j["x0"] = s.x0;
  j["lambda_inf"] = s.lambda_inf;
  j["epsilon_margin"] = s.epsilon_margin;
  j["aux_margin"] = s.aux_margin;
  j["K"] = {s.K1, s.K2, s.K3, s.K4};
  j["M"] = s.M;
  j["alpha"] = s.alpha;
  j["s0"] = std::isfinite(s.s0) ? nlohmann::json(s.s0) : nlohmann::json("inf");
  j["sandwich"] = sandwich_json(s.sandwich());
  nlohmann::json members = nlohmann::json::array();
  for (const auto& b : s.members)
    members.push_back({{"k", b.k},
                       {"robin", b.robin},
                       {"c_star", b.c_star},
                       {"lambda", b.lambda},
                       {"slope_margin", b.slope_margin},
                       {"eta", b.eta},
                       {"epsilon", b.epsilon}});
  j["members"] = members;
  return j;
}

} // namespace

std::string front_csv(const FrontProfile& profile) {
  std::ostringstream os;
  os.precision(12);
  os << "# x,y,T,Y\n";
  const auto& g = profile.grid;
  for (int i = 0; i <= g.axial_intervals(); ++i)
    for (int j = 0; j <= g.cross().intervals(); ++j)
      os << g.x(i) << ',' << g.cross().node(j) << ',' << profile.T_at(i, j) << ','
         << profile.Y_at(i, j) << '\n';
  return os.str();
}

std::string front_json(const FrontProfile& profile, const FrontDiagnostics& d,
                       const SubSuperSolutions& sss, const CertificateReport& cert) {
  nlohmann::json j;
  j["grid"] = {{"a", profile.grid.half_length()},
               {"M", profile.grid.axial_intervals()},
               {"L", profile.grid.cross().length()},
               {"N", profile.grid.cross().intervals()},
               {"upwind", profile.upwind}};
  j["residual_T"] = profile.residual_T;
  j["residual_Y"] = profile.residual_Y;
  j["iterations"] = profile.iterations;
  j["active_fraction"] = profile.active_fraction;
  j["projection_warning"] = profile.projection_warning;
  j["diagnostics"] = {{"reaction_integral", d.reaction_integral},
                      {"loss_integral", d.loss_integral},
                      {"end_flux", d.end_flux},
                      {"energy_defect", d.energy_defect},
                      {"grad_Y_energy", d.grad_Y_energy},
                      {"grad_Y_bound", d.grad_Y_bound},
                      {"grad_T_energy", d.grad_T_energy},
                      {"y_envelope_min", d.y_envelope_min},
                      {"tail_rate", d.tail_rate},
                      {"lambda", d.lambda},
                      {"tail_rate_error", d.tail_rate_error},
                      {"sandwich_upper_violation", d.sandwich_upper_violation},
                      {"sandwich_lower_violation", d.sandwich_lower_violation},
                      {"y_infinity", d.y_infinity},
                      {"max_T", d.max_T},
                      {"min_T", d.min_T},
                      {"min_Y", d.min_Y},
                      {"max_Y", d.max_Y}};
  j["barriers"] = barrier_json(sss);
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : cert.checks)
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"worst", c.worst},
                      {"allowance", c.allowance},
                      {"worst_node", {c.worst_i, c.worst_j}},
                      {"checked", c.checked},
                      {"excluded", c.excluded}});
  j["certificate"] = checks;
  return j.dump(2);
}

std::string corollary_csv(const FrontConvergenceReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "# k,n,skipped,c_star,lambda,T_error,Y_error,max_T_box,residual,certificate_ok\n";
  for (const auto& r : report.rows)
    os << r.k << ',' << r.n << ',' << (r.skipped ? 1 : 0) << ',' << r.c_star << ',' << r.lambda
       << ',' << r.T_error << ',' << r.Y_error << ',' << r.max_T_box << ',' << r.residual << ','
       << (r.certificate_ok ? 1 : 0) << '\n';
  return os.str();
}

std::string corollary_json(const FrontConvergenceReport& report) {
  nlohmann::json j;
  j["family"] = report.family;
  j["c"] = report.c;
  j["c_star_q"] = report.c_star_q;
  j["lambda_inf"] = report.lambda_inf;
  j["box_half_width"] = report.box_half_width;
  const auto te = report.T_errors(), ye = report.Y_errors();
  j["T_error"] = te;
  j["Y_error"] = ye;
  j["T_error_decreasing"] = strictly_decreasing(te);
  j["Y_error_decreasing"] = strictly_decreasing(ye);
  j["limit_max_T_box"] = report.limit_max_T_box;
  j["limit_sub_max_box"] = report.limit_sub_max_box;
  j["nontrivial"] = report.nontrivial();
  j["limit_residual"] = report.limit_residual;
  j["limit_certificate_ok"] = report.limit_certificate_ok;
  j["barriers"] = barrier_json(report.barriers);
  return j.dump(2);
}

} // namespace kpp
