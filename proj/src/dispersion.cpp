#include "kppfront/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "kppfront/errors.hpp"

namespace kpp {

double DispersionResult::mu(double lambda) const {
  return principal_eigenpair(problem.at(lambda)).value;
}

double DispersionResult::a(double lambda) const { return lambda * lambda - mu(lambda); }

double DispersionResult::a_prime(double lambda) const {
  const EigenPair pair = principal_eigenpair(problem.at(lambda));
  return 2.0 * lambda - curve_slope(pair, problem.flow);
}

namespace {

// lambda a'(lambda) - a(lambda): same sign as s'(lambda), nondecreasing by
// convexity of a, and equal to mu(0) < 0 at lambda = 0.
double speed_derivative_sign(const EigenProblemSpec& problem, double lambda) {
  const EigenPair pair = principal_eigenpair(problem.at(lambda));
  const double slope = curve_slope(pair, problem.flow);
  return lambda * lambda + pair.value - lambda * slope;
}

} // namespace

DispersionResult minimal_speed(const EigenProblemSpec& problem, const DispersionOptions& opts) {
  if (!(opts.lambda_min > 0.0) || !(opts.lambda_max > opts.lambda_min) || opts.scan_points < 2)
    throw InvalidArgument("minimal_speed: invalid search range");
  DispersionResult out{problem};
  out.mu0 = principal_eigenpair(problem.at(0.0)).value;
  ++out.evaluations;
  if (!(out.mu0 < 0.0)) {
    std::ostringstream msg;
    msg.precision(10);
    msg << "minimal speed undefined: mu(0) = " << out.mu0 << " is not negative";
    throw HypothesisViolation(msg.str());
  }

  const double ratio = std::pow(opts.lambda_max / opts.lambda_min, 1.0 / (opts.scan_points - 1));
  double lo = 0.0, hi = -1.0;
  double lambda = opts.lambda_min;
  for (int i = 0; i < opts.scan_points; ++i, lambda *= ratio) {
    if (i == opts.scan_points - 1)
      lambda = opts.lambda_max;
    ++out.evaluations;
    if (speed_derivative_sign(problem, lambda) >= 0.0) {
      hi = lambda;
      break;
    }
    lo = lambda;
  }
  if (hi < 0.0) {
    std::ostringstream msg;
    msg << "minimal speed: s(lambda) still decreasing at lambda_max = " << opts.lambda_max;
    throw NumericalFailure(msg.str());
  }
  while (hi - lo > opts.tolerance) {
    const double mid = 0.5 * (lo + hi);
    ++out.evaluations;
    if (speed_derivative_sign(problem, mid) >= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  // Both ends are within tolerance of the minimizer; keep the smaller s.
  const double s_lo = lo > 0.0 ? out.s(lo) : std::numeric_limits<double>::infinity();
  const double s_hi = out.s(hi);
  out.evaluations += 2;
  out.lambda_star = s_lo <= s_hi ? lo : hi;
  out.c_star = std::min(s_lo, s_hi);
  return out;
}

DispersionRoot lambda_root(double c, const DispersionResult& disp, double tolerance) {
  const double tie = 1e-12 * (1.0 + std::abs(disp.c_star));
  if (c < disp.c_star - tie) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "lambda_root: no positive root for c = " << c << " < c* = " << disp.c_star;
    throw InvalidArgument(msg.str());
  }
  if (c <= disp.c_star + tie)
    return {c, disp.lambda_star, true};
  auto F = [&](double lambda) { return lambda * lambda - c * lambda - disp.mu(lambda); };
  double lo = 1e-9, hi = disp.lambda_star;
  if (!(F(lo) > 0.0) || !(F(hi) < 0.0))
    throw NumericalFailure("lambda_root: dispersion function does not change sign");
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (F(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return {c, 0.5 * (lo + hi), false};
}

double slope_margin(double c, const DispersionResult& disp) {
  const DispersionRoot root = lambda_root(c, disp);
  const double margin = c - disp.a_prime(root.lambda);
  if (margin <= 0.0 && c > disp.c_star + 1e-6) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "slope_margin: nonpositive margin " << margin << " at c = " << c << " > c*";
    throw NumericalFailure(msg.str());
  }
  return margin;
}

std::vector<DispersionRow> dispersion_table(const DispersionResult& disp,
                                            const std::vector<double>& speeds) {
  std::vector<DispersionRow> rows;
  rows.reserve(speeds.size());
  for (double c : speeds) {
    const DispersionRoot root = lambda_root(c, disp);
    rows.push_back({c, root.lambda, c - disp.a_prime(root.lambda)});
  }
  return rows;
}

std::string dispersion_csv(const std::vector<DispersionRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "# c,lambda,margin\n";
  for (const auto& r : rows)
    os << r.c << ',' << r.lambda << ',' << r.margin << '\n';
  return os.str();
}

std::string dispersion_json(const DispersionResult& disp) {
  nlohmann::json j;
  j["c_star"] = disp.c_star;
  j["lambda_star"] = disp.lambda_star;
  j["mu0"] = disp.mu0;
  return j.dump(2);
}

} // namespace kpp
