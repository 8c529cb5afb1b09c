#pragma once

#include <string>
#include <vector>

#include "kppfront/eigen.hpp"

namespace kpp {

struct DispersionOptions {
  double lambda_min = 1e-6;
  double lambda_max = 50.0;
  double tolerance = 1e-9; // on lambda_star
  int scan_points = 121;   // geometric bracketing scan on [lambda_min, lambda_max]
};

/// Minimal speed c* = min over lambda > 0 of s(lambda) = (lambda^2 - mu(lambda)) / lambda
/// for the eigencurve mu of an eigenproblem template.
struct DispersionResult {
  EigenProblemSpec problem;
  double c_star = 0.0;
  double lambda_star = 0.0;
  double mu0 = 0.0; // mu(0) < 0 certifies well-posedness
  int evaluations = 0;

  double mu(double lambda) const;
  // a(lambda) = lambda^2 - mu(lambda).
  double a(double lambda) const;
  // a'(lambda) = 2 lambda - mu'(lambda), with the analytic slope.
  double a_prime(double lambda) const;
  double s(double lambda) const { return a(lambda) / lambda; }
};

// Raises HypothesisViolation when mu(0) >= 0 and NumericalFailure when s has no
// interior minimum on (lambda_min, lambda_max].
DispersionResult minimal_speed(const EigenProblemSpec& problem, const DispersionOptions& opts = {});

struct DispersionRoot {
  double c = 0.0;
  double lambda = 0.0;
  bool double_root = false; // c == c*: lambda is lambda_star
};

// Smallest positive root of lambda^2 - c lambda - mu(lambda) = 0.
DispersionRoot lambda_root(double c, const DispersionResult& disp, double tolerance = 1e-10);

// c - a'(lambda(c)). Positive for c > c*.
double slope_margin(double c, const DispersionResult& disp);

struct DispersionRow {
  double c = 0.0;
  double lambda = 0.0;
  double margin = 0.0;
};

std::vector<DispersionRow> dispersion_table(const DispersionResult& disp,
                                            const std::vector<double>& speeds);

std::string dispersion_csv(const std::vector<DispersionRow>& rows);
std::string dispersion_json(const DispersionResult& disp);

} // namespace kpp
