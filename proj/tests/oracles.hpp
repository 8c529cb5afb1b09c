#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Row-form matrix of -phi'' - lambda u phi + V phi on N+1 nodes with mirror
// (q = 0) or Robin ghost nodes, assembled directly from the stencil.
inline Eigen::MatrixXd row_form(double L, int N, const std::vector<double>& u,
                                const std::vector<double>& V, double lambda, double q) {
  const double h = L / N;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N + 1, N + 1);
  for (int j = 0; j <= N; ++j) {
    A(j, j) = 2.0 / (h * h) + V[j] - lambda * u[j];
    if (j == 0) {
      A(0, 1) = -2.0 / (h * h);
      A(0, 0) += 2.0 * q / h;
    } else if (j == N) {
      A(N, N - 1) = -2.0 / (h * h);
      A(N, N) += 2.0 * q / h;
    } else {
      A(j, j - 1) = -1.0 / (h * h);
      A(j, j + 1) = -1.0 / (h * h);
    }
  }
  return A;
}

inline double smallest_eigenvalue(const Eigen::MatrixXd& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  return es.eigenvalues().real().minCoeff();
}

// Root of sqrt(nu) tan(sqrt(nu) L / 2) = q on (0, (pi/L)^2): principal Robin eigenvalue with V = 0.
inline double robin_root(double q, double L) {
  double lo = 1e-14, hi = std::pow(M_PI / L, 2) - 1e-12;
  auto F = [&](double nu) { return std::sqrt(nu) * std::tan(std::sqrt(nu) * L / 2) - q; };
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (F(mid) > 0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double bisect(const std::function<double(double)>& F, double lo, double hi, int steps = 200) {
  const bool rising = F(hi) > 0;
  for (int i = 0; i < steps; ++i) {
    const double mid = 0.5 * (lo + hi);
    ((F(mid) > 0) == rising ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace oracle
