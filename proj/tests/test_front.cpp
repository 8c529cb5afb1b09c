#include <doctest.h>

#include <cmath>

#include "kppfront/errors.hpp"
#include "kppfront/front.hpp"

using namespace kpp;

namespace {

FrontProblem robin_problem(double lewis, double offset = 0.5, int n = 16, double a = 26.0, int m = 130) {
  const FlowSpec flow;
  const auto rx = ReactionModel::linear(3.0);
  const CrossSectionGrid eg(1.0, 256);
  const double c = minimal_speed(EigenProblemSpec::robin(flow.on(eg), 1.0, rx.fprime0_samples(eg))).c_star + offset;
  return FrontProblem::robin_limit(c, lewis, CylinderGrid(a, m, CrossSectionGrid(1.0, n)), flow, rx, 1.0);
}

FrontProblem constant_problem(int n = 16) {
  const CrossSectionGrid cross(1.0, n);
  return FrontProblem::interior_loss(2.0 * std::sqrt(0.5) + 0.5, 1.0, CylinderGrid(44.0, 220, cross), FlowSpec{},
                                     ReactionModel::linear(1.0), std::vector<double>(cross.size(), 0.5));
}

SubSuperSolutions barriers_for(const FrontProblem& p) {
  return build_subsupersolutions(std::span<const FrontProblem>(&p, 1), p);
}

} // namespace

TEST_SUITE("front") {

TEST_CASE("problem validation") {
  const CrossSectionGrid cross(1.0, 16);
  const CylinderGrid grid(26.0, 130, cross);
  CHECK_THROWS_AS(FrontProblem::robin_limit(0.0, 1.0, grid, FlowSpec{}, ReactionModel::linear(3.0), 1.0),
                  InvalidArgument);
  CHECK_THROWS_AS(FrontProblem::robin_limit(2.0, -1.0, grid, FlowSpec{}, ReactionModel::linear(3.0), 1.0),
                  InvalidArgument);
  CHECK_THROWS_AS(FrontProblem::robin_limit(2.0, 1.0, grid, FlowSpec{}, ReactionModel::linear(3.0), -1.0),
                  InvalidArgument);
  CHECK_THROWS_AS(FrontProblem::interior_loss(2.0, 1.0, grid, FlowSpec{}, ReactionModel::linear(3.0),
                                              std::vector<double>(3, 0.0)),
                  InvalidArgument);
}

TEST_CASE("auxiliary eigenvalue without flow is zero") {
  const CrossSectionGrid g(1.0, 32);
  CHECK(auxiliary_eigenvalue(FlowProfile::zero(g), 0.7) == doctest::Approx(0.0).scale(1.0));
  const auto rates = build_auxiliary_rates(2.0, 1.0, FlowProfile::zero(g), 1.0);
  CHECK(rates.beta > 0.0);
  CHECK(rates.margin > 0.0);
}

TEST_CASE("barriers are ordered and satisfy their inequalities") {
  const auto p = robin_problem(1.0);
  const auto sss = barriers_for(p);
  CHECK(sss.delta > 0.0);
  CHECK(sss.eta > 0.0);
  CHECK(sss.epsilon_margin > 0.0);
  const auto cert = verify_ordered_pair(sss, 0, p);
  CHECK(cert.ok());
  CHECK(cert.check("ordering").passed);
  const double x = 3.0;
  CHECK(sss.T_lower(0, x, 4) <= sss.T_upper(0, x, 4));
  CHECK(sss.Y_lower(0, x, 4) <= 1.0);
  const auto sw = sss.sandwich();
  CHECK(sw.C1 > 0.0);
  CHECK(sw.Lambda2 > sw.Lambda1);
}

TEST_CASE("speeds at or below the minimal speed are rejected") {
  const auto p = robin_problem(1.0, -0.1);
  CHECK_THROWS_AS(barriers_for(p), HypothesisViolation);
}

TEST_CASE("zero reaction is not admissible") {
  const CrossSectionGrid cross(1.0, 16);
  const auto p = FrontProblem::robin_limit(2.0, 1.0, CylinderGrid(26.0, 130, cross), FlowSpec{},
                                           ReactionModel::zero(), 1.0);
  CHECK_THROWS_AS(barriers_for(p), HypothesisViolation);
}

TEST_CASE("Robin front converges for Le below and above one") {
  for (double lewis : {0.5, 2.0}) {
    CAPTURE(lewis);
    const auto p = robin_problem(lewis);
    const auto sss = barriers_for(p);
    const auto f = solve_front(p, sss, 0);
    CHECK(f.residual_T <= 1e-6);
    CHECK(f.residual_Y <= 1e-6);
    const auto d = front_diagnostics(f, p, sss, 0);
    CHECK(d.max_T > 0.0);
    CHECK(d.min_Y >= 0.0);
    CHECK(d.max_Y <= 1.0 + 1e-12);
    CHECK(d.sandwich_upper_violation <= 1e-8);
    CHECK(d.sandwich_lower_violation <= 1e-8);
    CHECK(d.energy_defect < 1e-2);
  }
}

TEST_CASE("alternating iteration agrees with Newton") {
  const auto p = robin_problem(1.0);
  const auto sss = barriers_for(p);
  const auto newton = solve_front(p, sss, 0);
  FrontSolverOptions o;
  o.method = FrontSolverOptions::Method::Alternating;
  const auto alt = solve_front(p, sss, 0, o);
  CHECK(profile_sup_distance(newton, alt) < 1e-6);
}

TEST_CASE("residual of the computed front is small and resampling is exact on the same grid") {
  const auto p = robin_problem(1.0);
  const auto sss = barriers_for(p);
  const auto f = solve_front(p, sss, 0);
  const auto [rT, rY] = front_residual(p, f.T, f.Y);
  double m = 0.0;
  for (double v : rT)
    m = std::max(m, std::abs(v));
  CHECK(m < 1e-6);
  (void)rY;
  const auto same = resample_profile(f, f.grid);
  CHECK(profile_sup_distance(f, same) == doctest::Approx(0.0));
  CHECK(box_l2_distance(f, same, 10.0).first == doctest::Approx(0.0));
}

TEST_CASE("constant heat loss baseline") {
  const auto p = constant_problem();
  const auto sss = barriers_for(p);
  CHECK(verify_ordered_pair(sss, 0, p).ok());
  const auto f = solve_front(p, sss, 0);
  CHECK(f.residual_T <= 1e-6);
  const auto d = front_diagnostics(f, p, sss, 0);
  const double c = p.speed();
  const double lambda = 0.5 * (c - std::sqrt(c * c - 2.0));
  CHECK(d.lambda == doctest::Approx(lambda).epsilon(1e-6));
  CHECK(d.tail_rate_error < 0.05);
}

TEST_CASE("serialization") {
  const auto p = robin_problem(1.0);
  const auto sss = barriers_for(p);
  const auto f = solve_front(p, sss, 0);
  const auto d = front_diagnostics(f, p, sss, 0);
  CHECK(front_csv(f).rfind("# x,y,T,Y\n", 0) == 0);
  CHECK(front_json(f, d, sss, verify_ordered_pair(sss, 0, p)).find("\"certificate\"") != std::string::npos);
}

}
