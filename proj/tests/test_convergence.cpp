#include <doctest.h>

#include <cmath>

#include "kppfront/convergence.hpp"
#include "kppfront/errors.hpp"

using namespace kpp;

TEST_SUITE("convergence") {

TEST_CASE("mesh rule") {
  CHECK(default_mesh_rule(4, 1.0) == 256);
  CHECK(default_mesh_rule(16, 1.0) == 512);
  CHECK(default_mesh_rule(32, 1.0) == 1024);
}

TEST_CASE("layer gap for a linear function matches the closed form") {
  const CrossSectionGrid g(1.0, 8192);
  const auto phi = g.sample([](double y) { return std::sqrt(3.0) * y; });
  for (int k : {4, 8, 16, 32}) {
    const auto member = make_quadratic_family(k, 1.0, g);
    const double expected = 1.5 / k - 0.6 / (k * k);
    CHECK(lemma1_gap(member, phi, 1.0) == doctest::Approx(expected).epsilon(1e-4));
  }
}

TEST_CASE("layer gap of the constant function is a quadrature error only") {
  const CrossSectionGrid g(1.0, 4096);
  const std::vector<double> one(g.size(), 1.0);
  const double h = g.spacing();
  // trapezoid error h^2/12 (g'(b) - g'(a)) per layer, g'(0) = 6 q k^2
  for (int k : {4, 32})
    CHECK(lemma1_gap(make_quadratic_family(k, 2.0, g), one, 2.0) <= 1.01 * h * h * 2.0 * k * k);
}

TEST_CASE("layer gap vanishes for functions supported away from the layer and boundary") {
  const CrossSectionGrid g(1.0, 2048);
  const auto phi = g.sample([](double y) { return std::abs(y - 0.5) < 0.25 ? std::cos(2 * M_PI * y) + 1.0 : 0.0; });
  CHECK(lemma1_gap(make_quadratic_family(8, 1.0, g), phi, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("layer gap refuses under-resolved members") {
  const CrossSectionGrid coarse(1.0, 64);
  const CrossSectionGrid fine(1.0, 1024);
  const auto member = make_quadratic_family(32, 1.0, coarse);
  CHECK_THROWS_AS(lemma1_gap(member, std::vector<double>(coarse.size(), 1.0), 1.0), ResolutionError);
  (void)fine;
}

TEST_CASE("sequence helpers") {
  const std::vector<int> ks{4, 8, 16, 32};
  std::vector<double> e;
  for (int k : ks)
    e.push_back(3.0 / (k * k));
  CHECK(fitted_order(ks, e) == doctest::Approx(2.0));
  CHECK(strictly_decreasing(e));
  CHECK_FALSE(strictly_decreasing(std::vector<double>{1.0, 0.5, 0.5}));
  CHECK(plateaued(std::vector<double>{0.30, 0.31, 0.305}));
  CHECK_FALSE(plateaued(e));
  CHECK_THROWS_AS(fitted_order(ks, std::vector<double>{1.0, 0.0, 1.0, 1.0}), InvalidArgument);
}

TEST_CASE("l2 distance across grids and sign alignment") {
  const CrossSectionGrid a(1.0, 64), b(1.0, 256);
  const auto fa = a.sample([](double y) { return std::cos(M_PI * y); });
  const auto fb = b.sample([](double y) { return -std::cos(M_PI * y); });
  CHECK(l2_distance(a, fa, b, fb) < 1e-3);
  const auto fc = b.sample([](double) { return 0.0; });
  CHECK(l2_distance(a, fa, b, fc) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-3));
  CHECK_THROWS_AS(l2_distance(a, fa, CrossSectionGrid(2.0, 64), fa), InvalidArgument);
}

TEST_CASE("eigencurve sweep converges for the quadratic family") {
  SweepSetup s;
  s.ks = {4, 8, 16};
  s.window_points = 9;
  s.reference_n = 1024;
  const auto r = theorem2_sweep(FamilySpec{}, s);
  CHECK(r.family_ok);
  CHECK(strictly_decreasing(r.sup_errors()));
  CHECK(strictly_decreasing(r.l2_distances(0)));
  CHECK(r.energy_bounded());
  CHECK(r.rayleigh_chain_ok());
  CHECK(fitted_order(s.ks, r.sup_errors()) > 0.8);
}

TEST_CASE("frozen family plateaus") {
  SweepSetup s;
  s.ks = {4, 8, 16};
  s.window_points = 5;
  s.reference_n = 1024;
  s.require_hypotheses = false;
  FamilySpec frozen;
  frozen.kind = FamilySpec::Kind::Frozen;
  const auto r = theorem2_sweep(frozen, s);
  CHECK_FALSE(r.family_ok);
  CHECK(plateaued(r.sup_errors()));
  s.require_hypotheses = true;
  CHECK_THROWS_AS(theorem2_sweep(frozen, s), HypothesisViolation);
}

TEST_CASE("speed part requires a negative limit eigenvalue") {
  SweepSetup s;
  s.ks = {4, 8};
  s.reference_n = 512;
  CHECK_THROWS_AS(speed_convergence(FamilySpec{}, s), HypothesisViolation);
  s.fprime0 = [](double) { return 3.0; };
  const auto r = speed_convergence(FamilySpec{}, s);
  CHECK(r.has_speeds);
  CHECK(r.nu0 < 0.0);
  CHECK(strictly_decreasing(r.speed_errors()));
  for (const auto& row : r.rows)
    CHECK(row.bracket_ok);
}

TEST_CASE("report serialization") {
  SweepSetup s;
  s.ks = {4, 8};
  s.window_points = 3;
  s.reference_n = 512;
  const auto r = theorem2_sweep(FamilySpec{}, s);
  CHECK(convergence_csv(r).rfind("#", 0) == 0);
  CHECK(convergence_json(r).find("\"sup_error\"") != std::string::npos);
}

}
