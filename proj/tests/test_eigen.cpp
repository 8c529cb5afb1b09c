#include <doctest.h>

#include <cmath>
#include <random>

#include "kppfront/eigen.hpp"
#include "kppfront/errors.hpp"
#include "oracles.hpp"

using namespace kpp;

TEST_SUITE("eigen") {

TEST_CASE("constant potential with Neumann gives the constant") {
  const CrossSectionGrid g(1.0, 64);
  const auto spec = EigenProblemSpec::general(FlowProfile::zero(g), std::vector<double>(g.size(), 0.37),
                                              BoundaryCondition::neumann());
  const EigenPair p = principal_eigenpair(spec);
  CHECK(std::abs(p.value - 0.37) < 1e-10);
  for (double v : p.eigenfunction)
    CHECK(v == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("dense oracle: shear flow, variable potential, Neumann and Robin") {
  const int N = 48;
  const CrossSectionGrid g(1.3, N);
  const FlowProfile flow = FlowProfile::cosine(g, 1.5, 2);
  const auto V = g.sample([](double y) { return std::sin(3 * y) - 0.4; });
  for (double q : {0.0, 0.7, 3.0})
    for (double lambda : {-1.0, 0.0, 0.8}) {
      const auto bc = q > 0 ? BoundaryCondition::robin(q) : BoundaryCondition::neumann();
      const auto spec = EigenProblemSpec::general(flow, V, bc, lambda);
      const double expected =
          oracle::smallest_eigenvalue(oracle::row_form(1.3, N, flow.samples(), V, lambda, q));
      CHECK(principal_eigenpair(spec).value == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("Robin principal value converges to the transcendental root") {
  const double nu = oracle::robin_root(1.0, 1.0);
  auto err = [&](int n) {
    const CrossSectionGrid g(1.0, n);
    const std::vector<double> zero(g.size(), 0.0);
    return std::abs(principal_eigenpair(EigenProblemSpec::robin(FlowProfile::zero(g), 1.0, zero)).value - nu);
  };
  CHECK(err(64) < 2e-3);
  CHECK(err(512) < 1e-4);
  CHECK(std::log2(err(64) / err(128)) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("eigenfunction is positive, normalized and satisfies the row form") {
  const CrossSectionGrid g(1.0, 128);
  const FlowProfile flow = FlowProfile::cosine(g, 1.0, 1);
  const std::vector<double> fp(g.size(), 1.0);
  const auto spec = EigenProblemSpec::robin(flow, 0.5, fp, 0.6);
  const EigenPair p = principal_eigenpair(spec);
  for (double v : p.eigenfunction)
    CHECK(v > 0.0);
  CHECK(l2_norm(g, p.eigenfunction) == doctest::Approx(1.0).epsilon(1e-12));
  const auto Aphi = assemble(spec).apply_row_form(p.eigenfunction);
  double r = 0.0;
  for (int j = 0; j < g.size(); ++j)
    r = std::max(r, std::abs(Aphi[j] - p.value * p.eigenfunction[j]));
  CHECK(r < 1e-7);
}

TEST_CASE("Rayleigh quotient: consistency and minimality on random trial functions") {
  const CrossSectionGrid g(1.0, 96);
  const FlowProfile flow = FlowProfile::cosine(g, 2.0, 1);
  const auto V = g.sample([](double y) { return -1.0 + y * y; });
  const auto spec = EigenProblemSpec::general(flow, V, BoundaryCondition::robin(1.0), 0.4);
  const EigenPair p = principal_eigenpair(spec);
  CHECK(rayleigh(spec, p.eigenfunction) == doctest::Approx(p.value).epsilon(1e-9));
  std::mt19937 rng(20261015);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    auto trial = p.eigenfunction;
    for (double& v : trial)
      v += 0.3 * d(rng);
    CHECK(rayleigh(spec, trial) >= p.value - 1e-12);
  }
}

TEST_CASE("slope formula against centered differences") {
  const CrossSectionGrid g(1.0, 128);
  const FlowProfile flow = FlowProfile::cosine(g, 1.0, 1);
  const std::vector<double> fp(g.size(), 1.0);
  const auto spec = EigenProblemSpec::robin(flow, 1.0, fp);
  for (double lambda : {-0.7, 0.0, 0.9}) {
    const double h = 1e-4;
    const double fd = (principal_eigenpair(spec.at(lambda + h)).value -
                       principal_eigenpair(spec.at(lambda - h)).value) / (2 * h);
    CHECK(curve_slope(principal_eigenpair(spec.at(lambda)), flow) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("eigencurves are concave and flat without flow") {
  const CrossSectionGrid g(1.0, 64);
  const std::vector<double> fp(g.size(), 1.0);
  const auto lambdas = linspace(-2.0, 2.0, 21);
  const auto shear = eigencurve(EigenProblemSpec::robin(FlowProfile::cosine(g, 1.0, 1), 1.0, fp), lambdas);
  CHECK(shear.concave);
  CHECK(shear.values[10] > shear.values[0]);
  const auto flat = eigencurve(EigenProblemSpec::robin(FlowProfile::zero(g), 1.0, fp), lambdas);
  for (double v : flat.values)
    CHECK(v == doctest::Approx(flat.values[0]).epsilon(1e-12));
  CHECK_THROWS_AS(eigencurve(EigenProblemSpec::plain(FlowProfile::zero(g)), std::vector<double>{1.0, 0.0}),
                  InvalidArgument);
}

TEST_CASE("dirichlet energy of a linear function") {
  const CrossSectionGrid g(2.0, 20);
  CHECK(dirichlet_energy(g, g.sample([](double y) { return 3.0 * y; })) == doctest::Approx(18.0));
}

TEST_CASE("size mismatches are rejected") {
  const CrossSectionGrid g(1.0, 16);
  CHECK_THROWS_AS(EigenProblemSpec::robin(FlowProfile::zero(g), 1.0, std::vector<double>(5, 1.0)),
                  InvalidArgument);
  CHECK_THROWS_AS(EigenProblemSpec::robin(FlowProfile::zero(g), -1.0, std::vector<double>(17, 1.0)),
                  InvalidArgument);
}

}
