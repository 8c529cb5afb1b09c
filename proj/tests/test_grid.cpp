#include <doctest.h>

#include <cmath>

#include "kppfront/errors.hpp"
#include "kppfront/grid.hpp"

using namespace kpp;

TEST_SUITE("grid") {

TEST_CASE("trapezoid weights integrate linear functions exactly") {
  const CrossSectionGrid g(2.0, 10);
  CHECK(g.spacing() == doctest::Approx(0.2));
  double total = 0.0;
  for (double w : g.weights())
    total += w;
  CHECK(total == doctest::Approx(2.0).epsilon(1e-14));
  const auto lin = g.sample([](double y) { return 3.0 * y - 1.0; });
  CHECK(integrate(g, lin) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("trapezoid rule is second order on a smooth function") {
  auto err = [](int n) {
    const CrossSectionGrid g(1.0, n);
    return std::abs(integrate(g, g.sample([](double y) { return std::exp(y); })) -
                    (std::exp(1.0) - 1.0));
  };
  CHECK(std::log2(err(32) / err(64)) == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("boundary geometry") {
  const CrossSectionGrid g(1.0, 8);
  CHECK(g.normal_at(0) == -1.0);
  CHECK(g.normal_at(8) == 1.0);
  CHECK_THROWS_AS(g.normal_at(3), InvalidArgument);
  CHECK(g.distance_to_boundary(0.2) == doctest::Approx(0.2));
  CHECK(g.distance_to_boundary(0.9) == doctest::Approx(0.1));
  const auto v = g.sample([](double y) { return 1.0 + y; });
  CHECK(boundary_sum(g, v) == doctest::Approx(3.0));
  CHECK(g.interpolate(v, 0.3) == doctest::Approx(1.3));
}

TEST_CASE("l2 norm of a constant") {
  const CrossSectionGrid g(4.0, 16);
  const std::vector<double> one(g.size(), 1.0);
  CHECK(l2_norm(g, one) == doctest::Approx(2.0));
}

TEST_CASE("invalid grids are rejected") {
  CHECK_THROWS_AS(CrossSectionGrid(0.0, 16), InvalidArgument);
  CHECK_THROWS_AS(CrossSectionGrid(1.0, 4), InvalidArgument);
  CHECK_THROWS_AS(CylinderGrid(-1.0, 10, CrossSectionGrid(1.0, 8)), InvalidArgument);
}

TEST_CASE("cylinder indexing runs y fastest") {
  const CylinderGrid c(5.0, 10, CrossSectionGrid(1.0, 8));
  CHECK(c.node_count() == 11 * 9);
  CHECK(c.index(2, 3) == 2 * 9 + 3);
  CHECK(c.x(0) == doctest::Approx(-5.0));
  CHECK(c.x(10) == doctest::Approx(5.0));
  CHECK(c.axial_spacing() == doctest::Approx(1.0));
}

}
