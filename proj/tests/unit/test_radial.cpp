#include <cmath>

#include "doctest.h"
#include "fraclab/constants.hpp"
#include "fraclab/radial.hpp"

using namespace fraclab;

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(RadialGrid(3, 0.5, {0.0, 1.0, 1.1, 1.2}), DomainError);
  CHECK_THROWS_AS(RadialGrid(3, 0.5, {1.0, 1.1, 1.05, 1.2}), DomainError);
  CHECK_THROWS_AS(RadialGrid(3, 0.5, {1.0, 1.1, 1.5, 1.6}), DomainError);  // gap > 2^{1/3}
  CHECK_NOTHROW(RadialGrid(3, 0.5, {1.0, 1.2, 1.4, 1.6}));
  auto g = RadialGrid::geometric(3, 0.5, 1e-3, 1e3, 8);
  CHECK(g->r_min() == doctest::Approx(1e-3));
  CHECK(g->r_max() >= 1e3 * (1 - 1e-12));
  CHECK(g->nodes_per_octave() == doctest::Approx(8.0));
  CHECK(g->is_geometric());
  CHECK(g->hash() == RadialGrid::geometric(3, 0.5, 1e-3, 1e3, 8)->hash());
  CHECK(g->hash() != RadialGrid::geometric(3, 0.25, 1e-3, 1e3, 8)->hash());
}

TEST_CASE("power laws are reproduced by head, tail and spline") {
  auto g = RadialGrid::geometric(3, 0.5, 1e-1, 1e3, 10);
  auto u = RadialFunction::sample(g, [](double r) { return std::pow(r, -1.3); });
  CHECK(u.head().exponent == doctest::Approx(-1.3).epsilon(1e-12));
  CHECK(u.tail().exponent == doctest::Approx(-1.3).epsilon(1e-12));
  for (double r : {1e-6, 0.2, 0.37, 5.1, 1e5})
    CHECK(u(r) == doctest::Approx(std::pow(r, -1.3)).epsilon(1e-6));
  CHECK(u.derivative(0.37) == doctest::Approx(-1.3 * std::pow(0.37, -2.3)).epsilon(1e-5));
  CHECK(u.body(2e3) == 0.0);
  CHECK_FALSE(u.decays());
}

TEST_CASE("spline accuracy on a smooth profile") {
  auto g = RadialGrid::geometric(3, 0.5, 1e-4, 20, 16);
  auto u = RadialFunction::sample(g, [](double r) { return std::exp(-r * r); });
  for (double r : {1e-3, 0.1, 0.77, 1.5, 2.9}) CHECK(std::fabs(u(r) - std::exp(-r * r)) < 1e-5);
  CHECK(u.decays());
  CHECK(u.tail()(30.0) < 1e-100);
}

TEST_CASE("tail is dropped on sign change or exact zero") {
  auto g = RadialGrid::geometric(1, 0.3, 1e-2, 10, 8);
  auto u = RadialFunction::sample(g, [](double r) { return std::cos(3 * r); });
  CHECK(u.tail().coef == 0.0);
  CHECK_THROWS_AS(RadialFunction(g, {1.0, 2.0}), DomainError);
}
