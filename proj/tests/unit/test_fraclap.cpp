#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "fraclab/constants.hpp"
#include "fraclab/fraclap.hpp"

using namespace fraclab;
constexpr double pi = std::numbers::pi;

namespace {

// (-Δ)^s e^{-|x|²} in R^n.
double gaussian_oracle(int n, double s, double r) {
  return std::pow(2.0, 2.0 * s) * std::tgamma(0.5 * n + s) / std::tgamma(0.5 * n) *
         boost::math::hypergeometric_1F1(0.5 * n + s, 0.5 * n, -r * r);
}

// (-Δ)^s |x|^{-β} = m(β) |x|^{-β-2s} for 0 < β < n - 2s.
double power_multiplier(int n, double s, double beta) {
  return std::pow(2.0, 2.0 * s) * std::tgamma(0.5 * (n - beta)) * std::tgamma(0.5 * (beta + 2 * s)) /
         (std::tgamma(0.5 * beta) * std::tgamma(0.5 * (n - beta - 2 * s)));
}

}  // namespace

TEST_CASE("power laws: the Hardy-saturating exponent gives the sharp constant") {
  for (auto [n, s] : std::vector<std::pair<int, double>>{{3, 0.5}, {4, 0.75}, {2, 0.3}, {1, 0.2}}) {
    const double beta = 0.5 * (n - 2 * s);
    const PowerLaw law{1.0, -beta};
    for (double r : {0.3, 1.0, 4.0}) {
      const auto res = fraclap_radial([&](double x) { return law(x); }, n, s, r, 1e3, law);
      CHECK(res.with_tail() ==
            doctest::Approx(hardy_constant(n, s) * std::pow(r, -beta - 2 * s)).epsilon(1e-7));
    }
    const double b2 = 0.3 * (n - 2 * s);
    const PowerLaw law2{1.0, -b2};
    const auto res = fraclap_radial([&](double x) { return law2(x); }, n, s, 1.0, 1e3, law2);
    CHECK(res.with_tail() == doctest::Approx(power_multiplier(n, s, b2)).epsilon(1e-7));
  }
}

TEST_CASE("Gaussian profiles against the confluent hypergeometric formula") {
  for (auto [n, s] : std::vector<std::pair<int, double>>{{1, 0.5}, {2, 0.25}, {3, 0.5}, {5, 0.9}}) {
    for (double r : {0.05, 0.5, 1.3, 2.5}) {
      const auto res = fraclap_radial([](double x) { return std::exp(-x * x); }, n, s, r, 12.0);
      CHECK(res.value == doctest::Approx(gaussian_oracle(n, s, r)).epsilon(1e-8));
    }
  }
}

TEST_CASE("sampled profiles on a radial grid") {
  auto g = RadialGrid::geometric(3, 0.5, 1e-5, 12.0, 16);
  auto u = RadialFunction::sample(g, [](double r) { return std::exp(-r * r); });
  const double scale = gaussian_oracle(3, 0.5, 0.0);
  for (double r : {1e-3, 0.2, 0.9, 2.0, 3.5}) {
    const auto res = fraclap_radial(u, r);
    CHECK_FALSE(res.truncation_flag);
    CHECK(std::fabs(res.value - gaussian_oracle(3, 0.5, r)) < 2e-5 * scale);
  }
  CHECK_THROWS_AS(fraclap_radial(u, 20.0), DomainError);
  CHECK_THROWS_AS(fraclap_radial(u, 1e-6), DomainError);
}

TEST_CASE("constant profile: body and tail cancel") {
  auto g = RadialGrid::geometric(3, 0.5, 1e-3, 100, 8);
  auto u = RadialFunction::sample(g, [](double) { return 1.0; });
  const auto res = fraclap_radial(u, 1.0);
  CHECK(res.truncation_flag);
  CHECK(std::fabs(res.value) > 1e-3);
  CHECK(std::fabs(res.with_tail()) < 1e-8);
}

TEST_CASE("bubble identity") {
  for (auto [n, s] : std::vector<std::pair<int, double>>{{3, 0.5}, {4, 0.75}, {2, 0.4}}) {
    const double b = 0.5 * (n - 2 * s);
    auto bub = [b](double r) { return std::pow(1 + r * r, -b); };
    for (double r : {0.1, 1.0, 3.0}) {
      const auto res = fraclap_radial(bub, n, s, r, 1e4, PowerLaw{1.0, -2 * b});
      CHECK(res.with_tail() == doctest::Approx(bubble_constant(n, s) * std::pow(1 + r * r, -b - 2 * s))
                                   .epsilon(1e-7));
    }
  }
}

TEST_CASE("scaling property") {
  // (-Δ)^s [u(c·)](r) = c^{2s} ((-Δ)^s u)(c r)
  const double c = 2.7, s = 0.35;
  auto u = [](double r) { return 1.0 / (1.0 + r * r * r * r); };
  auto uc = [&](double r) { return u(c * r); };
  const auto a = fraclap_radial(uc, 3, s, 0.4, 1e3, PowerLaw{std::pow(c, -4), -4});
  const auto b = fraclap_radial(u, 3, s, c * 0.4, 1e3, PowerLaw{1.0, -4});
  CHECK(a.with_tail() == doctest::Approx(std::pow(c, 2 * s) * b.with_tail()).epsilon(1e-8));
}

TEST_CASE("spectral operator") {
  SUBCASE("1D Gaussian, s = 1/2") {
    PeriodicGrid g{1, 40.0, 2048};
    std::vector<double> u(g.total());
    for (int j = 0; j < g.points; ++j) u[j] = std::exp(-g.coord(j) * g.coord(j));
    const auto res = fraclap_spectral(u, g, 0.5);
    CHECK_FALSE(res.support_warning);
    CHECK(res.values[g.points / 2] == doctest::Approx(2.0 / std::sqrt(pi)).epsilon(5e-4));
  }
  SUBCASE("constant maps to zero") {
    PeriodicGrid g{1, 5.0, 64};
    std::vector<double> u(g.total(), 3.0);
    const auto res = fraclap_spectral(u, g, 0.3);
    CHECK(res.support_warning);
    for (double v : res.values) CHECK(std::fabs(v) < 1e-12);
  }
  SUBCASE("2D radial Gaussian matches the radial route") {
    PeriodicGrid g{2, 16.0, 256};
    std::vector<double> u(g.total());
    for (int i = 0; i < g.points; ++i)
      for (int j = 0; j < g.points; ++j) {
        const double x = g.coord(i), y = g.coord(j);
        u[i * g.points + j] = std::exp(-x * x - y * y);
      }
    const double s = 0.75;
    const auto res = fraclap_spectral(u, g, s);
    const int i0 = g.points / 2, j0 = g.points / 2 + 8;
    const double r = std::hypot(g.coord(i0), g.coord(j0));
    const auto rad = fraclap_radial([](double x) { return std::exp(-x * x); }, 2, s, r, 12.0);
    CHECK(res.values[i0 * g.points + j0] == doctest::Approx(rad.value).epsilon(1e-3));
  }
  CHECK_THROWS_AS(fraclap_spectral(std::vector<double>(10), PeriodicGrid{1, 1.0, 16}, 0.5),
                  DomainError);
}

TEST_CASE("general point evaluation agrees with the radial route") {
  const double s = 0.5;
  auto bub = [](std::span<const double> x) {
    return 1.0 / (1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  };
  const std::vector<double> x{0.3, -0.4, 0.5};
  const double r = std::sqrt(0.5);
  PointOptions opts;
  opts.sphere_order = 16;
  const double got = fraclap_point(bub, x, s, opts);
  CHECK(got == doctest::Approx(2.0 * std::pow(1 + r * r, -2.0)).epsilon(1e-5));
}
