#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fraclab/constants.hpp"

using namespace fraclab;
constexpr double pi = std::numbers::pi;

TEST_CASE("gamma matches the C library on |x| <= 50") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-50.0, 50.0);
  int checked = 0;
  while (checked < 2000) {
    const double x = dist(rng);
    if (std::fabs(x - std::round(x)) < 1e-6) continue;
    const double ref = std::tgamma(x);
    CHECK(std::fabs(fraclab::gamma(x) - ref) <= 1e-13 * std::fabs(ref));
    ++checked;
  }
  CHECK(fraclab::gamma(0.5) == doctest::Approx(std::sqrt(pi)).epsilon(1e-15));
  CHECK(fraclab::gamma(5.0) == doctest::Approx(24.0).epsilon(1e-15));
  CHECK_THROWS_AS(fraclab::gamma(0.0), DomainError);
  CHECK_THROWS_AS(fraclab::gamma(-3.0), DomainError);
}

TEST_CASE("sharp Hardy constant") {
  CHECK(std::fabs(hardy_constant(3, 0.5) - 2.0 / pi) < 1e-12);
  // Γ(5/4)/Γ(3/4) from the C library; frozen value 1.0942198...
  const double r = std::tgamma(1.25) / std::tgamma(0.75);
  CHECK(hardy_constant(4, 0.5) == doctest::Approx(2.0 * r * r).epsilon(1e-13));
  CHECK(hardy_constant(4, 0.5) == doctest::Approx(1.0942198).epsilon(1e-7));
  for (int n : {3, 4, 5})
    CHECK(std::fabs(hardy_constant(n, 0.999) - (n - 2.0) * (n - 2.0) / 4.0) < 1e-2);
  CHECK_THROWS_AS(hardy_constant(1, 0.5), DomainError);
  CHECK_THROWS_AS(hardy_constant(3, 1.0), DomainError);
}

TEST_CASE("kappa_s against the Bessel extension profile") {
  // The extension of e^{ix·ξ} with |ξ| = 1 is φ(t) = 2^{1-s}/Γ(s) t^s K_s(t);
  // -t^{1-2s} φ'(t) tends to kappa_s as t -> 0.
  CHECK(kappa_s(0.5) == doctest::Approx(1.0).epsilon(1e-14));
  for (double s : {0.2, 0.5, 0.75}) {
    auto phi = [s](double t) {
      return std::pow(2.0, 1.0 - s) / std::tgamma(s) * std::pow(t, s) *
             boost::math::cyl_bessel_k(s, t);
    };
    const double t = 1e-7, h = 1e-10;
    const double flux = -std::pow(t, 1.0 - 2.0 * s) * (phi(t + h) - phi(t - h)) / (2.0 * h);
    CHECK(flux == doctest::Approx(kappa_s(s)).epsilon(2e-3));
  }
}

TEST_CASE("gagliardo constant realises the Fourier seminorm") {
  CHECK(gagliardo_constant(1, 0.5) == doctest::Approx(1.0 / (2.0 * pi)).epsilon(1e-14));
  CHECK(gagliardo_constant(3, 0.5) == doctest::Approx(1.0 / (2.0 * pi * pi)).epsilon(1e-14));
  CHECK(fraclap_constant(1, 0.5) == doctest::Approx(1.0 / pi).epsilon(1e-14));
  // u = e^{-x²/2} on R: ∫(u(x)-u(x+h))² dx = 2√π (1 - e^{-h²/4}) and
  // ∫|ξ|^{2s}|û|² dξ/2π = Γ(s + 1/2).
  for (double s : {0.25, 0.5, 0.8}) {
    auto f = [s](double h) {
      const double h2 = h * h;
      const double ratio = h2 < 1e-200 ? 0.25 : -std::expm1(-h2 / 4.0) / h2;
      return 4.0 * std::sqrt(pi) * std::pow(h, 1.0 - 2.0 * s) * ratio;
    };
    const double seminorm =
        boost::math::quadrature::tanh_sinh<double>().integrate(f, 0.0, 1.0) +
        boost::math::quadrature::exp_sinh<double>().integrate(f, 1.0, std::numeric_limits<double>::infinity());
    CHECK(gagliardo_constant(1, s) * seminorm == doctest::Approx(std::tgamma(s + 0.5)).epsilon(1e-9));
  }
}

TEST_CASE("Poisson normaliser: closed form and quadrature agree") {
  CHECK(poisson_normalizer(1, 0.5) == doctest::Approx(1.0 / pi).epsilon(1e-14));
  for (int n = 1; n <= 6; ++n)
    for (double s : {0.05, 0.25, 0.5, 0.75, 0.95}) {
      const double a = poisson_normalizer_closed(n, s), b = poisson_normalizer_quadrature(n, s);
      CHECK(std::fabs(a - b) <= 1e-10 * a);
    }
}

TEST_CASE("bubble constant") {
  CHECK(bubble_constant(3, 0.5) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(sphere_area(1) == doctest::Approx(2.0));
  CHECK(sphere_area(3) == doctest::Approx(4.0 * pi));
}

TEST_CASE("parameter validation") {
  const auto p = FracParams::critical(3, 0.5, 0.1);
  CHECK(p.critical_exponent() == doctest::Approx(3.0));
  CHECK(p.critical_power() == doctest::Approx(2.0));
  CHECK(p.alpha() == doctest::Approx(1.0));
  CHECK(p.is_critical());
  CHECK_THROWS_AS(FracParams(1, 0.5, 0.0, 1.0, 2.0), DomainError);
  CHECK_THROWS_AS(FracParams(3, 0.5, 0.0, 1.5, 2.0), DomainError);
  CHECK_THROWS_AS(FracParams(3, 0.5, 0.0, 1.0, 2.5), DomainError);
  CHECK_THROWS_AS(FracParams(3, 0.5, 0.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(FracParams(3, 0.0, 0.0, 1.0, 1.5), DomainError);
  CHECK_NOTHROW(FracParams(3, 0.5, 0.0, 0.5, 1.5));
}
