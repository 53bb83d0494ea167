#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fraclab/constants.hpp"
#include "fraclab/forms.hpp"
#include "fraclab/kernel.hpp"

using namespace fraclab;
constexpr double pi = std::numbers::pi;

namespace {

// Closed-form angular kernel in R^3, with the inversion symmetry and a
// series near z = 0 to avoid cancellation.
double k3(double z, double s) {
  const double a = 1.0 + 2.0 * s;
  if (z > 1.0) return std::pow(z, -3.0 - 2.0 * s) * k3(1.0 / z, s);
  if (z < 1e-4) return 16.0 * pi * pi * (1.0 + (a + 1.0) * (a + 2.0) * z * z / 6.0);
  return 8.0 * pi * pi * (std::pow(1.0 - z, -a) - std::pow(1.0 + z, -a)) / (z * a);
}

// ‖e^{-|x|²}‖²_{Ḣ^s} from the Fourier side.
double gaussian_energy(int n, double s) {
  return std::pow(pi, n) * sphere_area(n) * std::pow(2.0, s + 0.5 * n - 1.0) * std::tgamma(s + 0.5 * n) /
         std::pow(2.0 * pi, n);
}

}  // namespace

TEST_CASE("angular kernel table against the closed form in R^3") {
  for (double s : {0.2, 0.5, 0.8}) {
    const RadialKernel K(3, s);
    for (double z : {1e-3, 0.1, 0.5, 0.9, 0.999, 1.0 - 1e-6, 1.5, 3.0, 100.0}) {
      const double ex = k3(z, s);
      CHECK(K.k_direct(z) == doctest::Approx(ex).epsilon(1e-12));
      const double tau = std::log(z);
      CHECK(K.H(tau) * std::pow(z, -1.5 - s) == doctest::Approx(ex).epsilon(1e-7));
      CHECK(K.H(tau) == doctest::Approx(K.H(-tau)).epsilon(1e-12));
    }
  }
}

TEST_CASE("kernel tails against direct integration") {
  const double s = 0.35;
  const RadialKernel K(3, s);
  const double c = 1.5 - s;
  auto Hx = [&](double t) { return std::exp(-t * (1.5 + s)) * k3(std::exp(-t), s); };
  boost::math::quadrature::exp_sinh<double> es;
  for (double sigma : {1e-3, 0.05, 0.7, 3.0}) {
    const double inf = std::numeric_limits<double>::infinity();
    // exp-sinh probes t up to overflow; the integrands are zero there.
    const double inner = es.integrate(
        [&](double t) { return t > 600.0 ? 0.0 : std::exp(-c * t) * Hx(t); }, sigma, inf);
    const double outer = es.integrate(
        [&](double t) { return t > 600.0 ? 0.0 : std::exp(c * t) * Hx(t); }, sigma, inf);
    CHECK(K.inner_tail(sigma) == doctest::Approx(inner).epsilon(1e-7));
    CHECK(K.outer_tail(sigma) == doctest::Approx(outer).epsilon(1e-7));
  }
}

TEST_CASE("single hat functions against a brute-force double integral") {
  // 20-node grid in R^3; the oracle integrates (φ(r)-φ(ρ))² G(r,ρ) with the
  // closed-form kernel by nested tanh-sinh / exp-sinh.
  for (double s : {0.3, 0.5}) {
    auto grid = RadialGrid::geometric(3, s, 0.5, 0.5 * std::pow(2.0, 19.0 / 4.0), 4);
    REQUIRE(grid->size() == 20);
    const auto F = assemble_forms(grid);
    std::vector<double> x(grid->nodes().begin(), grid->nodes().end());
    x.push_back(F->ghost_radius);
    const std::size_t M = grid->size();

    for (std::size_t i : {std::size_t{0}, std::size_t{7}, M - 1}) {
      auto phi = [&](double r) {
        if (i == 0 && r <= x[0]) return 1.0;
        if (i > 0 && r > x[i - 1] && r <= x[i]) return (r - x[i - 1]) / (x[i] - x[i - 1]);
        if (r > x[i] && r < x[i + 1]) return (x[i + 1] - r) / (x[i + 1] - x[i]);
        return 0.0;
      };
      auto G = [&](double r, double rho) {
        const double v = std::pow(r, -1.0 - 2.0 * s) * rho * rho * k3(rho / r, s);
        return std::isfinite(v) ? v : 0.0;
      };
      const double lo = i == 0 ? 0.0 : x[i - 1], hi = x[i + 1];
      boost::math::quadrature::tanh_sinh<double> ts(12);
      boost::math::quadrature::exp_sinh<double> es(12);
      const double inf = std::numeric_limits<double>::infinity();
      auto F_of_r = [&](double r) {
        if (r > 1e12) return 0.0;
        const double pr = phi(r);
        auto f = [&](double rho) {
          const double d = pr - phi(rho);
          return rho == r ? 0.0 : d * d * G(r, rho);
        };
        std::vector<double> br{0.0, lo, x[i], hi};
        br.push_back(r);
        std::sort(br.begin(), br.end());
        br.erase(std::unique(br.begin(), br.end()), br.end());
        double acc = 0.0;
        for (std::size_t k = 0; k + 1 < br.size(); ++k)
          if (br[k + 1] > br[k]) acc += ts.integrate(f, br[k], br[k + 1]);
        acc += es.integrate(f, br.back(), inf);
        return acc;
      };
      double total = 0.0;
      std::vector<double> outer{0.0, lo, x[i], hi};
      std::sort(outer.begin(), outer.end());
      outer.erase(std::unique(outer.begin(), outer.end()), outer.end());
      for (std::size_t k = 0; k + 1 < outer.size(); ++k)
        total += ts.integrate(F_of_r, outer[k], outer[k + 1]);
      total += es.integrate(F_of_r, hi, inf);
      total *= gagliardo_constant(3, s);
      const auto ii = static_cast<Eigen::Index>(i);
      CHECK(F->gagliardo(ii, ii) == doctest::Approx(total).epsilon(1e-5));
    }
  }
}

TEST_CASE("Gaussian energy matches the Fourier side") {
  for (auto [n, s] : std::vector<std::pair<int, double>>{{1, 0.3}, {2, 0.3}, {3, 0.5}, {4, 0.75}}) {
    auto grid = RadialGrid::geometric(n, s, 1e-3, 8.0, 32);
    const auto F = assemble_forms(grid);
    std::vector<double> u;
    for (double r : grid->nodes()) u.push_back(std::exp(-r * r));
    CHECK(F->energy(u) == doctest::Approx(gaussian_energy(n, s)).epsilon(2e-4));
    // lumped L² mass of the same Gaussian: (π/2)^{n/2}
    CHECK(F->lp_integral(u, 2.0) == doctest::Approx(std::pow(pi / 2.0, 0.5 * n)).epsilon(1e-3));
  }
}

TEST_CASE("Gagliardo form is nonnegative and symmetric") {
  auto grid = RadialGrid::geometric(3, 0.4, 1e-2, 1e2, 6);
  const auto F = assemble_forms(grid);
  CHECK((F->gagliardo - F->gagliardo.transpose()).norm() == 0.0);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N01;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> u(grid->size());
    for (auto& v : u) v = N01(rng);
    CHECK(F->energy(u) > 0.0);
    CHECK(F->form(u, 0.0) == F->energy(u));
  }
  for (Eigen::Index i = 0; i < F->hardy.size(); ++i) CHECK(F->hardy[i] > 0.0);
}

TEST_CASE("Hardy quotient: bounded below by the sharp constant, and scale invariant") {
  for (auto [n, s] : std::vector<std::pair<int, double>>{{3, 0.5}, {4, 0.75}}) {
    const double L = hardy_constant(n, s);
    double prev = 1e300;
    // Refinement widens the log-range at fixed density; the truncation
    // excess decays like 1/log² of the range.
    for (double dec : {3.0, 5.0, 7.0}) {
      auto grid = RadialGrid::geometric(n, s, std::pow(10.0, -dec), std::pow(10.0, dec), 8);
      const auto m = min_hardy_quotient(*assemble_forms(grid));
      CHECK(m.value >= L * (1.0 - 1e-3));
      CHECK(m.value < prev);
      prev = m.value;
      CHECK(m.vector.minCoeff() > 0.0);
    }
    CHECK(prev <= L * 1.01);
  }
  // u(c·) on the grid scaled by 1/c has the same nodal values.
  auto g1 = RadialGrid::geometric(3, 0.5, 1e-2, 1e2, 6);
  std::vector<double> scaled(g1->nodes().begin(), g1->nodes().end());
  for (auto& r : scaled) r /= 3.7;
  auto g2 = std::make_shared<const RadialGrid>(3, 0.5, scaled);
  auto u1 = RadialFunction::sample(g1, [](double r) { return 1.0 / (1.0 + r * r); });
  RadialFunction u2(g2, std::vector<double>(u1.values().begin(), u1.values().end()));
  CHECK(hardy_quotient(u1) == doctest::Approx(hardy_quotient(u2)).epsilon(1e-10));
  CHECK(hardy_quotient(u1) >= hardy_constant(3, 0.5));
  CHECK_THROWS_AS(hardy_quotient(RadialFunction(g1, std::vector<double>(g1->size(), 0.0))),
                  DomainError);
  CHECK_THROWS_AS(assemble_forms(g1, FracParams(3, 0.25, 0.0, 0.5, 2.0)), DomainError);
}
