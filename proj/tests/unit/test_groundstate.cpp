#include <cmath>
#include <random>

#include "doctest.h"
#include "fraclab/groundstate.hpp"
#include "fraclab/kelvin.hpp"

using namespace fraclab;

namespace {

GridPtr grid(double npo = 4.0) { return RadialGrid::geometric(3, 0.5, 1e-3, 1e3, npo); }

// Least-squares fit of c (a² + r²)^{-(n-2s)/2}: c in closed form for each a,
// golden section over log a. Returns the relative misfit in L²(R^n).
double bubble_misfit(const RadialFunction& u, double& a_fit) {
  const auto& g = u.grid();
  const double m = 0.5 * (g.dim() - 2.0 * g.order());
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double lo = i == 0 ? g[0] : g[i - 1], hi = i + 1 < g.size() ? g[i + 1] : g[i];
    w[i] = std::pow(g[i], g.dim()) * 0.5 * std::log(hi / lo);
  }
  auto misfit = [&](double la) {
    const double a = std::exp(la);
    double uf = 0.0, ff = 0.0, uu = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double f = std::pow(a * a + g[i] * g[i], -m);
      uf += w[i] * u.value(i) * f;
      ff += w[i] * f * f;
      uu += w[i] * u.value(i) * u.value(i);
    }
    return std::sqrt(std::max(0.0, 1.0 - uf * uf / (ff * uu)));
  };
  double lo = std::log(1e-2), hi = std::log(1e2);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int k = 0; k < 100; ++k) {
    const double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    (misfit(x1) < misfit(x2) ? hi : lo) = misfit(x1) < misfit(x2) ? x2 : x1;
  }
  a_fit = std::exp(0.5 * (lo + hi));
  return misfit(0.5 * (lo + hi));
}

}  // namespace

TEST_CASE("rayleigh quotient") {
  const auto g = grid();
  const auto F = assemble_forms(g);
  const auto u = RadialFunction::sample(g, [](double r) { return std::pow(1.0 + r * r, -1.0); });
  const double q0 = rayleigh(u, 0.0, *F);
  CHECK(q0 > 0.0);
  // homogeneity of degree zero
  std::vector<double> v(u.values().begin(), u.values().end());
  for (double& x : v) x *= 3.7;
  CHECK(rayleigh(v, 0.0, *F) == doctest::Approx(q0).epsilon(1e-13));
  // affine and decreasing in λ
  CHECK(rayleigh(u, 0.2, *F) > rayleigh(u, 0.4, *F));
  const double q1 = rayleigh(u, 0.1, *F), q2 = rayleigh(u, 0.2, *F);
  CHECK(q2 - q1 == doctest::Approx(q1 - q0).epsilon(1e-10));

  std::vector<double> z(g->size(), 0.0);
  CHECK_THROWS_AS(rayleigh(z, 0.0, *F), DomainError);
  CHECK_THROWS_AS(rayleigh(std::vector<double>(3, 1.0), 0.0, *F), DomainError);
}

TEST_CASE("dilation invariance on matched grids") {
  const auto g = grid();
  const auto F = assemble_forms(g);
  const auto u = RadialFunction::sample(g, [](double r) { return std::exp(-r) / (1.0 + r); });
  for (int k : {1, 3, -4}) {
    const double R = std::pow(2.0, 0.25 * k);
    CHECK(rayleigh(rescale(u, R), 0.3, *F) == doctest::Approx(rayleigh(u, 0.3, *F)).epsilon(1e-3));
  }
}

TEST_CASE("rearrangement does not raise the quotient") {
  const auto g = grid();
  const auto F = assemble_forms(g);
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> v(g->size());
    for (double& x : v) x = U(gen) < 0.3 ? U(gen) : 0.01 * U(gen);
    const RadialFunction u(g, v);
    const auto w = rearrange(u);
    CHECK(monotonicity_check(w).first_violation.value_or(g->size()) > 0);
    CHECK(rayleigh(w, 0.3, *F) <= rayleigh(u, 0.3, *F));
  }
}

TEST_CASE("ground state at lambda = 0 is a bubble") {
  const auto g = grid(6);
  const auto res = minimize_groundstate(0.0, g);
  CHECK(res.converged);
  for (std::size_t k = 1; k < res.history.size(); ++k) CHECK(res.history[k] <= res.history[k - 1]);
  CHECK(res.profile.values().front() > 0.0);
  for (double v : res.profile.values()) CHECK(v >= 0.0);
  double a = 0.0;
  CHECK(bubble_misfit(res.profile, a) <= 2e-2);
  CHECK(a > 1e-2);
  CHECK(a < 1e2);

  // sharp Sobolev quotient of the solution bubble A/(1+r²): (∫ u³)^{1/3},
  // with ∫_{R³} (1+r²)^{-3} = π²/4
  const double p = 2.0, A = std::pow(bubble_constant(3, 0.5), 1.0 / (p - 1.0));
  const double pi = std::acos(-1.0);
  const double beta = std::cbrt(A * A * A * pi * pi / 4.0);
  CHECK(res.beta == doctest::Approx(beta).epsilon(1e-2));
  const auto F = assemble_forms(g);
  const auto bub = RadialFunction::sample(g, [](double r) { return 1.0 / (1.0 + r * r); });
  CHECK(rayleigh(bub, 0.0, *F) == doctest::Approx(res.beta).epsilon(5e-2));
  CHECK(rayleigh(bub, 0.0, *F) >= res.beta);

  // the Lagrange scale maps the minimiser onto a solution
  CHECK(res.el_residual <= 1e-2);
  CHECK(res.monotone);
  const auto P = FracParams::critical(3, 0.5);
  const auto exact = RadialFunction::sample(g, [&](double r) { return A / (1.0 + r * r); }).with_tail({A, -2.0});
  CHECK(verify_solution(exact, P).relative_l2 <= 1e-2);
}

TEST_CASE("ground states for positive lambda") {
  const int n = 3;
  const double s = 0.5, L = hardy_constant(n, s);
  const auto g = grid(6);
  double prev = 1e300;
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> U(-3.0, 3.0), V(0.1, 0.9);
  for (double f : {0.0, 0.2, 0.4, 0.6, 0.8}) {
    CAPTURE(f);
    const auto res = minimize_groundstate(f * L, g);
    CHECK(res.beta > 0.0);
    CHECK(res.beta < prev);
    prev = res.beta;
    for (std::size_t k = 1; k < res.history.size(); ++k) CHECK(res.history[k] <= res.history[k - 1]);
    if (f > 0.7) continue;
    CHECK(res.converged);
    CHECK(res.monotone);
    CHECK(res.el_residual <= 1e-2);
    const auto ev = radial_evaluator(res.profile);
    for (int k = 0; k < 5; ++k) {
      const Point x0{U(gen), U(gen), U(gen)};
      const double c = std::sqrt(x0[0] * x0[0] + x0[1] * x0[1] + x0[2] * x0[2]);
      const SpherePair sp(x0, c * V(gen));
      const auto rep = moving_sphere_check(ev, sp, s, moving_sphere_samples(sp, 300, 50.0, k));
      CHECK(rep.worst <= 1e-10 * res.profile.max_abs());
    }
  }
  CHECK_THROWS_AS(minimize_groundstate(-0.1, g), DomainError);
  CHECK_THROWS_AS(minimize_groundstate(L, g), DomainError);
}

TEST_CASE("0.3 Lambda end to end") {
  const auto g = grid(6);
  const double lam = 0.3 * hardy_constant(3, 0.5);
  const auto res = minimize_groundstate(lam, g);
  CHECK(res.converged);
  CHECK(res.el_residual <= 1e-2);
  CHECK(res.monotone);
  const auto v = verify_solution(res.profile, FracParams::critical(3, 0.5, lam));
  CHECK(v.relative_l2 == doctest::Approx(res.el_residual));
  CHECK(v.count > 10);
  // the Lagrange scale is β^{1/(p-1)} with p = 2
  CHECK(res.lagrange_scale == doctest::Approx(res.beta));
}

TEST_CASE("residual of non-solutions") {
  const auto g = grid();
  const auto P = FracParams::critical(3, 0.5);
  const auto zero = RadialFunction::sample(g, [](double) { return 0.0; });
  const auto z = verify_solution(zero, P);
  CHECK(z.max == 0.0);
  CHECK(z.relative_l2 == 0.0);
  // the bubble with the wrong amplitude
  const auto wrong = RadialFunction::sample(g, [](double r) { return 1.0 / (1.0 + r * r); }).with_tail({1.0, -2.0});
  CHECK(verify_solution(wrong, P).relative_l2 > 0.1);
}

TEST_CASE("monotonicity check") {
  const auto g = grid();
  CHECK(monotonicity_check(RadialFunction::sample(g, [](double r) { return 1.0 / (1.0 + r * r); })).monotone);
  const auto c = monotonicity_check(RadialFunction::sample(g, [](double) { return 2.0; }));
  CHECK_FALSE(c.monotone);
  REQUIRE(c.first_violation.has_value());
  CHECK(*c.first_violation == 1);
  const auto bump = monotonicity_check(RadialFunction::sample(g, [](double r) { return std::exp(-(r - 1) * (r - 1)); }));
  CHECK_FALSE(bump.monotone);
  CHECK(g->nodes()[*bump.first_violation] < 1.0);
  // exact zeros beyond the support are not violations
  CHECK(monotonicity_check(RadialFunction::sample(g, [](double r) { return r < 10 ? 10.0 - r : 0.0; })).monotone);
}

TEST_CASE("indefiniteness beyond the Hardy constant") {
  const int n = 3;
  const double s = 0.5, L = hardy_constant(n, s);
  const auto wide = RadialGrid::geometric(n, s, 1e-10, 1e10, 3);
  const auto a = indefiniteness_probe(1.05 * L, wide);
  CHECK(a.found);
  CHECK(a.form < 0.0);
  CHECK(a.epsilon < 1e-3);
  const auto b = indefiniteness_probe(2.0 * L, wide);
  CHECK(b.found);
  CHECK(b.epsilon > a.epsilon);
  const auto c = indefiniteness_probe(0.5 * L, wide);
  CHECK_FALSE(c.found);
  CHECK(c.min_form > 0.0);
  // the Hardy quotient of the family decreases toward Λ
  for (std::size_t k = 1; k < c.scan.size(); ++k) {
    CHECK(c.scan[k].second < c.scan[k - 1].second);
    CHECK(c.scan[k].second > L);
  }
  CHECK_THROWS_AS(indefiniteness_probe(2.0 * L, RadialGrid::geometric(n, s, 0.5, 2.0, 4)), DomainError);
}
