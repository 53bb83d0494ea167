#include <cmath>

#include "doctest.h"
#include "fraclab/pohozaev.hpp"

using namespace fraclab;

namespace {

StripPtr strip(int n, double s, double npo) {
  auto rg = RadialGrid::geometric(n, s, 1e-3, 20.0, npo);
  return HalfStripGrid::graded(rg, 1e-4, 20.0, static_cast<std::size_t>(8 * npo));
}

// Poisson extension of c_b^{1/(p-1)} (1+r²)^{-(n-2s)/2}, which solves the
// critical equation with λ = 0.
ExtensionField bubble_extension(int n, double s, double npo) {
  const auto g = strip(n, s, npo);
  const double p = (n + 2 * s) / (n - 2 * s), m = n - 2 * s;
  const double A = std::pow(bubble_constant(n, s), 1.0 / (p - 1.0));
  auto u = RadialFunction::sample(g->radial_ptr(), [&](double r) { return A * std::pow(1 + r * r, -m / 2); })
               .with_tail({A, -m});
  return poisson_extend(u, g);
}

}  // namespace

TEST_CASE("left-side coefficients vanish in the critical case") {
  for (auto [n, s] : {std::pair{3, 0.5}, {2, 0.3}, {4, 0.9}, {1, 0.25}}) {
    const auto c = classify_nonexistence(FracParams::critical(n, s, 0.7));
    CHECK(c.which == 0);
    CHECK(std::fabs(c.hardy_coefficient) < 1e-14);
    CHECK(std::fabs(c.power_coefficient) < 1e-14);
  }
}

TEST_CASE("nonexistence cases") {
  // n = 3, s = 1/2: critical power 2
  const auto c1 = classify_nonexistence(FracParams(3, 0.5, 1.0, 0.5, 1.5));
  CHECK(c1.which == 1);
  CHECK(c1.hardy_coefficient > 0.0);
  CHECK(c1.power_coefficient > 0.0);
  // the critical power with α < 2s falls under case 3, not case 1
  const auto c3 = classify_nonexistence(FracParams(3, 0.5, 1.0, 0.5, 2.0));
  CHECK(c3.which == 3);
  CHECK(c3.power_coefficient == doctest::Approx(0.0));
  const auto c2 = classify_nonexistence(FracParams(3, 0.5, 1.0, 1.0, 1.5));
  CHECK(c2.which == 2);
  CHECK(c2.hardy_coefficient == 0.0);
  CHECK(c2.power_coefficient > 0.0);
  const auto neg = classify_nonexistence(FracParams(3, 0.5, -1.0, 0.5, 1.5));
  CHECK(neg.which == 0);
  CHECK(neg.hardy_coefficient < 0.0);
}

TEST_CASE("Pohozaev and energy identities for the bubble") {
  for (double s : {0.5, 0.3}) {
    CAPTURE(s);
    const int n = 3;
    const auto P = FracParams::critical(n, s);
    double prev_poh = 1.0, prev_en = 1.0;
    for (double npo : {4.0, 8.0}) {
      const auto U = bubble_extension(n, s, npo);
      double poh = 0.0, en = 0.0;
      for (double r : {2.0, 4.0, 8.0}) {
        const auto rep = pohozaev_terms(U, P, r);
        CHECK(rep.lhs_hardy == 0.0);
        CHECK(std::fabs(rep.lhs_power) < 1e-12);
        CHECK(rep.residual == rep.lhs() - rep.rhs());
        CHECK(rep.sphere_gradient > 0.0);
        CHECK(rep.boundary_power < 0.0);
        poh = std::max(poh, rep.relative_residual);
        const auto e = energy_identity(U, P, r);
        CHECK(e.bulk > 0.0);
        en = std::max(en, e.relative_residual);
      }
      CHECK(poh < 5e-2);
      CHECK(en < 5e-2);
      CHECK(poh < prev_poh);
      CHECK(en < prev_en);
      prev_poh = poh;
      prev_en = en;
    }
  }
}

TEST_CASE("non-solutions fail the identities") {
  const int n = 3;
  const double s = 0.5;
  const auto P = FracParams::critical(n, s);
  const auto g = strip(n, s, 6);
  auto w = RadialFunction::sample(g->radial_ptr(), [](double r) { return std::exp(-r * r); });
  const auto W = poisson_extend(w, g);
  CHECK(pohozaev_terms(W, P, 2.0).relative_residual > 0.05);
  CHECK(energy_identity(W, P, 2.0).relative_residual > 0.05);

  // scaling a solution breaks the energy identity through the power term
  auto U = bubble_extension(n, s, 6);
  const double base = energy_identity(U, P, 4.0).relative_residual;
  U.values *= 2.0;
  for (double& v : U.trace) v *= 2.0;
  const auto e2 = energy_identity(U, P, 4.0);
  CHECK(e2.relative_residual > 100.0 * base);

  auto Z = sample_field(g, [](double, double) { return 0.0; });
  const auto z = energy_identity(Z, P, 2.0);
  CHECK(z.bulk == 0.0);
  CHECK(z.residual == 0.0);
  CHECK(z.relative_residual == 0.0);
  CHECK(pohozaev_terms(Z, P, 2.0).relative_residual == 0.0);

  CHECK_THROWS_AS(pohozaev_terms(W, P, 12.0), DomainError);
  CHECK_THROWS_AS(pohozaev_terms(W, FracParams::critical(2, s), 2.0), DomainError);
}
