// End-to-end acceptance run: one line per criterion, nonzero exit if any fails.
// `acceptance 3 7` runs a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fraclab/constants.hpp"
#include "fraclab/extension.hpp"
#include "fraclab/forms.hpp"
#include "fraclab/fraclap.hpp"
#include "fraclab/groundstate.hpp"
#include "fraclab/kelvin.hpp"
#include "fraclab/pohozaev.hpp"
#include "fraclab/sphere_eig.hpp"

using namespace fraclab;

namespace {

const double pi = std::acos(-1.0);

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!ok || detail.size() < 400) detail += (detail.empty() ? "" : "; ") + what + (ok ? "" : " [FAILED]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Λ from the gamma function of the C library, independent of the module.
double hardy_oracle(int n, double s) {
  const double a = std::tgamma(0.25 * (n + 2.0 * s)), b = std::tgamma(0.25 * (n - 2.0 * s));
  return std::pow(2.0, 2.0 * s) * a * a / (b * b);
}

double norm(std::span<const double> x) {
  double a = 0.0;
  for (double v : x) a += v * v;
  return std::sqrt(a);
}

Point cube_point(std::mt19937_64& g, int n, double h) {
  std::uniform_real_distribution<double> U(-h, h);
  Point x(static_cast<std::size_t>(n));
  for (double& v : x) v = U(g);
  return x;
}

double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

// ------------------------------------------------------------------ 1

Outcome constants() {
  Outcome o;
  const double e = std::fabs(hardy_constant(3, 0.5) - 2.0 / pi);
  o.require(e <= 1e-12, "|Lambda(3,1/2) - 2/pi| = " + fmt("%.2e", e));
  for (int n : {3, 4, 5}) {
    const double classical = 0.25 * (n - 2.0) * (n - 2.0);
    const double r = std::fabs(hardy_constant(n, 0.999) / classical - 1.0);
    o.require(r <= 1e-2, "n=" + std::to_string(n) + " s=0.999 vs (n-2)^2/4: " + fmt("%.2e", r));
  }
  return o;
}

// ------------------------------------------------------------------ 2

Outcome operator_cross_validation() {
  Outcome o;
  const std::vector<std::pair<std::string, std::function<double(double)>>> fns = {
      {"gaussian", [](double x) { return std::exp(-x * x); }},
      {"sech2", [](double x) { const double c = std::cosh(x); return 1.0 / (c * c); }},
      {"poly_gaussian", [](double x) { return (1.0 + x * x) * std::exp(-x * x); }},
      {"cos_gaussian", [](double x) { return std::cos(2.0 * x) * std::exp(-0.5 * x * x); }},
      {"quartic_exp", [](double x) { return std::exp(-x * x * x * x); }}};
  const PeriodicGrid pg{1, 160.0, 16384};
  for (double s : {0.25, 0.5, 0.75}) {
    double worst = 0.0;
    for (const auto& [name, f] : fns) {
      std::vector<double> v(pg.total());
      for (int j = 0; j < pg.points; ++j) v[static_cast<std::size_t>(j)] = f(pg.coord(j));
      const auto sp = fraclap_spectral(v, pg, s);
      // 16 nodes per octave: one refinement of the 8-per-octave level
      const auto u = RadialFunction::sample(RadialGrid::geometric(1, s, 1e-4, 30.0, 16), f);
      double err = 0.0, scale = 0.0;
      for (int j = pg.points / 2 + 1; pg.coord(j) < 3.0; j += 7) {
        const double ref = sp.values[static_cast<std::size_t>(j)];
        err = std::max(err, std::fabs(fraclap_radial(u, pg.coord(j)).with_tail() - ref));
        scale = std::max(scale, std::fabs(ref));
      }
      worst = std::max(worst, err / scale);
    }
    o.require(worst <= 1e-3, "n=1 s=" + fmt("%.2f", s) + " radial vs FFT: " + fmt("%.2e", worst));
  }
  // n = 3: |x|^{-(n-2s)/2} is mapped to Λ |x|^{-(n+2s)/2}
  for (double s : {0.25, 0.5, 0.75}) {
    const int n = 3;
    const double a = -0.5 * (n - 2.0 * s), L = hardy_oracle(n, s);
    const auto u = RadialFunction::sample(RadialGrid::geometric(n, s, 1e-6, 1e6, 16),
                                          [&](double x) { return std::pow(x, a); });
    FraclapOptions fo;
    fo.allow_truncation = true;
    double worst = 0.0;
    for (double x = 1e-2; x <= 1e2; x *= 2.0) {
      const double want = L * std::pow(x, a - 2.0 * s);
      worst = std::max(worst, std::fabs(fraclap_radial(u, x, fo).with_tail() / want - 1.0));
    }
    o.require(worst <= 1e-3, "n=3 s=" + fmt("%.2f", s) + " power law vs Lambda: " + fmt("%.2e", worst));
  }
  return o;
}

// ------------------------------------------------------------------ 3

Outcome hardy_sharpness() {
  Outcome o;
  for (auto [n, s] : std::vector<std::pair<int, double>>{{3, 0.5}, {4, 0.75}}) {
    const double L = hardy_oracle(n, s);
    // fixed density, range doubling with the node count
    double prev = 1e300, last = 0.0;
    for (int M : {250, 500, 1000}) {
      const double half = 0.5 * (M - 1) / 16.0;
      const auto g = RadialGrid::geometric(n, s, std::pow(2.0, -half), std::pow(2.0, half), 16);
      const double q = min_hardy_quotient(*assemble_forms(g)).value / L;
      o.require(std::fabs(q - 1.0) < prev, "(" + std::to_string(n) + "," + fmt("%.2f", s) + ") " +
                                               std::to_string(g->size()) + " nodes: " + fmt("%.5f", q) + " Lambda");
      prev = std::fabs(q - 1.0);
      last = q;
    }
    o.require(last >= 1.0 - 2e-2 && last <= 1.0 + 5e-2, "1000-node quotient inside [0.98, 1.05] Lambda");
  }
  return o;
}

// ------------------------------------------------------------------ 4

Outcome extension_consistency() {
  Outcome o;
  for (auto [n, s] : std::vector<std::pair<int, double>>{{3, 0.5}, {2, 0.3}}) {
    const auto rg = RadialGrid::geometric(n, s, 1e-3, 60.0, 8);
    const auto g = HalfStripGrid::graded(rg, 1e-4, 60.0, 64);
    const auto forms = assemble_forms(rg);
    const double kap = kappa_s(s);
    for (auto f : std::vector<std::function<double(double)>>{
             [](double r) { return std::exp(-r * r); },
             [](double r) { return std::exp(-0.5 * r * r) * (1.0 + r * r); },
             [](double r) { return 1.0 / std::pow(1.0 + r * r, 2.0); }}) {
      const auto u = RadialFunction::sample(rg, f);
      const auto U = poisson_extend(u, g);
      const auto F = weighted_flux(U);
      std::vector<double> got, want;
      for (std::size_t i = 0; i < rg->size(); ++i) {
        const double r = (*rg)[i];
        if (r < 1e-2 || r > 10.0) continue;
        got.push_back(F.flux.value(i));
        want.push_back(kap * fraclap_radial(u, r).with_tail());
      }
      const double e = rel_l2(got, want);
      // energy carries κ_s to the first power
      const double ratio = extension_energy(U) / forms->energy(u.values()) / kap;
      o.require(e <= 1e-2, "flux " + fmt("%.1e", e));
      o.require(std::fabs(ratio - 1.0) <= 1e-2, "energy/(kappa [u]^2) - 1 = " + fmt("%.1e", ratio - 1.0));
    }
  }
  return o;
}

// ------------------------------------------------------------------ 5

Outcome steklov() {
  Outcome o;
  const auto forms = assemble_angular(3, 0.5, AngularMesh::graded(2000, 0.5));
  const double L = 2.0 / pi;
  for (double lam : {0.0, 0.5 * L}) {
    const auto res = solve_mu1(lam, forms);
    const double e = std::fabs(res.mu1 - (L - lam)) / L;
    o.require(e <= 1e-3 && res.mesh->size() >= 2000, "lambda=" + fmt("%.4f", lam) + ": " + fmt("%.1e", e));
  }
  return o;
}

// ------------------------------------------------------------------ 6

Outcome pohozaev() {
  Outcome o;
  const int n = 3;
  const double s = 0.5;
  const auto P = FracParams::critical(n, s);
  // solution bubble A (1+r²)^{-1}, A = c_b^{1/(p-1)}, p = 2
  const double A = bubble_constant(n, s);
  double prev_p = 1e300, prev_e = 1e300;
  for (double npo : {4.0, 8.0, 16.0}) {
    const auto rg = RadialGrid::geometric(n, s, 1e-3, 20.0, npo);
    const auto g = HalfStripGrid::graded(rg, 1e-4, 20.0, static_cast<std::size_t>(8 * npo));
    const auto u = RadialFunction::sample(rg, [&](double r) { return A / (1.0 + r * r); }).with_tail({A, -2.0});
    const auto U = poisson_extend(u, g);
    double mp = 0.0, me = 0.0;
    for (double r : {2.0, 4.0, 8.0}) {
      mp = std::max(mp, pohozaev_terms(U, P, r).relative_residual);
      me = std::max(me, energy_identity(U, P, r).relative_residual);
    }
    o.require(mp <= 5e-2 && mp < prev_p, "npo " + fmt("%g", npo) + " Pohozaev " + fmt("%.1e", mp));
    o.require(me <= 5e-2 && me < prev_e, "energy " + fmt("%.1e", me));
    prev_p = mp;
    prev_e = me;
  }
  return o;
}

// ------------------------------------------------------------------ 7

Outcome ground_state() {
  Outcome o;
  const int n = 3;
  const double s = 0.5, L = hardy_oracle(n, s);
  const auto g = RadialGrid::geometric(n, s, 1e-3, 1e3, 6);
  const auto res = minimize_groundstate(0.3 * L, g);
  o.require(res.converged, "converged in " + std::to_string(res.iterations) + " iterations");
  o.require(res.el_residual <= 1e-2, "EL residual " + fmt("%.1e", res.el_residual));
  o.require(res.monotone, "strictly decreasing");
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> V(0.1, 0.9);
  const auto ev = radial_evaluator(res.profile);
  double worst = -1e300;
  for (int k = 0; k < 5; ++k) {
    Point x0 = cube_point(gen, n, 3.0);
    while (norm(x0) < 0.1) x0 = cube_point(gen, n, 3.0);
    const SpherePair sp(x0, norm(x0) * V(gen));
    worst = std::max(worst, moving_sphere_check(ev, sp, s, moving_sphere_samples(sp, 300, 50.0, gen())).worst);
  }
  o.require(worst <= 1e-10 * res.profile.max_abs(), "moving sphere max excess " + fmt("%.1e", worst));
  double prev = 1e300;
  bool dec = true;
  std::string betas;
  for (double f : {0.0, 0.2, 0.4, 0.6, 0.8}) {
    const double b = minimize_groundstate(f * L, g).beta;
    dec = dec && b < prev;
    prev = b;
    betas += (betas.empty() ? "" : " ") + fmt("%.4f", b);
  }
  o.require(dec, "beta strictly decreasing: " + betas);
  return o;
}

// ------------------------------------------------------------------ 8

Outcome nonexistence() {
  Outcome o;
  const int n = 3;
  const double s = 0.5, L = hardy_oracle(n, s);
  const auto wide = RadialGrid::geometric(n, s, 1e-10, 1e10, 3);
  for (double f : {1.05, 2.0}) {
    const auto p = indefiniteness_probe(f * L, wide);
    o.require(p.found && p.form < 0.0, fmt("%.2f", f) + " Lambda: witness at eps " + fmt("%.1e", p.epsilon));
  }
  const auto p = indefiniteness_probe(0.5 * L, wide);
  o.require(!p.found, "0.50 Lambda: no witness, min form " + fmt("%.1e", p.min_form));
  return o;
}

// ------------------------------------------------------------------ 9

Outcome kelvin() {
  Outcome o;
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (auto [n, s] : std::vector<std::pair<int, double>>{{3, 0.5}, {2, 0.3}, {4, 0.75}}) {
    const std::string tag = "(" + std::to_string(n) + "," + fmt("%.2f", s) + ") ";
    const SpherePair sp0(cube_point(gen, n, 2.0), 0.3 + U(gen));
    double inv = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const Point x = cube_point(gen, n, 4.0);
      const Point z = invert_point(invert_point(x, sp0), sp0);
      for (std::size_t i = 0; i < x.size(); ++i) inv = std::max(inv, std::fabs(z[i] - x[i]) / std::max(1.0, norm(x)));
    }
    o.require(inv <= 1e-12, tag + "involution " + fmt("%.1e", inv));
    const double pc = (n + 2.0 * s) / (n - 2.0 * s);
    o.require(conformal_exponent(n, s, pc) == 0.0 || std::fabs(conformal_exponent(n, s, pc)) <= 1e-13,
              tag + "conformal exponent at critical p");

    // x0 + d·e: inside the ball for d < rho, outside up to the origin's distance
    std::size_t counts[2] = {0, 0}, bad = 0;
    while (counts[0] < 10000 || counts[1] < 10000) {
      const Point x0 = cube_point(gen, n, 3.0);
      const double c = norm(x0);
      if (c < 0.1) continue;
      const SpherePair sp(x0, c * (0.05 + 0.9 * U(gen)));
      Point e = cube_point(gen, n, 1.0);
      const double en = norm(e);
      if (en < 1e-3) continue;
      const int region = counts[0] <= counts[1] ? 0 : 1;
      const double d = region == 0 ? sp.rho * U(gen) : sp.rho + (c - sp.rho) * U(gen);
      Point x(x0);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += d * e[i] / en;
      if (d == 0.0 || norm(x) < 1e-9) continue;
      const auto m = inversion_inequality(x, sp, s);
      if (m.expected == 0) continue;
      const int got_region = m.expected == 1 ? 0 : 1;
      counts[got_region] += 1;
      // independent sign: (rho/|x-x0|)^{4s} |x*|^{-2s} against |x|^{-2s}
      const Point xs = invert_point(x, sp);
      const double lhs = std::pow(sp.rho / sp.dist(x), 4.0 * s) * std::pow(norm(xs), -2.0 * s);
      const double rhs = std::pow(norm(x), -2.0 * s);
      const bool sign_ok = got_region == 0 ? lhs >= rhs * (1.0 - 1e-12) : lhs <= rhs * (1.0 + 1e-12);
      bad += !m.holds || !sign_ok;
    }
    o.require(bad == 0, tag + std::to_string(bad) + " sign violations in 2x10^4 samples");

    const double mexp = n - 2.0 * s;
    PointFunction bubble = [mexp](std::span<const double> x) { return std::pow(1.0 + norm(x) * norm(x), -0.5 * mexp); };
    const auto kb = kelvin_boundary(bubble, SpherePair(Point(static_cast<std::size_t>(n), 0.0), 1.0), s);
    double fix = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const Point x = cube_point(gen, n, 5.0);
      if (norm(x) < 1e-6) continue;
      fix = std::max(fix, std::fabs(kb(x) / bubble(x) - 1.0));
    }
    o.require(fix <= 1e-12, tag + "bubble fixed point " + fmt("%.1e", fix));
  }
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget;  // seconds
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "constants", 1.0, constants},
      {2, "operator cross-validation", 60.0, operator_cross_validation},
      {3, "Hardy sharpness", 120.0, hardy_sharpness},
      {4, "extension consistency", 120.0, extension_consistency},
      {5, "Steklov identity", 60.0, steklov},
      {6, "Pohozaev and energy identities", 300.0, pohozaev},
      {7, "ground state", 600.0, ground_state},
      {8, "indefiniteness beyond Lambda", 60.0, nonexistence},
      {9, "Kelvin suite", 30.0, kelvin},
  };
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!pick.empty() && !pick.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(dt <= c.budget, fmt("%.2f s", dt) + " of " + fmt("%g s", c.budget));
    std::printf("criterion %d %s: %s (%s)\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
