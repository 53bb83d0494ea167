#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "fraclab/constants.hpp"
#include "fraclab/extension.hpp"
#include "fraclab/forms.hpp"
#include "fraclab/fraclap.hpp"
#include "fraclab/groundstate.hpp"
#include "fraclab/io.hpp"
#include "fraclab/kelvin.hpp"
#include "fraclab/pohozaev.hpp"
#include "fraclab/sphere_eig.hpp"

namespace fraclab::cli {

namespace fs = std::filesystem;

const std::vector<std::string> commands = {"constants", "fraclap-validate", "extension-validate", "kelvin-check",
                                           "pohozaev",  "groundstate",      "eig",                "sweep"};

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void Report::check_le(const std::string& name, double value, double threshold) {
  checks.push_back({name, value, threshold, std::isfinite(value) && value <= threshold});
}

void Report::check_true(const std::string& name, bool ok) { checks.push_back({name, ok ? 1.0 : 0.0, 1.0, ok}); }

json default_config() {
  return {
      {"params", {{"n", nullptr}, {"s", nullptr}, {"lambda", 0.0}, {"alpha", nullptr}, {"p", nullptr}}},
      {"grid",
       {{"r_min", 1e-3},
        {"r_max", 1e3},
        {"nodes_per_octave", 6.0},
        {"t_min", 1e-4},
        {"t_max", 20.0},
        {"angular_elements", 2000}}},
      {"solver",
       {{"tol", 1e-10},
        {"max_iter", 4000},
        {"step", 1.0},
        {"rearrange_every", 10},
        {"sphere_order", 24},
        {"check_tolerance", 1e-2}}},
      {"spectral", {{"half_width", 160.0}, {"points", 16384}}},
      {"pohozaev", {{"radii", {2.0, 4.0, 8.0}}, {"levels", {4.0, 8.0, 16.0}}}},
      {"kelvin", {{"samples", 10000}}},
      {"sweep", {{"command", nullptr}, {"key", nullptr}, {"values", json::array()}, {"workers", 1}}},
      {"out", "fraclab_out"},
      {"seed", 1},
      {"verbose", 0},
  };
}

namespace {

// ---------------------------------------------------------------- config

bool is_number(const json& j) { return j.is_number(); }

void merge(const json& def, const json& user, json& out, const std::string& path, std::vector<std::string>& errors) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!def.contains(it.key())) {
      errors.push_back("unknown key '" + key + "'");
      continue;
    }
    const json& d = def.at(it.key());
    const json& u = it.value();
    if (d.is_object()) {
      if (!u.is_object()) {
        errors.push_back("'" + key + "' must be an object");
        continue;
      }
      merge(d, u, out[it.key()], key, errors);
    } else if (d.is_null()) {
      // derived or required keys: numbers, strings or null
      if (!(u.is_null() || is_number(u) || u.is_string())) errors.push_back("'" + key + "' has the wrong type");
      else out[it.key()] = u;
    } else if (is_number(d)) {
      if (!is_number(u)) errors.push_back("'" + key + "' must be a number");
      else out[it.key()] = u;
    } else if (d.type() != u.type()) {
      errors.push_back("'" + key + "' has the wrong type");
    } else {
      out[it.key()] = u;
    }
  }
}

double num(const json& cfg, const char* a, const char* b) { return cfg.at(a).at(b).get<double>(); }
int integer(const json& cfg, const char* a, const char* b) { return cfg.at(a).at(b).get<int>(); }

FracParams params_of(const json& cfg) {
  const auto& p = cfg.at("params");
  const int n = p.at("n").get<int>();
  const double s = p.at("s").get<double>();
  const double lam = p.at("lambda").get<double>();
  const double alpha = p.at("alpha").is_null() ? 2.0 * s : p.at("alpha").get<double>();
  const double pw = p.at("p").is_null() ? (n + 2.0 * s) / (n - 2.0 * s) : p.at("p").get<double>();
  return {n, s, lam, alpha, pw};
}

void log(int verbose, int level, const std::string& msg) {
  static std::mutex mu;
  if (verbose < level) return;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[fraclab] " << msg << '\n';
}

GridPtr radial_grid(const json& cfg, int n, double s, double npo) {
  return RadialGrid::geometric(n, s, num(cfg, "grid", "r_min"), num(cfg, "grid", "r_max"), npo);
}

double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double num2 = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num2 += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den > 0.0 ? std::sqrt(num2 / den) : std::sqrt(num2);
}

double norm(std::span<const double> x) {
  double a = 0.0;
  for (double v : x) a += v * v;
  return std::sqrt(a);
}

// Random point uniformly in the cube [-h, h]^n.
Point cube_point(std::mt19937_64& g, int n, double h) {
  std::uniform_real_distribution<double> U(-h, h);
  Point x(static_cast<std::size_t>(n));
  for (double& v : x) v = U(g);
  return x;
}

RadialFunction solution_bubble(const GridPtr& g) {
  const int n = g->dim();
  const double s = g->order();
  const double p = (n + 2.0 * s) / (n - 2.0 * s), m = n - 2.0 * s;
  const double A = std::pow(bubble_constant(n, s), 1.0 / (p - 1.0));
  return RadialFunction::sample(g, [&](double r) { return A * std::pow(1.0 + r * r, -0.5 * m); }).with_tail({A, -m});
}

// ---------------------------------------------------------------- commands

Report cmd_constants(const json& cfg, int) {
  const auto P = params_of(cfg);
  const int n = P.n();
  const double s = P.s();
  Report r;
  const double closed = poisson_normalizer_closed(n, s), quad = poisson_normalizer_quadrature(n, s);
  r.results = {{"hardy_constant", hardy_constant(n, s)},
               {"kappa_s", kappa_s(s)},
               {"gagliardo_constant", gagliardo_constant(n, s)},
               {"fraclap_constant", fraclap_constant(n, s)},
               {"poisson_normalizer", poisson_normalizer(n, s)},
               {"poisson_normalizer_closed", closed},
               {"poisson_normalizer_quadrature", quad},
               {"bubble_constant", bubble_constant(n, s)},
               {"critical_exponent", P.critical_exponent()},
               {"critical_power", P.critical_power()}};
  r.check_le("poisson_normalizer_closed_vs_quadrature", std::fabs(closed - quad) / closed, 1e-8);
  r.check_true("hardy_constant_positive", hardy_constant(n, s) > 0.0);
  return r;
}

Report cmd_fraclap_validate(const json& cfg, int verbose) {
  const auto P = params_of(cfg);
  const int n = P.n();
  const double s = P.s();
  // the FFT comparison needs at least 8 nodes per octave to reach 1e-3
  const double npo = std::max(8.0, num(cfg, "grid", "nodes_per_octave"));
  const double tol = 1e-3;
  Report r;
  std::ostringstream csv;
  csv << "case,level,r,value,reference,rel_error\n";
  json cases = json::array();

  using Fn = std::function<double(double)>;
  auto row = [&](const std::string& name, int level, double x, double v, double ref) {
    csv << name << ',' << level << ',' << io::format(x) << ',' << io::format(v) << ',' << io::format(ref) << ','
        << io::format(std::fabs(v - ref) / std::max(std::fabs(ref), 1e-300)) << '\n';
  };

  if (n == 1) {
    // radial route in R^1 against the periodic FFT route
    const std::vector<std::pair<std::string, Fn>> fns = {
        {"gaussian", [](double x) { return std::exp(-x * x); }},
        {"sech2", [](double x) { const double c = std::cosh(x); return 1.0 / (c * c); }},
        {"poly_gaussian", [](double x) { return (1.0 + x * x) * std::exp(-x * x); }},
        {"cos_gaussian", [](double x) { return std::cos(2.0 * x) * std::exp(-0.5 * x * x); }},
        {"quartic_exp", [](double x) { return std::exp(-x * x * x * x); }}};
    PeriodicGrid pg{1, num(cfg, "spectral", "half_width"), integer(cfg, "spectral", "points")};
    for (const auto& [name, f] : fns) {
      std::vector<double> v(pg.total());
      for (int j = 0; j < pg.points; ++j) v[static_cast<std::size_t>(j)] = f(pg.coord(j));
      const auto sp = fraclap_spectral(v, pg, s);
      double last = 0.0;
      for (int level = 0; level < 2; ++level) {
        auto g = RadialGrid::geometric(1, s, 1e-4, 30.0, npo * (1 << level));
        const auto u = RadialFunction::sample(g, f);
        std::vector<double> got, want;
        for (int j = pg.points / 2 + 1; pg.coord(j) < 3.0; j += std::max(1, pg.points / 1024)) {
          const double x = pg.coord(j);
          got.push_back(fraclap_radial(u, x).with_tail());
          want.push_back(sp.values[static_cast<std::size_t>(j)]);
          row(name, level, x, got.back(), want.back());
        }
        double scale = 0.0, worst = 0.0;
        for (std::size_t k = 0; k < got.size(); ++k) {
          scale = std::max(scale, std::fabs(want[k]));
          worst = std::max(worst, std::fabs(got[k] - want[k]));
        }
        last = worst / scale;
      }
      cases.push_back({{"case", name}, {"max_rel_error", last}, {"support_warning", sp.support_warning}});
      r.check_le("radial_vs_spectral_" + name, last, tol);
      log(verbose, 1, "fraclap-validate " + name + ": " + io::format(last));
    }
  } else {
    // Hardy-saturating power law: (-Δ)^s r^{-(n-2s)/2} = Λ r^{-(n+2s)/2}
    const double a = -0.5 * (n - 2.0 * s), L = hardy_constant(n, s);
    double last = 0.0;
    for (int level = 0; level < 2; ++level) {
      auto g = RadialGrid::geometric(n, s, 1e-6, 1e6, npo * (1 << level));
      const auto u = RadialFunction::sample(g, [&](double x) { return std::pow(x, a); });
      std::vector<double> got, want;
      for (double x = 1e-2; x <= 1e2; x *= 2.0) {
        FraclapOptions fo;
        fo.allow_truncation = true;
        got.push_back(fraclap_radial(u, x, fo).with_tail());
        want.push_back(L * std::pow(x, a - 2.0 * s));
        row("hardy_power_law", level, x, got.back(), want.back());
      }
      last = rel_l2(got, want);
    }
    cases.push_back({{"case", "hardy_power_law"}, {"rel_l2_error", last}});
    r.check_le("power_law_vs_hardy_constant", last, tol);
    // bubble identity with its closed-form constant
    for (int level = 0; level < 2; ++level) {
      auto g = RadialGrid::geometric(n, s, 1e-3, 1e3, npo * (1 << level));
      const double m = n - 2.0 * s;
      const auto u = RadialFunction::sample(g, [&](double x) { return std::pow(1.0 + x * x, -0.5 * m); })
                         .with_tail({1.0, -m});
      std::vector<double> got, want;
      for (double x = 1e-2; x <= 1e2; x *= 2.0) {
        got.push_back(fraclap_radial(u, x).with_tail());
        want.push_back(bubble_constant(n, s) * std::pow(1.0 + x * x, -0.5 * (n + 2.0 * s)));
        row("bubble", level, x, got.back(), want.back());
      }
      last = rel_l2(got, want);
    }
    cases.push_back({{"case", "bubble"}, {"rel_l2_error", last}});
    r.check_le("bubble_vs_closed_form", last, tol);
  }
  r.results = {{"cases", cases}};
  r.files["fraclap.csv"] = csv.str();
  return r;
}

Report cmd_extension_validate(const json& cfg, int verbose) {
  const auto P = params_of(cfg);
  const int n = P.n();
  const double s = P.s();
  // the energy ratio carries the O(h²) error of the assembled form: 8 nodes
  // per octave keep it inside 1e-2
  const double npo = std::max(8.0, num(cfg, "grid", "nodes_per_octave"));
  const double tol = num(cfg, "solver", "check_tolerance");
  auto rg = RadialGrid::geometric(n, s, 1e-3, 60.0, npo);
  auto g = HalfStripGrid::graded(rg, 1e-4, 60.0, static_cast<std::size_t>(8 * npo));
  const auto forms = assemble_forms(rg);
  const double kap = kappa_s(s);

  const std::vector<std::pair<std::string, std::function<double(double)>>> fns = {
      {"gaussian", [](double r) { return std::exp(-r * r); }},
      {"poly_gaussian", [](double r) { return std::exp(-0.5 * r * r) * (1.0 + r * r); }},
      {"rational", [](double r) { return 1.0 / std::pow(1.0 + r * r, 2.0); }}};
  Report rep;
  json cases = json::array();
  std::ostringstream csv;
  csv << "case,r,flux,kappa_fraclap\n";
  for (const auto& [name, f] : fns) {
    const auto u = RadialFunction::sample(rg, f);
    const auto U = poisson_extend(u, g);
    const auto F = weighted_flux(U);
    std::vector<double> got, want;
    std::size_t unreliable = 0;
    for (std::size_t i = 0; i < rg->size(); ++i) {
      const double r = (*rg)[i];
      if (r < 1e-2 || r > 10.0) continue;
      got.push_back(F.flux.value(i));
      want.push_back(kap * fraclap_radial(u, r).with_tail());
      unreliable += F.unreliable[i] != 0;
      csv << name << ',' << io::format(r) << ',' << io::format(got.back()) << ',' << io::format(want.back()) << '\n';
    }
    const double flux_err = rel_l2(got, want);
    const double ratio = extension_energy(U) / forms->energy(u.values());
    cases.push_back({{"case", name},
                     {"flux_rel_l2", flux_err},
                     {"energy_ratio", ratio},
                     {"unreliable_radii", unreliable},
                     {"truncation_flag", U.truncation_flag}});
    rep.check_le("flux_vs_kappa_fraclap_" + name, flux_err, tol);
    rep.check_le("energy_ratio_vs_kappa_" + name, std::fabs(ratio / kap - 1.0), tol);
    log(verbose, 1, "extension-validate " + name + ": flux " + io::format(flux_err));
  }
  rep.results = {{"kappa_s", kap}, {"kappa_power", 1}, {"cases", cases}};
  rep.files["extension.csv"] = csv.str();
  return rep;
}

Report cmd_kelvin_check(const json& cfg, int verbose) {
  const auto P = params_of(cfg);
  const int n = P.n();
  const double s = P.s();
  const auto per_region = static_cast<std::size_t>(integer(cfg, "kelvin", "samples"));
  std::mt19937_64 gen(cfg.at("seed").get<std::uint64_t>());
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Report rep;

  // involution of the point map and of the boundary transform
  const SpherePair sp0(cube_point(gen, n, 2.0), 0.3 + U(gen));
  double inv = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Point x = cube_point(gen, n, 4.0);
    if (sp0.dist(x) < 1e-6) continue;
    const Point z = invert_point(invert_point(x, sp0), sp0);
    for (int i = 0; i < n; ++i) inv = std::max(inv, std::fabs(z[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)]) / std::max(1.0, norm(x)));
  }
  rep.check_le("point_inversion_involution", inv, 1e-12);

  const double crit = conformal_exponent(n, s, P.critical_power());
  rep.check_le("conformal_exponent_at_critical_power", std::fabs(crit), 1e-12);

  // sign pattern of the inversion inequality: 10^4 samples per region
  std::size_t inner = 0, outer = 0, bad = 0;
  std::ostringstream csv;
  csv << "region,margin\n";
  while (inner < per_region || outer < per_region) {
    const Point x0 = cube_point(gen, n, 3.0);
    const double c = norm(x0);
    if (c < 0.1) continue;
    const double si = 0.05 + 0.9 * U(gen);
    const SpherePair sp(x0, c * (0.05 + 0.9 * U(gen)));
    Point dir = cube_point(gen, n, 1.0);
    const double dn = norm(dir);
    if (dn < 1e-3) continue;
    const bool want_inner = inner <= outer;
    if ((want_inner && inner >= per_region) || (!want_inner && outer >= per_region)) continue;
    const double d = want_inner ? sp.rho * U(gen) : sp.rho + (c - sp.rho) * U(gen);
    if (d == 0.0) continue;
    Point x(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x0[i] + d * dir[i] / dn;
    if (norm(x) < 1e-9) continue;
    const auto m = inversion_inequality(x, sp, si);
    if (m.expected == 0) continue;
    (m.expected == 1 ? inner : outer) += 1;
    bad += !m.holds;
    csv << (m.expected == 1 ? "inside" : "outside") << ',' << io::format(m.margin) << '\n';
  }
  rep.check_le("inversion_inequality_violations", static_cast<double>(bad), 0.0);

  // the bubble is its own transform in the unit sphere about the origin
  const double m = n - 2.0 * s;
  PointFunction bubble = [m](std::span<const double> x) { return std::pow(1.0 + norm(x) * norm(x), -0.5 * m); };
  const Point origin(static_cast<std::size_t>(n), 0.0);
  const auto kb = kelvin_boundary(bubble, SpherePair(origin, 1.0), s);
  double fix = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Point x = cube_point(gen, n, 5.0);
    if (norm(x) < 1e-6) continue;
    fix = std::max(fix, std::fabs(kb(x) - bubble(x)) / bubble(x));
  }
  rep.check_le("bubble_inversion_fixed_point", fix, 1e-12);

  // moving-sphere comparison for the bubble with rho < |x0|
  Point x0 = cube_point(gen, n, 2.0);
  while (norm(x0) < 0.2) x0 = cube_point(gen, n, 2.0);
  const SpherePair ms(x0, 0.5 * norm(x0));
  const auto rg = RadialGrid::geometric(n, s, 1e-3, 1e3, 16);
  const auto ub = solution_bubble(rg);
  const auto samples = moving_sphere_samples(ms, 1000, 20.0, cfg.at("seed").get<std::uint64_t>());
  const auto mv = moving_sphere_check(radial_evaluator(ub), ms, s, samples);
  rep.check_le("moving_sphere_bubble", mv.worst, 1e-10 * ub.max_abs());

  rep.results = {{"involution_error", inv},
                 {"conformal_exponent", crit},
                 {"inside_samples", inner},
                 {"outside_samples", outer},
                 {"violations", bad},
                 {"bubble_fixed_point_error", fix},
                 {"moving_sphere_worst", mv.worst}};
  rep.files["kelvin_margins.csv"] = csv.str();
  log(verbose, 1, "kelvin-check: " + std::to_string(bad) + " violations");
  return rep;
}

Report cmd_pohozaev(const json& cfg, int verbose) {
  const auto P = params_of(cfg);
  const int n = P.n();
  const double s = P.s();
  const auto nc = classify_nonexistence(P);
  Report rep;
  rep.results["classification"] = {{"case", nc.which},
                                   {"label", nc.label},
                                   {"explanation", nc.explanation},
                                   {"hardy_coefficient", nc.hardy_coefficient},
                                   {"power_coefficient", nc.power_coefficient}};
  const bool critical = std::fabs(P.p() - P.critical_power()) <= 1e-12 * P.critical_power() &&
                        std::fabs(P.alpha() - 2.0 * s) <= 1e-12;
  if (!critical || !(P.lambda() >= 0.0 && P.lambda() < hardy_constant(n, s))) {
    // no solution at hand to evaluate the identities on
    rep.results["identities"] = "skipped: identities need the critical problem with 0 <= lambda < Lambda";
    return rep;
  }
  const auto radii = cfg.at("pohozaev").at("radii").get<std::vector<double>>();
  const auto levels = cfg.at("pohozaev").at("levels").get<std::vector<double>>();
  const double tmax = num(cfg, "grid", "t_max");
  const double tol = num(cfg, "solver", "check_tolerance");
  if (P.lambda() > 0.0) {
    // the ground state, rescaled onto a solution, stands in for the bubble
    const double npo = num(cfg, "grid", "nodes_per_octave");
    const auto rg = radial_grid(cfg, n, s, npo);
    const auto gs = minimize_groundstate(P.lambda(), rg);
    auto g = HalfStripGrid::graded(rg, num(cfg, "grid", "t_min"), tmax, static_cast<std::size_t>(8 * npo));
    const auto U = poisson_extend(gs.profile, g);
    std::vector<PohozaevReport> rows;
    json ids = json::array();
    for (double r : radii) {
      rows.push_back(pohozaev_terms(U, P, r));
      const auto e = energy_identity(U, P, r);
      ids.push_back({{"r", r},
                     {"pohozaev_relative_residual", rows.back().relative_residual},
                     {"energy_relative_residual", e.relative_residual}});
      rep.check_le("pohozaev_r" + io::format(r), rows.back().relative_residual, tol);
      rep.check_le("energy_r" + io::format(r), e.relative_residual, tol);
    }
    rep.results["identities"] = ids;
    rep.results["el_residual"] = gs.el_residual;
    std::ostringstream csv;
    io::write_csv(csv, rows);
    rep.files["pohozaev.csv"] = csv.str();
    return rep;
  }
  std::ostringstream csv;
  csv << "level,r,lhs_hardy,lhs_power,sphere_gradient,sphere_normal,boundary_hardy,boundary_power,sphere_mixed,"
         "residual,relative_residual,energy_relative_residual\n";
  json lv = json::array();
  std::vector<double> poh_max, en_max;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const double npo = levels[k];
    auto rg = RadialGrid::geometric(n, s, 1e-3, tmax, npo);
    auto g = HalfStripGrid::graded(rg, 1e-4, tmax, static_cast<std::size_t>(8 * npo));
    const auto U = poisson_extend(solution_bubble(rg), g);
    double pm = 0.0, em = 0.0;
    for (double r : radii) {
      const auto t = pohozaev_terms(U, P, r);
      const auto e = energy_identity(U, P, r);
      pm = std::max(pm, t.relative_residual);
      em = std::max(em, e.relative_residual);
      std::ostringstream line;
      std::vector<PohozaevReport> one{t};
      io::write_csv(line, one);
      std::string body = line.str();
      body = body.substr(body.find('\n') + 1);
      body.pop_back();
      csv << k << ',' << body << ',' << io::format(e.relative_residual) << '\n';
      rep.check_le("pohozaev_level" + std::to_string(k) + "_r" + io::format(r), t.relative_residual, 5e-2);
      rep.check_le("energy_level" + std::to_string(k) + "_r" + io::format(r), e.relative_residual, 5e-2);
    }
    poh_max.push_back(pm);
    en_max.push_back(em);
    lv.push_back({{"nodes_per_octave", npo}, {"pohozaev_max_relative", pm}, {"energy_max_relative", em}});
    log(verbose, 1, "pohozaev level " + io::format(npo) + ": " + io::format(pm) + " / " + io::format(em));
  }
  for (std::size_t k = 1; k < poh_max.size(); ++k) {
    rep.check_true("pohozaev_decreases_level" + std::to_string(k), poh_max[k] < poh_max[k - 1]);
    rep.check_true("energy_decreases_level" + std::to_string(k), en_max[k] < en_max[k - 1]);
  }
  rep.results["levels"] = lv;
  rep.files["pohozaev.csv"] = csv.str();
  return rep;
}

Report cmd_groundstate(const json& cfg, int verbose) {
  const auto P = params_of(cfg);
  const int n = P.n();
  const double s = P.s();
  const auto g = radial_grid(cfg, n, s, num(cfg, "grid", "nodes_per_octave"));
  GroundStateOptions o;
  o.max_iter = integer(cfg, "solver", "max_iter");
  o.step = num(cfg, "solver", "step");
  o.tol = num(cfg, "solver", "tol");
  o.rearrange_every = integer(cfg, "solver", "rearrange_every");
  const auto res = minimize_groundstate(P.lambda(), g, o);
  const double tol = num(cfg, "solver", "check_tolerance");
  Report rep;
  rep.results = {{"lambda", res.lambda},
                 {"beta", res.beta},
                 {"iterations", res.iterations},
                 {"converged", res.converged},
                 {"el_residual", res.el_residual},
                 {"monotone", res.monotone},
                 {"lagrange_scale", res.lagrange_scale},
                 {"skipped_moves", res.log.size()}};
  rep.check_true("converged", res.converged);
  rep.check_le("el_residual", res.el_residual, tol);
  rep.check_true("strictly_decreasing", res.monotone);

  std::mt19937_64 gen(cfg.at("seed").get<std::uint64_t>());
  std::uniform_real_distribution<double> V(0.1, 0.9);
  const auto ev = radial_evaluator(res.profile);
  double worst = -1e300;
  for (int k = 0; k < 5; ++k) {
    Point x0 = cube_point(gen, n, 3.0);
    while (norm(x0) < 0.1) x0 = cube_point(gen, n, 3.0);
    const SpherePair sp(x0, norm(x0) * V(gen));
    const auto mv = moving_sphere_check(ev, sp, s, moving_sphere_samples(sp, 300, 50.0, gen()));
    worst = std::max(worst, mv.worst);
  }
  rep.results["moving_sphere_worst"] = worst;
  rep.check_le("moving_sphere", worst, 1e-10 * res.profile.max_abs());

  std::ostringstream prof, hist;
  io::write_csv(prof, res.profile);
  hist << "iteration,quotient\n";
  for (std::size_t k = 0; k < res.history.size(); ++k) hist << k << ',' << io::format(res.history[k]) << '\n';
  rep.files["profile.csv"] = prof.str();
  rep.files["history.csv"] = hist.str();
  log(verbose, 1, "groundstate beta " + io::format(res.beta) + " el " + io::format(res.el_residual));
  return rep;
}

Report cmd_eig(const json& cfg, int verbose) {
  const auto P = params_of(cfg);
  const int n = P.n();
  const double s = P.s();
  const auto K = static_cast<std::size_t>(integer(cfg, "grid", "angular_elements"));
  const auto forms = assemble_angular(n, s, AngularMesh::graded(K, s));
  const auto res = solve_mu1(P.lambda(), forms);
  const double L = hardy_constant(n, s);
  const double err = std::fabs(res.mu1 - (L - P.lambda())) / L;
  Report rep;
  rep.results = {{"n", n},
                 {"s", s},
                 {"lambda", P.lambda()},
                 {"mu1", res.mu1},
                 {"mesh_size", res.mesh->size()},
                 {"estimate", res.estimate},
                 {"hardy_constant", L},
                 {"relative_error", err}};
  rep.check_le("mu1_vs_hardy_minus_lambda", err, 1e-3);
  std::ostringstream csv;
  io::write_csv(csv, res);
  rep.files["psi1.csv"] = csv.str();
  log(verbose, 1, "eig mu1 " + io::format(res.mu1));
  return rep;
}

// Dotted path into the config ("params.lambda").
json& at_path(json& j, const std::string& path) {
  json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!cur->is_object() || !cur->contains(key)) throw ConfigError("sweep.key '" + path + "' is not a config key");
    cur = &(*cur)[key];
    if (dot == std::string::npos) return *cur;
    start = dot + 1;
  }
}

Report cmd_sweep(const json& cfg, int verbose, const fs::path& out) {
  const auto& sw = cfg.at("sweep");
  const std::string command = sw.at("command").get<std::string>();
  const std::string key = sw.at("key").get<std::string>();
  const auto& values = sw.at("values");
  const int workers = std::max(1, sw.at("workers").get<int>());

  std::vector<json> configs;
  for (const auto& v : values) {
    json c = cfg;
    at_path(c, key) = v;
    c["sweep"] = default_config()["sweep"];
    configs.push_back(c);
  }
  std::vector<int> codes(configs.size(), 0);
  std::vector<json> summaries(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < configs.size(); k = next++) {
      const fs::path dir = out / ("run_" + std::to_string(k));
      codes[k] = execute(command, configs[k], dir, verbose);
      std::ifstream f(dir / "summary.json");
      summaries[k] = json::parse(f, nullptr, false);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min<int>(workers, static_cast<int>(configs.size())); ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  Report rep;
  json runs = json::array();
  for (std::size_t k = 0; k < configs.size(); ++k) {
    runs.push_back({{"value", values[k]},
                    {"directory", "run_" + std::to_string(k)},
                    {"exit_code", codes[k]},
                    {"results", summaries[k].is_object() ? summaries[k].value("results", json::object()) : json()}});
    rep.check_true("run_" + std::to_string(k) + "_passed", codes[k] == 0);
  }
  if (command == "groundstate" && key == "params.lambda") {
    // β(λ) must decrease strictly along an increasing λ-grid
    std::vector<std::pair<double, double>> lb;
    for (const auto& r : runs)
      if (r["results"].is_object() && r["results"].contains("beta"))
        lb.emplace_back(r["value"].get<double>(), r["results"]["beta"].get<double>());
    std::sort(lb.begin(), lb.end());
    bool dec = lb.size() == runs.size();
    for (std::size_t k = 1; k < lb.size(); ++k) dec = dec && lb[k].second < lb[k - 1].second;
    rep.check_true("beta_strictly_decreasing", dec);
  }
  rep.results = {{"command", command}, {"key", key}, {"runs", runs}};
  return rep;
}

}  // namespace

json resolve_config(const json& user, const Overrides& ov) {
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  json def = default_config();
  json cfg = def;
  std::vector<std::string> errors;
  merge(def, user, cfg, "", errors);
  if (ov.n) cfg["params"]["n"] = *ov.n;
  if (ov.s) cfg["params"]["s"] = *ov.s;
  if (ov.lambda) cfg["params"]["lambda"] = *ov.lambda;
  if (ov.alpha) cfg["params"]["alpha"] = *ov.alpha;
  if (ov.p) cfg["params"]["p"] = *ov.p;
  if (ov.seed) cfg["seed"] = *ov.seed;
  if (ov.out) cfg["out"] = *ov.out;

  std::vector<std::string> missing;
  for (const char* k : {"n", "s"})
    if (cfg["params"][k].is_null()) missing.push_back(std::string("params.") + k);
  if (!missing.empty()) {
    std::string m = "missing config keys:";
    for (const auto& k : missing) m += " " + k;
    errors.push_back(m);
  }
  for (const char* k : {"n", "s", "alpha", "p"})
    if (cfg["params"][k].is_string()) errors.push_back(std::string("params.") + k + " must be a number");
  if (cfg["params"]["n"].is_number() && !cfg["params"]["n"].is_number_integer())
    errors.push_back("params.n must be an integer");
  for (const auto& [a, b] : {std::pair{"solver", "max_iter"}, {"solver", "rearrange_every"}, {"solver", "sphere_order"},
                             {"grid", "angular_elements"}, {"spectral", "points"}, {"kelvin", "samples"},
                             {"sweep", "workers"}, {"verbose", ""}}) {
    const auto& v = *b ? cfg[a][b] : cfg[a];
    if (v.is_number() && !v.is_number_integer()) errors.push_back(std::string(a) + (*b ? "." : "") + b + " must be an integer");
  }

  auto positive = [&](const char* a, const char* b) {
    const auto& v = cfg[a][b];
    if (v.is_number() && !(v.get<double>() > 0.0)) errors.push_back(std::string(a) + "." + b + " must be positive");
  };
  for (const char* k : {"r_min", "r_max", "nodes_per_octave", "t_min", "t_max", "angular_elements"}) positive("grid", k);
  for (const char* k : {"tol", "max_iter", "step", "sphere_order", "check_tolerance"}) positive("solver", k);
  positive("spectral", "half_width");
  positive("spectral", "points");
  positive("kelvin", "samples");
  if (!cfg["seed"].is_number_integer() || cfg["seed"].get<std::int64_t>() < 0) errors.push_back("seed must be a nonnegative integer");
  for (const char* k : {"radii", "levels"})
    for (const auto& v : cfg["pohozaev"][k])
      if (!v.is_number() || !(v.get<double>() > 0.0)) errors.push_back(std::string("pohozaev.") + k + " entries must be positive numbers");

  if (!errors.empty()) {
    std::string m;
    for (const auto& e : errors) m += (m.empty() ? "" : "; ") + e;
    throw ConfigError(m);
  }
  // parameter domain: n >= 1, 0 < s < 1, n > 2s
  try {
    (void)params_of(cfg);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid parameters: ") + e.what());
  }
  return cfg;
}

Report run_command(const std::string& command, const json& cfg, int verbose) {
  if (command == "constants") return cmd_constants(cfg, verbose);
  if (command == "fraclap-validate") return cmd_fraclap_validate(cfg, verbose);
  if (command == "extension-validate") return cmd_extension_validate(cfg, verbose);
  if (command == "kelvin-check") return cmd_kelvin_check(cfg, verbose);
  if (command == "pohozaev") return cmd_pohozaev(cfg, verbose);
  if (command == "groundstate") return cmd_groundstate(cfg, verbose);
  if (command == "eig") return cmd_eig(cfg, verbose);
  throw ConfigError("unknown command '" + command + "'");
}

int execute(const std::string& command, const json& cfg, const fs::path& out, int verbose) {
  if (command == "sweep") {
    const auto& sw = cfg.at("sweep");
    std::vector<std::string> missing;
    if (!sw.at("command").is_string()) missing.push_back("sweep.command");
    if (!sw.at("key").is_string()) missing.push_back("sweep.key");
    if (sw.at("values").empty()) missing.push_back("sweep.values");
    if (!missing.empty()) {
      std::string m = "missing config keys:";
      for (const auto& k : missing) m += " " + k;
      throw ConfigError(m);
    }
    const auto sub = sw.at("command").get<std::string>();
    if (sub == "sweep" || std::find(commands.begin(), commands.end(), sub) == commands.end())
      throw ConfigError("sweep.command must name a non-sweep subcommand");
    json probe = cfg;
    (void)at_path(probe, sw.at("key").get<std::string>());
  }

  json summary = {{"command", command}, {"config", cfg}};
  Report rep;
  int code = 0;
  try {
    rep = command == "sweep" ? cmd_sweep(cfg, verbose, out) : run_command(command, cfg, verbose);
    code = rep.passed() ? 0 : 2;
    summary["status"] = code == 0 ? "pass" : "fail";
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    // numeric failure: diagnostic summary, nonzero exit
    code = 2;
    summary["status"] = "error";
    summary["error"] = e.what();
    log(verbose, 0, command + ": " + e.what());
  }
  summary["results"] = rep.results;
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}});
  summary["checks"] = checks;
  summary["exit_code"] = code;
  for (const auto& [name, text] : rep.files) io::write_file(out / name, text);
  io::write_file(out / "summary.json", summary.dump(2) + "\n");
  for (const auto& c : rep.checks)
    if (!c.pass) log(verbose, 0, command + ": check failed: " + c.name + " = " + io::format(c.value));
  return code;
}

}  // namespace fraclab::cli
