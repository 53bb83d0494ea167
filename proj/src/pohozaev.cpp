#include "fraclab/pohozaev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fraclab/quadrature.hpp"

namespace fraclab {

namespace {

constexpr double half_pi = std::numbers::pi / 2.0;

void check_radius(const ExtensionField& U, const FracParams& P, double r, const char* who) {
  if (!U.grid) throw DomainError(std::string(who) + ": empty field");
  if (U.grid->dim() != P.n() || U.grid->order() != P.s())
    throw DomainError(std::string(who) + ": field and parameters disagree on (n, s)");
  const double lim = 0.5 * std::min(U.grid->radial().r_max(), U.grid->t_max());
  if (!(r > 0.0) || r > lim * (1.0 + 1e-12))
    throw DomainError(std::string(who) + ": need 0 < r <= half the resolved region");
}

// Arc integrals over S_r^+ = {|X| = r, t > 0}, parametrised by the angle φ
// from the boundary: x = r cos φ ω, t = r sin φ, dS = |S^{n-1}| r^n cos^{n-1}φ dφ.
struct ArcTerms {
  double grad = 0.0;    // ∫ t^{1-2s} |∇U|²
  double normal = 0.0;  // ∫ t^{1-2s} (∂_ν U)²
  double mixed = 0.0;   // ∫ t^{1-2s} (∂_ν U) U
};

ArcTerms arc_terms(const ExtensionField& U, double r) {
  const int n = U.grid->dim();
  const double s = U.grid->order();
  const double beta = 1.0 - 2.0 * s;
  const double area = sphere_area(n);

  // Integrands are a t^{1-2s} + b + c t^{2s-1} with a, b, c bounded; the
  // panel at φ = 0 takes the singular power into a Jacobi rule.
  struct Pieces {
    double a[3], b[3], c[3];
  };
  auto pieces = [&](double phi) {
    const double cs = std::cos(phi), sn = std::sin(phi);
    const FieldSample f = U.sample(r * cs, r * sn);
    const double Ur = f.d_r, F = f.flux_t, V = f.value;
    Pieces p{};
    p.a[0] = Ur * Ur;
    p.c[0] = F * F;
    p.a[1] = cs * cs * Ur * Ur;
    p.b[1] = 2.0 * cs * sn * Ur * F;
    p.c[1] = sn * sn * F * F;
    p.a[2] = cs * Ur * V;
    p.b[2] = sn * F * V;
    const double m = area * std::pow(r, n) * std::pow(cs, n - 1);
    for (int k = 0; k < 3; ++k) {
      p.a[k] *= m;
      p.b[k] *= m;
      p.c[k] *= m;
    }
    return p;
  };

  double acc[3] = {0.0, 0.0, 0.0};
  const int K = 30;
  const double phi0 = half_pi * std::ldexp(1.0, -K);
  // first panel: t^γ = r^γ (sin φ / φ)^γ φ^γ
  for (int k = 0; k < 3; ++k) {
    auto part = [&](double gam, int which) {
      return quad::integrate_jacobi(
          [&](double phi) {
            const Pieces p = pieces(phi);
            const double v = which == 0 ? p.a[k] : which == 1 ? p.b[k] : p.c[k];
            const double ratio = phi > 0.0 ? std::sin(phi) / phi : 1.0;
            return v * std::pow(r * ratio, gam);
          },
          0.0, phi0, gam, 0.0, 8);
    };
    acc[k] += part(beta, 0) + part(0.0, 1) + part(-beta, 2);
  }
  for (int j = K; j > 0; --j) {
    const double lo = half_pi * std::ldexp(1.0, -j), hi = 2.0 * lo;
    const quad::Rule& q = quad::gauss_legendre(12);
    const double h = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double phi = mid + h * q.nodes[i];
      const Pieces p = pieces(phi);
      const double t = r * std::sin(phi);
      const double tw = std::pow(t, beta), tv = std::pow(t, -beta);
      for (int k = 0; k < 3; ++k) acc[k] += q.weights[i] * h * (p.a[k] * tw + p.b[k] + p.c[k] * tv);
    }
  }
  return {acc[0], acc[1], acc[2]};
}

// |S^{n-1}| ∫_0^r g(ρ) ρ^{n-1-γ} dρ with g bounded near 0; panels follow the
// radial grid so that the spline trace is integrated piece by piece.
template <class G>
double ball_integral(const RadialGrid& grid, double r, double gam, G&& g) {
  const int n = grid.dim();
  const double area = sphere_area(n);
  auto nodes = grid.nodes();
  std::vector<double> br{std::min(nodes.front(), r)};
  for (double x : nodes)
    if (x > br.back() && x < r) br.push_back(x);
  if (br.back() < r) br.push_back(r);
  const double e = n - 1.0 - gam;
  double acc = quad::integrate_jacobi(g, 0.0, br.front(), e, 0.0, 8);
  for (std::size_t k = 0; k + 1 < br.size(); ++k)
    acc += quad::integrate_gl([&](double x) { return g(x) * std::pow(x, e); }, br[k], br[k + 1], 8);
  return area * acc;
}

// A non-finite term is reported as an infinite residual, never as zero.
double relative(double residual, double mag) {
  if (!std::isfinite(residual) || !std::isfinite(mag)) return std::numeric_limits<double>::infinity();
  return mag > 0.0 ? std::fabs(residual) / mag : 0.0;
}

}  // namespace

PohozaevReport pohozaev_terms(const ExtensionField& U, const FracParams& P, double r) {
  check_radius(U, P, r, "pohozaev_terms");
  const int n = P.n();
  const double s = P.s(), lam = P.lambda(), al = P.alpha(), p = P.p();
  const double kap = kappa_s(s);
  const RadialFunction u = U.trace_function();
  const auto& rg = U.grid->radial();
  const double area = sphere_area(n);

  const double hardy_ball = ball_integral(rg, r, al, [&](double x) { const double v = u(x); return v * v; });
  const double power_ball = ball_integral(rg, r, 0.0, [&](double x) { return std::pow(std::fabs(u(x)), p + 1.0); });
  const ArcTerms arc = arc_terms(U, r);
  const double ur = u(r);

  PohozaevReport rep;
  rep.r = r;
  rep.lhs_hardy = kap * lam * 0.5 * (2.0 * s - al) * hardy_ball;
  rep.lhs_power = kap * (n / (p + 1.0) - 0.5 * (n - 2.0 * s)) * power_ball;
  rep.sphere_gradient = 0.5 * r * arc.grad;
  rep.sphere_normal = -r * arc.normal;
  rep.boundary_hardy = -0.5 * kap * lam * r * area * std::pow(r, n - 1.0) * ur * ur * std::pow(r, -al);
  rep.boundary_power = -kap * r / (p + 1.0) * area * std::pow(r, n - 1.0) * std::pow(std::fabs(ur), p + 1.0);
  rep.sphere_mixed = -0.5 * (n - 2.0 * s) * arc.mixed;
  rep.residual = rep.lhs() - rep.rhs();
  const double mag = std::fabs(rep.lhs_hardy) + std::fabs(rep.lhs_power) + std::fabs(rep.sphere_gradient) +
                     std::fabs(rep.sphere_normal) + std::fabs(rep.boundary_hardy) +
                     std::fabs(rep.boundary_power) + std::fabs(rep.sphere_mixed);
  rep.relative_residual = relative(rep.residual, mag);
  return rep;
}

EnergyIdentity energy_identity(const ExtensionField& U, const FracParams& P, double r) {
  check_radius(U, P, r, "energy_identity");
  const double s = P.s(), lam = P.lambda(), al = P.alpha(), p = P.p();
  const double kap = kappa_s(s);
  const RadialFunction u = U.trace_function();
  const auto& rg = U.grid->radial();

  EnergyIdentity out;
  // Bulk integral shell by shell; below 2^{-30} r the shells carry O(ρ^{n+1-2s}).
  const int K = 30;
  for (int j = K; j > 0; --j) {
    const double lo = r * std::ldexp(1.0, -j), hi = 2.0 * lo;
    out.bulk += quad::integrate_gl([&](double rho) { return arc_terms(U, rho).grad; }, lo, hi, 8);
  }
  out.arc = arc_terms(U, r).mixed;
  out.hardy = kap * lam * ball_integral(rg, r, al, [&](double x) { const double v = u(x); return v * v; });
  out.power = kap * ball_integral(rg, r, 0.0, [&](double x) { return std::pow(std::fabs(u(x)), p + 1.0); });
  out.residual = out.bulk - (out.arc + out.hardy + out.power);
  const double mag = std::max(std::fabs(out.bulk), std::fabs(out.arc) + std::fabs(out.hardy) + std::fabs(out.power));
  out.relative_residual = relative(out.residual, mag);
  return out;
}

NonexistenceCase classify_nonexistence(const FracParams& P) {
  const int n = P.n();
  const double s = P.s(), lam = P.lambda(), al = P.alpha(), p = P.p();
  const double kap = kappa_s(s);
  const double pc = P.critical_power();
  const bool alpha_is_2s = std::fabs(al - 2.0 * s) <= 1e-12 * std::max(1.0, 2.0 * s);
  const bool p_is_crit = std::fabs(p - pc) <= 1e-12 * pc;

  NonexistenceCase c;
  c.hardy_coefficient = kap * lam * 0.5 * (2.0 * s - al);
  c.power_coefficient = kap * (n / (p + 1.0) - 0.5 * (n - 2.0 * s));
  if (lam >= 0.0 && al < 2.0 * s && !alpha_is_2s && p >= 1.0 && p < pc && !p_is_crit) {
    c.which = 1;
    c.label = "case 1: lambda >= 0, alpha < 2s, 1 <= p < (n+2s)/(n-2s)";
    c.explanation = "both left-side coefficients are nonnegative and the power coefficient is positive, "
                    "so the left side is positive for a nontrivial solution while the right side "
                    "vanishes along a sequence of radii";
  } else if (alpha_is_2s && !p_is_crit) {
    c.which = 2;
    c.label = "case 2: alpha = 2s, p != (n+2s)/(n-2s)";
    c.explanation = "the Hardy coefficient vanishes and the power coefficient is nonzero, forcing "
                    "the L^{p+1} norm of the trace to vanish";
  } else if (!alpha_is_2s && p_is_crit) {
    c.which = 3;
    c.label = "case 3: alpha != 2s, p = (n+2s)/(n-2s)";
    c.explanation = "the power coefficient vanishes and the Hardy coefficient is nonzero, forcing "
                    "the weighted L^2 norm of the trace to vanish";
  } else {
    c.which = 0;
    c.label = "outside the nonexistence statement";
    c.explanation = alpha_is_2s && p_is_crit
                        ? "critical conformal case: both left-side coefficients vanish"
                        : "lambda < 0 with alpha < 2s and subcritical p: coefficients of mixed sign";
  }
  return c;
}

}  // namespace fraclab
