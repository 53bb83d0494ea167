#include "fraclab/kelvin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace fraclab {

namespace {

double norm(std::span<const double> x) {
  double a = 0.0;
  for (double v : x) a += v * v;
  return std::sqrt(a);
}

double dist2(std::span<const double> x, std::span<const double> y) {
  double a = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) a += (x[i] - y[i]) * (x[i] - y[i]);
  return a;
}

void check_dim(std::span<const double> x, const SpherePair& sp, const char* who) {
  if (x.size() != sp.x0.size()) throw DomainError(std::string(who) + ": dimension mismatch");
}

// Points within a few ulps of the sphere are treated as on it, so that the
// transform is the identity there rather than identity plus rounding.
bool on_sphere(double d2, double rho) {
  return std::fabs(d2 - rho * rho) <= 8.0 * std::numeric_limits<double>::epsilon() * rho * rho;
}

}  // namespace

SpherePair::SpherePair(Point c, double r) : x0(std::move(c)), rho(r) {
  if (x0.empty()) throw DomainError("SpherePair: empty center");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw DomainError("SpherePair: need rho > 0");
}

double SpherePair::center_norm() const { return norm(x0); }

double SpherePair::dist(std::span<const double> x) const { return std::sqrt(dist2(x, x0)); }

Point invert_point(std::span<const double> x, const SpherePair& sp) {
  check_dim(x, sp, "invert_point");
  const double d2 = dist2(x, sp.x0);
  if (d2 == 0.0) throw DomainError("invert_point: x equals the center");
  const double f = sp.rho * sp.rho / d2;
  Point y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = sp.x0[i] + f * (x[i] - sp.x0[i]);
  return y;
}

double conformal_exponent(int n, double s, double p) { return n + 2.0 * s - p * (n - 2.0 * s); }

PointFunction radial_evaluator(const RadialFunction& u) {
  return [u](std::span<const double> x) { return u(norm(x)); };
}

PointFunction kelvin_boundary(PointFunction u, const SpherePair& sp, double s) {
  const int n = sp.dim();
  check_order(n, s);
  return [u = std::move(u), sp, s, n](std::span<const double> xi) {
    check_dim(xi, sp, "kelvin_boundary");
    const double d2 = dist2(xi, sp.x0);
    if (d2 == 0.0) throw DomainError("kelvin_boundary: evaluation at the center");
    if (on_sphere(d2, sp.rho)) return u(xi);
    const Point y = invert_point(xi, sp);
    return std::pow(sp.rho * sp.rho / d2, 0.5 * (n - 2.0 * s)) * u(y);
  };
}

HalfFunction field_evaluator(const ExtensionField& U, double decay) {
  if (!U.grid) throw DomainError("field_evaluator: empty field");
  return [U, decay](std::span<const double> x, double t) {
    if (t < 0.0) throw DomainError("field_evaluator: t < 0");
    const double r = norm(x);
    const double rM = U.grid->radial().r_max(), tM = U.grid->t_max();
    if (r <= rM && t <= tM) return U.sample(r, t).value;
    const double c = std::min(r > rM ? rM / r : 1.0, t > tM ? tM / t : 1.0);
    return std::pow(c, decay) * U.sample(std::min(c * r, rM), std::min(c * t, tM)).value;
  };
}

HalfFunction kelvin_extension(HalfFunction U, const SpherePair& sp, double s) {
  const int n = sp.dim();
  check_order(n, s);
  return [U = std::move(U), sp, s, n](std::span<const double> x, double t) {
    check_dim(x, sp, "kelvin_extension");
    if (t < 0.0) throw DomainError("kelvin_extension: t < 0");
    const double d2 = dist2(x, sp.x0) + t * t;
    if (d2 == 0.0) throw DomainError("kelvin_extension: evaluation at the center");
    if (on_sphere(d2, sp.rho)) return U(x, t);
    const double f = sp.rho * sp.rho / d2;
    Point y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = sp.x0[i] + f * (x[i] - sp.x0[i]);
    return std::pow(f, 0.5 * (n - 2.0 * s)) * U(y, f * t);
  };
}

double weighted_divergence_residual(const HalfFunction& V, std::span<const double> x, double t,
                                    double s, double h) {
  if (!(h > 0.0) || !(t > h)) throw DomainError("weighted_divergence_residual: need 0 < h < t");
  const double w = 1.0 - 2.0 * s;
  const double v0 = V(x, t);
  double res = 0.0, mag = 0.0;
  auto term = [&](double k, double v) {
    res += k * (v - v0);
    mag += k * std::fabs(v - v0);
  };
  Point y(x.begin(), x.end());
  const double tw = std::pow(t, w);
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = x[i] + h;
    term(tw, V(y, t));
    y[i] = x[i] - h;
    term(tw, V(y, t));
    y[i] = x[i];
  }
  term(std::pow(t + 0.5 * h, w), V(x, t + h));
  term(std::pow(t - 0.5 * h, w), V(x, t - h));
  return mag > 0.0 ? std::fabs(res) / mag : 0.0;
}

InversionMargin inversion_inequality(std::span<const double> x, const SpherePair& sp, double s) {
  check_dim(x, sp, "inversion_inequality");
  const double c = sp.center_norm();
  if (!(sp.rho < c)) throw DomainError("inversion_inequality: need rho < |x0|");
  const double xn = norm(x);
  if (xn == 0.0) throw DomainError("inversion_inequality: x = 0");
  const double d2 = dist2(x, sp.x0);
  if (d2 == 0.0) throw DomainError("inversion_inequality: x = x0");
  const double d = std::sqrt(d2);
  const Point y = invert_point(x, sp);
  const double yn = norm(y);
  const double rhs = std::pow(xn, -2.0 * s);
  const double lhs = yn == 0.0 ? std::numeric_limits<double>::infinity()
                               : std::pow(sp.rho / d, 4.0 * s) * std::pow(yn, -2.0 * s);
  InversionMargin out;
  out.margin = lhs - rhs;
  const double tol = 1e-12 * std::max(rhs, 1.0);
  const double rel = std::fabs(d - sp.rho) / sp.rho;
  if (rel <= 1e-12) {
    out.expected = 0;
    out.holds = std::fabs(out.margin) <= tol;
  } else if (d < sp.rho) {
    out.expected = 1;
    out.holds = out.margin >= -tol;
  } else if (d < c) {
    out.expected = -1;
    out.holds = out.margin <= tol;
  }
  return out;
}

TransformedResidual transformed_residual(const RadialFunction& u, const SpherePair& sp,
                                         const FracParams& params, const std::vector<Point>& samples,
                                         const PointOptions& opts) {
  const int n = params.n();
  const double s = params.s(), lam = params.lambda(), al = params.alpha(), p = params.p();
  if (sp.dim() != n) throw DomainError("transformed_residual: sphere dimension differs from n");
  if (u.grid().dim() != n) throw DomainError("transformed_residual: profile dimension differs from n");
  const PointFunction base = radial_evaluator(u);
  const PointFunction v = kelvin_boundary(base, sp, s);
  const double k = conformal_exponent(n, s, p);

  PointOptions vo = opts;
  vo.features.push_back(sp.x0);
  const double c = sp.center_norm();
  if (c > 0.0) {
    // image of the origin, where the Hardy term of u lands after inversion
    Point z(n);
    for (int i = 0; i < n; ++i) z[i] = sp.x0[i] * (1.0 - sp.rho * sp.rho / (c * c));
    vo.features.push_back(z);
  }

  TransformedResidual out;
  double sq = 0.0;
  for (const Point& x : samples) {
    if (static_cast<int>(x.size()) != n) throw DomainError("transformed_residual: sample dimension");
    const double d = sp.dist(x);
    if (d < 1e-8 * sp.rho || norm(x) < 1e-8) {
      out.notes.push_back("skipped sample at a singular point");
      continue;
    }
    const Point y = invert_point(x, sp);
    const double yn = norm(y);
    if (yn < 1e-8) {
      out.notes.push_back("skipped sample whose inversion is the origin");
      continue;
    }
    const double vx = v(x);
    const double q = sp.rho / d;
    const double rhs = std::pow(q, 4.0 * s) * lam * std::pow(yn, -al) * vx +
                       std::pow(q, k) * std::pow(std::fabs(vx), p - 1.0) * vx;
    const double r = fraclap_point(v, x, s, vo) - rhs;

    const double uy = u(yn);
    const double base_res = fraclap_point(base, y, s, opts) - lam * std::pow(yn, -al) * uy -
                            std::pow(std::fabs(uy), p - 1.0) * uy;
    // The transform multiplies the residual of u by (rho/d)^{n+2s}.
    out.base_max = std::max(out.base_max, std::pow(q, n + 2.0 * s) * std::fabs(base_res));
    out.max = std::max(out.max, std::fabs(r));
    out.scale = std::max(out.scale, std::fabs(rhs));
    sq += r * r;
    ++out.used;
  }
  if (out.used > 0) out.l2 = std::sqrt(sq / static_cast<double>(out.used));
  return out;
}

MovingSphereReport moving_sphere_check(const PointFunction& u, const SpherePair& sp, double s,
                                       const std::vector<Point>& samples) {
  if (samples.empty()) throw DomainError("moving_sphere_check: no samples");
  if (!(sp.rho < sp.center_norm())) throw DomainError("moving_sphere_check: need rho < |x0|");
  const PointFunction v = kelvin_boundary(u, sp, s);
  MovingSphereReport out;
  out.worst = -std::numeric_limits<double>::infinity();
  for (const Point& xi : samples) {
    check_dim(xi, sp, "moving_sphere_check");
    if (sp.dist(xi) < sp.rho * (1.0 - 1e-12) || norm(xi) == 0.0)
      throw DomainError("moving_sphere_check: sample outside {|ξ-x0| >= rho} \\ {0}");
    const double diff = v(xi) - u(xi);
    if (diff > out.worst) {
      out.worst = diff;
      out.argmax = xi;
    }
  }
  out.n_samples = samples.size();
  return out;
}

std::vector<Point> moving_sphere_samples(const SpherePair& sp, std::size_t count, double outer,
                                         std::uint64_t seed) {
  if (!(outer > sp.rho)) throw DomainError("moving_sphere_samples: need outer > rho");
  const int n = sp.dim();
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  std::vector<Point> out;
  out.reserve(count);
  const double log_ratio = std::log(outer / sp.rho);
  while (out.size() < count) {
    Point dir(n);
    double nn = 0.0;
    for (double& v : dir) {
      v = normal(gen);
      nn += v * v;
    }
    nn = std::sqrt(nn);
    if (nn == 0.0) continue;
    // one in ten on the sphere itself, the rest log-uniform in distance
    const double d = out.size() % 10 == 0 ? sp.rho : sp.rho * std::exp(log_ratio * unit(gen));
    Point x(n);
    for (int i = 0; i < n; ++i) x[i] = sp.x0[i] + d * dir[i] / nn;
    if (norm(x) < 1e-6 * sp.rho) continue;
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace fraclab
