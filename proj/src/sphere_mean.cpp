#include "sphere_mean.hpp"

#include <algorithm>
#include <cmath>

#include "fraclab/constants.hpp"
#include "fraclab/quadrature.hpp"

namespace fraclab::detail {

RadialModel model_of(const RadialFunction& u) {
  RadialModel m;
  m.body = [&u](double r) { return u.body(r); };
  m.tail = u.tail();
  m.cut = u.grid().r_max();
  m.head_edge = u.grid().r_min();
  m.resolution = [&u](double r) { return u.spacing(r); };
  return m;
}

RadialModel model_of(std::function<double(double)> f, double cut, PowerLaw tail) {
  RadialModel m;
  m.body = std::move(f);
  m.tail = tail;
  m.cut = cut;
  m.resolution = [](double r) { return 0.1 * r; };
  return m;
}

namespace {

// Panels for ∫_a^b: the half [a, m] is graded geometrically in ρ - a toward
// a (stopping at the scale of a itself), the half [m, b] is one panel. No
// panel then sees a near-singular endpoint factor of the opposite end.
std::vector<double> rho_breaks(double a, double b) {
  const double m = 0.5 * (a + b);
  const double stop = std::max(a, 1e-10 * b);
  std::vector<double> br{a};
  std::vector<double> offs;
  for (double w = m - a; w > stop; w *= 0.5) offs.push_back(w);
  for (auto it = offs.rbegin(); it != offs.rend(); ++it)
    if (*it < m - a) br.push_back(a + *it);
  br.push_back(m);
  br.push_back(b);
  return br;
}

}  // namespace

SphereMean sphere_mean(const RadialModel& m, int n, double r, double d, double u0) {
  SphereMean out;
  if (n == 1) {
    for (double rho : {r + d, std::fabs(r - d)}) {
      if (rho <= m.cut) {
        out.body += m.body(rho) - u0;
        out.inside += 1.0;
      } else {
        out.body -= u0;
        out.tail += m.tail(rho);
      }
    }
    return out;
  }

  const double area = sphere_area(n);
  const double a = std::fabs(r - d), b = r + d;
  const double e = 0.5 * (n - 3);
  const double pref = sphere_area(n - 1) / (r * d);
  const double four_rd2 = 4.0 * r * r * d * d;

  // Weight without the (ρ-a)^e (b-ρ)^e endpoint factors.
  auto smooth = [&](double rho) {
    double w = pref * rho;
    if (e != 0.0) w *= std::pow((rho + a) * (b + rho) / four_rd2, e);
    return w;
  };

  const auto all = rho_breaks(a, b);
  auto integrate = [&](double p, double q, auto&& g) {
    std::vector<double> br{p};
    for (double x : all)
      if (x > p && x < q) br.push_back(x);
    br.push_back(q);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
      const double lo = br[k], hi = br[k + 1];
      const bool at_a = (lo == a), at_b = (hi == b);
      const double le = at_a ? e : 0.0, re = at_b ? e : 0.0;
      auto f = [&](double rho) {
        double w = smooth(rho) * g(rho);
        if (e != 0.0) {
          if (!at_a) w *= std::pow(rho - a, e);
          if (!at_b) w *= std::pow(b - rho, e);
        }
        return w;
      };
      acc += quad::integrate_jacobi(f, lo, hi, le, re, 8);
    }
    return acc;
  };

  if (b <= m.cut) {
    out.body = integrate(a, b, [&](double rho) { return m.body(rho) - u0; });
    out.inside = area;
    return out;
  }
  if (a >= m.cut) {
    out.body = -u0 * area;
    if (m.tail.coef != 0.0) out.tail = integrate(a, b, [&](double rho) { return m.tail(rho); });
    return out;
  }
  out.inside = integrate(a, m.cut, [](double) { return 1.0; });
  out.body = integrate(a, m.cut, [&](double rho) { return m.body(rho) - u0; }) -
             u0 * (area - out.inside);
  if (m.tail.coef != 0.0) out.tail = integrate(m.cut, b, [&](double rho) { return m.tail(rho); });
  return out;
}

std::vector<double> d_breaks(const RadialModel& m, double r, double lo, double hi,
                             const std::vector<double>& extra) {
  std::vector<double> events = extra;
  events.push_back(r);
  if (std::isfinite(m.cut)) {
    events.push_back(m.cut - r);
    events.push_back(m.cut + r);
  }
  if (m.head_edge > 0.0) {
    events.push_back(r - m.head_edge);
    events.push_back(r + m.head_edge);
  }
  std::vector<double> pts{lo, hi};
  for (double ev : events)
    if (ev > lo && ev < hi) pts.push_back(ev);
  std::sort(pts.begin(), pts.end());
  // Events that coincide up to rounding (e.g. cut - r = r on a dyadic grid)
  // would leave a sliver panel with nodes on the singular sphere.
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](double a, double b) { return b - a <= 1e-12 * b; }),
            pts.end());
  if (pts.back() != hi) pts.back() = hi;

  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double p = pts[k], q = pts[k + 1];
    const bool gp = (k != 0), gq = (k + 2 != pts.size());
    const double min_len = 1e-9 * std::max(std::min(p, r), 1e-300);
    auto br = quad::graded_breaks(p, q, gp, gq, 0.25, min_len);
    if (!out.empty()) br.erase(br.begin());
    out.insert(out.end(), br.begin(), br.end());
  }
  return quad::limit_ratio(out, 1.5);
}

}  // namespace fraclab::detail
