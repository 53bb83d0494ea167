#include "fraclab/fraclap.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numbers>

#include "fraclab/constants.hpp"
#include "fraclab/quadrature.hpp"
#include "sphere_mean.hpp"

namespace fraclab {

namespace {

// FFTW's planner is not thread-safe.
std::mutex g_plan_mutex;

// ∫_0^δ d^{-1-2s} M(d) dd for an even M with M(0) = 0. On [0, δ/2] M/d²
// is replaced by the quadratic in d² through three samples and integrated
// exactly; sampling M at tiny d would only amplify cancellation error.
template <class F>
double taylor_zone(F&& M, double delta, double s) {
  const double h[3] = {0.5 * delta, 0.25 * delta, 0.125 * delta};
  double x[3], m[3];
  for (int i = 0; i < 3; ++i) {
    x[i] = h[i] * h[i];
    m[i] = M(h[i]) / x[i];
  }
  // Newton form in x = d², converted to monomial coefficients.
  const double d01 = (m[1] - m[0]) / (x[1] - x[0]), d12 = (m[2] - m[1]) / (x[2] - x[1]);
  const double c2 = (d12 - d01) / (x[2] - x[0]);
  const double c1 = d01 - c2 * (x[0] + x[1]);
  const double c0 = m[0] - c1 * x[0] - c2 * x[0] * x[0];
  const double H = h[0];
  double acc = 0.0;
  const double c[3] = {c0, c1, c2};
  for (int k = 0; k < 3; ++k) {
    const double e = 2.0 + 2.0 * k - 2.0 * s;
    acc += c[k] * std::pow(H, e) / e;
  }
  return acc + quad::integrate_gl([&](double d) { return M(d) * std::pow(d, -1.0 - 2.0 * s); },
                                  H, delta, 16);
}

// (-Δ)^s u(r) = -C ∫_0^∞ d^{-1-2s} M(d) dd with M the spherical deviation
// about x, |x| = r.
FraclapResult fraclap_model(const detail::RadialModel& m, int n, double s, double r) {
  const double C = fraclap_constant(n, s);
  const double area = n == 1 ? 2.0 : sphere_area(n);
  const double u0 = m(r);
  const double res = m.resolution ? m.resolution(r) : 0.1 * r;
  double delta = std::min(0.5 * res, 0.25 * r);
  if (std::isfinite(m.cut)) delta = std::min(delta, 0.5 * (m.cut - r));
  if (m.head_edge > 0.0) delta = std::min(delta, 0.5 * (r - m.head_edge));

  double bint = taylor_zone(
      [&](double d) { return detail::sphere_mean(m, n, r, d, u0).body; }, delta, s);

  const double far = m.cut + r;
  double tint = 0.0;
  const auto br = detail::d_breaks(m, r, delta, far);
  const auto& gl = quad::gauss_legendre(8);
  for (std::size_t k = 0; k + 1 < br.size(); ++k) {
    const double a = br[k], b = br[k + 1], h = 0.5 * (b - a), c = 0.5 * (a + b);
    for (std::size_t q = 0; q < gl.size(); ++q) {
      const double d = c + h * gl.nodes[q];
      const auto sm = detail::sphere_mean(m, n, r, d, u0);
      const double w = gl.weights[q] * h * std::pow(d, -1.0 - 2.0 * s);
      bint += w * sm.body;
      tint += w * sm.tail;
    }
  }
  bint -= area * u0 * std::pow(far, -2.0 * s) / (2.0 * s);

  if (m.tail.coef != 0.0) {
    // Beyond `far` the sphere lies in the tail; d = far / v.
    const double e = m.tail.exponent;
    const double gam = 2.0 * s - 1.0 - e;
    if (gam <= -1.0) {
      tint = std::numeric_limits<double>::quiet_NaN();
    } else {
      tint += std::pow(far, -2.0 * s) *
              quad::integrate_jacobi(
                  [&](double v) {
                    return std::pow(v, e) * detail::sphere_mean(m, n, r, far / v, u0).tail;
                  },
                  0.0, 1.0, gam, 0.0, 24);
    }
  }
  return {-C * bint, -C * tint, false};
}

}  // namespace

FraclapResult fraclap_radial(const RadialFunction& u, double r, const FraclapOptions& opts) {
  const auto& g = u.grid();
  if (!(r > g.r_min() && r < g.r_max()))
    throw DomainError("fraclap_radial: radius outside the grid interior");
  const auto model = detail::model_of(u);
  FraclapResult out = fraclap_model(model, g.dim(), g.order(), r);
  out.truncation_flag = !opts.allow_truncation && !u.decays(1e-6);
  return out;
}

std::vector<FraclapResult> fraclap_radial(const RadialFunction& u, std::span<const double> radii,
                                          const FraclapOptions& opts) {
  std::vector<FraclapResult> out;
  out.reserve(radii.size());
  for (double r : radii) out.push_back(fraclap_radial(u, r, opts));
  return out;
}

FraclapResult fraclap_radial(const std::function<double(double)>& f, int n, double s, double r,
                             double cut, PowerLaw tail) {
  check_order(n, s);
  if (!(r > 0.0 && r < cut)) throw DomainError("fraclap_radial: need 0 < r < cut");
  return fraclap_model(detail::model_of(f, cut, tail), n, s, r);
}

std::size_t PeriodicGrid::total() const {
  std::size_t t = 1;
  for (int k = 0; k < dim; ++k) t *= static_cast<std::size_t>(points);
  return t;
}

SpectralResult fraclap_spectral(std::span<const double> samples, const PeriodicGrid& grid,
                                double s) {
  check_order(1, s);
  if (grid.dim != 1 && grid.dim != 2) throw DomainError("fraclap_spectral: dim must be 1 or 2");
  if (grid.points < 4 || !(grid.half_width > 0.0))
    throw DomainError("fraclap_spectral: bad periodic grid");
  if (samples.size() != grid.total())
    throw DomainError("fraclap_spectral: sample count does not match grid");
  const int N = grid.points;
  const std::size_t total = grid.total();

  std::vector<std::complex<double>> buf(samples.begin(), samples.end());
  auto* data = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan fwd, bwd;
  {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    if (grid.dim == 1) {
      fwd = fftw_plan_dft_1d(N, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd = fftw_plan_dft_1d(N, data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
    } else {
      fwd = fftw_plan_dft_2d(N, N, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd = fftw_plan_dft_2d(N, N, data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
  }
  fftw_execute(fwd);
  const double k0 = std::numbers::pi / grid.half_width;
  auto freq = [&](int j) { return k0 * (j <= N / 2 ? j : j - N); };
  for (std::size_t idx = 0; idx < total; ++idx) {
    double xi2;
    if (grid.dim == 1) {
      const double k = freq(static_cast<int>(idx));
      xi2 = k * k;
    } else {
      const double k1 = freq(static_cast<int>(idx / N)), k2 = freq(static_cast<int>(idx % N));
      xi2 = k1 * k1 + k2 * k2;
    }
    buf[idx] *= (xi2 == 0.0 ? 0.0 : std::pow(xi2, s)) / static_cast<double>(total);
  }
  fftw_execute(bwd);
  {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }

  SpectralResult out;
  out.values.resize(total);
  for (std::size_t i = 0; i < total; ++i) out.values[i] = buf[i].real();
  double peak = 0.0, edge = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    peak = std::max(peak, std::fabs(samples[i]));
    const bool on_edge = grid.dim == 1 ? i == 0 : (i / N == 0 || i % N == 0);
    if (on_edge) edge = std::max(edge, std::fabs(samples[i]));
  }
  out.support_warning = edge > 1e-8 * peak;
  return out;
}

double fraclap_point(const PointFunction& f, std::span<const double> x, double s,
                     const PointOptions& opts) {
  const int n = static_cast<int>(x.size());
  check_order(n, s);
  const double C = fraclap_constant(n, s);
  const auto rule = quad::sphere_rule(n, opts.sphere_order);
  double xnorm = 0.0;
  for (double v : x) xnorm += v * v;
  xnorm = std::sqrt(xnorm);
  const double u0 = f(x);
  const double area = sphere_area(n);

  std::vector<double> y(n);
  auto mean = [&](double d, bool deviation) {
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
      for (int i = 0; i < n; ++i) y[i] = x[i] + d * rule.dirs[k * n + i];
      acc += rule.weights[k] * f(y);
    }
    return deviation ? acc - area * u0 : acc;
  };

  double delta = opts.taylor > 0.0 ? opts.taylor : 0.05 * std::max(xnorm, 1.0);
  std::vector<double> events{xnorm};
  for (const auto& p : opts.features) {
    double dist = 0.0;
    for (int i = 0; i < n; ++i) dist += (x[i] - p[i]) * (x[i] - p[i]);
    dist = std::sqrt(dist);
    events.push_back(dist);
    if (dist > 0.0) delta = std::min(delta, 0.25 * dist);
  }
  if (xnorm > 0.0) delta = std::min(delta, 0.25 * xnorm);

  double acc = taylor_zone([&](double d) { return mean(d, true); }, delta, s);

  detail::RadialModel dummy;
  dummy.cut = std::numeric_limits<double>::infinity();
  const double far = std::max(opts.far, 4.0 * delta);
  const auto br = detail::d_breaks(dummy, -1.0, delta, far, events);
  for (std::size_t k = 0; k + 1 < br.size(); ++k)
    acc += quad::integrate_gl(
        [&](double d) { return mean(d, true) * std::pow(d, -1.0 - 2.0 * s); }, br[k], br[k + 1],
        8);
  acc -= area * u0 * std::pow(far, -2.0 * s) / (2.0 * s);
  acc += std::pow(far, -2.0 * s) *
         quad::integrate_jacobi([&](double v) { return mean(far / v, false); }, 0.0, 1.0,
                                2.0 * s - 1.0, 0.0, 16);
  return -C * acc;
}

}  // namespace fraclab
