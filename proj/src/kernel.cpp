#include "fraclab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "fraclab/constants.hpp"
#include "fraclab/quadrature.hpp"

namespace fraclab {

namespace {

constexpr double kStep = 0.02;  // table spacing in log τ
constexpr double kPad = 0.3;    // natural-spline end effects die out inside the pad

double power_integral(double a, double b, double e) {
  // ∫_a^b τ^e dτ
  if (std::fabs(e + 1.0) < 1e-12) return std::log(b / a);
  return (std::pow(b, e + 1.0) - std::pow(a, e + 1.0)) / (e + 1.0);
}

}  // namespace

void RadialKernel::Spline::build() {
  const std::size_t N = y.size();
  m.assign(N, 0.0);
  if (N < 3) return;
  // Natural spline on a uniform grid: m_{i-1} + 4 m_i + m_{i+1} = 6 Δ²y_i / h².
  std::vector<double> c(N, 0.0), d(N, 0.0);
  for (std::size_t i = 1; i + 1 < N; ++i) {
    const double rhs = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (hx * hx);
    const double denom = 4.0 - c[i - 1];
    c[i] = 1.0 / denom;
    d[i] = (rhs - d[i - 1]) / denom;
  }
  for (std::size_t i = N - 2; i >= 1; --i) m[i] = d[i] - c[i] * m[i + 1];
}

double RadialKernel::Spline::operator()(double x) const {
  const double u = (x - x0) / hx;
  const auto last = static_cast<double>(y.size() - 2);
  const std::size_t i = static_cast<std::size_t>(std::clamp(std::floor(u), 0.0, last));
  const double t = u - static_cast<double>(i), a = 1.0 - t;
  return a * y[i] + t * y[i + 1] +
         ((a * a * a - a) * m[i] + (t * t * t - t) * m[i + 1]) * hx * hx / 6.0;
}

RadialKernel::RadialKernel(int n, double s) : n_(n), s_(s) {
  check_order(n, s);
  k0_ = sphere_area(n) * sphere_area(n);
  tau_lo_ = 1e-6;
  tau_hi_ = 60.0;

  const double x_lo = std::log(tau_lo_) - kPad, x_hi = std::log(tau_hi_) + kPad;
  const auto N = static_cast<std::size_t>(std::ceil((x_hi - x_lo) / kStep)) + 1;
  for (Spline* sp : {&log_g_, &log_inner_, &log_outer_}) {
    sp->x0 = x_lo;
    sp->hx = kStep;
    sp->y.assign(N, 0.0);
  }
  for (std::size_t i = 0; i < N; ++i)
    log_g_.y[i] = std::log(g_direct(std::exp(x_lo + kStep * static_cast<double>(i))));
  log_g_.build();

  // Cumulative tails from the top of the table down. Beyond the table
  // H(τ) = k0 e^{-τ(n/2+s)} up to a relative e^{-2τ}.
  const double c = 0.5 * n - s;
  const double tau_top = std::exp(x_lo + kStep * static_cast<double>(N - 1));
  double inner = k0_ * std::exp(-n * tau_top) / n;
  double outer = k0_ * std::exp(-2.0 * s * tau_top) / (2.0 * s);
  log_inner_.y[N - 1] = std::log(inner * std::pow(tau_top, 2.0 * s));
  log_outer_.y[N - 1] = std::log(outer * std::pow(tau_top, 2.0 * s));
  const auto& gl = quad::gauss_legendre(6);
  for (std::size_t i = N - 1; i-- > 0;) {
    const double a = x_lo + kStep * static_cast<double>(i);
    double di = 0.0, dout = 0.0;
    for (std::size_t q = 0; q < gl.size(); ++q) {
      const double tau = std::exp(a + 0.5 * kStep * (1.0 + gl.nodes[q]));
      const double base = 0.5 * kStep * gl.weights[q] * std::pow(tau, -2.0 * s) * g_direct(tau);
      di += base * std::exp(-c * tau);
      dout += base * std::exp(c * tau);
    }
    inner += di;
    outer += dout;
    const double tau_a = std::exp(a);
    log_inner_.y[i] = std::log(inner * std::pow(tau_a, 2.0 * s));
    log_outer_.y[i] = std::log(outer * std::pow(tau_a, 2.0 * s));
  }
  log_inner_.build();
  log_outer_.build();
}

std::shared_ptr<const RadialKernel> RadialKernel::get(int n, double s) {
  static std::mutex mu;
  static std::map<std::pair<int, double>, std::shared_ptr<const RadialKernel>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{n, s}];
  if (!slot) slot = std::make_shared<const RadialKernel>(n, s);
  return slot;
}

double RadialKernel::k_direct(double z) const {
  if (z < 0.0 || z == 1.0) throw DomainError("RadialKernel::k_direct needs z >= 0, z != 1");
  if (z > 1.0) return std::pow(z, -n_ - 2.0 * s_) * k_direct(1.0 / z);
  if (z == 0.0) return k0_;
  const double tau = -std::log(z);
  return g_direct(tau) * std::pow(tau, -1.0 - 2.0 * s_) * std::pow(z, -0.5 * n_ - s_);
}

double RadialKernel::g_direct(double tau) const {
  // z = e^{-τ} < 1 and H(τ) = e^{-τ(n/2+s)} k(z) by the inversion symmetry.
  const double z = std::exp(-tau), omz = -std::expm1(-tau);
  const double e = 0.5 * n_ + s_;
  double k;
  if (n_ == 1) {
    k = 2.0 * (std::pow(omz, -1.0 - 2.0 * s_) + std::pow(1.0 + z, -1.0 - 2.0 * s_));
  } else {
    // ∫_{S^{n-1}} |e - zω|^{-n-2s} dω with w = 1 - cos γ:
    //   |S^{n-2}| ∫_0^2 ((1-z)² + 2zw)^{-e} (w(2-w))^{(n-3)/2} dw.
    const double beta = 0.5 * (n_ - 3);
    const double om2 = omz * omz;
    auto f = [&](double w) { return std::pow(om2 + 2.0 * z * w, -e); };
    std::vector<double> br{0.0};
    for (double x = om2 / (2.0 * z); x < 1.0; x *= 4.0) br.push_back(x);
    br.push_back(2.0);
    const int q = 20;
    double acc = 0.0;
    if (br.size() == 2) {
      acc = quad::integrate_jacobi(f, 0.0, 2.0, beta, beta, q);
    } else {
      const std::size_t last = br.size() - 2;
      for (std::size_t i = 0; i + 1 < br.size(); ++i) {
        const double a = br[i], b = br[i + 1];
        if (i == 0)
          acc += quad::integrate_jacobi([&](double w) { return f(w) * std::pow(2.0 - w, beta); },
                                        a, b, beta, 0.0, q);
        else if (i == last)
          acc += quad::integrate_jacobi([&](double w) { return f(w) * std::pow(w, beta); }, a, b,
                                        0.0, beta, q);
        else
          acc += quad::integrate_gl(
              [&](double w) { return f(w) * std::pow(w * (2.0 - w), beta); }, a, b, q);
      }
    }
    k = sphere_area(n_) * sphere_area(n_ - 1) * acc;
  }
  return std::pow(tau, 1.0 + 2.0 * s_) * std::exp(-e * tau) * k;
}

double RadialKernel::g(double tau) const {
  tau = std::fabs(tau);
  if (tau > tau_hi_) return std::pow(tau, 1.0 + 2.0 * s_) * H(tau);
  return std::exp(log_g_(std::log(std::max(tau, tau_lo_))));
}

double RadialKernel::H(double tau) const {
  tau = std::fabs(tau);
  if (tau > tau_hi_) return k0_ * std::exp(-(0.5 * n_ + s_) * tau);
  return g(tau) * std::pow(tau, -1.0 - 2.0 * s_);
}

double RadialKernel::inner_tail(double sigma) const {
  if (!(sigma > 0.0)) throw DomainError("RadialKernel::inner_tail needs sigma > 0");
  const double c = 0.5 * n_ - s_;
  if (sigma > tau_hi_) return k0_ * std::exp(-n_ * sigma) / n_;
  if (sigma >= tau_lo_) return std::exp(log_inner_(std::log(sigma))) * std::pow(sigma, -2.0 * s_);
  // e^{-cτ} g(τ) ≈ g0 (1 - cτ) below the table.
  const double top = std::exp(log_inner_(std::log(tau_lo_))) * std::pow(tau_lo_, -2.0 * s_);
  const double g0 = g(0.0);
  return top + g0 * (power_integral(sigma, tau_lo_, -1.0 - 2.0 * s_) -
                     c * power_integral(sigma, tau_lo_, -2.0 * s_));
}

double RadialKernel::outer_tail(double sigma) const {
  if (!(sigma > 0.0)) throw DomainError("RadialKernel::outer_tail needs sigma > 0");
  const double c = 0.5 * n_ - s_;
  if (sigma > tau_hi_) return k0_ * std::exp(-2.0 * s_ * sigma) / (2.0 * s_);
  if (sigma >= tau_lo_) return std::exp(log_outer_(std::log(sigma))) * std::pow(sigma, -2.0 * s_);
  const double top = std::exp(log_outer_(std::log(tau_lo_))) * std::pow(tau_lo_, -2.0 * s_);
  const double g0 = g(0.0);
  return top + g0 * (power_integral(sigma, tau_lo_, -1.0 - 2.0 * s_) +
                     c * power_integral(sigma, tau_lo_, -2.0 * s_));
}

double RadialKernel::G(double r, double rho) const {
  return std::pow(r * rho, 0.5 * n_ - s_ - 1.0) * H(std::log(rho / r));
}

double RadialKernel::G_reg(double r, double rho) const {
  const double diff = rho - r;
  const double tau = std::log1p(diff / r);
  const double ratio = tau == 0.0 ? r : diff / tau;  // |r-ρ| / |log(ρ/r)|
  return std::pow(r * rho, 0.5 * n_ - s_ - 1.0) * g(tau) * std::pow(ratio, 1.0 + 2.0 * s_);
}

}  // namespace fraclab
