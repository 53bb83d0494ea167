#include "fraclab/constants.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fraclab/quadrature.hpp"

namespace fraclab {

namespace {

constexpr double kPi = std::numbers::pi;

// sin(πx) with exact argument reduction, so reflection stays accurate for
// large negative x.
double sin_pi(double x) {
  double r = std::fmod(x, 2.0);
  if (r < 0) r += 2.0;
  if (r > 1.0) return -sin_pi(r - 1.0);
  if (r > 0.5) r = 1.0 - r;
  return std::sin(kPi * r);
}

// g = 7, nine terms.
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

}  // namespace

double gamma(double x) {
  if (!std::isfinite(x)) throw DomainError("gamma: non-finite argument");
  if (x <= 0.0 && x == std::floor(x)) throw DomainError("gamma: pole at non-positive integer");
  if (x < 0.5) return kPi / (sin_pi(x) * gamma(1.0 - x));
  const double z = x - 1.0;
  double a = kLanczos[0];
  const double t = z + 7.5;
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (z + i);
  // Split the power to stay finite up to the double overflow limit.
  const double half = std::pow(t, 0.5 * (z + 0.5));
  return std::sqrt(2.0 * kPi) * half * (half * std::exp(-t)) * a;
}

double sphere_area(int n) {
  if (n < 1) throw DomainError("sphere_area: n must be >= 1");
  return 2.0 * std::pow(kPi, 0.5 * n) / gamma(0.5 * n);
}

void check_order(int n, double s) {
  if (n < 1) throw DomainError("dimension n must be >= 1, got " + std::to_string(n));
  if (!(s > 0.0 && s < 1.0)) throw DomainError("order s must lie in (0,1), got " + std::to_string(s));
}

double hardy_constant(int n, double s) {
  check_order(n, s);
  if (!(n > 2.0 * s)) throw DomainError("hardy_constant needs n > 2s");
  const double r = gamma(0.25 * (n + 2.0 * s)) / gamma(0.25 * (n - 2.0 * s));
  return std::pow(2.0, 2.0 * s) * r * r;
}

double kappa_s(double s) {
  check_order(1, s);
  return gamma(1.0 - s) / (std::pow(2.0, 2.0 * s - 1.0) * gamma(s));
}

double gagliardo_constant(int n, double s) {
  check_order(n, s);
  return std::pow(2.0, 2.0 * s - 1.0) * std::pow(kPi, -0.5 * n) * gamma(0.5 * (n + 2.0 * s)) /
         std::fabs(gamma(-s));
}

double fraclap_constant(int n, double s) { return 2.0 * gagliardo_constant(n, s); }

double poisson_normalizer_closed(int n, double s) {
  check_order(n, s);
  return gamma(0.5 * (n + 2.0 * s)) / (std::pow(kPi, 0.5 * n) * gamma(s));
}

// 1/ι = |S^{n-1}| ∫_0^∞ r^{n-1} (1+r²)^{-(n+2s)/2} dr. The part over r > 1 is
// rewritten with r = 1/v, which exposes an algebraic endpoint factor
// v^{2s-1}; both halves are then smooth under Gauss-Jacobi.
double poisson_normalizer_quadrature(int n, double s) {
  check_order(n, s);
  const double e = 0.5 * (n + 2.0 * s);
  auto inner = [&](double r) { return std::pow(1.0 + r * r, -e); };
  const double lower = quad::integrate_jacobi(inner, 0.0, 1.0, n - 1.0, 0.0, 40);
  const double upper = quad::integrate_jacobi(inner, 0.0, 1.0, 2.0 * s - 1.0, 0.0, 40);
  return 1.0 / (sphere_area(n) * (lower + upper));
}

double poisson_normalizer(int n, double s) {
  const double closed = poisson_normalizer_closed(n, s);
  const double numeric = poisson_normalizer_quadrature(n, s);
  if (std::fabs(closed - numeric) > 1e-10 * std::fabs(closed))
    throw DomainError("poisson_normalizer: closed form and quadrature disagree");
  return closed;
}

double bubble_constant(int n, double s) {
  check_order(n, s);
  if (!(n > 2.0 * s)) throw DomainError("bubble_constant needs n > 2s");
  return std::pow(2.0, 2.0 * s) * gamma(0.5 * (n + 2.0 * s)) / gamma(0.5 * (n - 2.0 * s));
}

FracParams::FracParams(int n, double s, double lambda, double alpha, double p)
    : n_(n), s_(s), lambda_(lambda), alpha_(alpha), p_(p) {
  check_order(n, s);
  if (!(n > 2.0 * s)) throw DomainError("parameters need n > 2s");
  if (!std::isfinite(lambda)) throw DomainError("lambda must be finite");
  if (!(alpha > 0.0 && alpha <= 2.0 * s * (1.0 + 1e-14)))
    throw DomainError("alpha must lie in (0, 2s]");
  if (!(p > 1.0 && p <= critical_power() * (1.0 + 1e-14)))
    throw DomainError("p must lie in (1, (n+2s)/(n-2s)]");
}

FracParams FracParams::critical(int n, double s, double lambda) {
  check_order(n, s);
  if (!(n > 2.0 * s)) throw DomainError("parameters need n > 2s");
  return {n, s, lambda, 2.0 * s, (n + 2.0 * s) / (n - 2.0 * s)};
}

bool FracParams::is_critical() const {
  return std::fabs(p_ - critical_power()) <= 1e-12 * critical_power();
}

std::string FracParams::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "n=" << n_ << " s=" << s_ << " lambda=" << lambda_ << " alpha=" << alpha_ << " p=" << p_;
  return os.str();
}

}  // namespace fraclab
