#pragma once

#include <stdexcept>
#include <string>

namespace fraclab {

/// Raised for arguments outside a function's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when an iterative solver stops without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lanczos gamma with reflection; throws DomainError at the poles.
double gamma(double x);

/// Surface area of the unit sphere S^{n-1} in R^n (|S^0| = 2).
double sphere_area(int n);

// All constants below validate n >= 1 and s in (0, 1).

/// Sharp Hardy constant: 2^{2s} Γ²((n+2s)/4) / Γ²((n-2s)/4). Needs n > 2s.
double hardy_constant(int n, double s);

/// Γ(1-s) / (2^{2s-1} Γ(s)). The weighted Dirichlet energy of the Poisson
/// extension equals kappa_s times the squared Ḣ^s seminorm, and the weighted
/// normal derivative at t = 0 equals kappa_s (-Δ)^s u.
double kappa_s(double s);

/// 2^{2s-1} π^{-n/2} Γ((n+2s)/2) / |Γ(-s)|. With this normalisation
/// C ∬ (u(x)-u(y))²/|x-y|^{n+2s} equals ∫ |ξ|^{2s} |û|² dξ / (2π)^n.
double gagliardo_constant(int n, double s);

/// Constant in (-Δ)^s u(x) = C PV ∫ (u(x)-u(y))/|x-y|^{n+2s} dy.
/// Twice gagliardo_constant.
double fraclap_constant(int n, double s);

/// Γ((n+2s)/2) / (π^{n/2} Γ(s)): normalises the Poisson kernel
/// t^{2s} / (|x|²+t²)^{(n+2s)/2} to unit mass. Computed in closed form and
/// by quadrature; throws if the two differ by more than 1e-10.
double poisson_normalizer(int n, double s);
double poisson_normalizer_closed(int n, double s);
double poisson_normalizer_quadrature(int n, double s);

/// c with (-Δ)^s (1+|x|²)^{-(n-2s)/2} = c (1+|x|²)^{-(n+2s)/2}.
double bubble_constant(int n, double s);

/// Problem parameters. Construction validates n >= 1, s in (0,1), n > 2s,
/// 0 < alpha <= 2s and 1 < p <= (n+2s)/(n-2s).
class FracParams {
 public:
  FracParams(int n, double s, double lambda, double alpha, double p);

  /// alpha = 2s and the critical p.
  static FracParams critical(int n, double s, double lambda = 0.0);

  int n() const { return n_; }
  double s() const { return s_; }
  double lambda() const { return lambda_; }
  double alpha() const { return alpha_; }
  double p() const { return p_; }

  /// 2n/(n-2s).
  double critical_exponent() const { return 2.0 * n_ / (n_ - 2.0 * s_); }
  /// (n+2s)/(n-2s).
  double critical_power() const { return (n_ + 2.0 * s_) / (n_ - 2.0 * s_); }
  bool is_critical() const;

  FracParams with_lambda(double lambda) const { return {n_, s_, lambda, alpha_, p_}; }
  std::string describe() const;

 private:
  int n_;
  double s_, lambda_, alpha_, p_;
};

void check_order(int n, double s);

}  // namespace fraclab
