#pragma once

#include <memory>
#include <vector>

namespace fraclab {

/// Angular reduction of |x-y|^{-n-2s} for radial functions in R^n:
///   k(z) = |S^{n-1}| ∫_{S^{n-1}} |e - zω|^{-n-2s} dω,
/// so that ∬ F(|x|,|y|) |x-y|^{-n-2s} dx dy = ∬ F(r,ρ) (rρ)^{n-1} r^{-n-2s} k(ρ/r) dr dρ.
/// In log variables the kernel becomes H(τ) = e^{τ(n/2+s)} k(e^τ), which is
/// even in τ and behaves like g0 |τ|^{-1-2s} at 0.
///
/// Tables are built once per (n, s) and shared; all methods are const.
class RadialKernel {
 public:
  RadialKernel(int n, double s);
  static std::shared_ptr<const RadialKernel> get(int n, double s);

  int dim() const { return n_; }
  double order() const { return s_; }

  /// k(z) by direct quadrature (closed form for n = 1); z >= 0, z != 1.
  double k_direct(double z) const;
  /// H(τ) from the table.
  double H(double tau) const;
  /// |τ|^{1+2s} H(τ); bounded and even.
  double g(double tau) const;

  /// ∫_σ^∞ e^{-τ(n/2-s)} H(τ) dτ: coupling of the ball of radius r to a
  /// point at radius r e^σ.
  double inner_tail(double sigma) const;
  /// ∫_σ^∞ e^{τ(n/2-s)} H(τ) dτ: coupling of a point at radius r to the
  /// exterior of the ball of radius r e^σ.
  double outer_tail(double sigma) const;

  /// Radial kernel G(r,ρ) = (rρ)^{n-1} r^{-n-2s} k(ρ/r).
  double G(double r, double rho) const;
  /// |r-ρ|^{1+2s} G(r,ρ), evaluated without cancellation near r = ρ.
  double G_reg(double r, double rho) const;

 private:
  struct Spline {
    double x0 = 0.0, hx = 1.0;
    std::vector<double> y, m;  // values and second derivatives
    void build();
    double operator()(double x) const;
  };
  double g_direct(double tau) const;

  int n_;
  double s_;
  double k0_;  // k(0) = |S^{n-1}|²
  double tau_lo_, tau_hi_;
  Spline log_g_, log_inner_, log_outer_;  // inner/outer store log(I σ^{2s})
};

}  // namespace fraclab
