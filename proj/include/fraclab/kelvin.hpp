#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fraclab/constants.hpp"
#include "fraclab/extension.hpp"
#include "fraclab/fraclap.hpp"
#include "fraclab/radial.hpp"

namespace fraclab {

using Point = std::vector<double>;

/// Inversion sphere |x - x0| = rho in R^n.
struct SpherePair {
  SpherePair(Point x0, double rho);
  Point x0;
  double rho;
  int dim() const { return static_cast<int>(x0.size()); }
  double center_norm() const;
  double dist(std::span<const double> x) const;
};

/// x0 + rho² (x - x0) / |x - x0|².
Point invert_point(std::span<const double> x, const SpherePair& sp);

/// n + 2s - p(n - 2s); zero exactly at the critical power.
double conformal_exponent(int n, double s, double p);

/// x ↦ u(|x|).
PointFunction radial_evaluator(const RadialFunction& u);

/// ξ ↦ (rho/|ξ-x0|)^{n-2s} u(x_{rho,x0}(ξ)). Throws DomainError at ξ = x0.
PointFunction kelvin_boundary(PointFunction u, const SpherePair& sp, double s);

/// (x, t) ↦ U on the closed half-space, x in R^n.
using HalfFunction = std::function<double(std::span<const double>, double)>;

/// Evaluates a strip field at (|x|, t). Outside the box the value on the box
/// boundary along the same ray is continued as |X|^{-decay}.
HalfFunction field_evaluator(const ExtensionField& U, double decay);

/// Inversion about X = (x0, 0): ξ ↦ (rho/|ξ-X|)^{n-2s} U(X + rho²(ξ-X)/|ξ-X|²).
/// t >= 0 is preserved. Throws DomainError at ξ = X.
HalfFunction kelvin_extension(HalfFunction U, const SpherePair& sp, double s);

/// Conservative centred differences of div(t^{1-2s} ∇V) at (x, t) with step
/// h in every coordinate, relative to the summed magnitudes of the terms.
/// Needs t > h.
double weighted_divergence_residual(const HalfFunction& V, std::span<const double> x, double t,
                                    double s, double h);

struct InversionMargin {
  /// (rho/|x-x0|)^{4s} |x_{rho,x0}|^{-2s} - |x|^{-2s}.
  double margin = 0.0;
  /// -1 on rho < |x-x0| < |x0|, +1 on 0 < |x-x0| < rho, 0 on the spheres and
  /// where no sign is predicted.
  int expected = 0;
  /// The sign of `margin` agrees with `expected` (boundary cases within 1e-12).
  bool holds = true;
};

/// Requires rho < |x0| and x != x0.
InversionMargin inversion_inequality(std::span<const double> x, const SpherePair& sp, double s);

struct TransformedResidual {
  double max = 0.0;        // max |(-Δ)^s v - rhs| over used samples, v = u_{x0,rho}
  double l2 = 0.0;         // root mean square of the same
  double base_max = 0.0;   // max residual of u itself at the inverted samples
  double scale = 0.0;      // max |rhs| over used samples
  std::size_t used = 0;
  std::vector<std::string> notes;  // skipped samples
};

/// Residual of the Kelvin-transformed equation
///   (-Δ)^s v = (rho/|x-x0|)^{4s} λ |x_{rho,x0}|^{-α} v + (rho/|x-x0|)^{n+2s-p(n-2s)} |v|^{p-1} v
/// at the given samples, with (-Δ)^s from fraclap_point on the transform of
/// the full radial model of u (tail included).
TransformedResidual transformed_residual(const RadialFunction& u, const SpherePair& sp,
                                         const FracParams& params, const std::vector<Point>& samples,
                                         const PointOptions& opts = {});

struct MovingSphereReport {
  double worst = 0.0;  // max of u_{x0,rho}(ξ) - u(ξ)
  Point argmax;
  std::size_t n_samples = 0;
};

/// Requires rho < |x0| and every sample in {|ξ-x0| >= rho} \ {0}.
MovingSphereReport moving_sphere_check(const PointFunction& u, const SpherePair& sp, double s,
                                       const std::vector<Point>& samples);

/// Deterministic samples in rho <= |ξ-x0| <= outer, away from 0, with a
/// share placed exactly on the sphere.
std::vector<Point> moving_sphere_samples(const SpherePair& sp, std::size_t count, double outer,
                                         std::uint64_t seed);

}  // namespace fraclab
