#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fraclab/radial.hpp"

namespace fraclab {

struct FraclapResult {
  double value = 0.0;  // contribution of the profile on [0, r_M]
  double tail = 0.0;   // contribution of the power-law tail beyond r_M
  /// Set when u(r_M) is not negligible and the caller did not opt in to
  /// truncation; `value` alone is then not trustworthy.
  bool truncation_flag = false;

  double with_tail() const { return value + tail; }
};

struct FraclapOptions {
  bool allow_truncation = false;
};

/// (-Δ)^s u at radius r for a radial profile in R^n (n, s from the grid).
/// Requires r_1 < r < r_M. The tail estimate is reported separately and is
/// never folded into `value`.
FraclapResult fraclap_radial(const RadialFunction& u, double r, const FraclapOptions& opts = {});
std::vector<FraclapResult> fraclap_radial(const RadialFunction& u, std::span<const double> radii,
                                          const FraclapOptions& opts = {});

/// Same operator for an analytic profile f, used as given on [0, cut] and
/// replaced by `tail` beyond.
FraclapResult fraclap_radial(const std::function<double(double)>& f, int n, double s, double r,
                             double cut, PowerLaw tail = {});

/// Uniform periodic grid on [-L, L)^dim with `points` nodes per axis.
struct PeriodicGrid {
  int dim = 1;
  double half_width = 10.0;
  int points = 256;

  double spacing() const { return 2.0 * half_width / points; }
  double coord(int j) const { return -half_width + spacing() * j; }
  std::size_t total() const;
};

struct SpectralResult {
  std::vector<double> values;
  /// u is not negligible on the box boundary, so periodisation pollutes the
  /// result.
  bool support_warning = false;
};

/// (-Δ)^s by FFT with symbol |ξ|^{2s}; the zero mode maps to zero.
/// Samples are row-major for dim = 2 (index = i * points + j, x_i first).
SpectralResult fraclap_spectral(std::span<const double> samples, const PeriodicGrid& grid,
                                double s);

using PointFunction = std::function<double(std::span<const double>)>;

struct PointOptions {
  int sphere_order = 24;
  /// Spheres beyond this radius use the decay model only.
  double far = 1e4;
  /// Taylor zone radius; 0 picks 0.05 * max(|x|, 1).
  double taylor = 0.0;
  /// Points where f is singular or changes scale; the radial quadrature
  /// grades toward spheres through them. The origin is always included.
  std::vector<std::vector<double>> features;
};

/// (-Δ)^s f(x) for a general function on R^n (n = x.size()), by spherical
/// means with a product rule on S^{n-1}.
double fraclap_point(const PointFunction& f, std::span<const double> x, double s,
                     const PointOptions& opts = {});

}  // namespace fraclab
