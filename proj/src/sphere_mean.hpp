#pragma once

// Spherical means of radial profiles about an off-centre point. Shared by
// the radial fractional Laplacian and the Poisson extension.

#include <functional>
#include <limits>
#include <vector>

#include "fraclab/radial.hpp"

namespace fraclab::detail {

struct RadialModel {
  std::function<double(double)> body;  // used on [0, cut]
  PowerLaw tail;                       // used beyond cut
  double cut = std::numeric_limits<double>::infinity();
  double head_edge = 0.0;              // radius where the head model starts, 0 if none
  std::function<double(double)> resolution;  // local length scale at r

  double operator()(double r) const { return r <= cut ? body(r) : tail(r); }
};

RadialModel model_of(const RadialFunction& u);
RadialModel model_of(std::function<double(double)> f, double cut, PowerLaw tail);

/// Pieces of ∫_{S^{n-1}} over the sphere |y - x| = d, |x| = r:
///   body   = ∫_{|y| <= cut} (u(y) - u0) - u0 |{|y| > cut}|
///   tail   = ∫_{|y| > cut} tail(|y|)
///   inside = |{|y| <= cut}|
struct SphereMean {
  double body = 0.0;
  double tail = 0.0;
  double inside = 0.0;
};

SphereMean sphere_mean(const RadialModel& m, int n, double r, double d, double u0);

/// Break points in d for integrals of sphere means about radius r: geometric
/// grading toward every radius where the sphere meets the origin, the head
/// edge or the cut, and a bounded ratio between consecutive breaks.
std::vector<double> d_breaks(const RadialModel& m, double r, double lo, double hi,
                             const std::vector<double>& extra = {});

}  // namespace fraclab::detail
