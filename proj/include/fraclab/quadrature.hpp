#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace fraclab::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

// Rules live on [-1, 1] and are cached for the life of the process, so the
// returned references stay valid. Both functions are safe to call from
// several threads.
const Rule& gauss_legendre(int n);

/// Gauss-Jacobi for the weight (1 - x)^alpha (1 + x)^beta.
const Rule& gauss_jacobi(int n, double alpha, double beta);

template <class F>
double integrate_gl(F&& f, double a, double b, int n = 8) {
  const Rule& q = gauss_legendre(n);
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  double acc = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) acc += q.weights[k] * f(m + h * q.nodes[k]);
  return acc * h;
}

/// ∫_a^b (x - a)^left (b - x)^right f(x) dx.
template <class F>
double integrate_jacobi(F&& f, double a, double b, double left, double right, int n = 8) {
  if (left == 0.0 && right == 0.0) return integrate_gl(f, a, b, n);
  const Rule& q = gauss_jacobi(n, right, left);
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  double acc = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) acc += q.weights[k] * f(m + h * q.nodes[k]);
  return acc * std::pow(h, 1.0 + left + right);
}

/// Breakpoints of [a, b] refined geometrically toward the flagged ends
/// (panel lengths shrink by `ratio` until they fall below min_len).
std::vector<double> graded_breaks(double a, double b, bool toward_a, bool toward_b,
                                  double ratio, double min_len);

/// Splits every panel [p, q] of an increasing positive break list so that
/// q <= max_ratio * p.
std::vector<double> limit_ratio(const std::vector<double>& breaks, double max_ratio);

/// Product rule on S^{dim-1}. Directions are stored row-major (size x dim);
/// weights sum to the sphere area and the rule is antipodally symmetric.
struct SphereRule {
  int dim = 0;
  std::vector<double> dirs;
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
};
SphereRule sphere_rule(int dim, int order);

}  // namespace fraclab::quad
