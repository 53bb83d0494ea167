#include "fraclab/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "fraclab/constants.hpp"

namespace fraclab::quad {

namespace {

// Golub-Welsch on the Jacobi matrix of the monic Jacobi recurrence.
Rule build_jacobi(int n, double a, double b) {
  if (n < 1) throw DomainError("quadrature order must be >= 1");
  if (!(a > -1.0 && b > -1.0)) throw DomainError("Jacobi exponents must exceed -1");
  Eigen::VectorXd diag(n), off(std::max(n - 1, 0));
  const double ab = a + b;
  for (int k = 0; k < n; ++k) {
    const double d = 2.0 * k + ab;
    diag(k) = (k == 0) ? (b - a) / (ab + 2.0) : (b * b - a * a) / (d * (d + 2.0));
  }
  for (int k = 1; k < n; ++k) {
    const double d = 2.0 * k + ab;
    double bk;
    if (k == 1)
      bk = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    else
      bk = 4.0 * k * (k + a) * (k + b) * (k + ab) / (d * d * (d + 1.0) * (d - 1.0));
    off(k - 1) = std::sqrt(bk);
  }
  const double mu0 =
      std::pow(2.0, ab + 1.0) * gamma(a + 1.0) * gamma(b + 1.0) / gamma(ab + 2.0);
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  if (n == 1) {
    r.nodes[0] = diag(0);
    r.weights[0] = mu0;
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  for (int k = 0; k < n; ++k) {
    r.nodes[k] = es.eigenvalues()(k);
    const double v = es.eigenvectors()(0, k);
    r.weights[k] = mu0 * v * v;
  }
  return r;
}

// Legendre nodes by Newton on P_n; more accurate than the eigenvalue route.
Rule build_legendre(int n) {
  if (n < 1) throw DomainError("quadrature order must be >= 1");
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

std::mutex g_mutex;

}  // namespace

const Rule& gauss_legendre(int n) {
  static std::map<int, Rule> cache;
  std::lock_guard<std::mutex> lock(g_mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_legendre(n)).first;
  return it->second;
}

const Rule& gauss_jacobi(int n, double alpha, double beta) {
  static std::map<std::tuple<int, double, double>, Rule> cache;
  std::lock_guard<std::mutex> lock(g_mutex);
  const auto key = std::make_tuple(n, alpha, beta);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_jacobi(n, alpha, beta)).first;
  return it->second;
}

std::vector<double> graded_breaks(double a, double b, bool toward_a, bool toward_b, double ratio,
                                  double min_len) {
  std::vector<double> left{a}, right{b};
  if (!(b > a)) return {a, b};
  double lo = a, hi = b;
  if (toward_a && toward_b) {
    const double mid = 0.5 * (a + b);
    for (double h = 0.5 * (b - a) * ratio; h > min_len; h *= ratio) {
      left.push_back(a + h);
      right.push_back(b - h);
    }
    left.push_back(mid);
  } else if (toward_a) {
    for (double h = (hi - lo) * ratio; h > min_len; h *= ratio) left.push_back(a + h);
  } else if (toward_b) {
    for (double h = (hi - lo) * ratio; h > min_len; h *= ratio) right.push_back(b - h);
  }
  std::vector<double> out(left.begin(), left.end());
  out.insert(out.end(), right.begin(), right.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> limit_ratio(const std::vector<double>& breaks, double max_ratio) {
  std::vector<double> out;
  if (breaks.empty()) return out;
  out.push_back(breaks.front());
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    const double p = out.back(), q = breaks[i];
    if (p > 0.0 && q > max_ratio * p) {
      const int k = static_cast<int>(std::ceil(std::log(q / p) / std::log(max_ratio)));
      const double f = std::pow(q / p, 1.0 / k);
      double x = p;
      for (int j = 1; j < k; ++j) {
        x *= f;
        out.push_back(x);
      }
    }
    out.push_back(q);
  }
  return out;
}

SphereRule sphere_rule(int dim, int order) {
  if (dim < 1) throw DomainError("sphere_rule: dim must be >= 1");
  SphereRule r;
  r.dim = dim;
  if (dim == 1) {
    r.dirs = {1.0, -1.0};
    r.weights = {1.0, 1.0};
    return r;
  }
  if (dim == 2) {
    const int m = 2 * std::max(order, 2);
    for (int k = 0; k < m; ++k) {
      const double th = 2.0 * std::numbers::pi * (k + 0.5) / m;
      r.dirs.push_back(std::cos(th));
      r.dirs.push_back(std::sin(th));
      r.weights.push_back(2.0 * std::numbers::pi / m);
    }
    return r;
  }
  // First coordinate c from Gauss-Jacobi for (1-c²)^{(dim-3)/2}; the rest
  // from the rule on S^{dim-2} scaled by sqrt(1-c²).
  const double e = 0.5 * (dim - 3);
  const Rule& q = gauss_jacobi(order, e, e);
  const SphereRule sub = sphere_rule(dim - 1, order);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double c = q.nodes[i], sn = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (std::size_t j = 0; j < sub.size(); ++j) {
      r.dirs.push_back(c);
      for (int k = 0; k < dim - 1; ++k) r.dirs.push_back(sn * sub.dirs[j * (dim - 1) + k]);
      r.weights.push_back(q.weights[i] * sub.weights[j]);
    }
  }
  return r;
}

}  // namespace fraclab::quad
