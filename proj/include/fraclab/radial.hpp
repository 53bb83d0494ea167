#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace fraclab {

/// Radial mesh 0 < r_1 < ... < r_M for a profile in R^n acted on by (-Δ)^s.
/// Gaps may not exceed a factor 2^{1/3}, i.e. at least three nodes per octave.
class RadialGrid {
 public:
  RadialGrid(int n, double s, std::vector<double> nodes);

  /// Nodes r_min * q^k with q = 2^{1/nodes_per_octave}; the last node is
  /// the first one at or beyond r_max.
  static std::shared_ptr<const RadialGrid> geometric(int n, double s, double r_min, double r_max,
                                                     double nodes_per_octave);

  int dim() const { return n_; }
  double order() const { return s_; }
  std::span<const double> nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  double operator[](std::size_t i) const { return nodes_[i]; }
  double r_min() const { return nodes_.front(); }
  double r_max() const { return nodes_.back(); }

  /// Smallest number of nodes per octave over all gaps.
  double nodes_per_octave() const;
  /// True when every gap has the same ratio (to 1e-12).
  bool is_geometric() const;
  /// Largest i with nodes[i] <= r, clamped to [0, M-2].
  std::size_t locate(double r) const;
  /// FNV-1a over (n, s, nodes), used as a cache key.
  std::uint64_t hash() const;

 private:
  int n_;
  double s_;
  std::vector<double> nodes_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// c r^e. A zero coefficient means "no contribution".
struct PowerLaw {
  double coef = 0.0;
  double exponent = 0.0;
  double operator()(double r) const { return coef == 0.0 ? 0.0 : coef * std::pow(r, exponent); }
};

/// Nodal values on a RadialGrid. Between nodes the profile is a cubic spline
/// in log r; below r_1 a power law through the first two nodes; beyond r_M a
/// power law fitted on the last decade of nodes (dropped when the data do not
/// support one, e.g. a sign change or an exact zero at r_M).
class RadialFunction {
 public:
  RadialFunction(GridPtr grid, std::vector<double> values);
  static RadialFunction sample(GridPtr grid, const std::function<double(double)>& f);

  const RadialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double value(std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  /// Full model: head, spline, tail.
  double operator()(double r) const;
  /// Head and spline on [0, r_M]; zero beyond.
  double body(double r) const;
  /// d/dr of the full model.
  double derivative(double r) const;

  const PowerLaw& head() const { return head_; }
  const PowerLaw& tail() const { return tail_; }
  RadialFunction with_tail(PowerLaw tail) const;

  double max_abs() const;
  /// |u(r_M)| <= rel * max|u|.
  bool decays(double rel = 1e-6) const;
  /// Nominal resolution at r: the local node spacing.
  double spacing(double r) const;

 private:
  void build();
  double spline(double r, double* deriv) const;

  GridPtr grid_;
  std::vector<double> values_;
  std::vector<double> tau_;     // log r_i
  std::vector<double> second_;  // spline second derivatives in tau
  PowerLaw head_, tail_;
};

}  // namespace fraclab
