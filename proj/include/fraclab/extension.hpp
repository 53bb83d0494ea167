#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "fraclab/constants.hpp"
#include "fraclab/radial.hpp"

namespace fraclab {

/// Tensor grid in (|x|, t) for fields on R^{n+1}_+ that are radial in x.
/// The row t = 0 is implicit: it carries the trace and is not listed in
/// t_nodes.
class HalfStripGrid {
 public:
  /// Requires 0 < t_1 < ... < t_T and at least 8 nodes below 0.01 t_T.
  HalfStripGrid(GridPtr radial, std::vector<double> t_nodes);

  /// t_j = t_max (j/count)^γ, j = 1..count, with γ chosen so that t_1 = t_min.
  static std::shared_ptr<const HalfStripGrid> graded(GridPtr radial, double t_min, double t_max,
                                                     std::size_t count);
  /// Geometric heights t_min·2^{k/npo} up to t_max, for fields homogeneous
  /// about the origin.
  static std::shared_ptr<const HalfStripGrid> geometric(GridPtr radial, double t_min, double t_max,
                                                        double nodes_per_octave);

  const RadialGrid& radial() const { return *radial_; }
  const GridPtr& radial_ptr() const { return radial_; }
  std::span<const double> t_nodes() const { return t_; }
  double t_max() const { return t_.back(); }
  int dim() const { return radial_->dim(); }
  double order() const { return radial_->order(); }
  std::size_t cols() const { return radial_->size(); }
  std::size_t rows() const { return t_.size(); }
  std::size_t near_count() const;
  std::uint64_t hash() const;
  /// σ_j = t_j^{2s} with σ_0 = 0 for the trace row.
  std::span<const double> sigma() const { return sigma_; }

 private:
  GridPtr radial_;
  std::vector<double> t_, sigma_;
};

using StripPtr = std::shared_ptr<const HalfStripGrid>;

enum class Provenance { convolved, solved, sampled };
const char* to_string(Provenance p);

/// Value, ∂_r U and the weighted vertical derivative t^{1-2s} ∂_t U.
struct FieldSample {
  double value = 0.0;
  double d_r = 0.0;
  double flux_t = 0.0;
};

struct ExtensionField {
  StripPtr grid;
  std::vector<double> trace;  // U(r_i, 0)
  Eigen::MatrixXd values;     // U(r_i, t_j), i over radii, j over t_nodes
  Provenance provenance = Provenance::sampled;
  /// Kernel mass over the profile's support fell below 0.999 at some node
  /// and no tail model covered the rest.
  bool truncation_flag = false;
  double min_kernel_mass = 1.0;

  /// Row j = 0 is the trace, row j >= 1 is t_nodes[j-1].
  double at(std::size_t i, std::size_t j) const { return j == 0 ? trace[i] : values(i, j - 1); }
  /// Tensor Lagrange interpolation, cubic in r and in σ = t^{2s}.
  /// Throws DomainError beyond r_M or t_max; below r_1 it extrapolates.
  FieldSample sample(double r, double t) const;
  double operator()(double r, double t) const { return sample(r, t).value; }
  RadialFunction trace_function() const;
};

/// Samples f(r, t) on the grid (trace at t = 0).
ExtensionField sample_field(const StripPtr& grid, const std::function<double(double, double)>& f);

/// U = P_s * u with P_s(x,t) = ι t^{2s} / (|x|²+t²)^{(n+2s)/2}.
ExtensionField poisson_extend(const RadialFunction& u, const StripPtr& grid);

struct FluxResult {
  RadialFunction flux;            // -lim t^{1-2s} ∂_t U
  std::vector<double> residual;   // fit misfit relative to |c| t^{2s}
  std::vector<char> unreliable;   // residual > 0.1
};

/// Fits U(r,t) - U(r,0) = c t^{2s} + a t² + b t^{2+2s} on the lowest
/// `fit_nodes` heights and returns -2s c.
FluxResult weighted_flux(const ExtensionField& U, std::size_t fit_nodes = 6);

/// Boundary law -t^{1-2s} ∂_t U = κ_s(λ r^{-α} U + μ |U|^{p-1} U) + g(r).
struct BoundaryFlux {
  double lambda = 0.0;
  double alpha = 1.0;
  double p = 2.0;
  double mu = 1.0;
  std::vector<double> source;  // g at the radial nodes; empty means 0
};

struct DegenerateOptions {
  enum class Method { picard, newton };
  Method method = Method::picard;
  double relaxation = 0.5;
  double tol = 1e-8;
  int max_iter = 400;
  const ExtensionField* initial = nullptr;
};

struct DegenerateResult {
  ExtensionField field;
  std::vector<double> history;  // relative change per iteration
  int iterations = 0;
  /// Some frozen or linearised operator had a negative pivot.
  bool indefinite = false;
  /// The linear part is a weakly diagonally dominant M-matrix.
  bool m_matrix = true;
};

/// The nonlinear boundary law did not converge.
class DivergenceError : public ConvergenceError {
 public:
  DivergenceError(const std::string& what, std::vector<double> history)
      : ConvergenceError(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// Finite-volume solve of div(t^{1-2s} r^{n-1} ∇U) = 0 on the grid with
/// Dirichlet values `outer(r, t)` on r = r_M and t = t_max and the boundary
/// law at t = 0. Vertical transmissibilities integrate t^{2s-1} exactly, so
/// a + b t^{2s} is reproduced in every column.
DegenerateResult solve_degenerate(const BoundaryFlux& law,
                                  const std::function<double(double, double)>& outer,
                                  const StripPtr& grid, const DegenerateOptions& opts = {});

/// |S^{n-1}| ∫∫ t^{1-2s} |∇U|² r^{n-1} dr dt for the same finite-volume
/// discretisation (edge differences times exact cell weights).
double extension_energy(const ExtensionField& U);

/// Largest |div(t^{1-2s} r^{n-1} ∇U)| over interior nodes (t > 0, r < r_M),
/// each relative to the sum of the magnitudes of its stencil terms. The
/// first `skip` columns are left out (fields singular at the origin).
double stencil_residual(const ExtensionField& U, std::size_t skip = 0);

}  // namespace fraclab
