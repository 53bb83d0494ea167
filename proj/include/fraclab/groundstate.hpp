#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fraclab/constants.hpp"
#include "fraclab/forms.hpp"
#include "fraclab/radial.hpp"

namespace fraclab {

/// Descent stopped without an accepted step at the smallest step size.
class StallError : public ConvergenceError {
 public:
  StallError(const std::string& what, std::vector<double> history)
      : ConvergenceError(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// (uᵀAu - λ uᵀDu) / ‖u‖²_{2n/(n-2s)} on the assembled forms (α = 2s).
/// Throws DomainError for u ≡ 0.
double rayleigh(std::span<const double> u, double lambda, const QuadraticFormAssembly& forms);
double rayleigh(const RadialFunction& u, double lambda, const QuadraticFormAssembly& forms);

struct GroundStateOptions {
  int max_iter = 4000;
  /// Initial step along the preconditioned descent direction.
  double step = 1.0;
  double min_step = 1e-12;
  /// Stop once an accepted step changes the quotient by at most tol relative.
  double tol = 1e-10;
  /// Rearrangement and scale recentering every this many iterations; 0 disables.
  int rearrange_every = 10;
  bool scale_fix = true;
};

struct GroundStateResult {
  explicit GroundStateResult(RadialFunction p) : profile(std::move(p)) {}

  double lambda = 0.0;
  /// Solution of the Euler-Lagrange equation: lagrange_scale times the
  /// L^{2*}-normalised minimiser.
  RadialFunction profile;
  double beta = 0.0;
  double lagrange_scale = 0.0;
  int iterations = 0;
  bool converged = false;
  double el_residual = 0.0;
  bool monotone = false;
  /// Quotient after each accepted step; starts with the initial guess.
  std::vector<double> history;
  /// Rearrangements or rescalings skipped because they raised the quotient.
  std::vector<std::string> log;
};

/// Preconditioned projected descent on the discrete quotient for 0 <= λ < Λ.
/// Throws DomainError outside that range and StallError when no step is
/// accepted down to min_step.
GroundStateResult minimize_groundstate(double lambda, const GridPtr& grid, const GroundStateOptions& opts = {});

/// R^{-(n-2s)/2} u(r/R) resampled on the grid of u.
RadialFunction rescale(const RadialFunction& u, double R);

/// Decreasing sort of the nodal values onto the same radii.
RadialFunction rearrange(const RadialFunction& u);

struct SolutionResidual {
  double max = 0.0;           // max |residual|
  double relative_max = 0.0;  // max |residual| / (sum of term magnitudes)
  double relative_l2 = 0.0;   // L²(R^n) norm of residual over that of the term magnitudes
  std::size_t count = 0;
};

struct VerifyOptions {
  /// Radii [r_1 * margin, r_M / margin] are checked; nodes nearer the grid
  /// ends are skipped.
  double margin = 10.0;
  std::size_t stride = 1;
};

/// (-Δ)^s u - λ|x|^{-α} u - |u|^{p-1} u at interior nodes.
SolutionResidual verify_solution(const RadialFunction& u, const FracParams& params, const VerifyOptions& opts = {});

struct MonotonicityReport {
  bool monotone = true;
  /// Index of the first node that fails to lie strictly below its predecessor.
  std::optional<std::size_t> first_violation;
};

/// Strict decrease node to node. A node may equal its predecessor only once
/// both are below 1e-12 max|u|; increases beyond that slack always fail.
MonotonicityReport monotonicity_check(const RadialFunction& u);

struct IndefinitenessProbe {
  bool found = false;
  double epsilon = 0.0;  // witness ε, or the ε of the smallest form value
  double form = 0.0;     // uᵀAu - λ uᵀDu at that ε
  double min_form = 0.0;
  double min_epsilon = 0.0;
  std::vector<double> witness;  // nodal values when found
  /// (ε, form / Hardy integral + λ) for each ε tried, the Hardy quotient of u_ε.
  std::vector<std::pair<double, double>> scan;
};

/// Scans u_ε(r) = r^{-(n-2s)/2} η_ε(r) for ε = 2^{-1}, 2^{-2}, ... while the
/// support [ε/2, 2/ε] stays inside the grid, stopping at the first ε with a
/// negative form value.
IndefinitenessProbe indefiniteness_probe(double lambda, const GridPtr& grid);

}  // namespace fraclab
