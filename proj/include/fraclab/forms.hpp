#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <stdexcept>

#include "fraclab/constants.hpp"
#include "fraclab/radial.hpp"

namespace fraclab {

/// The assembled Gagliardo matrix failed the positive-semidefiniteness floor.
class AssemblyError : public std::runtime_error {
 public:
  AssemblyError(const std::string& what, double eigenvalue)
      : std::runtime_error(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const { return eigenvalue_; }

 private:
  double eigenvalue_;
};

/// Discrete quadratic forms for radial functions on a RadialGrid.
///
/// A nodal vector u stands for the function that equals u_1 on [0, r_1], is
/// piecewise linear in r on the grid, ramps linearly to zero on one extra
/// cell [r_M, r_G] (r_G / r_M equal to the last grid ratio) and vanishes
/// beyond. On that function
///   uᵀ A u       = C_{n,s} ∬ (u(x)-u(y))² / |x-y|^{n+2s} dx dy  (= ‖u‖²_{Ḣ^s}),
///   Σ hardy_i u_i² ≈ ∫ u² |x|^{-2s} dx,
///   Σ mass_i |u_i|^q ≈ ∫ |u|^q dx,
/// the last two by lumping against the hat functions.
struct QuadraticFormAssembly {
  GridPtr grid;
  double ghost_radius = 0.0;
  Eigen::MatrixXd gagliardo;
  Eigen::VectorXd hardy;
  Eigen::VectorXd mass;
  /// PSD floor the matrix was checked against, relative to its norm.
  double assembly_tolerance = 1e-10;

  std::size_t size() const { return static_cast<std::size_t>(hardy.size()); }
  double energy(std::span<const double> u) const;
  double hardy_integral(std::span<const double> u) const;
  double lp_integral(std::span<const double> u, double q) const;
  /// uᵀAu - λ uᵀDu.
  double form(std::span<const double> u, double lambda) const;
};

using FormsPtr = std::shared_ptr<const QuadraticFormAssembly>;

/// Assembles (or fetches from the in-process cache) the forms on `grid`.
/// Throws AssemblyError when D^{-1/2} A D^{-1/2} has an eigenvalue below
/// -1e-10 times its norm.
FormsPtr assemble_forms(const GridPtr& grid);
/// Same; params must carry the grid's (n, s).
FormsPtr assemble_forms(const GridPtr& grid, const FracParams& params);

/// ‖u‖²_{Ḣ^s} / ∫ u² |x|^{-2s}. Throws DomainError for u ≡ 0.
double hardy_quotient(const RadialFunction& u);
double hardy_quotient(std::span<const double> u, const QuadraticFormAssembly& forms);

struct HardyMinimum {
  double value = 0.0;
  Eigen::VectorXd vector;  // minimiser, positive, max-normalised
};

/// Smallest generalised eigenvalue of A v = μ D v.
HardyMinimum min_hardy_quotient(const QuadraticFormAssembly& forms);

}  // namespace fraclab
