#pragma once

#include <memory>
#include <span>
#include <vector>

#include "fraclab/extension.hpp"

namespace fraclab {

/// Colatitude mesh 0 = φ_0 < ... < φ_K = π/2 on the upper half-sphere S^n_+,
/// φ measured from e_{n+1}. Nodes are stored through y = π/2 - φ, the
/// distance to the equator, so that the grading toward the degenerate
/// boundary keeps full relative precision.
class AngularMesh {
 public:
  /// y must decrease from π/2 to 0.
  explicit AngularMesh(std::vector<double> y);

  /// K elements: half of them geometric on [y_min, 0.05] with
  /// y_min = min(1e-8, 10^{-5/s}), one cell [0, y_min], the rest uniform
  /// up to the pole.
  static std::shared_ptr<const AngularMesh> graded(std::size_t K, double s);

  std::size_t size() const { return y_.size(); }
  std::size_t elements() const { return y_.size() - 1; }
  double phi(std::size_t j) const;
  double codist(std::size_t j) const { return y_[j]; }
  std::span<const double> codist() const { return y_; }
  /// Every other node (K must be even).
  std::shared_ptr<const AngularMesh> coarsened() const;
  /// Nodes with φ within the last 1% of the arc.
  std::size_t boundary_count() const;

 private:
  std::vector<double> y_;
};

using MeshPtr = std::shared_ptr<const AngularMesh>;

/// Tridiagonal forms for axisymmetric ψ(φ) times a degree-ℓ harmonic on
/// S^{n-1}, with w = sin^{n-1}φ cos^{1-2s}φ:
///   stiffness  ∫ w ψ'φ',   mass  ∫ w ψφ,   angular  ∫ w ψφ / sin²φ.
/// The |S^{n-1}| factor common to all terms is left out.
struct AngularForms {
  int n = 0;
  double s = 0.0;
  int ell = 0;
  MeshPtr mesh;
  std::vector<double> stiff_d, stiff_o, mass_d, mass_o, ang_d, ang_o;
  /// Element e joins nodes e (hi, toward the pole) and e+1 (lo). Kept apart
  /// from the assembled rows because condensation on the 1e-10 wide cells
  /// at the equator cancels catastrophically once k is summed in.
  struct Cell {
    double k = 0.0;                      // ∫w / h²
    double m_hi = 0.0, m_mid = 0.0, m_lo = 0.0;
    double g_hi = 0.0, g_mid = 0.0, g_lo = 0.0;
  };
  std::vector<Cell> cells;

  /// ψ ↦ stiffness + ((n-2s)/2)² mass + ℓ(ℓ+n-2) angular, before the
  /// boundary term.
  double bulk(std::span<const double> psi) const;
};

/// ell > 0 imposes ψ(0) = 0 at the pole and needs n >= 2.
AngularForms assemble_angular(int n, double s, const MeshPtr& mesh, int ell = 0);

struct EigenResult {
  int n = 0;
  double s = 0.0;
  double lambda = 0.0;
  double mu1 = 0.0;
  std::vector<double> psi1;  // on the mesh, ψ(π/2) = 1
  /// |μ(K) - μ(K/2)| / 3, second-order Richardson on the coarsened mesh.
  double estimate = 0.0;
  MeshPtr mesh;

  /// ψ₁ at colatitude given through y = π/2 - φ (cubic in y^{2s}).
  double psi_at(double y) const;
};

/// μ₁(λ) = min bulk(ψ) / (κ_s ψ(π/2)²) - λ. The minimiser with ψ(π/2) = 1
/// solves the interior rows of the tridiagonal system; the boundary term
/// only shifts the quotient, so μ₁(λ) + λ does not depend on λ.
EigenResult solve_mu1(double lambda, const AngularForms& forms);

/// W₁(X) = |X|^{(2s-n)/2} ψ₁(X/|X|) sampled on the half-strip.
ExtensionField build_W1(const EigenResult& res, const StripPtr& grid);

/// Smooth cutoff η with η = 0 on [0, 1/2], η = 1 on [1, ∞).
double cutoff(double l);
/// η_ε(l) = η(l/ε) for l <= 1, η(1/(εl)) beyond; η_ε(l) = η_ε(1/l).
double cutoff_eps(double l, double eps);

struct WEpsResult {
  ExtensionField field;
  double energy = 0.0;         // extension_energy of the sampled field
  double energy_polar = 0.0;   // same integral in polar form from the 1D forms
  double hardy = 0.0;          // ∫ W_ε(x,0)² |x|^{-2s} dx
  double quotient = 0.0;       // (energy - λκ hardy) / (κ hardy)
  double quotient_polar = 0.0;
};

/// Requires the strip to contain |X| <= 2/ε and r_1 < ε/2.
WEpsResult w_eps_family(const EigenResult& res, double eps, const StripPtr& grid);

}  // namespace fraclab
