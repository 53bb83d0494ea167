#pragma once

#include <string>

#include "fraclab/constants.hpp"
#include "fraclab/extension.hpp"

namespace fraclab {

/// Terms of the Pohozaev identity on B_r and the half-sphere S_r^+.
struct PohozaevReport {
  double r = 0.0;
  double lhs_hardy = 0.0;     // κλ (2s-α)/2 ∫_{B_r} U²/|x|^α
  double lhs_power = 0.0;     // κ (n/(p+1) - (n-2s)/2) ∫_{B_r} |U|^{p+1}
  double sphere_gradient = 0.0;  // + (r/2) ∫_{S_r^+} t^{1-2s} |∇U|²
  double sphere_normal = 0.0;    // - r ∫_{S_r^+} t^{1-2s} (∂_ν U)²
  double boundary_hardy = 0.0;   // - (κλ r/2) ∫_{∂B_r} U²/|x|^α
  double boundary_power = 0.0;   // - (κ r/(p+1)) ∫_{∂B_r} |U|^{p+1}
  double sphere_mixed = 0.0;     // - ((n-2s)/2) ∫_{S_r^+} t^{1-2s} (∂_ν U) U
  double residual = 0.0;         // lhs sum - rhs sum
  double relative_residual = 0.0;  // |residual| over the summed magnitudes

  double lhs() const { return lhs_hardy + lhs_power; }
  double rhs() const { return sphere_gradient + sphere_normal + boundary_hardy + boundary_power + sphere_mixed; }
};

/// Requires r <= 0.5 min(r_max, t_max). Arc derivatives come from the
/// field's tensor interpolant (d_r and the weighted flux t^{1-2s} ∂_t U).
PohozaevReport pohozaev_terms(const ExtensionField& U, const FracParams& params, double r);

struct EnergyIdentity {
  double bulk = 0.0;      // ∫_{B_r^+} t^{1-2s} |∇U|²
  double arc = 0.0;       // ∫_{S_r^+} t^{1-2s} (∂_ν U) U
  double hardy = 0.0;     // κλ ∫_{B_r} U²/|x|^α
  double power = 0.0;     // κ ∫_{B_r} |U|^{p+1}
  double residual = 0.0;  // bulk - (arc + hardy + power)
  double relative_residual = 0.0;
};

EnergyIdentity energy_identity(const ExtensionField& U, const FracParams& params, double r);

struct NonexistenceCase {
  /// 1, 2, 3 for the three cases of the nonexistence statement; 0 outside.
  int which = 0;
  std::string label;
  std::string explanation;
  double hardy_coefficient = 0.0;  // κλ (2s-α)/2
  double power_coefficient = 0.0;  // κ (n/(p+1) - (n-2s)/2)
};

NonexistenceCase classify_nonexistence(const FracParams& params);

}  // namespace fraclab
