#pragma once

namespace wtraj {

/// Reduced Planck constant (CODATA 2018), J s.
inline constexpr double kHbarSI = 1.054571817e-34;

/// Physical constants used by the propagators.
struct UnitSystem {
  double hbar = kHbarSI;  ///< J s
  double mass = 0.0;      ///< kg
  bool dimensionless = false;

  static UnitSystem si(double mass_kg) { return {kHbarSI, mass_kg, false}; }
  /// hbar = m = 1; convenient for property tests.
  static UnitSystem natural() { return {1.0, 1.0, true}; }

  /// hbar / m, the diffusion constant of free evolution.
  double hbar_over_mass() const { return hbar / mass; }

  /// Throws PreconditionError unless hbar > 0 and mass > 0.
  void validate() const;
};

}  // namespace wtraj
