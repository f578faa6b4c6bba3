#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "wtraj/weakval.hpp"

namespace wtraj {

// Four-crystal photonic protocol.
//
// Each birefringent crystal couples the transverse momentum at its position
// to the photon polarization; after post-selection the polarization reads
//   e^{-iθ}|H> + e^{+iθ}|V>,   θ = Σ_a ± γ_a (k_a)^w,
// and the accumulated rotation is extracted from diagonal-basis intensities.

enum class CrystalId { A, B, C, D };
std::string to_string(CrystalId id);

struct Crystal {
  CrystalId id = CrystalId::A;
  double x = 0.0;         ///< m
  double t = 0.0;         ///< interaction time, s
  double coupling = 0.0;  ///< γ, s/(kg m): γ k is an angle
  bool phase_shifted = false;
};

struct PolarizationState {
  Complex h{1.0, 0.0};
  Complex v{0.0, 0.0};

  /// (|H> + |V>)/√2
  static PolarizationState diagonal();
  PolarizationState scaled(Complex zeta) const { return {zeta * h, zeta * v}; }
};

/// Intensities in the diagonal {|↗>,|↙>} and circular {|R>,|L>} bases.
struct Intensities {
  double diagonal = 0.0;
  double antidiagonal = 0.0;
  double right = 0.0;
  double left = 0.0;
};

Intensities intensities(const PolarizationState& pol);

/// (I↗ - I↙)/(I↗ + I↙) = cos 2θ for a real rotation θ.
double contrast(const PolarizationState& pol);

/// (I_R - I_L)/(I_R + I_L) = sin 2θ for a real rotation θ; carries the sign
/// of the rotation that the diagonal contrast loses.
double circular_contrast(const PolarizationState& pol);

/// amp_H <- e^{-iθ} amp_H, amp_V <- e^{+iθ} amp_V.
PolarizationState apply_crystal(const PolarizationState& pol, Complex theta);
/// Same, with θ negated for a phase-shifted crystal.
PolarizationState apply_crystal(const PolarizationState& pol, Complex theta, bool phase_shifted);

enum class Scheme { two_slit, single_slit_1, single_slit_2 };
std::string to_string(Scheme scheme);

struct ContrastSet {
  int step = 1;
  Scheme scheme = Scheme::two_slit;
  double contrast = 1.0;
  std::optional<double> circular;  ///< circular-basis contrast when read out
};

/// γ_a (k_a)^w for each crystal (complex in exact mode, real in idealized mode).
struct Rotations {
  Complex A{}, B{}, C{}, D{};
};

struct StepResult {
  PolarizationState state;
  Intensities intensity;
  ContrastSet contrast;
};

/// Step n of the two-slit sequence: 1 = A, 2 = A+C, 3 = A+C+B+D,
/// 4 = step 3 with a π phase shifter on B.
StepResult run_two_slit_step(int step, const Rotations& rotations, Complex zeta);

/// Single-slit scheme n: 1 = slit 1 with B+D, 2 = slit 1 with D phase
/// shifted, 3 and 4 the same with slit 2. Only rotations.B/D are used.
StepResult run_single_slit_step(int step, const Rotations& rotations, Complex zeta);

struct Couplings {
  double A = 0.0, B = 0.0, C = 0.0, D = 0.0;
};

struct TwoSlitRecovery {
  double k_A = 0.0, k_C = 0.0, k_B = 0.0, k_D = 0.0;
};

struct SingleSlitRecovery {
  double kappa_B1 = 0.0, kappa_D1 = 0.0, kappa_B2 = 0.0, kappa_D2 = 0.0;
};

struct InversionOptions {
  /// Recovered rotations must satisfy |γ k| < branch_limit.
  double branch_limit = 0.7853981633974483;  // π/4
  /// Contrasts within this distance outside [-1, 1] are clamped as round-off.
  double contrast_slack = 1e-12;
};

/// Half the accumulated rotation angle from one contrast reading:
/// ½ atan2(circular, C) when the circular contrast is present, else ½ arccos C.
double half_angle(const ContrastSet& c, const InversionOptions& options = {});

/// Weak values of A, C, B, D from the four two-slit contrasts.
TwoSlitRecovery invert_two_slit(const std::array<ContrastSet, 4>& contrasts,
                                const Couplings& couplings, const InversionOptions& options = {});

/// κ_B^l, κ_D^l from the four single-slit contrasts.
SingleSlitRecovery invert_single_slit(const std::array<ContrastSet, 4>& contrasts,
                                      const Couplings& couplings,
                                      const InversionOptions& options = {});

struct PathTerms {
  Complex k_B11{}, k_B12{}, k_D21{}, k_D22{};
  Complex closure_B{};  ///< k_B - (k_B11 + k_B12)
  Complex closure_D{};  ///< k_D - (k_D21 + k_D22)
};

/// k_a^{jl} = κ_a^l R_l with R_l = ⟨χ|ψ^l⟩/⟨χ|ψ⟩.
PathTerms parse_paths(Complex k_B, Complex k_D, Complex kappa_B1, Complex kappa_B2,
                      Complex kappa_D1, Complex kappa_D2, Complex ratio_1, Complex ratio_2);

/// R_l from the two-slit identity k_a = κ_a^1 R_1 + κ_a^2 R_2 written for B and D.
std::array<Complex, 2> ratios_from_weak_values(Complex k_B, Complex k_D, Complex kappa_B1,
                                               Complex kappa_B2, Complex kappa_D1,
                                               Complex kappa_D2);

enum class RotationMode {
  idealized,  ///< θ = γ Re k^w, the regime the contrast inversion assumes
  exact,      ///< θ = γ k^w with complex weak values
};

struct ProtocolSetup {
  StateSpec pre;   ///< two-slit pre-state, components tagged with slits 1 and 2
  StateSpec post;  ///< post-state, component Ξ_j tagged with the slit it is collimated toward
  std::array<Crystal, 4> crystals{};  ///< A, B, C, D in that order
  UnitSystem units;
  double t_f = 0.0;
  InteractionProfile profile;
  RotationMode mode = RotationMode::idealized;
  WeakValueOptions weak;
  InversionOptions inversion;
  /// Read the circular-basis contrast alongside the diagonal one.
  bool circular_readout = true;

  void validate() const;
  const Crystal& crystal(CrystalId id) const;
  Couplings couplings() const;
};

struct CrystalWeakValues {
  Complex A{}, B{}, C{}, D{};
};

/// Momentum weak value at each crystal for the given pre-state configuration.
CrystalWeakValues crystal_weak_values(const ProtocolSetup& setup, SlitConfig config);

Rotations rotations(const ProtocolSetup& setup, const CrystalWeakValues& k);

/// ζ = ⟨χ(t_f)|ψ(t_f)⟩ / √2 for the given configuration.
Complex zeta(const ProtocolSetup& setup, SlitConfig config);

/// One step of the two-slit sequence on the chosen pre-state configuration.
StepResult run_step(const ProtocolSetup& setup, int step, SlitConfig config = SlitConfig::both);

struct SignatureRow {
  SlitConfig config = SlitConfig::both;
  TwoSlitRecovery recovered;
};

struct ProtocolReport {
  std::array<StepResult, 4> two_slit{};
  std::array<StepResult, 4> single_slit{};
  CrystalWeakValues weak_values;  ///< both slits open
  std::array<Complex, 4> kappa{};  ///< κ_B^1, κ_D^1, κ_B^2, κ_D^2
  TwoSlitRecovery recovered;
  SingleSlitRecovery recovered_single;
  std::array<Complex, 2> ratios{};  ///< R_1, R_2
  PathTerms paths;                  ///< from parse_paths
  PathTerms direct_paths;           ///< k^{jl} evaluated from their definition
  std::array<SignatureRow, 3> signature{};  ///< both open, slit 1 closed, slit 2 closed
};

/// Recovered values are NaN when any crystal coupling is zero.
ProtocolReport protocol_report(const ProtocolSetup& setup);

}  // namespace wtraj
