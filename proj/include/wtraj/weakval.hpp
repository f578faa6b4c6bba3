#pragma once

#include <optional>
#include <string>

#include "wtraj/qcore.hpp"

namespace wtraj {

/// Spatial profile Γ of a weak coupling.
///
/// A point profile is the δ-function coupling. A Gaussian profile is the
/// unit-area window exp(-(x - x_a - offset)² / 2w²) / (√(2π) w), so both
/// kinds give projector weak values in 1/m and tend to each other as w -> 0.
struct InteractionProfile {
  enum class Kind { point, gaussian };
  Kind kind = Kind::point;
  double width = 0.0;   ///< m, gaussian kind only
  double center = 0.0;  ///< offset of the window centre from the probe position, m

  static InteractionProfile point() { return {}; }
  static InteractionProfile gaussian(double width) { return {Kind::gaussian, width, 0.0}; }

  void validate() const;
  /// Γ as a Gaussian form about the probe position x_a (gaussian kind only).
  GaussianForm form(double x_a) const;
  std::string describe() const;
};

enum class WeakOperator { projector, momentum };
enum class SlitConfig { both, slit1, slit2 };

std::string to_string(WeakOperator op);
std::string to_string(SlitConfig config);
/// both, slit1 or slit2 according to the slit tags present in a pre-state.
SlitConfig slit_config_of(const StateSpec& pre);
/// The pre-state restricted to one configuration.
StateSpec restrict_to(const StateSpec& pre, SlitConfig config);

struct ProbePoint {
  double x = 0.0;  ///< m
  double t = 0.0;  ///< s
};

struct WeakValueRecord {
  Complex value;  ///< 1/m for the projector, kg m/s for the momentum
  WeakOperator op = WeakOperator::projector;
  double probe_position = 0.0;
  double probe_time = 0.0;
  SlitConfig slit_config = SlitConfig::both;
};

struct WeakValueOptions {
  /// Overlaps with |⟨χ|ψ⟩| < eps_den ‖χ‖‖ψ‖ are refused.
  double eps_den = 1e-12;
};

/// ⟨post(t)|pre(t)⟩ in closed form, summed over component pairs.
Complex overlap(const StateSpec& post, const StateSpec& pre, double t, const UnitSystem& units);

/// The same overlap by adaptive quadrature on the truncated support.
Complex overlap_quadrature(const StateSpec& post, const StateSpec& pre, double t,
                           const UnitSystem& units);

/// Overlap at t, throwing VanishingOverlapError below the relative threshold.
/// `what` names the denominator in the error message.
Complex checked_overlap(const StateSpec& post, const StateSpec& pre, double t,
                        const UnitSystem& units, const WeakValueOptions& options,
                        const std::string& what = "pre/post overlap");

/// Weak value of the spatial projector at the probe.
WeakValueRecord projector_weak_value(const StateSpec& pre, const StateSpec& post,
                                     ProbePoint probe, const InteractionProfile& profile,
                                     const UnitSystem& units,
                                     const WeakValueOptions& options = {});

/// ∫ (Π_x)^w dx over the truncated support, by quadrature. Equals 1.
Complex projector_weak_value_sum_rule(const StateSpec& pre, const StateSpec& post, double t,
                                      const UnitSystem& units,
                                      const WeakValueOptions& options = {});

/// Weak value of the transverse momentum -iħ∂_x at the probe.
WeakValueRecord momentum_weak_value(const StateSpec& pre, const StateSpec& post, ProbePoint probe,
                                    const InteractionProfile& profile, const UnitSystem& units,
                                    const WeakValueOptions& options = {});

/// Denominator used by per_slit_component.
enum class Normalization {
  two_slit,     ///< ⟨χ|ψ⟩ of the full pre-state: gives k^{jl}
  single_slit,  ///< ⟨χ|ψ^l⟩ of the slit-l pre-state alone: gives κ^{jl}
};

/// Momentum weak value restricted to the pre-state components of slit l and
/// (optionally) to post-state component j (0-based index into post.components).
///
///   two_slit:    c_j* w_l ⟨Ξ_j|x_a⟩(-iħ∂)ψ^l(x_a) / ⟨χ|ψ⟩
///   single_slit: c_j*     ⟨Ξ_j|x_a⟩(-iħ∂)ψ^l(x_a) / ⟨χ|ψ^l⟩
///
/// Summing over l and j reproduces momentum_weak_value for the two-slit
/// denominator; summing over j alone gives the slit-l weak value κ^l.
Complex per_slit_component(const StateSpec& pre, const StateSpec& post, int slit,
                           std::optional<std::size_t> post_component, ProbePoint probe,
                           const InteractionProfile& profile, const UnitSystem& units,
                           Normalization normalization, const WeakValueOptions& options = {});

/// R_l = ⟨χ|w_l ψ^l⟩ / ⟨χ|ψ⟩ at time t.
Complex amplitude_ratio(const StateSpec& pre, const StateSpec& post, int slit, double t,
                        const UnitSystem& units, const WeakValueOptions& options = {});

}  // namespace wtraj
