#pragma once

#include <complex>
#include <string>
#include <vector>

#include "wtraj/gaussian_form.hpp"
#include "wtraj/quadrature.hpp"
#include "wtraj/units.hpp"

namespace wtraj {

/// Double-slit geometry. Times are measured from emission at the source,
/// which sits at x = 0; the slits are crossed at slit_time.
struct SlitGeometry {
  double half_separation = 0.0;     ///< x0, m
  double slit_width = 0.0;          ///< c, m (Gaussian window parameter)
  double slit_time = 0.0;           ///< tau, s; 0 when the state is prepared at the slits
  double screen_distance = 0.0;     ///< D, m
  double longitudinal_speed = 0.0;  ///< p_z / m, m/s

  void validate() const;

  /// Flight time from the slit plane to the screen, D / (p_z/m).
  double flight_time() const { return screen_distance / longitudinal_speed; }
  /// Arrival time at the screen on the source clock.
  double screen_time() const { return slit_time + flight_time(); }
  /// D much larger than the slit width.
  bool fraunhofer() const { return screen_distance > 1e3 * slit_width; }
};

/// Auxiliary quantities of the closed-form slit propagator at time t_f.
struct SlitAuxiliary {
  double delta_x_sq = 0.0;  ///< (Δx)^2, m^2
  double alpha = 0.0;       ///< ħ / (m c^2), 1/s
  double beta = 0.0;        ///< m / 2ħ, s/m^2
  double eta = 0.0;         ///< dimensionless
};

SlitAuxiliary slit_auxiliary(double t_f, const SlitGeometry& geometry, const UnitSystem& units);

/// +1 for slit 1 (centred on +x0), -1 for slit 2 (centred on -x0).
int slit_sign(int slit);

enum class EvolutionRole { forward, backward };

/// Normalized Gaussian wave packet
///   (2π w²)^(-1/4) exp(-(x - center)² / 4w² + i p (x - center) / ħ)
/// at reference_time, freely evolved to other times. Forward packets are
/// pre-selected states (evaluated at t >= reference_time); backward packets
/// are post-selected states (evaluated at t <= reference_time).
struct GaussianPacket {
  double center = 0.0;
  double width = 1.0;
  double mean_momentum = 0.0;
  double reference_time = 0.0;
  EvolutionRole role = EvolutionRole::forward;

  void validate() const;
  /// Throws PreconditionError if t is on the wrong side of reference_time.
  void check_time(double t) const;

  /// Position of the density maximum at time t.
  double centroid(double t, const UnitSystem& units) const;
  /// Standard deviation of |ψ|² at time t.
  double spread(double t, const UnitSystem& units) const;
};

/// Amplitude of the evolved packet at (x, t).
Complex packet_value(const GaussianPacket& packet, double x, double t, const UnitSystem& units);

/// d/dx of the evolved packet at (x, t).
Complex packet_derivative(const GaussianPacket& packet, double x, double t,
                          const UnitSystem& units);

/// The evolved packet at time t as a log-quadratic form.
GaussianForm packet_form(const GaussianPacket& packet, double t, const UnitSystem& units);

enum class StateRole { pre, post };

struct StateComponent {
  Complex weight{1.0, 0.0};
  GaussianPacket packet;
  int slit = 0;  ///< 1 or 2 when the component emanates from a slit, 0 otherwise
};

/// Weighted superposition of Gaussian packets.
struct StateSpec {
  std::vector<StateComponent> components;
  StateRole role = StateRole::pre;

  /// Throws PreconditionError on an empty list, all-zero weights, or a
  /// packet whose evolution role disagrees with the state role.
  void validate() const;
  void check_time(double t) const;

  /// Components belonging to the given slit (1 or 2); weights are kept.
  StateSpec only_slit(int slit) const;
  bool has_slit(int slit) const;
};

/// Weighted sum of packet_value over the components.
Complex state_value(const StateSpec& state, double x, double t, const UnitSystem& units);
Complex state_derivative(const StateSpec& state, double x, double t, const UnitSystem& units);

/// ⟨state|state⟩, evaluated in closed form (time independent).
double state_norm_sq(const StateSpec& state, const UnitSystem& units);

/// Interval holding every component of every state to within
/// quad::kTruncationWidths amplitude widths at time t.
quad::Interval support(const std::vector<const StateSpec*>& states, double t,
                       const UnitSystem& units, double n_widths = quad::kTruncationWidths);

/// Free-particle propagator K(x_to, t_to | x_from, t_from), principal square-root branch.
Complex free_propagator(double x_to, double t_to, double x_from, double t_from,
                        const UnitSystem& units);

/// Amplitude to reach (x_f, t_f) from a point source at (0, 0) through
/// Gaussian slit j crossed at geometry.slit_time.
Complex slit_propagator(int slit, double x_f, double t_f, const SlitGeometry& geometry,
                        const UnitSystem& units);

/// Modulus of the closed-form slit propagator written in terms of Δx.
double slit_propagator_envelope(int slit, double x_f, double t_f, const SlitGeometry& geometry,
                                const UnitSystem& units);

/// Far-field two-slit pattern cos²(2 p_z x0 x_f / ħD) exp(-x_f²/Δx²), with
/// Δx taken at the screen. For slit_time = 0 (state prepared at the slits)
/// Δx² = 2c² + ħ²T²/(2m²c²), T the flight time.
double fraunhofer_pattern(double x_f, const SlitGeometry& geometry, const UnitSystem& units);

/// Controlled two-slit pre-state: Gaussians of width d centred on ±x0 at
/// t = 0 with momenta p1 and p2, weights 1/√2.
StateSpec two_slit_state(double x0, double width, double p1, double p2);

}  // namespace wtraj
