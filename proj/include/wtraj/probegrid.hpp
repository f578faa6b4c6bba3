#pragma once

#include <string>
#include <vector>

#include "wtraj/weakval.hpp"

namespace wtraj {

/// A weakly coupled pointer sitting at x (and, for display, z) that
/// interacts with the particle at fire_time.
///
/// The coupling carries the inverse units of the weak value it reads (m for
/// the spatial projector) so that coupling * weak value is dimensionless.
struct Probe {
  std::string id;
  double x = 0.0;
  double z = 0.0;
  double fire_time = 0.0;
  double coupling = 0.0;
  InteractionProfile profile;
};

struct PointerReadout {
  std::string probe_id;
  double shift = 0.0;  ///< coupling * Re(weak value)
  WeakValueRecord weak_value;
};

struct WeakTrajectory {
  std::vector<std::string> probe_ids;  ///< time ordered; several ids may share a slice
  std::string label;                   ///< slit1, slit2, or unlabeled
};

struct GridOptions {
  /// First-order validity: coupling * |weak value| must stay below this.
  double first_order_guard = 0.3;
  WeakValueOptions weak;
};

/// Rectangular grid of identical probes; z is derived from t as z = v_z t.
std::vector<Probe> make_probe_grid(double x_min, double x_max, int x_count, double t_min,
                                   double t_max, int t_count, double coupling,
                                   const InteractionProfile& profile, double longitudinal_speed);

/// First-order pointer shifts for every probe. Probes never back-react on
/// the state; cross terms between probes are dropped.
std::vector<PointerReadout> evaluate_grid(const StateSpec& pre, const StateSpec& post,
                                          const std::vector<Probe>& probes,
                                          const UnitSystem& units, const GridOptions& options = {});

struct Postselection {
  double x_f = 0.0;       ///< m
  double momentum = 0.0;  ///< collimation momentum p', kg m/s
};

/// For a pre-state of narrow packets: the (x_f, p') pairs at t_f for which
/// post-selection of a single collimated Gaussian can succeed, one per component.
std::vector<Postselection> admissible_postselections(const StateSpec& pre, double t_f,
                                                     const UnitSystem& units);

struct TrajectoryOptions {
  double threshold_rel = 0.05;
  double linking_radius = 0.0;  ///< m
  /// Slit centres used to label trajectories; a chain whose first node lies
  /// within linking_radius of one of them gets that slit's label.
  std::vector<std::pair<int, double>> slit_centers;
  /// Enumeration stops after this many root-to-leaf chains.
  std::size_t max_trajectories = 4096;
};

/// Links above-threshold probes into chains.
///
/// Probes with |shift| >= threshold_rel * max|shift| are grouped per firing
/// time into clusters of x-neighbours no further apart than linking_radius.
/// Clusters in consecutive time slices are joined when some member of one lies
/// within linking_radius of some member of the other; every root-to-leaf path through the
/// resulting graph is one trajectory, so branches and merges give
/// superposed trajectories that share probes.
std::vector<WeakTrajectory> extract_trajectories(const std::vector<PointerReadout>& readouts,
                                                 const TrajectoryOptions& options);

}  // namespace wtraj
