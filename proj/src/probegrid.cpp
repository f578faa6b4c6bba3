#include "wtraj/probegrid.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <tuple>

#include "wtraj/error.hpp"

namespace wtraj {

std::vector<Probe> make_probe_grid(double x_min, double x_max, int x_count, double t_min,
                                   double t_max, int t_count, double coupling,
                                   const InteractionProfile& profile, double longitudinal_speed) {
  if (x_count < 1 || t_count < 1) throw PreconditionError("probe grid needs positive counts");
  std::vector<Probe> probes;
  probes.reserve(static_cast<std::size_t>(x_count) * static_cast<std::size_t>(t_count));
  auto node = [](double lo, double hi, int n, int i) {
    return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  for (int it = 0; it < t_count; ++it) {
    const double t = node(t_min, t_max, t_count, it);
    for (int ix = 0; ix < x_count; ++ix) {
      const double x = node(x_min, x_max, x_count, ix);
      std::ostringstream id;
      id << "M" << ix << "_" << it;
      probes.push_back({id.str(), x, longitudinal_speed * t, t, coupling, profile});
    }
  }
  return probes;
}

std::vector<PointerReadout> evaluate_grid(const StateSpec& pre, const StateSpec& post,
                                          const std::vector<Probe>& probes, const UnitSystem& u,
                                          const GridOptions& options) {
  std::vector<PointerReadout> out;
  out.reserve(probes.size());
  for (const Probe& p : probes) {
    WeakValueRecord wv =
        projector_weak_value(pre, post, {p.x, p.fire_time}, p.profile, u, options.weak);
    const double strength = std::abs(p.coupling) * std::abs(wv.value);
    if (!(strength < options.first_order_guard)) {
      std::ostringstream os;
      os << "probe " << p.id << " violates the first-order guard: |coupling * weak value| = "
         << strength << " >= " << options.first_order_guard;
      throw FirstOrderGuardError(p.id, os.str());
    }
    out.push_back({p.id, p.coupling * wv.value.real(), wv});
  }
  return out;
}

std::vector<Postselection> admissible_postselections(const StateSpec& pre, double t_f,
                                                     const UnitSystem& u) {
  pre.validate();
  std::vector<Postselection> out;
  for (const StateComponent& c : pre.components) {
    out.push_back({c.packet.centroid(t_f, u), c.packet.mean_momentum});
  }
  return out;
}

namespace {

struct Cluster {
  double time = 0.0;
  double centroid = 0.0;
  double lo = 0.0, hi = 0.0;
  std::vector<std::string> ids;
  std::vector<std::size_t> next;
  bool has_prev = false;
};

}  // namespace

std::vector<WeakTrajectory> extract_trajectories(const std::vector<PointerReadout>& readouts,
                                                 const TrajectoryOptions& options) {
  double max_shift = 0.0;
  for (const auto& r : readouts) max_shift = std::max(max_shift, std::abs(r.shift));
  if (!(max_shift > 0.0)) return {};
  const double cut = options.threshold_rel * max_shift;

  // time -> (x, |shift|, id), sorted by x.
  std::map<double, std::vector<std::tuple<double, double, std::string>>> slices;
  for (const auto& r : readouts) {
    if (std::abs(r.shift) >= cut && std::abs(r.shift) > 0.0) {
      slices[r.weak_value.probe_time].emplace_back(r.weak_value.probe_position, std::abs(r.shift),
                                                   r.probe_id);
    }
  }

  std::vector<Cluster> clusters;
  std::vector<std::vector<std::size_t>> by_slice;
  for (auto& [t, members] : slices) {
    std::sort(members.begin(), members.end());
    std::vector<std::size_t> here;
    double weight = 0.0;
    double moment = 0.0;
    Cluster current{t, 0.0, 0.0, 0.0, {}, {}, false};
    double last_x = 0.0;
    auto flush = [&] {
      if (current.ids.empty()) return;
      current.centroid = moment / weight;
      here.push_back(clusters.size());
      clusters.push_back(current);
      current = Cluster{t, 0.0, 0.0, 0.0, {}, {}, false};
      weight = moment = 0.0;
    };
    for (const auto& [x, s, id] : members) {
      if (!current.ids.empty() && x - last_x > options.linking_radius) flush();
      if (current.ids.empty()) current.lo = x;
      current.hi = x;
      current.ids.push_back(id);
      weight += s;
      moment += s * x;
      last_x = x;
    }
    flush();
    by_slice.push_back(std::move(here));
  }

  for (std::size_t k = 0; k + 1 < by_slice.size(); ++k) {
    for (std::size_t a : by_slice[k]) {
      for (std::size_t b : by_slice[k + 1]) {
        const Cluster& ca = clusters[a];
        const Cluster& cb = clusters[b];
        if (cb.lo - ca.hi <= options.linking_radius && ca.lo - cb.hi <= options.linking_radius) {
          clusters[a].next.push_back(b);
          clusters[b].has_prev = true;
        }
      }
    }
  }

  auto label_of = [&](const Cluster& root) -> std::string {
    for (const auto& [slit, x] : options.slit_centers) {
      if (std::abs(root.centroid - x) <= options.linking_radius) return "slit" + std::to_string(slit);
    }
    return "unlabeled";
  };

  std::vector<WeakTrajectory> out;
  std::vector<std::size_t> path;
  std::function<void(std::size_t)> walk = [&](std::size_t node) {
    if (out.size() >= options.max_trajectories) return;
    path.push_back(node);
    if (clusters[node].next.empty()) {
      WeakTrajectory tr;
      tr.label = label_of(clusters[path.front()]);
      for (std::size_t n : path) {
        tr.probe_ids.insert(tr.probe_ids.end(), clusters[n].ids.begin(), clusters[n].ids.end());
      }
      out.push_back(std::move(tr));
    } else {
      for (std::size_t n : clusters[node].next) walk(n);
    }
    path.pop_back();
  };
  for (const auto& slice : by_slice) {
    for (std::size_t n : slice) {
      if (!clusters[n].has_prev) walk(n);
    }
  }
  return out;
}

}  // namespace wtraj
