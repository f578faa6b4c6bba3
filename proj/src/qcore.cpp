#include "wtraj/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wtraj/error.hpp"

namespace wtraj {

namespace {

constexpr Complex kI{0.0, 1.0};

// Complex variance parameter w² + iħs/2m of a packet evolved by s.
Complex complex_width(const GaussianPacket& p, double s, const UnitSystem& u) {
  return {p.width * p.width, u.hbar * s / (2.0 * u.mass)};
}

double log_norm(double width) {
  return -0.25 * std::log(2.0 * std::numbers::pi * width * width);
}

}  // namespace

void SlitGeometry::validate() const {
  if (!(half_separation > 0.0)) throw PreconditionError("geometry: half_separation must be positive");
  if (!(slit_width > 0.0)) throw PreconditionError("geometry: slit_width must be positive");
  if (!(screen_distance > 0.0)) throw PreconditionError("geometry: screen_distance must be positive");
  if (!(longitudinal_speed > 0.0))
    throw PreconditionError("geometry: longitudinal_speed must be positive");
  if (!(slit_time >= 0.0)) throw PreconditionError("geometry: slit_time must be non-negative");
}

SlitAuxiliary slit_auxiliary(double t_f, const SlitGeometry& g, const UnitSystem& u) {
  if (!(g.slit_time > 0.0) || !(t_f > g.slit_time))
    throw DegenerateTimeError("slit propagator needs t_f > slit_time > 0");
  const double c = g.slit_width;
  const double tau = g.slit_time;
  const double geometric = c * t_f / tau;
  const double diffractive = u.hbar * (t_f - tau) / (u.mass * c);
  return {geometric * geometric + diffractive * diffractive, u.hbar / (u.mass * c * c),
          u.mass / (2.0 * u.hbar), geometric / diffractive};
}

int slit_sign(int slit) {
  if (slit == 1) return 1;
  if (slit == 2) return -1;
  throw PreconditionError("slit index must be 1 or 2");
}

void GaussianPacket::validate() const {
  if (!(width > 0.0)) throw PreconditionError("packet width must be positive");
}

void GaussianPacket::check_time(double t) const {
  if (role == EvolutionRole::forward && t < reference_time)
    throw PreconditionError("forward packet evaluated before its reference time");
  if (role == EvolutionRole::backward && t > reference_time)
    throw PreconditionError("backward packet evaluated after its reference time");
}

double GaussianPacket::centroid(double t, const UnitSystem& u) const {
  return center + mean_momentum / u.mass * (t - reference_time);
}

double GaussianPacket::spread(double t, const UnitSystem& u) const {
  return std::abs(complex_width(*this, t - reference_time, u)) / width;
}

Complex packet_value(const GaussianPacket& p, double x, double t, const UnitSystem& u) {
  p.check_time(t);
  const double s = t - p.reference_time;
  const Complex sigma = complex_width(p, s, u);
  const double dx = x - p.centroid(t, u);
  const double k = p.mean_momentum / u.hbar;
  const Complex exponent = -dx * dx / (4.0 * sigma) +
                           kI * (k * dx + p.mean_momentum * k * s / (2.0 * u.mass));
  return std::exp(log_norm(1.0) + exponent) / std::sqrt(sigma / p.width);
}

Complex packet_derivative(const GaussianPacket& p, double x, double t, const UnitSystem& u) {
  const double s = t - p.reference_time;
  const Complex sigma = complex_width(p, s, u);
  const double dx = x - p.centroid(t, u);
  return packet_value(p, x, t, u) * (-dx / (2.0 * sigma) + kI * p.mean_momentum / u.hbar);
}

GaussianForm packet_form(const GaussianPacket& p, double t, const UnitSystem& u) {
  p.check_time(t);
  const double s = t - p.reference_time;
  const Complex sigma = complex_width(p, s, u);
  const double k = p.mean_momentum / u.hbar;
  GaussianForm f;
  f.origin = p.centroid(t, u);
  f.a = 1.0 / (4.0 * sigma);
  f.b = kI * k;
  f.c = log_norm(1.0) - 0.5 * std::log(sigma / p.width) +
        kI * (p.mean_momentum * k * s / (2.0 * u.mass));
  return f;
}

void StateSpec::validate() const {
  if (components.empty()) throw PreconditionError("state has no components");
  bool any_weight = false;
  const EvolutionRole expected =
      role == StateRole::pre ? EvolutionRole::forward : EvolutionRole::backward;
  for (const auto& c : components) {
    c.packet.validate();
    if (c.packet.role != expected)
      throw PreconditionError("packet evolution role does not match the state role");
    if (c.slit != 0 && c.slit != 1 && c.slit != 2)
      throw PreconditionError("component slit tag must be 0, 1 or 2");
    any_weight = any_weight || std::abs(c.weight) > 0.0;
  }
  if (!any_weight) throw PreconditionError("state weights are all zero");
}

void StateSpec::check_time(double t) const {
  for (const auto& c : components) c.packet.check_time(t);
}

StateSpec StateSpec::only_slit(int slit) const {
  StateSpec out{{}, role};
  std::copy_if(components.begin(), components.end(), std::back_inserter(out.components),
               [slit](const StateComponent& c) { return c.slit == slit; });
  return out;
}

bool StateSpec::has_slit(int slit) const {
  return std::any_of(components.begin(), components.end(),
                     [slit](const StateComponent& c) { return c.slit == slit; });
}

Complex state_value(const StateSpec& state, double x, double t, const UnitSystem& u) {
  if (state.components.empty()) throw PreconditionError("state has no components");
  Complex sum{0.0, 0.0};
  for (const auto& c : state.components) sum += c.weight * packet_value(c.packet, x, t, u);
  return sum;
}

Complex state_derivative(const StateSpec& state, double x, double t, const UnitSystem& u) {
  if (state.components.empty()) throw PreconditionError("state has no components");
  Complex sum{0.0, 0.0};
  for (const auto& c : state.components) sum += c.weight * packet_derivative(c.packet, x, t, u);
  return sum;
}

double state_norm_sq(const StateSpec& state, const UnitSystem& u) {
  state.validate();
  // Any time at which every component is defined will do.
  double t = state.components.front().packet.reference_time;
  for (const auto& c : state.components) {
    t = state.role == StateRole::pre ? std::max(t, c.packet.reference_time)
                                     : std::min(t, c.packet.reference_time);
  }
  Complex sum{0.0, 0.0};
  for (const auto& ci : state.components) {
    const GaussianForm fi = packet_form(ci.packet, t, u).conj();
    for (const auto& cj : state.components) {
      sum += std::conj(ci.weight) * cj.weight * (fi * packet_form(cj.packet, t, u)).integral();
    }
  }
  return sum.real();
}

quad::Interval support(const std::vector<const StateSpec*>& states, double t, const UnitSystem& u,
                       double n_widths) {
  std::vector<std::pair<double, double>> spans;
  for (const StateSpec* s : states) {
    for (const auto& c : s->components) {
      spans.emplace_back(c.packet.centroid(t, u), std::sqrt(2.0) * c.packet.spread(t, u));
    }
  }
  return quad::covering(spans, n_widths);
}

Complex free_propagator(double x_to, double t_to, double x_from, double t_from,
                        const UnitSystem& u) {
  const double dt = t_to - t_from;
  if (!(dt > 0.0)) throw DegenerateTimeError("free propagator needs t_to > t_from");
  const double dx = x_to - x_from;
  const Complex prefactor = std::sqrt(Complex(u.mass, 0.0) /
                                      (2.0 * std::numbers::pi * kI * u.hbar * dt));
  return prefactor * std::exp(kI * (u.mass * dx * dx / (2.0 * u.hbar * dt)));
}

Complex slit_propagator(int slit, double x_f, double t_f, const SlitGeometry& g,
                        const UnitSystem& u) {
  const double tau = g.slit_time;
  if (!(tau > 0.0) || !(t_f > tau))
    throw DegenerateTimeError("slit propagator needs t_f > slit_time > 0");
  const double a = slit_sign(slit) * g.half_separation;
  const double c2 = g.slit_width * g.slit_width;
  const double T = t_f - tau;
  const double beta = u.mass / (2.0 * u.hbar);
  // ∫ dx exp(-P x² + Q x + R) over the slit plane.
  const Complex P = 1.0 / (2.0 * c2) - kI * beta * (1.0 / T + 1.0 / tau);
  const Complex Q = a / c2 - 2.0 * kI * beta * x_f / T;
  const Complex R = kI * beta * x_f * x_f / T - a * a / (2.0 * c2);
  const Complex to_screen =
      std::sqrt(Complex(u.mass, 0.0) / (2.0 * std::numbers::pi * kI * u.hbar * T));
  const Complex from_source =
      std::sqrt(Complex(u.mass, 0.0) / (2.0 * std::numbers::pi * kI * u.hbar * tau));
  return to_screen * from_source * std::sqrt(std::numbers::pi / P) *
         std::exp(Q * Q / (4.0 * P) + R);
}

double slit_propagator_envelope(int slit, double x_f, double t_f, const SlitGeometry& g,
                                const UnitSystem& u) {
  const SlitAuxiliary aux = slit_auxiliary(t_f, g, u);
  const double tau = g.slit_time;
  const Complex denom =
      2.0 * std::numbers::pi * u.hbar * Complex(t_f, aux.alpha * tau * (t_f - tau));
  const double shift = x_f - slit_sign(slit) * g.half_separation * t_f / tau;
  return std::sqrt(u.mass / std::abs(denom)) * std::exp(-shift * shift / (2.0 * aux.delta_x_sq));
}

double fraunhofer_pattern(double x_f, const SlitGeometry& g, const UnitSystem& u) {
  const double flight = g.flight_time();
  const double pz = u.mass * g.longitudinal_speed;
  double delta_x_sq = 0.0;
  if (g.slit_time > 0.0) {
    delta_x_sq = slit_auxiliary(g.screen_time(), g, u).delta_x_sq;
  } else {
    const double c = g.slit_width;
    const double spread = u.hbar * flight / (u.mass * c);
    delta_x_sq = 2.0 * c * c + 0.5 * spread * spread;
  }
  const double fringe = std::cos(2.0 * pz * g.half_separation * x_f / (u.hbar * g.screen_distance));
  return fringe * fringe * std::exp(-x_f * x_f / delta_x_sq);
}

StateSpec two_slit_state(double x0, double width, double p1, double p2) {
  const double w = 1.0 / std::sqrt(2.0);
  StateSpec s;
  s.role = StateRole::pre;
  s.components.push_back({w, GaussianPacket{x0, width, p1, 0.0, EvolutionRole::forward}, 1});
  s.components.push_back({w, GaussianPacket{-x0, width, p2, 0.0, EvolutionRole::forward}, 2});
  return s;
}

}  // namespace wtraj
