#include "wtraj/weakval.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "wtraj/error.hpp"

namespace wtraj {

namespace {

constexpr Complex kI{0.0, 1.0};

struct Selection {
  int slit = 0;                                 // 0: every pre component
  std::optional<std::size_t> post_component{};  // empty: every post component
};

// Σ_{j,l} c_j* w_l ∫ Ξ_j*(x) O ψ_l(x) Γ(x) dx for O = 1 or -iħ∂ (point Γ: evaluate at x_a).
Complex numerator(const StateSpec& pre, const StateSpec& post, ProbePoint probe,
                  const InteractionProfile& profile, const UnitSystem& u, WeakOperator op,
                  Selection sel = {}) {
  Complex sum{0.0, 0.0};
  for (std::size_t j = 0; j < post.components.size(); ++j) {
    if (sel.post_component && *sel.post_component != j) continue;
    const StateComponent& cj = post.components[j];
    for (const StateComponent& cl : pre.components) {
      if (sel.slit != 0 && cl.slit != sel.slit) continue;
      const Complex weight = std::conj(cj.weight) * cl.weight;
      if (weight == Complex{}) continue;
      Complex term;
      if (profile.kind == InteractionProfile::Kind::point) {
        const Complex bra = std::conj(packet_value(cj.packet, probe.x, probe.t, u));
        const Complex ket = op == WeakOperator::projector
                                ? packet_value(cl.packet, probe.x, probe.t, u)
                                : -kI * u.hbar * packet_derivative(cl.packet, probe.x, probe.t, u);
        term = bra * ket;
      } else {
        const GaussianForm psi = packet_form(cl.packet, probe.t, u);
        const GaussianForm integrand =
            packet_form(cj.packet, probe.t, u).conj() * profile.form(probe.x) * psi;
        if (op == WeakOperator::projector) {
          term = integrand.integral();
        } else {
          // ∂ψ = (-2a x + 2a o + b) ψ for ψ = exp(-a (x - o)² + b (x - o) + c).
          const Complex slope = -2.0 * psi.a;
          const Complex offset = 2.0 * psi.a * psi.origin + psi.b;
          term = -kI * u.hbar * integrand.integral_linear(slope, offset);
        }
      }
      sum += weight * term;
    }
  }
  return sum;
}

}  // namespace

void InteractionProfile::validate() const {
  if (kind == Kind::gaussian && !(width > 0.0))
    throw PreconditionError("gaussian interaction profile needs a positive width");
}

GaussianForm InteractionProfile::form(double x_a) const {
  validate();
  GaussianForm g;
  g.origin = x_a + center;
  g.a = 1.0 / (2.0 * width * width);
  g.b = 0.0;
  g.c = -std::log(std::sqrt(2.0 * std::numbers::pi) * width);
  return g;
}

std::string InteractionProfile::describe() const {
  if (kind == Kind::point) return "point";
  std::ostringstream os;
  os << "gaussian:" << width;
  return os.str();
}

std::string to_string(WeakOperator op) {
  return op == WeakOperator::projector ? "projector" : "momentum";
}

std::string to_string(SlitConfig config) {
  switch (config) {
    case SlitConfig::both: return "both";
    case SlitConfig::slit1: return "slit1";
    case SlitConfig::slit2: return "slit2";
  }
  return "both";
}

SlitConfig slit_config_of(const StateSpec& pre) {
  const bool one = pre.has_slit(1);
  const bool two = pre.has_slit(2);
  if (one && !two) return SlitConfig::slit1;
  if (two && !one) return SlitConfig::slit2;
  return SlitConfig::both;
}

StateSpec restrict_to(const StateSpec& pre, SlitConfig config) {
  switch (config) {
    case SlitConfig::slit1: return pre.only_slit(1);
    case SlitConfig::slit2: return pre.only_slit(2);
    case SlitConfig::both: break;
  }
  return pre;
}

Complex overlap(const StateSpec& post, const StateSpec& pre, double t, const UnitSystem& u) {
  post.validate();
  pre.validate();
  Complex sum{0.0, 0.0};
  for (const StateComponent& cj : post.components) {
    const GaussianForm bra = packet_form(cj.packet, t, u).conj();
    for (const StateComponent& cl : pre.components) {
      sum += std::conj(cj.weight) * cl.weight * (bra * packet_form(cl.packet, t, u)).integral();
    }
  }
  return sum;
}

Complex overlap_quadrature(const StateSpec& post, const StateSpec& pre, double t,
                           const UnitSystem& u) {
  post.validate();
  pre.validate();
  const quad::Interval domain = support({&post, &pre}, t, u);
  return quad::integrate(
      [&](double x) { return std::conj(state_value(post, x, t, u)) * state_value(pre, x, t, u); },
      domain);
}

Complex checked_overlap(const StateSpec& post, const StateSpec& pre, double t, const UnitSystem& u,
                        const WeakValueOptions& options, const std::string& what) {
  const Complex ov = overlap(post, pre, t, u);
  const double scale = std::sqrt(state_norm_sq(post, u) * state_norm_sq(pre, u));
  if (!(std::abs(ov) >= options.eps_den * scale)) {
    std::ostringstream os;
    os << "vanishing " << what << ": |<chi|psi>| = " << std::abs(ov) << " below "
       << options.eps_den << " x norms";
    throw VanishingOverlapError(os.str());
  }
  return ov;
}

WeakValueRecord projector_weak_value(const StateSpec& pre, const StateSpec& post, ProbePoint probe,
                                     const InteractionProfile& profile, const UnitSystem& u,
                                     const WeakValueOptions& options) {
  profile.validate();
  const Complex den = checked_overlap(post, pre, probe.t, u, options);
  const Complex num = numerator(pre, post, probe, profile, u, WeakOperator::projector);
  return {num / den, WeakOperator::projector, probe.x, probe.t, slit_config_of(pre)};
}

Complex projector_weak_value_sum_rule(const StateSpec& pre, const StateSpec& post, double t,
                                      const UnitSystem& u, const WeakValueOptions& options) {
  const Complex den = checked_overlap(post, pre, t, u, options);
  const quad::Interval domain = support({&post, &pre}, t, u);
  const Complex integral = quad::integrate(
      [&](double x) {
        return numerator(pre, post, {x, t}, InteractionProfile::point(), u,
                         WeakOperator::projector);
      },
      domain);
  return integral / den;
}

WeakValueRecord momentum_weak_value(const StateSpec& pre, const StateSpec& post, ProbePoint probe,
                                    const InteractionProfile& profile, const UnitSystem& u,
                                    const WeakValueOptions& options) {
  profile.validate();
  const Complex den = checked_overlap(post, pre, probe.t, u, options);
  const Complex num = numerator(pre, post, probe, profile, u, WeakOperator::momentum);
  return {num / den, WeakOperator::momentum, probe.x, probe.t, slit_config_of(pre)};
}

Complex per_slit_component(const StateSpec& pre, const StateSpec& post, int slit,
                           std::optional<std::size_t> post_component, ProbePoint probe,
                           const InteractionProfile& profile, const UnitSystem& u,
                           Normalization normalization, const WeakValueOptions& options) {
  slit_sign(slit);
  profile.validate();
  if (post_component && *post_component >= post.components.size())
    throw PreconditionError("post-state component index out of range");
  Complex den;
  if (normalization == Normalization::two_slit) {
    den = checked_overlap(post, pre, probe.t, u, options, "two-slit overlap <chi|psi>");
  } else {
    const StateSpec single = pre.only_slit(slit);
    if (single.components.empty()) throw PreconditionError("pre-state has no such slit");
    den = checked_overlap(post, single, probe.t, u, options,
                          "single-slit overlap <chi|psi^" + std::to_string(slit) + ">");
  }
  const Complex num =
      numerator(pre, post, probe, profile, u, WeakOperator::momentum, {slit, post_component});
  return num / den;
}

Complex amplitude_ratio(const StateSpec& pre, const StateSpec& post, int slit, double t,
                        const UnitSystem& u, const WeakValueOptions& options) {
  slit_sign(slit);
  const Complex den = checked_overlap(post, pre, t, u, options, "two-slit overlap <chi|psi>");
  const StateSpec single = pre.only_slit(slit);
  if (single.components.empty()) return {0.0, 0.0};
  return overlap(post, single, t, u) / den;
}

}  // namespace wtraj
