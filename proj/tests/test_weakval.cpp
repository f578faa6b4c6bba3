#include "doctest.h"
#include "oracle.hpp"
#include "wtraj/error.hpp"
#include "wtraj/weakval.hpp"

using namespace wtraj;
using oracle::rel_err;

namespace {

const UnitSystem nat = UnitSystem::natural();

StateSpec post_packets(std::vector<std::pair<double, double>> x_and_p, double width, double t_f,
                       std::vector<int> toward = {}) {
  StateSpec s;
  s.role = StateRole::post;
  const double w = 1.0 / std::sqrt(static_cast<double>(x_and_p.size()));
  for (std::size_t i = 0; i < x_and_p.size(); ++i) {
    StateComponent c;
    c.weight = w;
    c.packet = {x_and_p[i].first, width, x_and_p[i].second, t_f, EvolutionRole::backward};
    c.slit = toward.empty() ? 0 : toward[i];
    s.components.push_back(c);
  }
  return s;
}

StateSpec random_pre() {
  return two_slit_state(oracle::uniform(1.0, 4.0), oracle::uniform(0.3, 1.0), oracle::uniform(-1.5, 1.5),
                        oracle::uniform(-1.5, 1.5));
}

StateSpec random_post(double t_f) {
  return post_packets({{oracle::uniform(-4, 4), oracle::uniform(-1, 1)}}, oracle::uniform(0.8, 2.0), t_f);
}

}  // namespace

TEST_CASE("closed-form overlap agrees with quadrature") {
  for (int n = 0; n < 20; ++n) {
    const StateSpec pre = random_pre();
    const StateSpec post = random_post(5.0);
    const double t = oracle::uniform(0.1, 4.9);
    CHECK(rel_err(overlap(post, pre, t, nat), overlap_quadrature(post, pre, t, nat)) < 1e-8);
    // the overlap is time independent
    CHECK(rel_err(overlap(post, pre, t, nat), overlap(post, pre, 5.0, nat)) < 1e-10);
  }
}

TEST_CASE("projector weak values integrate to one") {
  for (int n = 0; n < 20; ++n) {
    const StateSpec pre = random_pre();
    const StateSpec post = random_post(4.0);
    const double t = oracle::uniform(0.5, 3.5);
    const Complex sum = projector_weak_value_sum_rule(pre, post, t, nat);
    CHECK(std::abs(sum - 1.0) < 1e-6);
    // independent check with the Gauss-Legendre oracle
    const quad::Interval d = support({&pre, &post}, t, nat);
    const Complex num = oracle::integrate(
        [&](double x) { return projector_weak_value(pre, post, {x, t}, InteractionProfile::point(), nat).value; },
        d.lo, d.hi, 600);
    CHECK(std::abs(num - 1.0) < 1e-6);
  }
}

TEST_CASE("point weak value is the pointwise ratio") {
  const StateSpec pre = two_slit_state(2.0, 0.5, 0.3, -0.3);
  const StateSpec post = post_packets({{1.0, 0.2}}, 1.0, 3.0);
  const double t = 1.2, x = 0.7;
  const Complex expect = std::conj(state_value(post, x, t, nat)) * state_value(pre, x, t, nat) /
                         overlap_quadrature(post, pre, t, nat);
  const WeakValueRecord r = projector_weak_value(pre, post, {x, t}, InteractionProfile::point(), nat);
  CHECK(rel_err(r.value, expect) < 1e-9);
  CHECK(r.op == WeakOperator::projector);
  CHECK(r.slit_config == SlitConfig::both);
  CHECK(r.probe_position == x);
  CHECK(r.probe_time == t);
}

TEST_CASE("gaussian profile smears the point weak value") {
  const StateSpec pre = two_slit_state(2.0, 0.5, 0.3, -0.3);
  const StateSpec post = post_packets({{1.0, 0.2}}, 1.0, 3.0);
  const double t = 1.2, x = 0.7, w = 0.3;
  const InteractionProfile g = InteractionProfile::gaussian(w);
  const Complex smeared = oracle::integrate(
      [&](double y) {
        const double u = y - x;
        return std::exp(-u * u / (2 * w * w)) / (std::sqrt(2 * std::numbers::pi) * w) *
               projector_weak_value(pre, post, {y, t}, InteractionProfile::point(), nat).value;
      },
      x - 10 * w, x + 10 * w, 400);
  CHECK(rel_err(projector_weak_value(pre, post, {x, t}, g, nat).value, smeared) < 1e-9);
  // narrow windows tend to the point value
  const Complex point = projector_weak_value(pre, post, {x, t}, InteractionProfile::point(), nat).value;
  CHECK(rel_err(projector_weak_value(pre, post, {x, t}, InteractionProfile::gaussian(1e-4), nat).value, point) < 1e-6);
  CHECK_THROWS_AS(InteractionProfile::gaussian(0.0).validate(), PreconditionError);
  CHECK(InteractionProfile::gaussian(0.5).describe() == "gaussian:0.5");
}

TEST_CASE("momentum weak value") {
  SUBCASE("matches -iħ ψ'/ψ times the projector value") {
    const StateSpec pre = random_pre();
    const StateSpec post = random_post(3.0);
    const double t = 1.0, x = 0.4;
    const Complex pi_w = projector_weak_value(pre, post, {x, t}, InteractionProfile::point(), nat).value;
    const Complex dpsi = oracle::derivative([&](double y) { return state_value(pre, y, t, nat); }, x, 1e-4);
    const Complex expect = pi_w * Complex(0, -1) * dpsi / state_value(pre, x, t, nat);
    CHECK(rel_err(momentum_weak_value(pre, post, {x, t}, InteractionProfile::point(), nat).value, expect) < 1e-8);
  }
  SUBCASE("ratio to the projector value is the mean momentum at the packet centre") {
    for (double p : {-1.3, 0.0, 0.8}) {
      StateSpec pre;
      pre.components.push_back({1.0, {0.5, 0.7, p, 0.0, EvolutionRole::forward}, 0});
      const StateSpec post = post_packets({{0.0, 0.0}}, 1.5, 4.0);
      const double t = 2.0;
      const double x = pre.components[0].packet.centroid(t, nat);
      const Complex k = momentum_weak_value(pre, post, {x, t}, InteractionProfile::point(), nat).value;
      const Complex pi = projector_weak_value(pre, post, {x, t}, InteractionProfile::point(), nat).value;
      CHECK(std::abs(k.real() / pi.real() - p) < 1e-6);
    }
  }
  SUBCASE("gaussian profile agrees with smearing") {
    const StateSpec pre = two_slit_state(1.5, 0.6, 0.2, -0.4);
    const StateSpec post = post_packets({{0.0, 0.5}}, 1.0, 3.0);
    const double t = 1.5, x = -0.3, w = 0.25;
    const Complex smeared = oracle::integrate(
        [&](double y) {
          const double u = y - x;
          return std::exp(-u * u / (2 * w * w)) / (std::sqrt(2 * std::numbers::pi) * w) *
                 momentum_weak_value(pre, post, {y, t}, InteractionProfile::point(), nat).value;
        },
        x - 10 * w, x + 10 * w, 400);
    CHECK(rel_err(momentum_weak_value(pre, post, {x, t}, InteractionProfile::gaussian(w), nat).value, smeared) < 1e-9);
  }
}

TEST_CASE("weak values are additive over pre-state components") {
  const StateSpec pre = two_slit_state(1.5, 0.6, 0.7, -0.2);
  const StateSpec post = post_packets({{0.3, 0.1}, {-1.0, -0.4}}, 1.2, 3.0, {1, 2});
  const ProbePoint probe{0.2, 1.1};
  const auto prof = InteractionProfile::point();
  const Complex full = momentum_weak_value(pre, post, probe, prof, nat).value;
  Complex sum{};
  for (int l : {1, 2}) {
    for (std::size_t j = 0; j < 2; ++j) {
      sum += per_slit_component(pre, post, l, j, probe, prof, nat, Normalization::two_slit);
    }
  }
  CHECK(std::abs(sum - full) < 1e-12 * std::abs(full));
  // projector: numerators add over components with a common denominator
  const Complex d = overlap(post, pre, probe.t, nat);
  Complex num{};
  for (int l : {1, 2}) {
    const StateSpec part = pre.only_slit(l);
    num += projector_weak_value(part, post, probe, prof, nat).value * overlap(post, part, probe.t, nat);
  }
  CHECK(std::abs(num / d - projector_weak_value(pre, post, probe, prof, nat).value) < 1e-12);
}

TEST_CASE("per-slit decomposition") {
  const StateSpec pre = two_slit_state(2.0, 0.4, -0.6, 0.6);
  const StateSpec post = post_packets({{0.0, -0.6}, {0.0, 0.6}}, 1.0, 3.0, {1, 2});
  const ProbePoint probe{0.9, 1.5};
  const auto prof = InteractionProfile::gaussian(0.2);
  const Complex R1 = amplitude_ratio(pre, post, 1, 3.0, nat);
  const Complex R2 = amplitude_ratio(pre, post, 2, 3.0, nat);
  CHECK(std::abs(R1 + R2 - 1.0) < 1e-12);
  Complex k{};
  for (int l : {1, 2}) {
    const Complex kappa = per_slit_component(pre, post, l, std::nullopt, probe, prof, nat, Normalization::single_slit);
    const Complex direct = momentum_weak_value(pre.only_slit(l), post, probe, prof, nat).value;
    CHECK(rel_err(kappa, direct) < 1e-12);
    k += kappa * (l == 1 ? R1 : R2);
  }
  CHECK(rel_err(k, momentum_weak_value(pre, post, probe, prof, nat).value) < 1e-12);
  CHECK(slit_config_of(pre) == SlitConfig::both);
  CHECK(slit_config_of(restrict_to(pre, SlitConfig::slit2)) == SlitConfig::slit2);
}

TEST_CASE("off-support probes give vanishing weak values") {
  const StateSpec pre = two_slit_state(2.0, 0.3, 0.5, -0.5);
  const StateSpec post = post_packets({{4.0, 0.5}}, 0.8, 4.0);
  const double t = 2.0;
  double grid_max = 0.0;
  for (double x = -10; x <= 10; x += 0.1) {
    grid_max = std::max(grid_max, std::abs(projector_weak_value(pre, post, {x, t}, InteractionProfile::point(), nat).value.real()));
  }
  double pre_max = 0.0, post_max = 0.0;
  for (double x = -10; x <= 10; x += 0.01) {
    pre_max = std::max(pre_max, std::abs(state_value(pre, x, t, nat)));
    post_max = std::max(post_max, std::abs(state_value(post, x, t, nat)));
  }
  const double x_far = -30.0;
  CHECK(std::abs(state_value(pre, x_far, t, nat)) < 1e-6 * pre_max);
  CHECK(std::abs(state_value(post, x_far, t, nat)) < 1e-6 * post_max);
  CHECK(std::abs(projector_weak_value(pre, post, {x_far, t}, InteractionProfile::point(), nat).value.real()) <
        1e-3 * grid_max);
}

TEST_CASE("orthogonal post-selection is refused") {
  StateSpec pre;
  pre.components.push_back({1.0, {-40.0, 0.3, 0.0, 0.0, EvolutionRole::forward}, 0});
  const StateSpec post = post_packets({{40.0, 0.0}}, 0.3, 0.5);
  CHECK_THROWS_AS(projector_weak_value(pre, post, {0.0, 0.25}, InteractionProfile::point(), nat), VanishingOverlapError);
  CHECK_THROWS_AS(momentum_weak_value(pre, post, {0.0, 0.25}, InteractionProfile::point(), nat), VanishingOverlapError);
}

TEST_CASE("probe times outside the pre/post window are rejected") {
  const StateSpec pre = two_slit_state(2.0, 0.3, 0.5, -0.5);
  const StateSpec post = post_packets({{0.0, 0.0}}, 1.0, 3.0);
  CHECK_THROWS_AS(projector_weak_value(pre, post, {0.0, 3.5}, InteractionProfile::point(), nat), PreconditionError);
  CHECK_THROWS_AS(projector_weak_value(pre, post, {0.0, -0.5}, InteractionProfile::point(), nat), PreconditionError);
}
