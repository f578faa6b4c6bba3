#include "doctest.h"
#include "oracle.hpp"
#include "wtraj/error.hpp"
#include "wtraj/protocol.hpp"
#include "wtraj/scenario.hpp"

using namespace wtraj;

namespace {

Rotations random_rotations(double limit) {
  return {oracle::uniform(-limit, limit), oracle::uniform(-limit, limit), oracle::uniform(-limit, limit),
          oracle::uniform(-limit, limit)};
}

std::array<ContrastSet, 4> two_slit_contrasts(const Rotations& r, bool circular = true) {
  std::array<ContrastSet, 4> out{};
  for (int n = 1; n <= 4; ++n) {
    out[n - 1] = run_two_slit_step(n, r, {0.3, -0.2}).contrast;
    if (!circular) out[n - 1].circular.reset();
  }
  return out;
}

ProtocolSetup default_setup() { return load_scenario(resolve_scenario("protocol_default")).protocol_setup(); }

}  // namespace

TEST_CASE("polarization algebra") {
  const PolarizationState d = PolarizationState::diagonal();
  CHECK(contrast(d) == doctest::Approx(1.0));
  CHECK(circular_contrast(d) == doctest::Approx(0.0));
  for (double theta : {-0.6, -0.1, 0.0, 0.25, 0.7}) {
    const PolarizationState p = apply_crystal(d, theta);
    CHECK(contrast(p) == doctest::Approx(std::cos(2 * theta)).epsilon(1e-14));
    CHECK(circular_contrast(p) == doctest::Approx(std::sin(2 * theta)).epsilon(1e-14));
    CHECK(contrast(apply_crystal(p, theta, true)) == doctest::Approx(1.0));
    const Intensities in = intensities(p.scaled({0.5, 0.0}));
    CHECK(in.diagonal + in.antidiagonal == doctest::Approx(0.25));
    CHECK(in.right + in.left == doctest::Approx(0.25));
  }
  // complex rotation: contrast shrinks by cosh, the circular angle keeps Re θ
  const Complex z{0.2, 0.05};
  const PolarizationState p = apply_crystal(d, z);
  CHECK(contrast(p) == doctest::Approx(std::cos(0.4) / std::cosh(0.1)).epsilon(1e-14));
  CHECK(0.5 * std::atan2(circular_contrast(p), contrast(p)) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK_THROWS_AS(contrast(d.scaled(0.0)), PreconditionError);
}

TEST_CASE("step sequences") {
  const Rotations r{0.01, 0.02, 0.03, 0.04};
  const double half[4] = {0.01, 0.04, 0.10, 0.06};
  for (int n = 1; n <= 4; ++n) {
    const StepResult s = run_two_slit_step(n, r, 1.0);
    CHECK(s.contrast.step == n);
    CHECK(s.contrast.scheme == Scheme::two_slit);
    CHECK(s.contrast.contrast == doctest::Approx(std::cos(2 * half[n - 1])).epsilon(1e-14));
  }
  const double single[4] = {0.06, -0.02, 0.06, -0.02};
  for (int n = 1; n <= 4; ++n) {
    const StepResult s = run_single_slit_step(n, r, 1.0);
    CHECK(s.contrast.scheme == (n <= 2 ? Scheme::single_slit_1 : Scheme::single_slit_2));
    CHECK(s.contrast.circular.value() == doctest::Approx(std::sin(2 * single[n - 1])).epsilon(1e-14));
  }
  CHECK_THROWS_AS(run_two_slit_step(0, r, 1.0), PreconditionError);
  CHECK_THROWS_AS(run_single_slit_step(5, r, 1.0), PreconditionError);
}

TEST_CASE("zero couplings leave every contrast at one") {
  for (int n = 1; n <= 4; ++n) {
    CHECK(run_two_slit_step(n, {}, {0.7, 0.1}).contrast.contrast == doctest::Approx(1.0));
    CHECK(run_single_slit_step(n, {}, {0.7, 0.1}).contrast.contrast == doctest::Approx(1.0));
  }
}

TEST_CASE("two-slit inversion round trip with random signs") {
  for (int trial = 0; trial < 100; ++trial) {
    const Couplings g{oracle::uniform(0.5, 2.0), oracle::uniform(0.5, 2.0), oracle::uniform(0.5, 2.0),
                      oracle::uniform(0.5, 2.0)};
    const Rotations r = random_rotations(0.1);
    const TwoSlitRecovery k = invert_two_slit(two_slit_contrasts(r), g);
    CHECK(std::abs(k.k_A - r.A.real() / g.A) < 1e-10);
    CHECK(std::abs(k.k_C - r.C.real() / g.C) < 1e-10);
    CHECK(std::abs(k.k_B - r.B.real() / g.B) < 1e-10);
    CHECK(std::abs(k.k_D - r.D.real() / g.D) < 1e-10);
  }
}

TEST_CASE("single-slit inversion round trip") {
  for (int trial = 0; trial < 100; ++trial) {
    const Couplings g{1.0, oracle::uniform(0.5, 2.0), 1.0, oracle::uniform(0.5, 2.0)};
    const Rotations r1 = random_rotations(0.1), r2 = random_rotations(0.1);
    std::array<ContrastSet, 4> cs{};
    for (int n = 1; n <= 4; ++n) cs[n - 1] = run_single_slit_step(n, n <= 2 ? r1 : r2, 1.0).contrast;
    const SingleSlitRecovery k = invert_single_slit(cs, g);
    CHECK(std::abs(k.kappa_B1 - r1.B.real() / g.B) < 1e-10);
    CHECK(std::abs(k.kappa_D1 - r1.D.real() / g.D) < 1e-10);
    CHECK(std::abs(k.kappa_B2 - r2.B.real() / g.B) < 1e-10);
    CHECK(std::abs(k.kappa_D2 - r2.D.real() / g.D) < 1e-10);
  }
}

TEST_CASE("diagonal contrasts alone recover magnitudes only") {
  const Couplings g{1, 1, 1, 1};
  const Rotations pos{0.02, 0.05, 0.03, 0.04};
  const TwoSlitRecovery k = invert_two_slit(two_slit_contrasts(pos, false), g);
  CHECK(k.k_A == doctest::Approx(0.02).epsilon(1e-9));
  CHECK(k.k_C == doctest::Approx(0.03).epsilon(1e-9));
  CHECK(k.k_B == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(k.k_D == doctest::Approx(0.04).epsilon(1e-9));
  // a global sign flip leaves every diagonal contrast unchanged
  const Rotations neg{-0.02, -0.05, -0.03, -0.04};
  const auto a = two_slit_contrasts(pos, false), b = two_slit_contrasts(neg, false);
  for (int n = 0; n < 4; ++n) CHECK(a[n].contrast == doctest::Approx(b[n].contrast).epsilon(1e-15));
  CHECK(invert_two_slit(two_slit_contrasts(neg), g).k_A == doctest::Approx(-0.02).epsilon(1e-9));
}

TEST_CASE("inversion guards") {
  const Couplings g{1, 1, 1, 1};
  std::array<ContrastSet, 4> cs = two_slit_contrasts({0.01, 0.01, 0.01, 0.01});
  cs[2].contrast = 1.5;
  CHECK_THROWS_AS(invert_two_slit(cs, g), PreconditionError);
  cs = two_slit_contrasts({0.01, 0.01, 0.01, 0.01});
  cs[0].contrast = 1.0 + 1e-14;  // round-off is clamped
  CHECK_NOTHROW(invert_two_slit(cs, g));
  CHECK_THROWS_AS(invert_two_slit(two_slit_contrasts({0.9, 0.0, 0.0, 0.0}), g), BranchGuardError);
  CHECK_THROWS_AS(invert_two_slit(two_slit_contrasts({0.01, 0.01, 0.01, 0.01}), {0, 1, 1, 1}), PreconditionError);
  ContrastSet c;
  c.contrast = 0.0;
  CHECK(half_angle(c) == doctest::Approx(std::numbers::pi / 4));
}

TEST_CASE("path parsing") {
  const Complex kB1{0.3, -0.1}, kB2{-0.2, 0.05}, kD1{0.1, 0.2}, kD2{0.4, -0.3};
  const Complex R1{0.6, 0.2}, R2 = 1.0 - R1;
  const Complex kB = kB1 * R1 + kB2 * R2, kD = kD1 * R1 + kD2 * R2;
  const PathTerms p = parse_paths(kB, kD, kB1, kB2, kD1, kD2, R1, R2);
  CHECK(std::abs(p.closure_B) < 1e-15);
  CHECK(std::abs(p.closure_D) < 1e-15);
  CHECK(std::abs(p.k_B11 + p.k_B12 - kB) < 1e-15);
  const auto ratios = ratios_from_weak_values(kB, kD, kB1, kB2, kD1, kD2);
  CHECK(std::abs(ratios[0] - R1) < 1e-14);
  CHECK(std::abs(ratios[1] - R2) < 1e-14);
  CHECK_THROWS_AS(ratios_from_weak_values(kB, kD, 1.0, 2.0, 2.0, 4.0), PreconditionError);
}

TEST_CASE("protocol report on the default scenario") {
  const ProtocolSetup s = default_setup();
  const ProtocolReport r = protocol_report(s);
  SUBCASE("idealized recovery gives the real parts") {
    CHECK(std::abs(r.recovered.k_A - r.weak_values.A.real()) < 1e-10);
    CHECK(std::abs(r.recovered.k_B - r.weak_values.B.real()) < 1e-10);
    CHECK(std::abs(r.recovered.k_C - r.weak_values.C.real()) < 1e-10);
    CHECK(std::abs(r.recovered.k_D - r.weak_values.D.real()) < 1e-10);
    CHECK(std::abs(r.recovered_single.kappa_B1 - r.kappa[0].real()) < 1e-10);
    CHECK(std::abs(r.recovered_single.kappa_D2 - r.kappa[3].real()) < 1e-10);
  }
  SUBCASE("parsed path terms match their definitions") {
    CHECK(std::abs(r.paths.k_B11 - r.direct_paths.k_B11) < 1e-10);
    CHECK(std::abs(r.paths.k_B12 - r.direct_paths.k_B12) < 1e-10);
    CHECK(std::abs(r.paths.k_D21 - r.direct_paths.k_D21) < 1e-10);
    CHECK(std::abs(r.paths.k_D22 - r.direct_paths.k_D22) < 1e-10);
    CHECK(std::abs(r.paths.closure_B) < 1e-12);
    CHECK(std::abs(r.paths.closure_D) < 1e-12);
    CHECK(std::abs(r.ratios[0] + r.ratios[1] - 1.0) < 1e-12);
  }
  SUBCASE("closing a slit") {
    const TwoSlitRecovery& closed1 = r.signature[1].recovered;
    CHECK(r.signature[1].config == SlitConfig::slit2);
    CHECK(std::abs(closed1.k_A) < 1e-8);
    CHECK(std::abs(closed1.k_B - r.kappa[2].real()) < 1e-8);
    CHECK(std::abs(closed1.k_D - r.kappa[3].real()) < 1e-8);
    const TwoSlitRecovery& closed2 = r.signature[2].recovered;
    CHECK(std::abs(closed2.k_C) < 1e-8);
    CHECK(std::abs(closed2.k_B - r.kappa[0].real()) < 1e-8);
    CHECK(std::abs(closed2.k_D - r.kappa[1].real()) < 1e-8);
  }
}

TEST_CASE("exact mode") {
  ProtocolSetup s = default_setup();
  s.mode = RotationMode::exact;
  const ProtocolReport r = protocol_report(s);
  // the circular readout still isolates Re θ
  CHECK(std::abs(r.recovered.k_B - r.weak_values.B.real()) < 1e-10);
  // without it, cos(2 Re θ)/cosh(2 Im θ) makes the arccos readout return |k|
  s.circular_readout = false;
  const ProtocolReport m = protocol_report(s);
  CHECK(m.recovered.k_A == doctest::Approx(std::abs(m.weak_values.A)).epsilon(1e-3));
  CHECK(std::abs(m.recovered.k_A - m.weak_values.A.real()) > 1e-2);
}

TEST_CASE("zero couplings") {
  ProtocolSetup s = default_setup();
  for (Crystal& c : s.crystals) c.coupling = 0.0;
  const ProtocolReport r = protocol_report(s);
  for (const auto& st : r.two_slit) CHECK(st.contrast.contrast == doctest::Approx(1.0));
  for (const auto& st : r.single_slit) CHECK(st.contrast.contrast == doctest::Approx(1.0));
  CHECK(std::isnan(r.recovered.k_A));
}

TEST_CASE("setup validation") {
  ProtocolSetup s = default_setup();
  s.crystals[1].t = s.t_f + 1.0;
  CHECK_THROWS_AS(protocol_report(s), PreconditionError);
  s = default_setup();
  std::swap(s.crystals[0], s.crystals[1]);
  CHECK_THROWS_AS(protocol_report(s), PreconditionError);
  s = default_setup();
  s.pre = s.pre.only_slit(1);
  CHECK_THROWS_AS(protocol_report(s), PreconditionError);
}
