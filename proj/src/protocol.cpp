#include "wtraj/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wtraj/error.hpp"

namespace wtraj {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

std::size_t post_index_for(const StateSpec& post, int slit) {
  for (std::size_t j = 0; j < post.components.size(); ++j) {
    if (post.components[j].slit == slit) return j;
  }
  std::ostringstream os;
  os << "post-state has no component collimated toward slit " << slit;
  throw PreconditionError(os.str());
}

void check_step(int step) {
  if (step < 1 || step > 4) {
    throw PreconditionError("protocol step must be 1..4, got " + std::to_string(step));
  }
}

StepResult finish(PolarizationState pol, int step, Scheme scheme) {
  StepResult r;
  r.state = pol;
  r.intensity = intensities(pol);
  r.contrast.step = step;
  r.contrast.scheme = scheme;
  r.contrast.contrast = contrast(pol);
  r.contrast.circular = circular_contrast(pol);
  return r;
}

void guard(double rotation, const char* name, const InversionOptions& o) {
  if (!(std::abs(rotation) < o.branch_limit)) {
    std::ostringstream os;
    os << "recovered rotation for " << name << " is " << rotation
       << " rad, outside the unambiguous branch |theta| < " << o.branch_limit;
    throw BranchGuardError(os.str());
  }
}

double checked_coupling(double g, const char* name) {
  if (!(std::abs(g) > 0.0) || !std::isfinite(g)) {
    throw PreconditionError(std::string("coupling of crystal ") + name + " must be nonzero");
  }
  return g;
}

}  // namespace

std::string to_string(CrystalId id) {
  switch (id) {
    case CrystalId::A: return "A";
    case CrystalId::B: return "B";
    case CrystalId::C: return "C";
    case CrystalId::D: return "D";
  }
  return "?";
}

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::two_slit: return "two_slit";
    case Scheme::single_slit_1: return "single_slit_1";
    case Scheme::single_slit_2: return "single_slit_2";
  }
  return "?";
}

PolarizationState PolarizationState::diagonal() {
  return {Complex{kInvSqrt2, 0.0}, Complex{kInvSqrt2, 0.0}};
}

Intensities intensities(const PolarizationState& p) {
  const Complex i{0.0, 1.0};
  Intensities out;
  out.diagonal = 0.5 * std::norm(p.h + p.v);
  out.antidiagonal = 0.5 * std::norm(p.h - p.v);
  out.right = 0.5 * std::norm(p.h - i * p.v);
  out.left = 0.5 * std::norm(p.h + i * p.v);
  return out;
}

double contrast(const PolarizationState& p) {
  const Intensities in = intensities(p);
  const double total = in.diagonal + in.antidiagonal;
  if (!(total > 0.0)) throw PreconditionError("polarization state has zero intensity");
  return (in.diagonal - in.antidiagonal) / total;
}

double circular_contrast(const PolarizationState& p) {
  const Intensities in = intensities(p);
  const double total = in.right + in.left;
  if (!(total > 0.0)) throw PreconditionError("polarization state has zero intensity");
  return (in.right - in.left) / total;
}

PolarizationState apply_crystal(const PolarizationState& p, Complex theta) {
  const Complex i{0.0, 1.0};
  return {std::exp(-i * theta) * p.h, std::exp(i * theta) * p.v};
}

PolarizationState apply_crystal(const PolarizationState& p, Complex theta, bool phase_shifted) {
  return apply_crystal(p, phase_shifted ? -theta : theta);
}

StepResult run_two_slit_step(int step, const Rotations& r, Complex zeta) {
  check_step(step);
  PolarizationState pol = PolarizationState::diagonal();
  pol = apply_crystal(pol, r.A);
  if (step >= 2) pol = apply_crystal(pol, r.C);
  if (step >= 3) {
    pol = apply_crystal(pol, r.B, step == 4);
    pol = apply_crystal(pol, r.D);
  }
  return finish(pol.scaled(zeta), step, Scheme::two_slit);
}

StepResult run_single_slit_step(int step, const Rotations& r, Complex zeta) {
  check_step(step);
  PolarizationState pol = PolarizationState::diagonal();
  pol = apply_crystal(pol, r.B);
  pol = apply_crystal(pol, r.D, step % 2 == 0);
  const Scheme scheme = step <= 2 ? Scheme::single_slit_1 : Scheme::single_slit_2;
  return finish(pol.scaled(zeta), step, scheme);
}

double half_angle(const ContrastSet& c, const InversionOptions& o) {
  auto clamp = [&](double v, const char* what) {
    if (!std::isfinite(v) || std::abs(v) > 1.0 + o.contrast_slack) {
      std::ostringstream os;
      os << what << " " << v << " at step " << c.step << " (" << to_string(c.scheme)
         << ") lies outside [-1, 1]";
      throw PreconditionError(os.str());
    }
    return std::clamp(v, -1.0, 1.0);
  };
  const double C = clamp(c.contrast, "contrast");
  if (c.circular) return 0.5 * std::atan2(clamp(*c.circular, "circular contrast"), C);
  return 0.5 * std::acos(C);
}

TwoSlitRecovery invert_two_slit(const std::array<ContrastSet, 4>& cs, const Couplings& g,
                                const InversionOptions& o) {
  std::array<double, 4> h{};
  for (std::size_t n = 0; n < 4; ++n) h[n] = half_angle(cs[n], o);
  const double a = h[0];
  const double c = h[1] - h[0];
  const double b = 0.5 * (h[2] - h[3]);
  const double d = 0.5 * (h[2] + h[3]) - h[1];
  guard(a, "A", o);
  guard(c, "C", o);
  guard(b, "B", o);
  guard(d, "D", o);
  TwoSlitRecovery out;
  out.k_A = a / checked_coupling(g.A, "A");
  out.k_C = c / checked_coupling(g.C, "C");
  out.k_B = b / checked_coupling(g.B, "B");
  out.k_D = d / checked_coupling(g.D, "D");
  return out;
}

SingleSlitRecovery invert_single_slit(const std::array<ContrastSet, 4>& cs, const Couplings& g,
                                      const InversionOptions& o) {
  std::array<double, 4> h{};
  for (std::size_t n = 0; n < 4; ++n) h[n] = half_angle(cs[n], o);
  const double b1 = 0.5 * (h[0] + h[1]);
  const double d1 = 0.5 * (h[0] - h[1]);
  const double b2 = 0.5 * (h[2] + h[3]);
  const double d2 = 0.5 * (h[2] - h[3]);
  guard(b1, "B (slit 1)", o);
  guard(d1, "D (slit 1)", o);
  guard(b2, "B (slit 2)", o);
  guard(d2, "D (slit 2)", o);
  SingleSlitRecovery out;
  out.kappa_B1 = b1 / checked_coupling(g.B, "B");
  out.kappa_D1 = d1 / checked_coupling(g.D, "D");
  out.kappa_B2 = b2 / g.B;
  out.kappa_D2 = d2 / g.D;
  return out;
}

PathTerms parse_paths(Complex k_B, Complex k_D, Complex kappa_B1, Complex kappa_B2,
                      Complex kappa_D1, Complex kappa_D2, Complex R1, Complex R2) {
  PathTerms p;
  p.k_B11 = kappa_B1 * R1;
  p.k_B12 = kappa_B2 * R2;
  p.k_D21 = kappa_D1 * R1;
  p.k_D22 = kappa_D2 * R2;
  p.closure_B = k_B - (p.k_B11 + p.k_B12);
  p.closure_D = k_D - (p.k_D21 + p.k_D22);
  return p;
}

std::array<Complex, 2> ratios_from_weak_values(Complex k_B, Complex k_D, Complex kB1,
                                               Complex kB2, Complex kD1, Complex kD2) {
  const Complex det = kB1 * kD2 - kB2 * kD1;
  const double scale = std::abs(kB1 * kD2) + std::abs(kB2 * kD1);
  if (!(std::abs(det) > 1e-12 * scale)) {
    throw PreconditionError("single-slit weak values at B and D are linearly dependent");
  }
  return {(k_B * kD2 - kB2 * k_D) / det, (kB1 * k_D - k_B * kD1) / det};
}

void ProtocolSetup::validate() const {
  units.validate();
  pre.validate();
  post.validate();
  profile.validate();
  if (pre.role != StateRole::pre || post.role != StateRole::post) {
    throw PreconditionError("protocol needs a pre-state and a post-state");
  }
  if (!pre.has_slit(1) || !pre.has_slit(2)) {
    throw PreconditionError("protocol pre-state needs components from both slits");
  }
  post_index_for(post, 1);
  post_index_for(post, 2);
  const CrystalId order[4] = {CrystalId::A, CrystalId::B, CrystalId::C, CrystalId::D};
  for (std::size_t n = 0; n < 4; ++n) {
    const Crystal& c = crystals[n];
    if (c.id != order[n]) throw PreconditionError("crystals must be listed as A, B, C, D");
    if (!(c.t > 0.0) || !(c.t < t_f)) {
      throw PreconditionError("crystal " + to_string(c.id) +
                              " must act strictly between preparation and post-selection");
    }
    if (!std::isfinite(c.coupling)) {
      throw PreconditionError("coupling of crystal " + to_string(c.id) + " must be finite");
    }
  }
}

const Crystal& ProtocolSetup::crystal(CrystalId id) const {
  return crystals[static_cast<std::size_t>(id)];
}

Couplings ProtocolSetup::couplings() const {
  return {crystals[0].coupling, crystals[1].coupling, crystals[2].coupling, crystals[3].coupling};
}

namespace {

Complex weak_at(const ProtocolSetup& s, const StateSpec& pre, CrystalId id) {
  const Crystal& c = s.crystal(id);
  return momentum_weak_value(pre, s.post, {c.x, c.t}, s.profile, s.units, s.weak).value;
}

Complex rotation_for(const ProtocolSetup& s, CrystalId id, Complex k) {
  const double g = s.crystal(id).coupling;
  return s.mode == RotationMode::idealized ? Complex{g * k.real(), 0.0} : g * k;
}

std::array<ContrastSet, 4> contrasts_of(const std::array<StepResult, 4>& steps, bool circular) {
  std::array<ContrastSet, 4> out{};
  for (std::size_t n = 0; n < 4; ++n) {
    out[n] = steps[n].contrast;
    if (!circular) out[n].circular.reset();
  }
  return out;
}

std::array<StepResult, 4> two_slit_sequence(const ProtocolSetup& s, SlitConfig config) {
  const Rotations r = rotations(s, crystal_weak_values(s, config));
  const Complex z = zeta(s, config);
  std::array<StepResult, 4> out{};
  for (int n = 1; n <= 4; ++n) out[n - 1] = run_two_slit_step(n, r, z);
  return out;
}

}  // namespace

CrystalWeakValues crystal_weak_values(const ProtocolSetup& s, SlitConfig config) {
  const StateSpec pre = restrict_to(s.pre, config);
  return {weak_at(s, pre, CrystalId::A), weak_at(s, pre, CrystalId::B),
          weak_at(s, pre, CrystalId::C), weak_at(s, pre, CrystalId::D)};
}

Rotations rotations(const ProtocolSetup& s, const CrystalWeakValues& k) {
  return {rotation_for(s, CrystalId::A, k.A), rotation_for(s, CrystalId::B, k.B),
          rotation_for(s, CrystalId::C, k.C), rotation_for(s, CrystalId::D, k.D)};
}

Complex zeta(const ProtocolSetup& s, SlitConfig config) {
  const StateSpec pre = restrict_to(s.pre, config);
  return checked_overlap(s.post, pre, s.t_f, s.units, s.weak) * kInvSqrt2;
}

StepResult run_step(const ProtocolSetup& s, int step, SlitConfig config) {
  check_step(step);
  const Rotations r = rotations(s, crystal_weak_values(s, config));
  return run_two_slit_step(step, r, zeta(s, config));
}

ProtocolReport protocol_report(const ProtocolSetup& s) {
  s.validate();
  ProtocolReport rep;
  const Couplings g = s.couplings();

  rep.two_slit = two_slit_sequence(s, SlitConfig::both);
  rep.weak_values = crystal_weak_values(s, SlitConfig::both);
  const bool invertible = g.A != 0.0 && g.B != 0.0 && g.C != 0.0 && g.D != 0.0;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  auto recover = [&](const std::array<StepResult, 4>& steps) {
    if (!invertible) return TwoSlitRecovery{nan, nan, nan, nan};
    return invert_two_slit(contrasts_of(steps, s.circular_readout), g, s.inversion);
  };
  rep.recovered = recover(rep.two_slit);

  const CrystalWeakValues k1 = crystal_weak_values(s, SlitConfig::slit1);
  const CrystalWeakValues k2 = crystal_weak_values(s, SlitConfig::slit2);
  rep.kappa = {k1.B, k1.D, k2.B, k2.D};
  const Rotations r1 = rotations(s, k1);
  const Rotations r2 = rotations(s, k2);
  const Complex z1 = zeta(s, SlitConfig::slit1);
  const Complex z2 = zeta(s, SlitConfig::slit2);
  for (int n = 1; n <= 4; ++n) {
    rep.single_slit[n - 1] = run_single_slit_step(n, n <= 2 ? r1 : r2, n <= 2 ? z1 : z2);
  }
  rep.recovered_single =
      invertible ? invert_single_slit(contrasts_of(rep.single_slit, s.circular_readout), g, s.inversion)
                 : SingleSlitRecovery{nan, nan, nan, nan};

  rep.ratios = {amplitude_ratio(s.pre, s.post, 1, s.t_f, s.units, s.weak),
                amplitude_ratio(s.pre, s.post, 2, s.t_f, s.units, s.weak)};
  rep.paths = parse_paths(rep.weak_values.B, rep.weak_values.D, k1.B, k2.B, k1.D, k2.D,
                          rep.ratios[0], rep.ratios[1]);

  const std::size_t j1 = post_index_for(s.post, 1);
  const std::size_t j2 = post_index_for(s.post, 2);
  const Crystal& B = s.crystal(CrystalId::B);
  const Crystal& D = s.crystal(CrystalId::D);
  auto direct = [&](int slit, std::size_t j, const Crystal& c) {
    return per_slit_component(s.pre, s.post, slit, j, {c.x, c.t}, s.profile, s.units,
                              Normalization::two_slit, s.weak);
  };
  PathTerms& dp = rep.direct_paths;
  dp.k_B11 = direct(1, j1, B);
  dp.k_B12 = direct(2, j1, B);
  dp.k_D21 = direct(1, j2, D);
  dp.k_D22 = direct(2, j2, D);
  dp.closure_B = rep.weak_values.B - (dp.k_B11 + dp.k_B12);
  dp.closure_D = rep.weak_values.D - (dp.k_D21 + dp.k_D22);

  const SlitConfig configs[3] = {SlitConfig::both, SlitConfig::slit2, SlitConfig::slit1};
  for (std::size_t n = 0; n < 3; ++n) {
    rep.signature[n].config = configs[n];
    rep.signature[n].recovered =
        n == 0 ? rep.recovered : recover(two_slit_sequence(s, configs[n]));
  }
  return rep;
}

}  // namespace wtraj
