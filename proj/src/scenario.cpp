#include "wtraj/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "wtraj/error.hpp"

#ifndef WTRAJ_SCENARIO_DIR
#define WTRAJ_SCENARIO_DIR "scenarios"
#endif

namespace wtraj {

namespace {

using nlohmann::json;

std::string at_line(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  if (m.line < 0) return "";
  return " (line " + std::to_string(m.line + 1) + ")";
}

double parse_double(const YAML::Node& n, const std::string& field) {
  if (!n.IsScalar()) throw ValidationError(field, "expected a number" + at_line(n));
  const std::string& s = n.Scalar();
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ValidationError(field, "expected a number, got '" + s + "'" + at_line(n));
  }
  return v;
}

int parse_int(const YAML::Node& n, const std::string& field) {
  if (!n.IsScalar()) throw ValidationError(field, "expected an integer" + at_line(n));
  const std::string& s = n.Scalar();
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError(field, "expected an integer, got '" + s + "'" + at_line(n));
  }
  return v;
}

bool parse_bool(const YAML::Node& n, const std::string& field) {
  if (n.IsScalar()) {
    const std::string& s = n.Scalar();
    if (s == "true") return true;
    if (s == "false") return false;
  }
  throw ValidationError(field, "expected true or false" + at_line(n));
}

// A YAML mapping read under a dotted field path; unknown keys are rejected.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (!node_.IsMap()) throw ValidationError(path_.empty() ? "<root>" : path_, "expected a mapping" + at_line(node_));
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) {
    seen_.insert(key);
    const YAML::Node n = node_[key];
    return n.IsDefined() && !n.IsNull();
  }

  YAML::Node get(const std::string& key) {
    if (!has(key)) throw ValidationError(field(key), "is required" + at_line(node_));
    return node_[key];
  }

  double number(const std::string& key) { return parse_double(get(key), field(key)); }
  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }
  std::optional<double> maybe_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }
  int integer(const std::string& key, int fallback) {
    return has(key) ? parse_int(node_[key], field(key)) : fallback;
  }
  bool boolean(const std::string& key, bool fallback) {
    return has(key) ? parse_bool(node_[key], field(key)) : fallback;
  }
  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const YAML::Node n = node_[key];
    if (!n.IsScalar()) throw ValidationError(field(key), "expected a string" + at_line(n));
    return n.Scalar();
  }

  YAML::Node sequence(const std::string& key) {
    const YAML::Node n = get(key);
    if (!n.IsSequence()) throw ValidationError(field(key), "expected a list" + at_line(n));
    return n;
  }
  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    const YAML::Node n = sequence(key);
    for (std::size_t i = 0; i < n.size(); ++i) {
      out.push_back(parse_double(n[i], field(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }
  std::vector<int> integers(const std::string& key) {
    std::vector<int> out;
    const YAML::Node n = sequence(key);
    for (std::size_t i = 0; i < n.size(); ++i) {
      out.push_back(parse_int(n[i], field(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  Section section(const std::string& key) { return Section(get(key), field(key)); }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const std::string key = it->first.Scalar();
      if (!seen_.count(key)) throw ValidationError(field(key), "unknown key" + at_line(it->first));
    }
  }

  const YAML::Node& node() const { return node_; }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ValidationError(field, what);
}

void check_slit(int s, const std::string& field) {
  require(s == 1 || s == 2, field, "slit must be 1 or 2, got " + std::to_string(s));
}

ProbeGridConfig::Axis read_axis(Section& parent, const std::string& key) {
  const YAML::Node n = parent.sequence(key);
  const std::string f = parent.field(key);
  require(n.size() == 3, f, "expected [min, max, count]" + at_line(n));
  ProbeGridConfig::Axis a{parse_double(n[0], f + "[0]"), parse_double(n[1], f + "[1]"),
                          parse_int(n[2], f + "[2]")};
  require(a.count >= 1, f, "count must be at least 1");
  require(a.max >= a.min, f, "max must not be below min");
  return a;
}

Crystal read_crystal(Section& parent, const std::string& key, CrystalId id) {
  Section s = parent.section(key);
  Crystal c;
  c.id = id;
  c.x = s.number("x");
  c.t = s.number("t");
  c.coupling = s.number("coupling");
  s.finish();
  return c;
}

ScenarioConfig build(const YAML::Node& root, const std::string& fallback_name) {
  ScenarioConfig cfg;
  Section top(root, "");
  cfg.name = top.text("name", fallback_name);

  {
    Section u = top.has("units") ? top.section("units") : Section(YAML::Node(YAML::NodeType::Map), "units");
    const bool dimensionless = u.boolean("dimensionless", false);
    cfg.units.dimensionless = dimensionless;
    cfg.units.hbar = u.number("hbar", dimensionless ? 1.0 : kHbarSI);
    cfg.units.mass = dimensionless ? u.number("mass", 1.0) : u.number("mass");
    u.finish();
    require(cfg.units.hbar > 0.0, "units.hbar", "must be positive");
    require(cfg.units.mass > 0.0, "units.mass", "must be positive");
  }

  {
    Section g = top.section("geometry");
    cfg.geometry.half_separation = g.number("x0");
    require(cfg.geometry.half_separation > 0.0, "geometry.x0", "must be positive");
    cfg.geometry.slit_width = g.number("c", 0.0);
    cfg.geometry.slit_time = g.number("tau", 0.0);
    cfg.geometry.screen_distance = g.number("D", 0.0);
    cfg.geometry.longitudinal_speed = g.number("pz_over_m", 0.0);
    require(cfg.geometry.slit_time >= 0.0, "geometry.tau", "must not be negative");
    require(cfg.geometry.screen_distance >= 0.0, "geometry.D", "must not be negative");
    require(cfg.geometry.longitudinal_speed >= 0.0, "geometry.pz_over_m", "must not be negative");
    g.finish();
  }

  {
    Section p = top.section("pre_state");
    cfg.pre.width = p.number("width");
    require(cfg.pre.width > 0.0, "pre_state.width", "must be positive");
    if (p.has("slits")) cfg.pre.slits = p.integers("slits");
    require(!cfg.pre.slits.empty() && cfg.pre.slits.size() <= 2, "pre_state.slits",
            "list one or two slits");
    for (int s : cfg.pre.slits) check_slit(s, "pre_state.slits");
    require(cfg.pre.slits.size() == 1 || cfg.pre.slits[0] != cfg.pre.slits[1], "pre_state.slits",
            "slits must differ");
    cfg.pre.velocities =
        p.has("velocities") ? p.numbers("velocities") : std::vector<double>(cfg.pre.slits.size(), 0.0);
    require(cfg.pre.velocities.size() == cfg.pre.slits.size(), "pre_state.velocities",
            "needs one entry per open slit");
    p.finish();
  }
  if (cfg.geometry.slit_width == 0.0) cfg.geometry.slit_width = cfg.pre.width;
  require(cfg.geometry.slit_width > 0.0, "geometry.c", "must be positive");

  {
    Section p = top.section("post_state");
    const double derived = cfg.geometry.longitudinal_speed > 0.0 && cfg.geometry.screen_distance > 0.0
                               ? cfg.geometry.screen_distance / cfg.geometry.longitudinal_speed
                               : 0.0;
    if (p.has("t_f")) {
      cfg.post.t_f = p.number("t_f");
    } else {
      require(derived > 0.0, "post_state.t_f", "is required when geometry.D or geometry.pz_over_m is absent");
      cfg.post.t_f = derived;
    }
    require(cfg.post.t_f > 0.0, "post_state.t_f", "must be positive");
    cfg.post.x_f = p.number("x_f");
    cfg.post.delta = p.number("delta");
    require(cfg.post.delta > 0.0, "post_state.delta", "must be positive");
    if (p.has("toward")) {
      cfg.post.toward = p.integers("toward");
      for (int s : cfg.post.toward) check_slit(s, "post_state.toward");
    }
    if (p.has("velocities")) {
      cfg.post.velocities = p.numbers("velocities");
      require(cfg.post.toward.empty() || cfg.post.toward.size() == cfg.post.velocities.size(),
              "post_state.toward", "needs one entry per velocity");
    } else {
      require(!cfg.post.toward.empty(), "post_state.velocities",
              "is required unless post_state.toward is given");
      for (int s : cfg.post.toward) {
        const double x_j = slit_sign(s) * cfg.geometry.half_separation;
        cfg.post.velocities.push_back((cfg.post.x_f - x_j) / cfg.post.t_f);
      }
    }
    const std::size_t n = cfg.post.velocities.size();
    require(n >= 1, "post_state.velocities", "needs at least one component");
    if (cfg.post.toward.empty()) cfg.post.toward.assign(n, 0);
    cfg.post.weights = p.has("weights") ? p.numbers("weights") : std::vector<double>(n, 1.0);
    require(cfg.post.weights.size() == n, "post_state.weights", "needs one entry per component");
    double norm = 0.0;
    for (double w : cfg.post.weights) norm += w * w;
    require(norm > 0.0, "post_state.weights", "must not all vanish");
    for (double& w : cfg.post.weights) w /= std::sqrt(norm);
    p.finish();
  }

  if (top.has("probes")) {
    Section p = top.section("probes");
    ProbeGridConfig pg;
    if (p.has("grid")) {
      Section g = p.section("grid");
      pg.x = read_axis(g, "x");
      pg.t = read_axis(g, "t");
      g.finish();
    }
    if (p.has("points")) {
      const YAML::Node pts = p.sequence("points");
      for (std::size_t i = 0; i < pts.size(); ++i) {
        Section s(pts[i], "probes.points[" + std::to_string(i) + "]");
        ProbeGridConfig::Point pt;
        pt.id = s.text("id", "P" + std::to_string(i));
        pt.x = s.number("x");
        pt.t = s.number("t");
        s.finish();
        pg.points.push_back(pt);
      }
    }
    require(pg.x.has_value() || !pg.points.empty(), "probes", "needs a grid or a list of points");
    pg.coupling = p.number("coupling");
    try {
      pg.profile = parse_profile(p.text("profile", "point"));
    } catch (const PreconditionError& e) {
      throw ValidationError("probes.profile", e.what());
    }
    pg.threshold_rel = p.number("threshold_rel", 0.05);
    require(pg.threshold_rel > 0.0 && pg.threshold_rel <= 1.0, "probes.threshold_rel",
            "must lie in (0, 1]");
    pg.linking_radius = p.maybe_number("linking_radius");
    require(!pg.linking_radius || *pg.linking_radius > 0.0, "probes.linking_radius",
            "must be positive");
    pg.first_order_guard = p.number("first_order_guard", 0.3);
    require(pg.first_order_guard > 0.0, "probes.first_order_guard", "must be positive");
    p.finish();
    for (const auto& pt : pg.points) {
      require(pt.t > 0.0 && pt.t < cfg.post.t_f, "probes.points",
              "probe " + pt.id + " must fire strictly between 0 and t_f");
    }
    if (pg.t) {
      require(pg.t->min > 0.0 && pg.t->max < cfg.post.t_f, "probes.grid.t",
              "firing times must lie strictly between 0 and t_f");
    }
    cfg.probes = pg;
  }

  if (top.has("crystals")) {
    Section c = top.section("crystals");
    CrystalConfig cc;
    const std::string mode = c.text("mode", "idealized");
    if (mode == "idealized") {
      cc.mode = RotationMode::idealized;
    } else if (mode == "exact") {
      cc.mode = RotationMode::exact;
    } else {
      throw ValidationError("crystals.mode", "expected idealized or exact, got '" + mode + "'");
    }
    cc.circular_readout = c.boolean("circular_readout", true);
    cc.crystals = {read_crystal(c, "A", CrystalId::A), read_crystal(c, "B", CrystalId::B),
                   read_crystal(c, "C", CrystalId::C), read_crystal(c, "D", CrystalId::D)};
    c.finish();
    for (const Crystal& k : cc.crystals) {
      const std::string f = "crystals." + to_string(k.id);
      require(k.t > 0.0 && k.t < cfg.post.t_f, f + ".t", "must lie strictly between 0 and t_f");
    }
    cfg.crystals = cc;
  }

  if (top.has("output")) {
    Section o = top.section("output");
    cfg.output.screen_points = o.integer("screen_points", 4096);
    require(cfg.output.screen_points >= 3, "output.screen_points", "must be at least 3");
    cfg.output.screen_range = o.number("screen_range", 4.0);
    require(cfg.output.screen_range > 0.0, "output.screen_range", "must be positive");
    if (o.has("density_times")) cfg.output.density_times = o.numbers("density_times");
    cfg.output.density_points = o.integer("density_points", 1024);
    require(cfg.output.density_points >= 3, "output.density_points", "must be at least 3");
    o.finish();
  }
  if (cfg.output.density_times.empty()) {
    const double tf = cfg.post.t_f;
    cfg.output.density_times = {0.0, tf / 4, tf / 2, 3 * tf / 4, tf};
  }
  for (double t : cfg.output.density_times) {
    require(t >= 0.0 && t <= cfg.post.t_f, "output.density_times", "times must lie in [0, t_f]");
  }

  top.finish();
  return cfg;
}

json profile_json(const InteractionProfile& p) {
  if (p.kind == InteractionProfile::Kind::point) return "point";
  return json{{"kind", "gaussian"}, {"width", p.width}};
}

}  // namespace

// ---------------------------------------------------------------------------

InteractionProfile parse_profile(const std::string& text) {
  if (text == "point") return InteractionProfile::point();
  const std::string prefix = "gaussian:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string w = text.substr(prefix.size());
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec == std::errc() && ptr == w.data() + w.size() && v > 0.0 && std::isfinite(v)) {
      return InteractionProfile::gaussian(v);
    }
  }
  throw PreconditionError("profile must be 'point' or 'gaussian:<width>', got '" + text + "'");
}

ScenarioConfig parse_scenario(const std::string& text, const std::string& name) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError("scenario " + name + ": line " + std::to_string(e.mark.line + 1) + ": " + e.msg,
                     e.mark.line + 1);
  }
  if (!root.IsMap()) throw ParseError("scenario " + name + ": top level must be a mapping", 1);
  return build(root, name);
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.stem().string());
}

std::filesystem::path resolve_scenario(const std::string& name) {
  namespace fs = std::filesystem;
  if (fs::exists(name)) return name;
  const fs::path bundled = fs::path(WTRAJ_SCENARIO_DIR) / (name + ".scenario");
  if (fs::exists(bundled)) return bundled;
  throw PreconditionError("no scenario file or bundled scenario named '" + name + "'");
}

std::vector<std::string> bundled_scenarios() {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(WTRAJ_SCENARIO_DIR, ec)) {
    if (e.path().extension() == ".scenario") out.push_back(e.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

StateSpec ScenarioConfig::pre_state() const {
  StateSpec s;
  s.role = StateRole::pre;
  const double w = pre.slits.size() == 2 ? 1.0 / std::sqrt(2.0) : 1.0;
  for (std::size_t i = 0; i < pre.slits.size(); ++i) {
    const int slit = pre.slits[i];
    StateComponent c;
    c.weight = w;
    c.slit = slit;
    c.packet = {slit_sign(slit) * geometry.half_separation, pre.width,
                units.mass * pre.velocities[i], 0.0, EvolutionRole::forward};
    s.components.push_back(c);
  }
  return s;
}

StateSpec ScenarioConfig::post_state() const {
  StateSpec s;
  s.role = StateRole::post;
  for (std::size_t i = 0; i < post.velocities.size(); ++i) {
    StateComponent c;
    c.weight = post.weights[i];
    c.slit = post.toward[i];
    c.packet = {post.x_f, post.delta, units.mass * post.velocities[i], post.t_f,
                EvolutionRole::backward};
    s.components.push_back(c);
  }
  return s;
}

std::vector<Probe> ScenarioConfig::probe_list() const {
  if (!probes) throw PreconditionError("scenario " + name + " defines no probes");
  const ProbeGridConfig& p = *probes;
  std::vector<Probe> out;
  if (p.x) {
    out = make_probe_grid(p.x->min, p.x->max, p.x->count, p.t->min, p.t->max, p.t->count,
                          p.coupling, p.profile, geometry.longitudinal_speed);
  }
  for (const auto& pt : p.points) {
    out.push_back({pt.id, pt.x, geometry.longitudinal_speed * pt.t, pt.t, p.coupling, p.profile});
  }
  return out;
}

ProtocolSetup ScenarioConfig::protocol_setup() const {
  if (!crystals) throw PreconditionError("scenario " + name + " defines no crystals");
  ProtocolSetup s;
  s.pre = pre_state();
  s.post = post_state();
  s.crystals = crystals->crystals;
  s.units = units;
  s.t_f = post.t_f;
  s.profile = probes ? probes->profile : InteractionProfile::point();
  s.mode = crystals->mode;
  s.circular_readout = crystals->circular_readout;
  return s;
}

std::string ScenarioConfig::echo() const {
  json j;
  j["name"] = name;
  j["units"] = {{"dimensionless", units.dimensionless}, {"hbar", units.hbar}, {"mass", units.mass}};
  j["geometry"] = {{"x0", geometry.half_separation},
                   {"c", geometry.slit_width},
                   {"tau", geometry.slit_time},
                   {"D", geometry.screen_distance},
                   {"pz_over_m", geometry.longitudinal_speed}};
  j["pre_state"] = {{"width", pre.width}, {"slits", pre.slits}, {"velocities", pre.velocities}};
  j["post_state"] = {{"t_f", post.t_f},
                     {"x_f", post.x_f},
                     {"delta", post.delta},
                     {"velocities", post.velocities},
                     {"weights", post.weights},
                     {"toward", post.toward}};
  if (probes) {
    json p;
    if (probes->x) {
      p["grid"] = {{"x", {probes->x->min, probes->x->max, probes->x->count}},
                   {"t", {probes->t->min, probes->t->max, probes->t->count}}};
    }
    json pts = json::array();
    for (const auto& pt : probes->points) pts.push_back({{"id", pt.id}, {"x", pt.x}, {"t", pt.t}});
    p["points"] = pts;
    p["coupling"] = probes->coupling;
    p["profile"] = profile_json(probes->profile);
    p["threshold_rel"] = probes->threshold_rel;
    p["linking_radius"] = probes->linking_radius ? json(*probes->linking_radius) : json(nullptr);
    p["first_order_guard"] = probes->first_order_guard;
    j["probes"] = p;
  }
  if (crystals) {
    json c;
    c["mode"] = crystals->mode == RotationMode::idealized ? "idealized" : "exact";
    c["circular_readout"] = crystals->circular_readout;
    for (const Crystal& k : crystals->crystals) {
      c[to_string(k.id)] = {{"x", k.x}, {"t", k.t}, {"coupling", k.coupling}};
    }
    j["crystals"] = c;
  }
  j["output"] = {{"screen_points", output.screen_points},
                 {"screen_range", output.screen_range},
                 {"density_times", output.density_times},
                 {"density_points", output.density_points}};
  return j.dump();
}

std::string ScenarioConfig::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : echo()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------

EmittedTable::EmittedTable(std::string n, std::vector<std::pair<std::string, std::string>> cu)
    : name(std::move(n)) {
  for (auto& [c, u] : cu) {
    columns.push_back(std::move(c));
    units.push_back(std::move(u));
  }
}

void EmittedTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw PreconditionError("table " + name + ": row has " + std::to_string(row.size()) +
                            " cells, expected " + std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

std::size_t EmittedTable::column_index(const std::string& column) const {
  const auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw PreconditionError("table " + name + " has no column " + column);
  return static_cast<std::size_t>(it - columns.begin());
}

double EmittedTable::number(std::size_t row, const std::string& column) const {
  const Cell& c = rows.at(row).at(column_index(column));
  if (const double* v = std::get_if<double>(&c)) return *v;
  throw PreconditionError("table " + name + ", column " + column + " is not numeric");
}

const EmittedTable& Report::table(const std::string& n) const {
  for (const EmittedTable& t : tables) {
    if (t.name == n) return t;
  }
  throw PreconditionError("report has no table " + n);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  if (const double* v = std::get_if<double>(&c)) return format_number(*v);
  return csv_field(std::get<std::string>(c));
}

template <class T>
void join_line(std::ostream& out, const std::vector<T>& items) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out << ',';
    out << items[i];
  }
  out << '\n';
}

json cell_json(const Cell& c) {
  if (const double* v = std::get_if<double>(&c)) {
    return std::isfinite(*v) ? json(*v) : json(nullptr);
  }
  return std::get<std::string>(c);
}

}  // namespace

void write_csv(const Report& r, std::ostream& out) {
  out << "# command: " << r.command << '\n';
  out << "# scenario: " << r.scenario << '\n';
  out << "# config_hash: " << r.config_hash << '\n';
  bool first = true;
  for (const EmittedTable& t : r.tables) {
    if (!first) out << '\n';
    first = false;
    out << "# table: " << t.name << '\n';
    for (const auto& [k, v] : t.metadata) out << "# " << k << ": " << v << '\n';
    std::vector<std::string> header, units;
    for (const auto& c : t.columns) header.push_back(csv_field(c));
    for (const auto& u : t.units) units.push_back(csv_field(u));
    join_line(out, header);
    join_line(out, units);
    for (const auto& row : t.rows) {
      std::vector<std::string> cells;
      for (const Cell& c : row) cells.push_back(cell_text(c));
      join_line(out, cells);
    }
  }
}

void write_json(const Report& r, std::ostream& out) {
  json j;
  j["command"] = r.command;
  j["scenario"] = r.scenario;
  j["config_hash"] = r.config_hash;
  json tables = json::array();
  for (const EmittedTable& t : r.tables) {
    json jt;
    jt["name"] = t.name;
    jt["columns"] = t.columns;
    jt["units"] = t.units;
    json meta = json::object();
    for (const auto& [k, v] : t.metadata) meta[k] = v;
    jt["metadata"] = meta;
    json rows = json::array();
    for (const auto& row : t.rows) {
      json jr = json::array();
      for (const Cell& c : row) jr.push_back(cell_json(c));
      rows.push_back(jr);
    }
    jt["rows"] = rows;
    tables.push_back(jt);
  }
  j["tables"] = tables;
  out << j.dump(1) << '\n';
}

std::vector<double> find_peaks(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> peaks;
  if (x.size() != y.size() || x.size() < 3) return peaks;
  const double top = *std::max_element(y.begin(), y.end());
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1]) || y[i] < 1e-6 * top) continue;
    const double denom = y[i - 1] - 2 * y[i] + y[i + 1];
    const double shift = denom != 0.0 ? 0.5 * (y[i - 1] - y[i + 1]) / denom : 0.0;
    peaks.push_back(x[i] + shift * (x[i + 1] - x[i]));
  }
  return peaks;
}

// ---------------------------------------------------------------------------

namespace {

Report start(const ScenarioConfig& cfg, const std::string& command) {
  Report r;
  r.command = command;
  r.scenario = cfg.name;
  r.config_hash = cfg.hash();
  return r;
}

bool si(const ScenarioConfig& cfg) { return !cfg.units.dimensionless; }
std::string unit(const ScenarioConfig& cfg, const char* s) { return si(cfg) ? s : "1"; }

std::string join_numbers(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += format_number(v[i]);
  }
  return out;
}

// Amplitude width √2·spread of the widest pre-state packet at t.
double amplitude_width(const StateSpec& pre, double t, const UnitSystem& u) {
  double w = 0.0;
  for (const auto& c : pre.components) w = std::max(w, std::sqrt(2.0) * c.packet.spread(t, u));
  return w;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

std::vector<SlitConfig> configs_of(const StateSpec& pre) {
  std::vector<SlitConfig> out;
  if (pre.has_slit(1) && pre.has_slit(2)) out.push_back(SlitConfig::both);
  if (pre.has_slit(1)) out.push_back(SlitConfig::slit1);
  if (pre.has_slit(2)) out.push_back(SlitConfig::slit2);
  return out;
}

double default_linking_radius(const ScenarioConfig& cfg, const std::vector<Probe>& probes) {
  std::vector<double> times;
  for (const Probe& p : probes) times.push_back(p.fire_time);
  std::sort(times.begin(), times.end());
  const double t_mid = times.empty() ? 0.5 * cfg.post.t_f : times[times.size() / 2];
  double spread = 0.0;
  for (const auto& c : cfg.pre_state().components) {
    spread = std::max(spread, c.packet.spread(t_mid, cfg.units));
  }
  return 2.0 * spread;
}

}  // namespace

Report cmd_pattern(const ScenarioConfig& cfg) {
  Report r = start(cfg, "pattern");
  const StateSpec pre = cfg.pre_state();
  const double tf = cfg.post.t_f;
  const double dx = amplitude_width(pre, tf, cfg.units);
  const double half = cfg.output.screen_range * dx;
  const std::vector<double> xs = linspace(-half, half, cfg.output.screen_points);
  const bool far_field = cfg.geometry.screen_distance > 0.0 && cfg.geometry.longitudinal_speed > 0.0;

  std::vector<double> dens(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) dens[i] = std::norm(state_value(pre, xs[i], tf, cfg.units));
  const double top = *std::max_element(dens.begin(), dens.end());
  std::vector<double> approx(xs.size(), 0.0);
  double approx_top = 0.0;
  if (far_field) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      approx[i] = fraunhofer_pattern(xs[i], cfg.geometry, cfg.units);
      approx_top = std::max(approx_top, approx[i]);
    }
  }

  EmittedTable t("pattern", {{"x_f", unit(cfg, "m")},
                             {"density", unit(cfg, "1/m")},
                             {"density_rel", "1"},
                             {"fraunhofer_rel", "1"}});
  for (std::size_t i = 0; i < xs.size(); ++i) {
    t.add_row({xs[i], dens[i], dens[i] / top, approx_top > 0.0 ? approx[i] / approx_top : 0.0});
  }

  const std::vector<double> peaks = find_peaks(xs, dens);
  std::vector<double> right;
  double central = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (double p : peaks) {
    if (std::abs(p) < best) {
      best = std::abs(p);
      central = p;
    }
  }
  for (double p : peaks) {
    if (p > central) right.push_back(p);
  }
  t.metadata.push_back({"t_f", format_number(tf)});
  t.metadata.push_back({"delta_x", format_number(dx)});
  t.metadata.push_back({"peaks", join_numbers(peaks)});
  t.metadata.push_back({"central_peak", format_number(central)});
  t.metadata.push_back({"peaks_right", join_numbers(right)});
  if (right.size() >= 3) {
    t.metadata.push_back({"third_peak_right", format_number(right[2])});
    t.metadata.push_back({"peak_spacing", format_number((right[2] - central) / 3.0)});
  }
  if (!far_field) t.metadata.push_back({"fraunhofer", "omitted: geometry.D or geometry.pz_over_m unset"});
  r.tables.push_back(std::move(t));
  return r;
}

Report cmd_density(const ScenarioConfig& cfg) {
  Report r = start(cfg, "density");
  const StateSpec pre = cfg.pre_state();
  EmittedTable snaps("density", {{"t", unit(cfg, "s")}, {"x", unit(cfg, "m")}, {"density", unit(cfg, "1/m")}});
  EmittedTable sum("snapshots", {{"t", unit(cfg, "s")}, {"norm", "1"}, {"x_min", unit(cfg, "m")}, {"x_max", unit(cfg, "m")}});
  for (double t : cfg.output.density_times) {
    const quad::Interval dom = support({&pre}, t, cfg.units);
    const std::vector<double> xs = linspace(dom.lo, dom.hi, cfg.output.density_points);
    double norm = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double d = std::norm(state_value(pre, xs[i], t, cfg.units));
      snaps.add_row({t, xs[i], d});
      if (i) norm += 0.5 * (prev + d) * (xs[i] - xs[i - 1]);
      prev = d;
    }
    sum.add_row({t, norm, dom.lo, dom.hi});
  }
  r.tables.push_back(std::move(snaps));
  r.tables.push_back(std::move(sum));
  return r;
}

Report cmd_weak_grid(const ScenarioConfig& cfg) {
  Report r = start(cfg, "weak-grid");
  const StateSpec pre = cfg.pre_state();
  const StateSpec post = cfg.post_state();
  const std::vector<Probe> probes = cfg.probe_list();
  const ProbeGridConfig& pc = *cfg.probes;

  GridOptions go;
  go.first_order_guard = pc.first_order_guard;
  TrajectoryOptions to;
  to.threshold_rel = pc.threshold_rel;
  to.linking_radius = pc.linking_radius ? *pc.linking_radius : default_linking_radius(cfg, probes);
  for (int s : cfg.pre.slits) to.slit_centers.push_back({s, slit_sign(s) * cfg.geometry.half_separation});

  EmittedTable readouts("readouts", {{"config", ""},
                                     {"probe", ""},
                                     {"x", unit(cfg, "m")},
                                     {"z", unit(cfg, "m")},
                                     {"t", unit(cfg, "s")},
                                     {"weak_re", unit(cfg, "1/m")},
                                     {"weak_im", unit(cfg, "1/m")},
                                     {"shift", "1"},
                                     {"above_threshold", "1"}});
  EmittedTable chains("trajectories", {{"config", ""},
                                       {"index", "1"},
                                       {"label", ""},
                                       {"probe_count", "1"},
                                       {"t_first", unit(cfg, "s")},
                                       {"t_last", unit(cfg, "s")},
                                       {"probes", ""}});
  readouts.metadata.push_back({"profile", pc.profile.describe()});
  readouts.metadata.push_back({"coupling", format_number(pc.coupling)});
  chains.metadata.push_back({"threshold_rel", format_number(to.threshold_rel)});
  chains.metadata.push_back({"linking_radius", format_number(to.linking_radius)});

  for (SlitConfig config : configs_of(pre)) {
    const std::string name = to_string(config);
    const std::vector<PointerReadout> out = evaluate_grid(restrict_to(pre, config), post, probes, cfg.units, go);
    double top = 0.0;
    for (const auto& o : out) top = std::max(top, std::abs(o.shift));
    std::map<std::string, const Probe*> by_id;
    for (const Probe& p : probes) by_id[p.id] = &p;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const PointerReadout& o = out[i];
      const Probe& p = probes[i];
      const bool above = top > 0.0 && std::abs(o.shift) >= to.threshold_rel * top;
      readouts.add_row({name, p.id, p.x, p.z, p.fire_time, o.weak_value.value.real(),
                        o.weak_value.value.imag(), o.shift, above ? 1.0 : 0.0});
    }
    const std::vector<WeakTrajectory> trajs = extract_trajectories(out, to);
    for (std::size_t k = 0; k < trajs.size(); ++k) {
      const WeakTrajectory& w = trajs[k];
      std::string ids;
      for (std::size_t m = 0; m < w.probe_ids.size(); ++m) ids += (m ? ";" : "") + w.probe_ids[m];
      const double t0 = by_id.at(w.probe_ids.front())->fire_time;
      const double t1 = by_id.at(w.probe_ids.back())->fire_time;
      chains.add_row({name, static_cast<double>(k), w.label, static_cast<double>(w.probe_ids.size()), t0, t1, ids});
    }
  }
  r.tables.push_back(std::move(readouts));
  r.tables.push_back(std::move(chains));
  return r;
}

Report cmd_protocol(const ScenarioConfig& cfg) {
  Report r = start(cfg, "protocol");
  const ProtocolSetup setup = cfg.protocol_setup();
  const ProtocolReport rep = protocol_report(setup);
  const std::string ku = unit(cfg, "kg m/s");

  EmittedTable schemes("schemes", {{"scheme", ""},
                                   {"step", "1"},
                                   {"I_diag", "1"},
                                   {"I_anti", "1"},
                                   {"I_right", "1"},
                                   {"I_left", "1"},
                                   {"contrast", "1"},
                                   {"circular", "1"}});
  schemes.metadata.push_back({"mode", setup.mode == RotationMode::idealized ? "idealized" : "exact"});
  schemes.metadata.push_back({"intensities", "unnormalized, scaled by |zeta|^2"});
  auto add_step = [&](const StepResult& s) {
    schemes.add_row({to_string(s.contrast.scheme), static_cast<double>(s.contrast.step),
                     s.intensity.diagonal, s.intensity.antidiagonal, s.intensity.right,
                     s.intensity.left, s.contrast.contrast, s.contrast.circular.value_or(0.0)});
  };
  for (const StepResult& s : rep.two_slit) add_step(s);
  for (const StepResult& s : rep.single_slit) add_step(s);

  EmittedTable weak("weak_values", {{"quantity", ""}, {"true_re", ku}, {"true_im", ku}, {"recovered", ku}});
  weak.add_row({"k_A", rep.weak_values.A.real(), rep.weak_values.A.imag(), rep.recovered.k_A});
  weak.add_row({"k_C", rep.weak_values.C.real(), rep.weak_values.C.imag(), rep.recovered.k_C});
  weak.add_row({"k_B", rep.weak_values.B.real(), rep.weak_values.B.imag(), rep.recovered.k_B});
  weak.add_row({"k_D", rep.weak_values.D.real(), rep.weak_values.D.imag(), rep.recovered.k_D});
  weak.add_row({"kappa_B1", rep.kappa[0].real(), rep.kappa[0].imag(), rep.recovered_single.kappa_B1});
  weak.add_row({"kappa_D1", rep.kappa[1].real(), rep.kappa[1].imag(), rep.recovered_single.kappa_D1});
  weak.add_row({"kappa_B2", rep.kappa[2].real(), rep.kappa[2].imag(), rep.recovered_single.kappa_B2});
  weak.add_row({"kappa_D2", rep.kappa[3].real(), rep.kappa[3].imag(), rep.recovered_single.kappa_D2});

  EmittedTable paths("paths", {{"term", ""}, {"parsed_re", ku}, {"parsed_im", ku}, {"direct_re", ku}, {"direct_im", ku}});
  paths.metadata.push_back({"R_1", format_number(rep.ratios[0].real()) + " " + format_number(rep.ratios[0].imag()) + "i"});
  paths.metadata.push_back({"R_2", format_number(rep.ratios[1].real()) + " " + format_number(rep.ratios[1].imag()) + "i"});
  auto add_path = [&](const char* n, Complex a, Complex b) {
    paths.add_row({n, a.real(), a.imag(), b.real(), b.imag()});
  };
  add_path("k_B11", rep.paths.k_B11, rep.direct_paths.k_B11);
  add_path("k_B12", rep.paths.k_B12, rep.direct_paths.k_B12);
  add_path("k_D21", rep.paths.k_D21, rep.direct_paths.k_D21);
  add_path("k_D22", rep.paths.k_D22, rep.direct_paths.k_D22);
  add_path("closure_B", rep.paths.closure_B, rep.direct_paths.closure_B);
  add_path("closure_D", rep.paths.closure_D, rep.direct_paths.closure_D);

  EmittedTable sig("signature", {{"slits", ""}, {"k_A", ku}, {"k_C", ku}, {"k_B", ku}, {"k_D", ku}});
  for (const SignatureRow& row : rep.signature) {
    const char* label = row.config == SlitConfig::both    ? "both_open"
                        : row.config == SlitConfig::slit2 ? "slit1_closed"
                                                          : "slit2_closed";
    sig.add_row({label, row.recovered.k_A, row.recovered.k_C, row.recovered.k_B, row.recovered.k_D});
  }

  r.tables.push_back(std::move(schemes));
  r.tables.push_back(std::move(weak));
  r.tables.push_back(std::move(paths));
  r.tables.push_back(std::move(sig));
  return r;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double csv_number(const std::string& s, int line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("contrasts line " + std::to_string(line) + ": '" + s + "' is not a number", line);
  }
  return v;
}

}  // namespace

Report cmd_invert(const ScenarioConfig& cfg, const std::string& text) {
  if (!cfg.crystals) throw PreconditionError("scenario " + cfg.name + " defines no crystals");
  Report r = start(cfg, "invert");
  std::map<std::string, std::array<std::optional<ContrastSet>, 4>> found;
  std::optional<std::size_t> i_scheme, i_step, i_contrast, i_circular;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> cells = split_csv(line);
    const auto col = [&](const char* n) -> std::optional<std::size_t> {
      const auto it = std::find(cells.begin(), cells.end(), n);
      if (it == cells.end()) return std::nullopt;
      return static_cast<std::size_t>(it - cells.begin());
    };
    if (col("scheme") && col("contrast")) {
      i_scheme = col("scheme");
      i_step = col("step");
      i_contrast = col("contrast");
      i_circular = col("circular");
      if (!i_step) throw ParseError("contrasts line " + std::to_string(lineno) + ": header lacks a step column", lineno);
      continue;
    }
    if (!i_scheme || *i_scheme >= cells.size()) continue;
    const std::string& scheme = cells[*i_scheme];
    Scheme kind;
    if (scheme == "two_slit") {
      kind = Scheme::two_slit;
    } else if (scheme == "single_slit_1") {
      kind = Scheme::single_slit_1;
    } else if (scheme == "single_slit_2") {
      kind = Scheme::single_slit_2;
    } else {
      continue;
    }
    const std::size_t need = std::max({*i_scheme, *i_step, *i_contrast, i_circular.value_or(0)});
    if (cells.size() <= need) throw ParseError("contrasts line " + std::to_string(lineno) + ": too few cells", lineno);
    ContrastSet c;
    c.scheme = kind;
    c.step = static_cast<int>(csv_number(cells[*i_step], lineno));
    if (c.step < 1 || c.step > 4) throw ParseError("contrasts line " + std::to_string(lineno) + ": step must be 1..4", lineno);
    c.contrast = csv_number(cells[*i_contrast], lineno);
    if (i_circular && !cells[*i_circular].empty()) c.circular = csv_number(cells[*i_circular], lineno);
    const std::string key = kind == Scheme::two_slit ? "two_slit" : "single_slit";
    found[key][static_cast<std::size_t>(c.step - 1)] = c;
  }
  if (found.empty()) throw PreconditionError("contrasts input holds no scheme rows");

  const Couplings g{cfg.crystals->crystals[0].coupling, cfg.crystals->crystals[1].coupling,
                    cfg.crystals->crystals[2].coupling, cfg.crystals->crystals[3].coupling};
  const std::string ku = unit(cfg, "kg m/s");
  EmittedTable t("recovered", {{"quantity", ""}, {"value", ku}});
  auto complete = [&](const std::string& key) {
    std::array<ContrastSet, 4> out{};
    for (std::size_t n = 0; n < 4; ++n) {
      if (!found[key][n]) throw PreconditionError("contrasts input lacks " + key + " step " + std::to_string(n + 1));
      out[n] = *found[key][n];
    }
    return out;
  };
  if (found.count("two_slit")) {
    const TwoSlitRecovery k = invert_two_slit(complete("two_slit"), g);
    t.add_row({"k_A", k.k_A});
    t.add_row({"k_C", k.k_C});
    t.add_row({"k_B", k.k_B});
    t.add_row({"k_D", k.k_D});
  }
  if (found.count("single_slit")) {
    const SingleSlitRecovery k = invert_single_slit(complete("single_slit"), g);
    t.add_row({"kappa_B1", k.kappa_B1});
    t.add_row({"kappa_D1", k.kappa_D1});
    t.add_row({"kappa_B2", k.kappa_B2});
    t.add_row({"kappa_D2", k.kappa_D2});
  }
  r.tables.push_back(std::move(t));
  return r;
}

}  // namespace wtraj
