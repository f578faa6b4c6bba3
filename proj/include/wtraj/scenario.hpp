#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wtraj/probegrid.hpp"
#include "wtraj/protocol.hpp"

namespace wtraj {

struct PreStateConfig {
  double width = 0.0;               ///< d
  std::vector<int> slits{1, 2};     ///< open slits
  std::vector<double> velocities;   ///< p_i / m per open slit, same order as slits
};

struct PostStateConfig {
  double t_f = 0.0;
  double x_f = 0.0;
  double delta = 0.0;
  std::vector<double> velocities;   ///< collimation p' / m per component
  std::vector<double> weights;      ///< real weights, normalized on load
  std::vector<int> toward;          ///< slit each component is collimated toward, 0 if none
};

struct ProbeGridConfig {
  struct Axis {
    double min = 0.0, max = 0.0;
    int count = 0;
  };
  std::optional<Axis> x, t;
  struct Point {
    std::string id;
    double x = 0.0, t = 0.0;
  };
  std::vector<Point> points;
  double coupling = 0.0;
  InteractionProfile profile;
  double threshold_rel = 0.05;
  std::optional<double> linking_radius;
  double first_order_guard = 0.3;
};

struct CrystalConfig {
  std::array<Crystal, 4> crystals{};
  RotationMode mode = RotationMode::idealized;
  bool circular_readout = true;
};

struct OutputConfig {
  int screen_points = 4096;
  double screen_range = 4.0;  ///< half range in units of Δx
  std::vector<double> density_times;
  int density_points = 1024;
};

struct ScenarioConfig {
  std::string name;
  UnitSystem units;
  SlitGeometry geometry;
  PreStateConfig pre;
  PostStateConfig post;
  std::optional<ProbeGridConfig> probes;
  std::optional<CrystalConfig> crystals;
  OutputConfig output;

  StateSpec pre_state() const;
  StateSpec post_state() const;
  std::vector<Probe> probe_list() const;
  ProtocolSetup protocol_setup() const;
  /// Canonical JSON text of the resolved configuration (defaults applied).
  std::string echo() const;
  /// FNV-1a 64 of echo(), as 16 hex digits.
  std::string hash() const;
};

ScenarioConfig parse_scenario(const std::string& text, const std::string& name = "inline");
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Path of a bundled scenario, or the argument itself when it names an existing file.
std::filesystem::path resolve_scenario(const std::string& name_or_path);
std::vector<std::string> bundled_scenarios();

/// Parses "point" or "gaussian:<width>".
InteractionProfile parse_profile(const std::string& text);

using Cell = std::variant<double, std::string>;

struct EmittedTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::string> units;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;

  EmittedTable(std::string name, std::vector<std::pair<std::string, std::string>> columns_units);
  /// Throws PreconditionError unless the row has one cell per column.
  void add_row(std::vector<Cell> row);
  double number(std::size_t row, const std::string& column) const;
  std::size_t column_index(const std::string& column) const;
};

struct Report {
  std::string command;
  std::string scenario;
  std::string config_hash;
  std::vector<EmittedTable> tables;

  const EmittedTable& table(const std::string& name) const;
};

void write_csv(const Report& report, std::ostream& out);
void write_json(const Report& report, std::ostream& out);
/// Shortest round-trip decimal, independent of the global locale.
std::string format_number(double v);

/// Local maxima of a sampled curve, refined by a parabola through the three
/// neighbouring samples.
std::vector<double> find_peaks(const std::vector<double>& x, const std::vector<double>& y);

Report cmd_pattern(const ScenarioConfig& config);
Report cmd_density(const ScenarioConfig& config);
Report cmd_weak_grid(const ScenarioConfig& config);
Report cmd_protocol(const ScenarioConfig& config);
/// Recovers weak values from a contrasts table with columns scheme, step,
/// contrast and optionally circular (see write_csv for the layout).
Report cmd_invert(const ScenarioConfig& config, const std::string& contrasts_csv);

}  // namespace wtraj
