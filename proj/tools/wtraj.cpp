#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "wtraj/error.hpp"
#include "wtraj/scenario.hpp"

namespace {

struct Common {
  std::string scenario;
  std::string out;
  std::string format = "csv";
  std::string profile;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario", c.scenario, "scenario file or bundled name")->required();
  cmd->add_option("--out", c.out, "output file (default: stdout)");
  cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--profile", c.profile, "point or gaussian:<width>");
}

wtraj::ScenarioConfig load(const Common& c) {
  wtraj::ScenarioConfig cfg = wtraj::load_scenario(wtraj::resolve_scenario(c.scenario));
  if (!c.profile.empty()) {
    const wtraj::InteractionProfile p = wtraj::parse_profile(c.profile);
    if (cfg.probes) cfg.probes->profile = p;
  }
  return cfg;
}

void emit(const wtraj::Report& r, const Common& c) {
  std::ostringstream buf;
  if (c.format == "json") {
    wtraj::write_json(r, buf);
  } else {
    wtraj::write_csv(r, buf);
  }
  if (c.out.empty()) {
    std::cout << buf.str();
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw wtraj::PreconditionError("cannot write " + c.out);
  f << buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weak trajectory simulator"};
  app.require_subcommand(1);

  Common common;
  std::string contrasts;
  auto* pattern = app.add_subcommand("pattern", "screen intensity at t_f");
  auto* density = app.add_subcommand("density", "density snapshots");
  auto* grid = app.add_subcommand("weak-grid", "probe grid shifts and weak trajectories");
  auto* protocol = app.add_subcommand("protocol", "four-crystal polarization protocol");
  auto* invert = app.add_subcommand("invert", "weak values from measured contrasts");
  auto* config = app.add_subcommand("config", "print the resolved scenario");
  auto* list = app.add_subcommand("list", "list bundled scenarios");
  for (auto* cmd : {pattern, density, grid, protocol, invert}) add_common(cmd, common);
  config->add_option("--scenario", common.scenario, "scenario file or bundled name")->required();
  config->add_option("--profile", common.profile, "point or gaussian:<width>");
  invert->add_option("--contrasts", contrasts, "CSV with scheme, step, contrast[, circular]")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& n : wtraj::bundled_scenarios()) std::cout << n << '\n';
      return 0;
    }
    const wtraj::ScenarioConfig cfg = load(common);
    if (config->parsed()) {
      std::cout << cfg.echo() << '\n' << "hash " << cfg.hash() << '\n';
      return 0;
    }
    wtraj::Report r;
    if (pattern->parsed()) r = wtraj::cmd_pattern(cfg);
    if (density->parsed()) r = wtraj::cmd_density(cfg);
    if (grid->parsed()) r = wtraj::cmd_weak_grid(cfg);
    if (protocol->parsed()) r = wtraj::cmd_protocol(cfg);
    if (invert->parsed()) {
      std::ifstream f(contrasts);
      std::stringstream text;
      text << f.rdbuf();
      r = wtraj::cmd_invert(cfg, text.str());
    }
    emit(r, common);
  } catch (const wtraj::Error& e) {
    std::cerr << "wtraj: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "wtraj: unexpected failure: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
