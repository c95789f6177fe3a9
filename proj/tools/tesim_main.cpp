#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tesim/report.hpp"

namespace fs = std::filesystem;

namespace {

bool use_color() {
  static const bool enabled = std::getenv("NO_COLOR") == nullptr;
  return enabled;
}

std::string green(const std::string& s) {
  return use_color() ? "\x1b[32m" + s + "\x1b[0m" : s;
}

std::string red(const std::string& s) {
  return use_color() ? "\x1b[31m" + s + "\x1b[0m" : s;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

int cmd_validate(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "E_IO: cannot open scenario file '" << path << "'\n";
    return 1;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const tesim::ParseResult r = tesim::parse_config(buf.str());
  if (!r.config) {
    for (const auto& d : r.defects) std::cerr << "E_SCHEMA: " << d << '\n';
    return 1;
  }
  std::cout << green("OK") << '\n';
  return 0;
}

int cmd_simulate(const std::string& path, const std::string& out_dir,
                 bool verbose, std::optional<std::uint64_t> seed, bool serial) {
  tesim::ScenarioConfig config;
  try {
    config = tesim::load_scenario(path);
  } catch (const std::exception& e) {
    std::cerr << "E_SCHEMA: " << e.what() << '\n';
    return 1;
  }
  if (seed) config.seed = *seed;

  const tesim::SimulationResult result =
      tesim::simulate_horizon(config, /*parallel=*/!serial);

  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "summary.json",
             tesim::summary_json(config, result));
  write_file(fs::path(out_dir) / "timeseries.csv",
             tesim::timeseries_csv(config, result));
  if (verbose)
    write_file(fs::path(out_dir) / "convergence.csv",
               tesim::convergence_csv(result));

  bool sim_error = false;
  for (const auto& day : result.days)
    for (const auto& e : day.market.errors) {
      sim_error = true;
      const bool congestion = e.rfind("congestion", 0) == 0;
      std::cerr << (congestion ? "E_CONGESTION: " : "E_NONCONVERGENCE: ") << e
                << '\n';
    }
  std::cout << (sim_error ? red("DONE_WITH_ERRORS") : green("DONE")) << " "
            << result.days.size() << " days -> " << out_dir << '\n';
  return sim_error ? 2 : 0;
}

int cmd_case_study(int case_id, const std::vector<std::string>& sets,
                   const std::string& out_dir) {
  std::map<std::string, double> overrides;
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "E_USAGE: --set expects key=value, got '" << kv << "'\n";
      return 1;
    }
    try {
      overrides[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      std::cerr << "E_USAGE: non-numeric value in '" << kv << "'\n";
      return 1;
    }
  }
  tesim::CaseStudyReport report;
  try {
    report = tesim::run_case_study(case_id, overrides);
  } catch (const std::exception& e) {
    std::cerr << "E_USAGE: " << e.what() << '\n';
    return 1;
  }
  std::cout << tesim::case_study_json(report);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) /
                   ("case" + std::to_string(case_id) + ".json"),
               tesim::case_study_json(report));
    write_file(fs::path(out_dir) / "table1.csv", tesim::table1_csv({report}));
  }
  return 0;
}

int cmd_duck_curve(const std::string& path, int day, const std::string& out) {
  tesim::ScenarioConfig config;
  try {
    config = tesim::load_scenario(path);
  } catch (const std::exception& e) {
    std::cerr << "E_SCHEMA: " << e.what() << '\n';
    return 1;
  }
  if (day < 0 || day >= config.horizon_days) {
    std::cerr << "E_USAGE: day " << day << " outside horizon of "
              << config.horizon_days << " days\n";
    return 1;
  }
  const tesim::SimulationResult result = tesim::simulate_horizon(config);
  const tesim::TimeSeries curve = tesim::net_load_curve(result, day, config);
  std::ostringstream os;
  os << "hour,net_load_kw\n";
  char buf[64];
  for (int t = 0; t < config.grid.n_steps; ++t) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f\n", config.grid.hour_at(t),
                  curve.values[t]);
    os << buf;
  }
  if (out.empty()) {
    std::cout << os.str();
  } else {
    if (fs::path(out).has_parent_path())
      fs::create_directories(fs::path(out).parent_path());
    write_file(out, os.str());
  }
  bool sim_error = false;
  for (const auto& d : result.days)
    if (!d.market.errors.empty()) sim_error = true;
  if (sim_error) std::cerr << "E_NONCONVERGENCE: see simulate for details\n";
  return sim_error ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neighborhood transactive-energy simulator"};
  app.require_subcommand(1);

  std::string scn_path, out_dir = "out", duck_out;
  bool verbose = false, serial = false;
  std::optional<std::uint64_t> seed;
  int case_id = 0, day = 0;
  std::vector<std::string> sets;

  auto* sim = app.add_subcommand("simulate", "Run a scenario over its horizon");
  sim->add_option("scenario", scn_path, "Scenario file")->required();
  sim->add_option("--out", out_dir, "Output directory");
  sim->add_flag("--verbose", verbose, "Also write the convergence trace");
  sim->add_option("--seed", seed, "Override the scenario seed");
  sim->add_flag("--serial", serial, "Disable in-process parallelism");

  auto* cs = app.add_subcommand("case-study", "Cost-benefit for a deployment strategy");
  cs->add_option("case", case_id, "Strategy id: 1, 2 or 3")
      ->required()
      ->check(CLI::Range(1, 3));
  cs->add_option("--set", sets, "Override an assumption, key=value");
  std::string cs_out;
  cs->add_option("--out", cs_out, "Also write JSON + CSV reports here");

  auto* val = app.add_subcommand("validate", "Check a scenario file");
  val->add_option("scenario", scn_path, "Scenario file")->required();

  auto* duck = app.add_subcommand("duck-curve", "Emit a day's net-load series as CSV");
  duck->add_option("scenario", scn_path, "Scenario file")->required();
  duck->add_option("--day", day, "Day index within the horizon")->required();
  duck->add_option("--out", duck_out, "Write CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "E_USAGE: " << e.what() << '\n';
    return 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(scn_path, out_dir, verbose, seed, serial);
    if (cs->parsed()) return cmd_case_study(case_id, sets, cs_out);
    if (val->parsed()) return cmd_validate(scn_path);
    if (duck->parsed()) return cmd_duck_curve(scn_path, day, duck_out);
  } catch (const std::exception& e) {
    std::cerr << "E_SIM: " << e.what() << '\n';
    return 2;
  }
  std::cerr << "E_USAGE: no subcommand\n";
  return 1;
}
