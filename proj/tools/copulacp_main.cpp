#include "copulacp/bootstrap.hpp"
#include "copulacp/dgp.hpp"
#include "copulacp/error.hpp"
#include "copulacp/experiments.hpp"
#include "copulacp/io.hpp"
#include "copulacp/rng.hpp"
#include "copulacp/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace {

using namespace copulacp;

constexpr int kUsage = 2;
constexpr int kData = 3;
constexpr int kNumerical = 4;

int exit_code_for(const std::string& code) {
  static const std::set<std::string> usage{"usage", "config", "variant"};
  static const std::set<std::string> data{"io",          "parse",     "ragged",      "empty", "invalid-data",
                                          "too-short",   "dimension", "nonpositive-price"};
  if (usage.contains(code)) return kUsage;
  if (data.contains(code)) return kData;
  return kNumerical;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write '" + path + "'");
  out << text;
}

struct TestArgs {
  std::string input;
  std::string stat = "check";
  std::size_t M = 1000;
  std::string multiplier = "dependent";
  std::string bandwidth = "auto";
  std::string scaling = "lk1";
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::string format = "json";
  unsigned threads = 1;
  bool logreturns = false;
  std::string header = "auto";
  std::string out;
};

BandwidthPolicy parse_bandwidth(const std::string& text) {
  if (text == "auto") return BandwidthPolicy::auto_select();
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || v < 1) throw Error("usage", "--bandwidth expects 'auto' or a positive integer");
  return BandwidthPolicy::fixed(v);
}

Scaling parse_scaling(const std::string& text) { return text == "lk2" ? Scaling::den_lk2 : Scaling::den_lk1; }

std::string test_csv(const nlohmann::json& report) {
  std::string out = "key,value\n";
  for (const char* key : {"statistic_variant", "S", "p_value", "alpha", "reject", "k_star", "k_star_date", "M",
                          "multiplier", "bandwidth_used"}) {
    if (!report.contains(key)) continue;
    const auto& v = report[key];
    out += std::string(key) + "," + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
  }
  for (const auto& [key, v] : report["manifest"].items()) {
    out += "manifest." + key + "," + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
  }
  for (const auto& w : report["warnings"]) out += "warning," + w.get<std::string>() + "\n";
  const auto& traj = report["trajectory"];
  for (std::size_t k = 0; k < traj.size(); ++k) out += "S_k[" + std::to_string(k + 1) + "]," + traj[k].dump() + "\n";
  return out;
}

int cmd_test(const TestArgs& a) {
  CsvOptions csv;
  csv.header = a.header == "yes" ? HeaderMode::present : a.header == "no" ? HeaderMode::absent : HeaderMode::detect;
  InputTable table = load_csv(a.input, csv);
  if (a.logreturns) table = logreturns(table);

  std::vector<std::string> warnings;
  for (const auto c : constant_columns(table.values)) {
    warnings.push_back("column '" + table.names[c] + "' is constant; all its ranks are tied");
  }

  TestConfig cfg;
  cfg.variant = parse_variant(a.stat);
  cfg.replicates = a.M;
  cfg.multiplier = a.multiplier == "iid" ? MultiplierKind::iid : MultiplierKind::dependent;
  cfg.bandwidth = parse_bandwidth(a.bandwidth);
  cfg.scaling = parse_scaling(a.scaling);
  cfg.seed = a.seed;
  cfg.threads = a.threads;

  const Sample sample(table.values);
  const TestResult result = run_test(sample, cfg);
  const auto report = test_report_json(result, make_manifest(table.values, cfg), a.alpha, table.dates, warnings);
  write_output(a.out, a.format == "csv" ? test_csv(report) : report.dump(2) + "\n");
  return 0;
}

int cmd_simulate(const std::string& scenario, std::uint64_t seed, const std::string& out) {
  const ScenarioSpec spec = scenario_from_config(load_config(scenario));
  Rng rng = substream(seed, {static_cast<std::uint64_t>(StreamTag::data)});
  const Sample sample = make_scenario(spec, rng);
  std::vector<std::string> names;
  for (std::size_t j = 1; j <= sample.d(); ++j) names.push_back("x" + std::to_string(j));
  std::ostringstream buf;
  write_csv(buf, sample.data(), names);
  write_output(out, buf.str());
  return 0;
}

struct McArgs {
  int table = 0;
  std::string grid;
  RunOptions options;
  std::string scaling = "lk2";
  std::vector<std::string> filters;
  std::string out;
};

int cmd_mc(McArgs a) {
  if ((a.table == 0) == a.grid.empty()) throw Error("usage", "give exactly one of --table and --grid");
  a.options.scaling = parse_scaling(a.scaling);
  std::map<std::string, std::string> filter;
  for (const auto& f : a.filters) {
    const auto eq = f.find('=');
    if (eq == std::string::npos) throw Error("usage", "--filter expects key=value, got '" + f + "'");
    filter[f.substr(0, eq)] = f.substr(eq + 1);
  }
  RejectionReport report;
  std::string prefix = a.out;
  if (a.table != 0) {
    report = reproduce_table(a.table, a.options, filter);
    if (prefix.empty()) prefix = "mc_table" + std::to_string(a.table);
  } else {
    const std::filesystem::path grid(a.grid);
    auto cells = filter_cells(grid_from_config(load_config(grid), grid.parent_path()), filter);
    report = run_grid(grid.stem().string(), cells, a.options);
    if (prefix.empty()) prefix = "mc_" + grid.stem().string();
  }
  if (report.cells.empty()) throw Error("usage", "no cells match the filter");
  auto json = to_json(report);
  json["version"] = kVersion;
  write_output(prefix + ".json", json.dump(2) + "\n");
  write_output(prefix + ".csv", to_csv(report));
  std::cerr << "wrote " << prefix << ".json and " << prefix << ".csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank-based change-point test for the copula of a multivariate series"};
  app.set_version_flag("--version", std::string(copulacp::kVersion));
  app.require_subcommand(1);

  TestArgs t;
  auto* test = app.add_subcommand("test", "Run the change-point test on a CSV file");
  test->add_option("--input", t.input, "CSV file, rows in time order")->required()->check(CLI::ExistingFile);
  test->add_option("--stat", t.stat, "Statistic variant")->check(CLI::IsMember({"check", "hat", "r"}))->capture_default_str();
  test->add_option("--M", t.M, "Number of multiplier replicates")->check(CLI::PositiveNumber)->capture_default_str();
  test->add_option("--multiplier", t.multiplier)->check(CLI::IsMember({"iid", "dependent"}))->capture_default_str();
  test->add_option("--bandwidth", t.bandwidth, "auto or a positive integer")->capture_default_str();
  test->add_option("--scaling", t.scaling, "Rank denominator m (lk1) or m+1 (lk2)")
      ->check(CLI::IsMember({"lk1", "lk2"}))
      ->capture_default_str();
  test->add_option("--alpha", t.alpha, "Level used for the reject flag only")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  test->add_option("--seed", t.seed)->capture_default_str();
  test->add_option("--format", t.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  test->add_option("--threads", t.threads, "Upper bound on worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  test->add_flag("--logreturns", t.logreturns, "Treat the input as prices and test their logreturns");
  test->add_option("--header", t.header)->check(CLI::IsMember({"auto", "yes", "no"}))->capture_default_str();
  test->add_option("--out", t.out, "Output file (default stdout)");

  std::string scenario, sim_out;
  std::uint64_t sim_seed = 1;
  auto* simulate = app.add_subcommand("simulate", "Draw one sample from a scenario file");
  simulate->add_option("--scenario", scenario)->required()->check(CLI::ExistingFile);
  simulate->add_option("--seed", sim_seed)->capture_default_str();
  simulate->add_option("--out", sim_out, "Output CSV (default stdout)");

  McArgs m;
  auto* mc = app.add_subcommand("mc", "Monte Carlo rejection rates over a scenario grid");
  mc->add_option("--table", m.table, "Built-in grid 1..6")->check(CLI::Range(1, 6));
  mc->add_option("--grid", m.grid, "Grid config file")->check(CLI::ExistingFile);
  mc->add_option("--reps", m.options.reps)->check(CLI::PositiveNumber)->capture_default_str();
  mc->add_option("--M", m.options.replicates)->check(CLI::PositiveNumber)->capture_default_str();
  mc->add_option("--alpha", m.options.alpha)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  mc->add_option("--seed", m.options.seed)->capture_default_str();
  mc->add_option("--threads", m.options.threads)->check(CLI::PositiveNumber)->capture_default_str();
  mc->add_option("--scaling", m.scaling)->check(CLI::IsMember({"lk1", "lk2"}))->capture_default_str();
  mc->add_option("--filter", m.filters, "Keep cells with factor key=value (repeatable)");
  mc->add_option("--out", m.out, "Output prefix; writes <prefix>.json and <prefix>.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*test) return cmd_test(t);
    if (*simulate) return cmd_simulate(scenario, sim_seed, sim_out);
    if (*mc) return cmd_mc(m);
  } catch (const Error& e) {
    std::cerr << nlohmann::json{{"error", e.code()}, {"message", e.what()}}.dump() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return kNumerical;
  }
  return kUsage;
}
