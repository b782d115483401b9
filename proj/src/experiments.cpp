#include "copulacp/experiments.hpp"

#include "copulacp/error.hpp"
#include "copulacp/parallel.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace copulacp {

namespace {

template <std::size_t N>
struct ReferenceRowLabeled {
  const char* family;
  std::array<double, N> values;
};

#include "reference_tables.inc"

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

Family family_code(std::string_view code) {
  if (code == "Cl") return Family::clayton;
  if (code == "GH") return Family::gumbel;
  if (code == "N") return Family::normal;
  if (code == "F") return Family::frank;
  throw Error("config", "unknown family code");
}

CopulaModel model_from_tau(Family family, double tau, std::size_t d) { return {copula_from_tau(family, tau, d), {}}; }

constexpr std::array<Family, 3> kTriple{Family::clayton, Family::gumbel, Family::normal};
const std::vector<Variant> kAllVariants{Variant::check, Variant::hat, Variant::r};
const std::vector<Variant> kSubsampleVariants{Variant::check, Variant::hat};

std::string make_label(const std::map<std::string, std::string>& f) {
  std::string label = "T" + f.at("table");
  for (const char* key : {"family", "tau", "family_after", "tau_after", "t", "mu", "serial", "d", "n"}) {
    if (auto it = f.find(key); it != f.end()) label += " " + it->first + "=" + it->second;
  }
  return label;
}

void finish(CellSpec& cell) { cell.label = make_label(cell.factors); }

std::vector<CellSpec> table1() {
  std::vector<CellSpec> cells;
  for (const auto& row : kTable1) {
    const auto d = static_cast<std::size_t>(row[0]);
    const auto n = static_cast<std::size_t>(row[1]);
    for (std::size_t f = 0; f < kTriple.size(); ++f) {
      CellSpec cell;
      cell.scenario.n = n;
      cell.scenario.d = d;
      cell.scenario.before = model_from_tau(kTriple[f], row[2], d);
      cell.variants = kAllVariants;
      cell.multiplier = MultiplierKind::iid;
      cell.factors = {{"table", "1"}, {"family", std::string(to_string(kTriple[f]))}, {"tau", format_number(row[2])},
                      {"d", format_number(row[0])}, {"n", format_number(row[1])}, {"serial", "iid"}};
      for (std::size_t v = 0; v < 3; ++v) cell.reference_percent.emplace_back(row[3 + 3 * f + v]);
      finish(cell);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::vector<CellSpec> table2() {
  std::vector<CellSpec> cells;
  for (const auto& row : kTable2) {
    const Family family = family_code(row.family);
    const auto n = static_cast<std::size_t>(row.values[0]);
    const double tau = row.values[1];
    for (std::size_t s = 0; s < 2; ++s) {
      const SerialModel serial = s == 0 ? SerialModel::ar1 : SerialModel::expar;
      CellSpec cell;
      cell.scenario.n = n;
      cell.scenario.d = 2;
      cell.scenario.before = model_from_tau(family, tau, 2);
      cell.scenario.serial = serial;
      cell.variants = kSubsampleVariants;
      cell.multiplier = MultiplierKind::dependent;
      cell.factors = {{"table", "2"}, {"family", std::string(to_string(family))}, {"tau", format_number(tau)},
                      {"d", "2"}, {"n", format_number(row.values[0])}, {"serial", std::string(to_string(serial))}};
      const std::size_t base = 2 + 4 * s;
      cell.reference_ell_mean = row.values[base];
      cell.reference_ell_std = row.values[base + 1];
      cell.reference_percent = {row.values[base + 2], row.values[base + 3]};
      finish(cell);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::vector<CellSpec> table3() {
  std::vector<CellSpec> cells;
  for (const auto& row : kTable3) {
    const auto n = static_cast<std::size_t>(row[0]);
    for (std::size_t f = 0; f < kTriple.size(); ++f) {
      CellSpec cell;
      cell.scenario.n = n;
      cell.scenario.d = 2;
      cell.scenario.before = model_from_tau(kTriple[f], 0.2, 2);
      cell.scenario.after = model_from_tau(kTriple[f], row[1], 2);
      cell.scenario.break_fraction = row[2];
      cell.variants = kAllVariants;
      cell.multiplier = MultiplierKind::iid;
      const std::string family(to_string(kTriple[f]));
      cell.factors = {{"table", "3"}, {"family", family}, {"tau", "0.2"}, {"family_after", family},
                      {"tau_after", format_number(row[1])}, {"t", format_number(row[2])}, {"d", "2"},
                      {"n", format_number(row[0])}, {"serial", "iid"}};
      for (std::size_t v = 0; v < 3; ++v) cell.reference_percent.emplace_back(row[3 + 3 * f + v]);
      finish(cell);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::vector<CellSpec> table4() {
  std::vector<CellSpec> cells;
  for (const auto& row : kTable4) {
    const auto n = static_cast<std::size_t>(row[0]);
    for (std::size_t di = 0; di < 2; ++di) {
      const std::size_t d = di + 2;
      CellSpec cell;
      cell.scenario.n = n;
      cell.scenario.d = d;
      cell.scenario.before = model_from_tau(Family::clayton, row[1], d);
      cell.scenario.after = model_from_tau(Family::gumbel, row[1], d);
      cell.scenario.break_fraction = row[2];
      cell.variants = kAllVariants;
      cell.multiplier = MultiplierKind::iid;
      cell.factors = {{"table", "4"}, {"family", "clayton"}, {"tau", format_number(row[1])},
                      {"family_after", "gumbel"}, {"tau_after", format_number(row[1])},
                      {"t", format_number(row[2])}, {"d", std::to_string(d)}, {"n", format_number(row[0])},
                      {"serial", "iid"}};
      for (std::size_t v = 0; v < 3; ++v) cell.reference_percent.emplace_back(row[3 + 3 * di + v]);
      finish(cell);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::vector<CellSpec> table5() {
  constexpr std::array<std::array<double, 2>, 4> kShifts{{{0.5, 0.25}, {0.5, 0.5}, {2.0, 0.25}, {2.0, 0.5}}};
  std::vector<CellSpec> cells;
  for (const auto& row : kTable5) {
    const auto d = static_cast<std::size_t>(row[0]);
    const auto n = static_cast<std::size_t>(row[1]);
    for (std::size_t c = 0; c < kShifts.size(); ++c) {
      CellSpec cell;
      cell.scenario.n = n;
      cell.scenario.d = d;
      cell.scenario.before = {CopulaSpec{Family::normal, tau_to_param(Family::normal, row[2]), d}, {}};
      cell.scenario.shift = MarginShift{1, kShifts[c][0]};
      cell.scenario.break_fraction = kShifts[c][1];
      cell.variants = kAllVariants;
      cell.multiplier = MultiplierKind::iid;
      cell.factors = {{"table", "5"}, {"family", "normal"}, {"tau", format_number(row[2])},
                      {"mu", format_number(kShifts[c][0])}, {"t", format_number(kShifts[c][1])},
                      {"d", format_number(row[0])}, {"n", format_number(row[1])}, {"serial", "iid"}};
      for (std::size_t v = 0; v < 3; ++v) cell.reference_percent.emplace_back(row[3 + 3 * c + v]);
      finish(cell);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::vector<CellSpec> table6() {
  std::vector<CellSpec> cells;
  for (const auto& row : kTable6) {
    const auto n = static_cast<std::size_t>(row[0]);
    for (std::size_t s = 0; s < 2; ++s) {
      const SerialModel serial = s == 0 ? SerialModel::ar1 : SerialModel::expar;
      CellSpec cell;
      cell.scenario.n = n;
      cell.scenario.d = 2;
      cell.scenario.before = model_from_tau(Family::gumbel, 0.2, 2);
      cell.scenario.after = model_from_tau(Family::gumbel, row[2], 2);
      cell.scenario.break_fraction = row[1];
      cell.scenario.serial = serial;
      cell.variants = kSubsampleVariants;
      cell.multiplier = MultiplierKind::dependent;
      cell.factors = {{"table", "6"}, {"family", "gumbel"}, {"tau", "0.2"}, {"family_after", "gumbel"},
                      {"tau_after", format_number(row[2])}, {"t", format_number(row[1])}, {"d", "2"},
                      {"n", format_number(row[0])}, {"serial", std::string(to_string(serial))}};
      const std::size_t base = 3 + 4 * s;
      cell.reference_ell_mean = row[base];
      cell.reference_ell_std = row[base + 1];
      cell.reference_percent = {row[base + 2], row[base + 3]};
      finish(cell);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::string csv_field(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

double CellReport::rate(Variant v) const {
  for (const auto& o : outcomes) {
    if (o.variant == v) return static_cast<double>(o.rejected) / static_cast<double>(reps);
  }
  throw Error("variant", "variant not part of this cell");
}

std::uint64_t cell_stream_id(const CellSpec& cell) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : cell.label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

CellReport run_cell(const CellSpec& cell, const RunOptions& options) {
  if (options.reps < 1) throw Error("config", "reps must be at least 1");
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw Error("config", "alpha must lie in (0, 1)");
  if (cell.variants.empty()) throw Error("config", "cell has no test variants");
  cell.scenario.validate();

  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t id = cell_stream_id(cell);
  const std::size_t nv = cell.variants.size();
  std::vector<unsigned char> rejected(options.reps * nv, 0);
  std::vector<std::size_t> bandwidths(options.reps, 0);

  parallel_for(options.reps, options.threads, [&](std::size_t r) {
    Rng rng = substream(options.seed, {static_cast<std::uint64_t>(StreamTag::data), id, r});
    const Sample sample = make_scenario(cell.scenario, rng);
    TestConfig cfg;
    cfg.replicates = options.replicates;
    cfg.multiplier = cell.multiplier;
    cfg.bandwidth = cell.bandwidth;
    cfg.scaling = options.scaling;
    cfg.seed = derive_seed(options.seed, {static_cast<std::uint64_t>(StreamTag::test), id, r});
    cfg.threads = 1;
    const auto results = run_tests(sample, cfg, cell.variants);
    for (std::size_t v = 0; v < nv; ++v) rejected[r * nv + v] = results[v].p.p < options.alpha ? 1 : 0;
    bandwidths[r] = results.front().bandwidth_used.value_or(0);
  });

  CellReport report;
  report.label = cell.label;
  report.factors = cell.factors;
  report.reps = options.reps;
  report.replicates = options.replicates;
  report.multiplier = cell.multiplier;
  report.reference_ell_mean = cell.reference_ell_mean;
  report.reference_ell_std = cell.reference_ell_std;
  for (std::size_t v = 0; v < nv; ++v) {
    VariantOutcome outcome{cell.variants[v], 0, {}};
    for (std::size_t r = 0; r < options.reps; ++r) outcome.rejected += rejected[r * nv + v];
    if (v < cell.reference_percent.size()) outcome.reference_percent = cell.reference_percent[v];
    report.outcomes.push_back(outcome);
  }
  if (cell.multiplier == MultiplierKind::dependent) {
    double mean = 0.0;
    for (const auto b : bandwidths) mean += static_cast<double>(b);
    mean /= static_cast<double>(options.reps);
    double var = 0.0;
    for (const auto b : bandwidths) var += (static_cast<double>(b) - mean) * (static_cast<double>(b) - mean);
    report.ell_mean = mean;
    report.ell_std = options.reps > 1 ? std::sqrt(var / static_cast<double>(options.reps - 1)) : 0.0;
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<CellSpec> table_cells(int table_id) {
  switch (table_id) {
    case 1: return table1();
    case 2: return table2();
    case 3: return table3();
    case 4: return table4();
    case 5: return table5();
    case 6: return table6();
    default: throw Error("usage", "table id must be in 1..6");
  }
}

std::vector<CellSpec> filter_cells(std::vector<CellSpec> cells, const std::map<std::string, std::string>& filter) {
  std::erase_if(cells, [&](const CellSpec& cell) {
    for (const auto& [key, value] : filter) {
      const auto it = cell.factors.find(key);
      if (it == cell.factors.end() || it->second != value) return true;
    }
    return false;
  });
  return cells;
}

RejectionReport run_grid(std::string title, const std::vector<CellSpec>& cells, const RunOptions& options) {
  RejectionReport report{std::move(title), options, {}};
  report.cells.reserve(cells.size());
  for (const auto& cell : cells) report.cells.push_back(run_cell(cell, options));
  return report;
}

RejectionReport reproduce_table(int table_id, const RunOptions& options,
                                const std::map<std::string, std::string>& filter) {
  return run_grid("table " + std::to_string(table_id), filter_cells(table_cells(table_id), filter), options);
}

nlohmann::json to_json(const RejectionReport& report) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& cell : report.cells) {
    nlohmann::json results = nlohmann::json::array();
    for (const auto& o : cell.outcomes) {
      results.push_back({{"variant", to_string(o.variant)},
                         {"rejected", o.rejected},
                         {"rate", static_cast<double>(o.rejected) / static_cast<double>(cell.reps)},
                         {"reference_rate", o.reference_percent ? nlohmann::json(*o.reference_percent / 100.0)
                                                                : nlohmann::json(nullptr)}});
    }
    nlohmann::json entry = {{"label", cell.label},
                            {"factors", cell.factors},
                            {"reps", cell.reps},
                            {"M", cell.replicates},
                            {"multiplier", cell.multiplier == MultiplierKind::iid ? "iid" : "dependent"},
                            {"results", results},
                            {"wall_seconds", cell.wall_seconds}};
    if (cell.ell_mean) {
      entry["heuristic_ell_mean"] = *cell.ell_mean;
      entry["heuristic_ell_std"] = *cell.ell_std;
    }
    if (cell.reference_ell_mean) {
      entry["reference_ell_mean"] = *cell.reference_ell_mean;
      entry["reference_ell_std"] = *cell.reference_ell_std;
    }
    cells.push_back(std::move(entry));
  }
  return {{"title", report.title},
          {"reps", report.options.reps},
          {"M", report.options.replicates},
          {"alpha", report.options.alpha},
          {"seed", report.options.seed},
          {"scaling", report.options.scaling == Scaling::den_lk1 ? "lk1" : "lk2"},
          {"cells", cells}};
}

std::string to_csv(const RejectionReport& report) {
  static const char* kFactorColumns[] = {"table", "family", "tau", "family_after", "tau_after",
                                         "t",     "mu",     "serial", "d",         "n"};
  std::ostringstream out;
  out << "label";
  for (const char* key : kFactorColumns) out << ',' << key;
  out << ",variant,rejected,reps,rate,reference_rate,M,multiplier,heuristic_ell_mean,heuristic_ell_std,"
         "reference_ell_mean,reference_ell_std,wall_seconds\n";
  for (const auto& cell : report.cells) {
    for (const auto& o : cell.outcomes) {
      out << csv_escape(cell.label);
      for (const char* key : kFactorColumns) {
        const auto it = cell.factors.find(key);
        out << ',' << (it == cell.factors.end() ? std::string() : csv_escape(it->second));
      }
      out << ',' << to_string(o.variant) << ',' << o.rejected << ',' << cell.reps << ','
          << format_number(static_cast<double>(o.rejected) / static_cast<double>(cell.reps)) << ','
          << (o.reference_percent ? format_number(*o.reference_percent / 100.0) : std::string()) << ','
          << cell.replicates << ',' << (cell.multiplier == MultiplierKind::iid ? "iid" : "dependent") << ','
          << csv_field(cell.ell_mean) << ',' << csv_field(cell.ell_std) << ',' << csv_field(cell.reference_ell_mean)
          << ',' << csv_field(cell.reference_ell_std) << ',' << format_number(cell.wall_seconds) << '\n';
    }
  }
  return out.str();
}

}  // namespace copulacp
