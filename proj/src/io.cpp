#include "copulacp/io.hpp"

#include "copulacp/error.hpp"
#include "copulacp/ranks.hpp"
#include "copulacp/version.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace copulacp {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// RFC-4180 style record splitting; quoted fields may contain the delimiter, quotes and newlines.
std::vector<std::vector<std::string>> split_records(std::string_view text, char delim) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == delim) {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      record.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      if (!std::isspace(static_cast<unsigned char>(c))) any = true;
    }
  }
  if (quoted) throw Error("parse", "unterminated quoted field");
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool is_iso_date(std::string_view s) {
  s = trim(s);
  if (s.size() < 10) return false;
  for (std::size_t i = 0; i < 10; ++i) {
    if (i == 4 || i == 7) {
      if (s[i] != '-') return false;
    } else if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      return false;
    }
  }
  return s.size() == 10 || s[10] == 'T' || s[10] == ' ';
}

std::string cell_name(std::size_t row, std::size_t col) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

}  // namespace

InputTable parse_csv(std::string_view text, const CsvOptions& options) {
  auto records = split_records(text, options.delimiter);
  if (records.empty()) throw Error("empty", "no rows in input");

  const std::size_t width = records.front().size();
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (records[r].size() != width) {
      throw Error("ragged", "line " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                                " fields, expected " + std::to_string(width));
    }
  }

  bool header = options.header == HeaderMode::present;
  if (options.header == HeaderMode::detect) {
    header = false;
    for (const auto& f : records.front()) {
      if (!parse_real(f) && !is_iso_date(f)) header = true;
    }
  }
  const std::size_t first = header ? 1 : 0;
  if (records.size() <= first) throw Error("empty", "no data rows in input");

  bool dated = false;
  if (options.detect_dates && width > 1) {
    dated = true;
    for (std::size_t r = first; r < records.size() && dated; ++r) dated = is_iso_date(records[r][0]);
  }
  const std::size_t c0 = dated ? 1 : 0;

  InputTable table;
  const std::size_t rows = records.size() - first;
  table.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width - c0));
  for (std::size_t c = c0; c < width; ++c) {
    table.names.push_back(header ? std::string(trim(records.front()[c])) : "x" + std::to_string(c - c0 + 1));
  }
  for (std::size_t r = first; r < records.size(); ++r) {
    if (dated) table.dates.emplace_back(trim(records[r][0]));
    for (std::size_t c = c0; c < width; ++c) {
      const auto v = parse_real(records[r][c]);
      if (!v || !std::isfinite(*v)) {
        throw Error("parse", cell_name(r + 1, c + 1) + ": '" + records[r][c] + "' is not a finite number");
      }
      table.values(static_cast<Eigen::Index>(r - first), static_cast<Eigen::Index>(c - c0)) = *v;
    }
  }
  return table;
}

InputTable load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  return parse_csv(read_file(path), options);
}

InputTable logreturns(const InputTable& prices) {
  if (prices.rows() < 2) throw Error("too-short", "logreturns need at least two rows");
  for (Eigen::Index r = 0; r < prices.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < prices.values.cols(); ++c) {
      if (!(prices.values(r, c) > 0.0)) {
        throw Error("nonpositive-price", cell_name(static_cast<std::size_t>(r) + 1, static_cast<std::size_t>(c) + 1) +
                                             " is not a positive price");
      }
    }
  }
  InputTable out;
  out.names = prices.names;
  const Eigen::Index n = prices.values.rows() - 1;
  out.values = prices.values.bottomRows(n).array().log() - prices.values.topRows(n).array().log();
  if (!prices.dates.empty()) out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
  return out;
}

void write_csv(std::ostream& out, const Eigen::MatrixXd& values, const std::vector<std::string>& names) {
  if (!names.empty()) {
    for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
    out << '\n';
  }
  char buf[32];
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", values(r, c));
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  }
}

std::vector<std::size_t> constant_columns(const Eigen::MatrixXd& values) {
  std::vector<std::size_t> out;
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    if (values.rows() > 0 && (values.col(c).array() == values(0, c)).all()) out.push_back(static_cast<std::size_t>(c));
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Config files

namespace {

[[noreturn]] void config_error(std::size_t line, const std::string& what) {
  throw Error("config", "line " + std::to_string(line) + ": " + what);
}

ConfigScalar parse_scalar(std::string_view s, std::size_t line) {
  s = trim(s);
  if (s.empty()) config_error(line, "missing value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') config_error(line, "unterminated string");
    return std::string(s.substr(1, s.size() - 2));
  }
  if (s == "true") return true;
  if (s == "false") return false;
  if (const auto v = parse_real(s)) return *v;
  config_error(line, "cannot parse value '" + std::string(s) + "'");
}

std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

const ConfigValue* find(const Config& config, const std::string& section, const std::string& key) {
  const auto s = config.find(section);
  if (s == config.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

std::string path_of(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

std::optional<double> get_number(const Config& config, const std::string& section, const std::string& key) {
  const ConfigValue* v = find(config, section, key);
  if (!v) return std::nullopt;
  if (const auto* d = std::get_if<double>(v)) return *d;
  throw Error("config", path_of(section, key) + ": expected a number");
}

std::optional<std::string> get_string(const Config& config, const std::string& section, const std::string& key) {
  const ConfigValue* v = find(config, section, key);
  if (!v) return std::nullopt;
  if (const auto* s = std::get_if<std::string>(v)) return *s;
  throw Error("config", path_of(section, key) + ": expected a string");
}

std::optional<std::vector<std::string>> get_string_list(const Config& config, const std::string& section,
                                                        const std::string& key) {
  const ConfigValue* v = find(config, section, key);
  if (!v) return std::nullopt;
  if (const auto* s = std::get_if<std::string>(v)) return std::vector<std::string>{*s};
  if (const auto* a = std::get_if<std::vector<ConfigScalar>>(v)) {
    std::vector<std::string> out;
    for (const auto& e : *a) {
      const auto* s = std::get_if<std::string>(&e);
      if (!s) throw Error("config", path_of(section, key) + ": expected strings");
      out.push_back(*s);
    }
    return out;
  }
  throw Error("config", path_of(section, key) + ": expected a string or an array of strings");
}

std::size_t get_count(const Config& config, const std::string& section, const std::string& key, std::size_t fallback) {
  const auto v = get_number(config, section, key);
  if (!v) return fallback;
  if (!(*v >= 0.0) || std::floor(*v) != *v) {
    throw Error("config", path_of(section, key) + ": expected a non-negative integer");
  }
  return static_cast<std::size_t>(*v);
}

// Rewrites library errors so the message points at the config field.
template <class F>
auto at_field(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error("config", path + ": " + e.what());
  }
}

CopulaSpec copula_entry(const Config& config, const std::string& section, const std::string& prefix,
                        std::size_t d) {
  const std::string family_key = prefix + "family";
  const auto family_name = get_string(config, section, family_key);
  if (!family_name) throw Error("config", path_of(section, family_key) + ": missing");
  const Family family = at_field(path_of(section, family_key), [&] { return parse_family(*family_name); });
  const auto tau = get_number(config, section, prefix + "tau");
  const auto param = get_number(config, section, prefix + "param");
  if (tau && param) throw Error("config", section + ": give either " + prefix + "tau or " + prefix + "param");
  if (tau) return at_field(path_of(section, prefix + "tau"), [&] { return copula_from_tau(family, *tau, d); });
  CopulaSpec spec{family, param.value_or(0.0), d};
  if (!param && family != Family::independence) {
    throw Error("config", path_of(section, prefix + "tau") + ": missing");
  }
  at_field(path_of(section, prefix + "param"), [&] {
    spec.validate();
    return 0;
  });
  return spec;
}

CopulaModel copula_model(const Config& config, const std::string& section, std::size_t d) {
  CopulaModel model{copula_entry(config, section, "", d), {}};
  if (find(config, section, "second_family")) {
    model.second = copula_entry(config, section, "second_", d);
    model.shape_a = get_number(config, section, "shape_a").value_or(model.shape_a);
    model.shape_b = get_number(config, section, "shape_b").value_or(model.shape_b);
  }
  return model;
}

}  // namespace

Config parse_config(std::string_view text) {
  Config config;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  config[section];
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = trim(strip_comment(text.substr(pos, end - pos)));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error(line_no, "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) config_error(line_no, "empty section name");
      config[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) config_error(line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) config_error(line_no, "missing key");
    const std::string_view raw = trim(line.substr(eq + 1));
    ConfigValue value;
    if (!raw.empty() && raw.front() == '[') {
      if (raw.back() != ']') config_error(line_no, "arrays must close on the same line");
      std::vector<ConfigScalar> items;
      std::string_view body = trim(raw.substr(1, raw.size() - 2));
      while (!body.empty()) {
        std::size_t cut = 0;
        bool in_string = false;
        while (cut < body.size() && (in_string || body[cut] != ',')) {
          if (body[cut] == '"') in_string = !in_string;
          ++cut;
        }
        items.push_back(parse_scalar(body.substr(0, cut), line_no));
        body = cut < body.size() ? trim(body.substr(cut + 1)) : std::string_view{};
      }
      value = std::move(items);
    } else {
      std::visit([&](auto&& v) { value = v; }, parse_scalar(raw, line_no));
    }
    if (!config[section].emplace(key, std::move(value)).second) config_error(line_no, "duplicate key '" + key + "'");
  }
  return config;
}

Config load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

ScenarioSpec scenario_from_config(const Config& config) {
  ScenarioSpec spec;
  spec.n = get_count(config, "scenario", "n", spec.n);
  spec.d = get_count(config, "scenario", "d", spec.d);
  if (const auto serial = get_string(config, "scenario", "serial")) {
    spec.serial = at_field("scenario.serial", [&] { return parse_serial_model(*serial); });
  }
  spec.break_fraction = get_number(config, "scenario", "break").value_or(spec.break_fraction);
  if (!config.contains("copula")) throw Error("config", "copula: missing section");
  spec.before = copula_model(config, "copula", spec.d);
  if (config.contains("copula_after")) spec.after = copula_model(config, "copula_after", spec.d);
  if (config.contains("margin_shift")) {
    MarginShift shift;
    shift.component = get_count(config, "margin_shift", "component", shift.component);
    const auto mean = get_number(config, "margin_shift", "mean");
    if (!mean) throw Error("config", "margin_shift.mean: missing");
    shift.mean = *mean;
    spec.shift = shift;
  }
  at_field("scenario", [&] {
    spec.validate();
    return 0;
  });
  return spec;
}

std::vector<CellSpec> grid_from_config(const Config& config, const std::filesystem::path& base_dir) {
  const auto files = get_string_list(config, "grid", "scenarios");
  if (!files || files->empty()) throw Error("config", "grid.scenarios: missing");
  std::vector<Variant> variants{Variant::check, Variant::hat, Variant::r};
  if (const auto names = get_string_list(config, "grid", "variants")) {
    variants.clear();
    for (const auto& v : *names) variants.push_back(at_field("grid.variants", [&] { return parse_variant(v); }));
  }
  MultiplierKind multiplier = MultiplierKind::iid;
  if (const auto m = get_string(config, "grid", "multiplier")) {
    if (*m == "iid") multiplier = MultiplierKind::iid;
    else if (*m == "dependent") multiplier = MultiplierKind::dependent;
    else throw Error("config", "grid.multiplier: expected \"iid\" or \"dependent\"");
  }
  BandwidthPolicy bandwidth = BandwidthPolicy::auto_select();
  if (const ConfigValue* b = find(config, "grid", "bandwidth")) {
    if (const auto* s = std::get_if<std::string>(b); s && *s == "auto") {
    } else if (const auto* d = std::get_if<double>(b); d && *d >= 1.0 && std::floor(*d) == *d) {
      bandwidth = BandwidthPolicy::fixed(static_cast<std::size_t>(*d));
    } else {
      throw Error("config", "grid.bandwidth: expected \"auto\" or a positive integer");
    }
  }

  std::vector<CellSpec> cells;
  for (const auto& file : *files) {
    CellSpec cell;
    cell.scenario = at_field("grid.scenarios[" + file + "]", [&] { return scenario_from_config(load_config(base_dir / file)); });
    cell.variants = variants;
    cell.multiplier = multiplier;
    cell.bandwidth = bandwidth;
    cell.label = std::filesystem::path(file).stem().string();
    cell.factors = {{"scenario", cell.label}, {"n", std::to_string(cell.scenario.n)},
                    {"d", std::to_string(cell.scenario.d)},
                    {"serial", std::string(to_string(cell.scenario.serial))}};
    cells.push_back(std::move(cell));
  }
  return cells;
}

// ---------------------------------------------------------------------------------------------
// Manifest and reports

std::string rank_digest(const Eigen::MatrixXd& values) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t x) {
    for (int b = 0; b < 8; ++b) {
      h ^= (x >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  const auto n = static_cast<std::size_t>(values.rows());
  mix(n);
  mix(static_cast<std::uint64_t>(values.cols()));
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    const std::span<const double> col(values.col(c).data(), n);
    for (const auto r : ranks_in_window(col, Window{1, n})) mix(r);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunManifest make_manifest(const Eigen::MatrixXd& values, const TestConfig& config) {
  return {config, static_cast<std::size_t>(values.rows()), static_cast<std::size_t>(values.cols()),
          rank_digest(values), kVersion};
}

nlohmann::json to_json(const RunManifest& m) {
  const auto& c = m.config;
  return {{"variant", to_string(c.variant)},
          {"M", c.replicates},
          {"multiplier", c.multiplier == MultiplierKind::iid ? "iid" : "dependent"},
          {"bandwidth", c.bandwidth.automatic ? nlohmann::json("auto") : nlohmann::json(c.bandwidth.value)},
          {"scaling", c.scaling == Scaling::den_lk1 ? "lk1" : "lk2"},
          {"seed", c.seed},
          {"multiplier_streams", "substream(seed, [2, m]) for replicate m"},
          {"n", m.n},
          {"d", m.d},
          {"input_digest", m.input_digest},
          {"version", m.version}};
}

nlohmann::json test_report_json(const TestResult& result, const RunManifest& manifest, double alpha,
                                const std::vector<std::string>& dates, const std::vector<std::string>& warnings) {
  nlohmann::json j;
  j["statistic_variant"] = to_string(result.variant);
  j["S"] = result.statistic();
  j["p_value"] = result.p.p;
  j["alpha"] = alpha;
  j["reject"] = result.p.p < alpha;
  j["k_star"] = result.k_star();
  if (!dates.empty() && result.k_star() >= 1 && result.k_star() <= dates.size()) {
    j["k_star_date"] = dates[result.k_star() - 1];
  }
  j["trajectory"] = result.trajectory.values;
  j["M"] = result.p.replicates;
  j["multiplier"] = result.multiplier == MultiplierKind::iid ? "iid" : "dependent";
  j["bandwidth_used"] = result.bandwidth_used ? nlohmann::json(*result.bandwidth_used) : nlohmann::json(nullptr);
  j["manifest"] = to_json(manifest);
  j["warnings"] = warnings;
  return j;
}

}  // namespace copulacp
