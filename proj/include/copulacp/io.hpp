#pragma once

#include "copulacp/bootstrap.hpp"
#include "copulacp/dgp.hpp"
#include "copulacp/experiments.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace copulacp {

enum class HeaderMode { detect, present, absent };

struct CsvOptions {
  HeaderMode header = HeaderMode::detect;
  /// Treat a leading column of ISO dates (YYYY-MM-DD, optionally followed by a time) as the time index.
  bool detect_dates = true;
  char delimiter = ',';
};

/// Rectangular table of finite reals in time order, with an optional time column.
struct InputTable {
  std::vector<std::string> names;  // one per value column; generated when the file has no header
  std::vector<std::string> dates;  // empty, or one per row
  Eigen::MatrixXd values;

  [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
  [[nodiscard]] std::size_t cols() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

/// Errors: "io" (unreadable file), "parse" (cell named by row/column), "ragged", "empty".
InputTable parse_csv(std::string_view text, const CsvOptions& options = {});
InputTable load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Row i = ln(p_{i+1}) - ln(p_i); dates follow the later row. Error "nonpositive-price".
InputTable logreturns(const InputTable& prices);

/// Writes values with 17 significant digits so a reload is exact.
void write_csv(std::ostream& out, const Eigen::MatrixXd& values, const std::vector<std::string>& names = {});

/// Indices (0-based) of columns whose entries are all equal.
std::vector<std::size_t> constant_columns(const Eigen::MatrixXd& values);

// Small TOML subset: [section] headers, key = value with strings, numbers, booleans and
// flat arrays of those; '#' comments.
using ConfigScalar = std::variant<std::string, double, bool>;
using ConfigValue = std::variant<std::string, double, bool, std::vector<ConfigScalar>>;
using ConfigSection = std::map<std::string, ConfigValue>;
using Config = std::map<std::string, ConfigSection>;  // "" holds keys before the first header

/// Error "config" with line number on malformed input.
Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& path);

/// Scenario from sections [scenario] (n, d, serial, break), [copula] (family, tau | param,
/// optional second_family, second_tau | second_param, shape_a, shape_b), optional [copula_after]
/// with the same keys, optional [margin_shift] (component, mean). Errors name the field path.
ScenarioSpec scenario_from_config(const Config& config);

/// Grid of cells from a [grid] section: scenarios = [files relative to base_dir], variants,
/// multiplier, bandwidth.
std::vector<CellSpec> grid_from_config(const Config& config, const std::filesystem::path& base_dir);

/// Everything needed to rerun a test bit for bit.
struct RunManifest {
  TestConfig config;
  std::size_t n = 0;
  std::size_t d = 0;
  std::string input_digest;  // FNV-1a over the full-sample ranks
  std::string version;
};

/// Digest over the componentwise full-sample ranks, so it is unchanged by strictly
/// increasing transforms of the columns.
std::string rank_digest(const Eigen::MatrixXd& values);

RunManifest make_manifest(const Eigen::MatrixXd& values, const TestConfig& config);
nlohmann::json to_json(const RunManifest& manifest);

/// Report of a single test run.
nlohmann::json test_report_json(const TestResult& result, const RunManifest& manifest, double alpha,
                                const std::vector<std::string>& dates, const std::vector<std::string>& warnings);

}  // namespace copulacp
