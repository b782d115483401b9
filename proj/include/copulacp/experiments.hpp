#pragma once

#include "copulacp/bootstrap.hpp"
#include "copulacp/dgp.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace copulacp {

/// One scenario of a Monte Carlo grid together with the tests applied to each sample.
struct CellSpec {
  std::string label;
  ScenarioSpec scenario;
  std::vector<Variant> variants;
  MultiplierKind multiplier = MultiplierKind::iid;
  BandwidthPolicy bandwidth = BandwidthPolicy::auto_select();
  /// Factor values shown in reports and matched by filters (e.g. "n" -> "100").
  std::map<std::string, std::string> factors;
  /// Reference rejection percentage per entry of `variants`, when known.
  std::vector<std::optional<double>> reference_percent;
  std::optional<double> reference_ell_mean;
  std::optional<double> reference_ell_std;
};

struct RunOptions {
  std::size_t reps = 500;
  std::size_t replicates = 500;  // multiplier replicates M per test
  double alpha = 0.05;
  std::uint64_t seed = 1;
  Scaling scaling = Scaling::den_lk2;
  unsigned threads = 1;
};

struct VariantOutcome {
  Variant variant = Variant::check;
  std::size_t rejected = 0;
  std::optional<double> reference_percent;
};

struct CellReport {
  std::string label;
  std::map<std::string, std::string> factors;
  std::size_t reps = 0;
  std::size_t replicates = 0;
  MultiplierKind multiplier = MultiplierKind::iid;
  std::vector<VariantOutcome> outcomes;
  /// Mean and standard deviation of the heuristic bandwidth (dependent multipliers only).
  std::optional<double> ell_mean;
  std::optional<double> ell_std;
  std::optional<double> reference_ell_mean;
  std::optional<double> reference_ell_std;
  double wall_seconds = 0.0;

  /// rejected / reps for the given variant.
  [[nodiscard]] double rate(Variant v) const;
};

struct RejectionReport {
  std::string title;
  RunOptions options;
  std::vector<CellReport> cells;
};

/// Stable identifier of a cell used to derive its random substreams, so a cell
/// produces the same numbers whether it runs alone or inside a full grid.
std::uint64_t cell_stream_id(const CellSpec& cell);

/// Rejection counts over `reps` samples: replication r draws its data from substream
/// (seed, data, id, r) and its multipliers from seed derive_seed(seed, {test, id, r}).
/// A sample counts as rejected by a variant when its p-value is < alpha.
CellReport run_cell(const CellSpec& cell, const RunOptions& options);

/// Cells of the six reference grids (ids 1..6).
std::vector<CellSpec> table_cells(int table_id);

/// Keeps the cells whose factors match every (key, value) of `filter`.
std::vector<CellSpec> filter_cells(std::vector<CellSpec> cells, const std::map<std::string, std::string>& filter);

RejectionReport run_grid(std::string title, const std::vector<CellSpec>& cells, const RunOptions& options);

RejectionReport reproduce_table(int table_id, const RunOptions& options,
                                const std::map<std::string, std::string>& filter = {});

nlohmann::json to_json(const RejectionReport& report);
std::string to_csv(const RejectionReport& report);

}  // namespace copulacp
