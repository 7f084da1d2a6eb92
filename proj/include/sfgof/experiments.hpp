#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sfgof/resampling.hpp"

namespace sfgof {

enum class TableId {
  exp_size,        // normal/exp(theta) data, exponential null
  exp_power_hn,    // normal/half-normal(sigma_u) data, exponential null
  gamma_size,      // normal/gamma(2, theta) data, gamma(k=2) null
  gamma_power_exp, // normal/exp(theta) data, gamma(k=2) null
  gamma_power_k3,  // normal/gamma(3, theta) data, gamma(k=2) null
  gamma_power_k05, // normal/gamma(0.5, theta) data, gamma(k=2) null
  custom
};

std::string table_id_name(TableId id);
std::optional<TableId> parse_table_id(std::string_view name);

struct McConfig {
  TableId table = TableId::exp_size;
  std::vector<double> params;       // theta (or sigma_u) grid
  std::vector<int> sample_sizes;    // n grid
  std::vector<double> lambdas;      // weight decay grid for the CF statistic
  int iterations = 500;             // Monte Carlo iterations M per cell
  double alpha = 0.05;
  std::uint64_t master_seed = 0;
  bool include_classical = true;    // add KS and CvM columns
  int threads = 0;                  // 0 = hardware concurrency
  bool record_timings = false;      // off: elapsed_s column is 0 (reproducible output)
  double sigma_v = 1.0;
  double intercept = 1.0;
  // required when table == custom
  std::optional<GeneratorSpec> custom_generator;
  std::optional<NullModel> custom_null;
};

// Study grids: theta / sigma_u in {0.5, 1, 3, 5, 8, 10}, n in {100, 200, 300,
// 500}, lambda in {0.5, 1, 2, 3, 4, 5}, alpha = 5%.
McConfig default_table_config(TableId id);

struct McTableRow {
  std::string table_id;
  std::string generator;
  double param = 0.0;
  int n = 0;
  std::string test;  // "T", "KS" or "CvM"
  double lambda = std::numeric_limits<double>::quiet_NaN();  // NaN for KS/CvM
  double rejection_pct = 0.0;
  int iterations = 0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int failures = 0;
  double elapsed_s = 0.0;
};

// One warp-speed run per (param, n) cell group; every statistic in the group
// is computed from the same simulated datasets and the same two fits per
// iteration.  Rows are ordered param-major, then n, then lambda ascending,
// then KS, CvM.
std::vector<McTableRow> run_table(const McConfig& config);

std::string rows_to_csv(const std::vector<McTableRow>& rows);
std::string rows_to_json(const std::vector<McTableRow>& rows);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace sfgof
