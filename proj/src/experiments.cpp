#include "sfgof/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace sfgof {

std::string table_id_name(TableId id) {
  switch (id) {
    case TableId::exp_size: return "exp-size";
    case TableId::exp_power_hn: return "exp-power-hn";
    case TableId::gamma_size: return "gamma-size";
    case TableId::gamma_power_exp: return "gamma-power-exp";
    case TableId::gamma_power_k3: return "gamma-power-k3";
    case TableId::gamma_power_k05: return "gamma-power-k05";
    case TableId::custom: return "custom";
  }
  return "unknown";
}

std::optional<TableId> parse_table_id(std::string_view name) {
  for (TableId id : {TableId::exp_size, TableId::exp_power_hn, TableId::gamma_size,
                     TableId::gamma_power_exp, TableId::gamma_power_k3, TableId::gamma_power_k05,
                     TableId::custom}) {
    if (table_id_name(id) == name) return id;
  }
  return std::nullopt;
}

McConfig default_table_config(TableId id) {
  McConfig config;
  config.table = id;
  config.params = {0.5, 1.0, 3.0, 5.0, 8.0, 10.0};
  config.sample_sizes = {100, 200, 300, 500};
  config.lambdas = {0.5, 1.0, 2.0, 3.0, 4.0, 5.0};
  return config;
}

namespace {

IneffSpec generator_ineff(TableId table, double param) {
  switch (table) {
    case TableId::exp_size:
    case TableId::gamma_power_exp: return ExponentialIneff{param};
    case TableId::exp_power_hn: return HalfNormalIneff{param};
    case TableId::gamma_size: return GammaIneff{2.0, param};
    case TableId::gamma_power_k3: return GammaIneff{3.0, param};
    case TableId::gamma_power_k05: return GammaIneff{0.5, param};
    case TableId::custom: break;
  }
  throw std::invalid_argument("custom tables need an explicit generator");
}

std::string generator_name(TableId table) {
  switch (table) {
    case TableId::exp_size:
    case TableId::gamma_power_exp: return "normal/exp";
    case TableId::exp_power_hn: return "normal/halfnormal";
    case TableId::gamma_size: return "normal/gamma(k=2)";
    case TableId::gamma_power_k3: return "normal/gamma(k=3)";
    case TableId::gamma_power_k05: return "normal/gamma(k=0.5)";
    case TableId::custom: return "custom";
  }
  return "unknown";
}

NullModel table_null(TableId table) {
  NullModel null;
  null.orientation = Orientation::production;
  switch (table) {
    case TableId::exp_size:
    case TableId::exp_power_hn:
      null.family = IneffFamily::exponential;
      return null;
    case TableId::gamma_size:
    case TableId::gamma_power_exp:
    case TableId::gamma_power_k3:
    case TableId::gamma_power_k05:
      null.family = IneffFamily::gamma2;
      return null;
    case TableId::custom: break;
  }
  throw std::invalid_argument("custom tables need an explicit null model");
}

// per-cell seed that depends on (master, param, n) but not on grid position,
// so a filtered run reproduces the corresponding cells of the full run
std::uint64_t cell_seed(std::uint64_t master, double param, int n) {
  std::uint64_t bits;
  static_assert(sizeof bits == sizeof param);
  std::memcpy(&bits, &param, sizeof bits);
  std::uint64_t s = master;
  s = splitmix64_next(s) ^ bits;
  s = splitmix64_next(s) ^ static_cast<std::uint64_t>(n);
  return splitmix64_next(s);
}

}  // namespace

std::vector<McTableRow> run_table(const McConfig& config) {
  if (config.params.empty() || config.sample_sizes.empty() || config.lambdas.empty())
    throw std::invalid_argument("run_table: grids must be nonempty");
  if (config.iterations < 100) throw std::invalid_argument("run_table: need at least 100 iterations");
  if (!(config.alpha > 0.0) || !(config.alpha < 1.0))
    throw std::invalid_argument("run_table: alpha must lie in (0,1)");
  if (config.table == TableId::custom && (!config.custom_generator || !config.custom_null))
    throw std::invalid_argument("run_table: custom table needs generator and null model");

  const NullModel null =
      config.table == TableId::custom ? *config.custom_null : table_null(config.table);
  const std::string table_name = table_id_name(config.table);
  const std::string gen_name = generator_name(config.table);

  std::vector<Statistic> statistics;
  for (const double lambda : config.lambdas) statistics.push_back(make_cf_statistic(lambda));
  if (config.include_classical) {
    statistics.push_back(make_ks_statistic());
    statistics.push_back(make_cvm_statistic());
  }

  std::vector<McTableRow> rows;
  rows.reserve(config.params.size() * config.sample_sizes.size() * statistics.size());

  for (const double param : config.params) {
    GeneratorSpec generator;
    if (config.table == TableId::custom) {
      generator = *config.custom_generator;
    } else {
      generator.error =
          ComposedSpec{NoiseSpec{config.sigma_v}, generator_ineff(config.table, param),
                       Orientation::production};
      generator.intercept = config.intercept;
    }

    for (const int n : config.sample_sizes) {
      const auto start = std::chrono::steady_clock::now();
      const std::vector<BootstrapRun> runs =
          warp_speed_mc_multi(generator, null, statistics, config.iterations, n, config.alpha,
                              cell_seed(config.master_seed, param, n), config.threads);
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

      for (std::size_t k = 0; k < statistics.size(); ++k) {
        McTableRow row;
        row.table_id = table_name;
        row.generator = gen_name;
        row.param = param;
        row.n = n;
        row.test = statistics[k].name;
        row.lambda = statistics[k].lambda;
        row.rejection_pct = 100.0 * runs[k].rejection_rate;
        row.iterations = config.iterations;
        row.alpha = config.alpha;
        row.seed = config.master_seed;
        row.failures = runs[k].failures_redrawn;
        row.elapsed_s = config.record_timings ? elapsed : 0.0;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

namespace {

std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string rows_to_csv(const std::vector<McTableRow>& rows) {
  std::string out =
      "table_id,generator,param,n,test,lambda,rejection_pct,M,alpha,seed,failures,elapsed_s\n";
  for (const auto& r : rows) {
    out += r.table_id;
    out += ',';
    out += r.generator;
    out += ',';
    out += format_g(r.param);
    out += ',';
    out += std::to_string(r.n);
    out += ',';
    out += r.test;
    out += ',';
    if (!std::isnan(r.lambda)) out += format_g(r.lambda);
    out += ',';
    out += format_fixed(r.rejection_pct, 4);
    out += ',';
    out += std::to_string(r.iterations);
    out += ',';
    out += format_g(r.alpha);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += std::to_string(r.failures);
    out += ',';
    out += format_fixed(r.elapsed_s, 3);
    out += '\n';
  }
  return out;
}

std::string rows_to_json(const std::vector<McTableRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["table_id"] = r.table_id;
    j["generator"] = r.generator;
    j["param"] = r.param;
    j["n"] = r.n;
    j["test"] = r.test;
    if (std::isnan(r.lambda))
      j["lambda"] = nullptr;
    else
      j["lambda"] = r.lambda;
    j["rejection_pct"] = r.rejection_pct;
    j["M"] = r.iterations;
    j["alpha"] = r.alpha;
    j["seed"] = r.seed;
    j["failures"] = r.failures;
    j["elapsed_s"] = r.elapsed_s;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace sfgof
