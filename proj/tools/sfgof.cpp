#include <algorithm>
#include <charconv>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sfgof/estimation.hpp"
#include "sfgof/experiments.hpp"
#include "sfgof/parallel.hpp"
#include "sfgof/resampling.hpp"
#include "sfgof/version.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitBootstrapBudget = 4;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// CSV input: header row with a required `y` column and optional regressors
// x1..xd; an intercept column is prepended unless --no-intercept is given.

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t from = 0;
    while (from < cell.size() && cell[from] == ' ') ++from;
    cells.push_back(cell.substr(from));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw UsageError("row " + std::to_string(row) + ", column " + column + ": cannot parse '" +
                     cell + "' as a number");
  return value;
}

sfgof::Sample read_sample_csv(const std::string& path, bool intercept) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open data file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw UsageError("empty data file: " + path);
  const std::vector<std::string> header = split_csv_line(line);

  int y_col = -1;
  std::vector<std::pair<int, int>> x_cols;  // (regressor number, column index)
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "y") {
      y_col = static_cast<int>(c);
    } else if (header[c].size() > 1 && header[c][0] == 'x') {
      int idx = 0;
      const char* b = header[c].data() + 1;
      const char* e = header[c].data() + header[c].size();
      if (std::from_chars(b, e, idx).ptr == e && idx >= 1)
        x_cols.emplace_back(idx, static_cast<int>(c));
    }
  }
  if (y_col < 0) throw UsageError("data file needs a 'y' column: " + path);
  std::sort(x_cols.begin(), x_cols.end());

  std::vector<double> y;
  std::vector<std::vector<double>> xs(x_cols.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() < header.size())
      throw UsageError("row " + std::to_string(row) + ": expected " +
                       std::to_string(header.size()) + " cells, got " +
                       std::to_string(cells.size()));
    y.push_back(parse_cell(cells[static_cast<std::size_t>(y_col)], row, "y"));
    for (std::size_t k = 0; k < x_cols.size(); ++k)
      xs[k].push_back(parse_cell(cells[static_cast<std::size_t>(x_cols[k].second)], row,
                                 header[static_cast<std::size_t>(x_cols[k].second)]));
  }
  if (y.empty()) throw UsageError("no data rows in " + path);

  sfgof::Sample sample;
  const Eigen::Index n = static_cast<Eigen::Index>(y.size());
  const Eigen::Index d_x = static_cast<Eigen::Index>(xs.size());
  sample.y = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  sample.x.resize(n, (intercept ? 1 : 0) + d_x);
  Eigen::Index col = 0;
  if (intercept) sample.x.col(col++) = Eigen::VectorXd::Ones(n);
  for (Eigen::Index k = 0; k < d_x; ++k)
    sample.x.col(col++) =
        Eigen::Map<const Eigen::VectorXd>(xs[static_cast<std::size_t>(k)].data(), n);
  return sample;
}

// ---------------------------------------------------------------------------
// Run manifest: command, canonical config, digest over the config, seed,
// library version and wall-clock bounds of the run.

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

struct ManifestWriter {
  std::string command;
  nlohmann::ordered_json config;
  std::uint64_t master_seed = 0;
  std::string started = utc_timestamp();

  void write(const std::string& path) const {
    nlohmann::ordered_json m;
    m["command"] = command;
    m["version"] = sfgof::kVersion;
    m["config"] = config;
    m["config_digest"] = hex64(fnv1a64(config.dump()));
    m["master_seed"] = master_seed;
    m["started_utc"] = started;
    m["finished_utc"] = utc_timestamp();
    sfgof::write_text_file(path, m.dump(2) + "\n");
  }
};

std::uint64_t resolve_seed(bool seed_given, std::uint64_t seed_flag) {
  if (seed_given) return seed_flag;
  std::random_device rd;
  const std::uint64_t seed =
      (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
  std::cout << "seed: " << seed << " (drawn from system entropy; pass --seed to reproduce)\n";
  return seed;
}

sfgof::NullModel make_null_model(const std::string& variant, const std::string& orientation) {
  sfgof::NullModel null;
  if (variant == "exp")
    null.family = sfgof::IneffFamily::exponential;
  else if (variant == "gamma2")
    null.family = sfgof::IneffFamily::gamma2;
  else
    throw UsageError("unknown variant '" + variant + "' (expected exp or gamma2)");
  if (orientation == "production")
    null.orientation = sfgof::Orientation::production;
  else if (orientation == "cost")
    null.orientation = sfgof::Orientation::cost;
  else
    throw UsageError("unknown orientation '" + orientation + "' (expected production or cost)");
  if (null.family == sfgof::IneffFamily::gamma2 && null.orientation == sfgof::Orientation::cost)
    throw UsageError("the gamma2 variant supports the production orientation only");
  return null;
}

void print_fit(const sfgof::SfmFit& fit) {
  std::printf("null model: %s\n", sfgof::null_model_name(fit.null_model).c_str());
  std::printf("converged: %s\n", fit.converged ? "yes" : "no");
  std::printf("log-likelihood: %.6f\n", fit.loglik);
  for (Eigen::Index k = 0; k < fit.beta.size(); ++k)
    std::printf("beta[%d]: %.6f\n", static_cast<int>(k), fit.beta[k]);
  std::printf("sigma_v: %.6f\n", fit.sigma_v);
  std::printf("theta: %.6f\n", fit.theta);
  std::printf("n: %zu\n", fit.residuals.size());
}

nlohmann::ordered_json fit_to_json(const sfgof::SfmFit& fit) {
  nlohmann::ordered_json j;
  j["null_model"] = sfgof::null_model_name(fit.null_model);
  j["converged"] = fit.converged;
  j["loglik"] = fit.loglik;
  j["beta"] = std::vector<double>(fit.beta.data(), fit.beta.data() + fit.beta.size());
  j["sigma_v"] = fit.sigma_v;
  j["theta"] = fit.theta;
  j["n"] = fit.residuals.size();
  j["residuals"] = fit.residuals;
  j["std_residuals"] = fit.std_residuals;
  return j;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(parse_cell(tok, 0, "--lambdas"));
  }
  return out;
}

// --only filter "theta=1,n=100"; keys theta / sigma_u / param restrict the
// parameter grid, n restricts the sample-size grid; repeated keys accumulate
void apply_only_filter(const std::string& only, sfgof::McConfig& config) {
  std::vector<double> params;
  std::vector<int> ns;
  std::stringstream ss(only);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    const std::size_t eq = tok.find('=');
    if (eq == std::string::npos) throw UsageError("--only expects key=value pairs, got '" + tok + "'");
    const std::string key = tok.substr(0, eq);
    const std::string value = tok.substr(eq + 1);
    if (key == "theta" || key == "sigma_u" || key == "param") {
      params.push_back(parse_cell(value, 0, "--only " + key));
    } else if (key == "n") {
      ns.push_back(static_cast<int>(parse_cell(value, 0, "--only n")));
    } else {
      throw UsageError("--only supports keys theta, sigma_u, param, n; got '" + key + "'");
    }
  }
  auto keep_close = [](const std::vector<double>& wanted, double v) {
    for (const double w : wanted)
      if (std::abs(w - v) <= 1e-9 * std::max(1.0, std::abs(w))) return true;
    return false;
  };
  if (!params.empty()) {
    std::vector<double> filtered;
    for (const double p : config.params)
      if (keep_close(params, p)) filtered.push_back(p);
    if (filtered.empty()) throw UsageError("--only filter matches no parameter grid point");
    config.params = std::move(filtered);
  }
  if (!ns.empty()) {
    std::vector<int> filtered;
    for (const int n : config.sample_sizes)
      if (std::find(ns.begin(), ns.end(), n) != ns.end()) filtered.push_back(n);
    if (filtered.empty()) throw UsageError("--only filter matches no sample size");
    config.sample_sizes = std::move(filtered);
  }
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string data_path;
  std::string variant = "exp";
  std::string orientation = "production";
  bool no_intercept = false;
  std::string json_path;
  std::string manifest_path;
};

int run_fit(const FitArgs& args) {
  ManifestWriter manifest;
  manifest.command = "fit";
  manifest.config = {{"data", args.data_path},
                     {"variant", args.variant},
                     {"orientation", args.orientation},
                     {"intercept", !args.no_intercept},
                     {"json", args.json_path}};

  const sfgof::NullModel null = make_null_model(args.variant, args.orientation);
  const sfgof::Sample sample = read_sample_csv(args.data_path, !args.no_intercept);
  const sfgof::SfmFit fit = sfgof::fit_mle(sample, null);

  print_fit(fit);
  if (!args.json_path.empty())
    sfgof::write_text_file(args.json_path, fit_to_json(fit).dump(2) + "\n");

  std::string manifest_path = args.manifest_path;
  if (manifest_path.empty())
    manifest_path = args.json_path.empty() ? "sfgof-fit-manifest.json"
                                           : args.json_path + ".manifest.json";
  manifest.write(manifest_path);
  return fit.converged ? 0 : kExitNotConverged;
}

struct TestArgs {
  std::string data_path;
  std::string stat = "cf";
  double lambda = 1.0;
  std::string variant = "exp";
  std::string orientation = "production";
  bool no_intercept = false;
  int replicates = 499;
  double alpha = 0.05;
  bool seed_given = false;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string manifest_path;
};

int run_test(const TestArgs& args) {
  if (args.stat == "cf" && !(args.lambda > 0.0))
    throw UsageError("--lambda must be positive for the cf statistic");
  if (!(args.alpha > 0.0) || !(args.alpha < 1.0)) throw UsageError("--alpha must lie in (0,1)");
  if (args.replicates < 199) throw UsageError("--b must be at least 199");

  const sfgof::NullModel null = make_null_model(args.variant, args.orientation);
  sfgof::Statistic statistic;
  if (args.stat == "cf")
    statistic = sfgof::make_cf_statistic(args.lambda);
  else if (args.stat == "ks")
    statistic = sfgof::make_ks_statistic();
  else if (args.stat == "cvm")
    statistic = sfgof::make_cvm_statistic();
  else
    throw UsageError("unknown statistic '" + args.stat + "' (expected cf, ks or cvm)");

  const std::uint64_t seed = resolve_seed(args.seed_given, args.seed);

  ManifestWriter manifest;
  manifest.command = "test";
  manifest.master_seed = seed;
  manifest.config = {{"data", args.data_path}, {"stat", args.stat},
                     {"lambda", args.lambda},  {"variant", args.variant},
                     {"orientation", args.orientation}, {"intercept", !args.no_intercept},
                     {"b", args.replicates},   {"alpha", args.alpha},
                     {"seed", seed}};

  const sfgof::Sample sample = read_sample_csv(args.data_path, !args.no_intercept);
  const int threads = args.threads > 0 ? args.threads : sfgof::hardware_threads();
  const sfgof::TestOutcome outcome =
      sfgof::full_bootstrap_test(sample, null, statistic, args.replicates, args.alpha, seed,
                                 threads);

  std::printf("null model: %s\n", sfgof::null_model_name(null).c_str());
  std::printf("statistic: %s\n", outcome.statistic_name.c_str());
  std::printf("observed: %.6g\n", outcome.statistic);
  std::printf("bootstrap replicates: %d\n", args.replicates);
  std::printf("critical value (alpha=%g): %.6g\n", outcome.alpha, outcome.critical);
  std::printf("p-value: %.6g\n", outcome.p_value);
  std::printf("decision: %s\n", outcome.reject ? "reject" : "accept");
  std::printf("redraws: %d\n", outcome.failures_redrawn);

  manifest.write(args.manifest_path.empty() ? "sfgof-test-manifest.json" : args.manifest_path);
  return 0;
}

struct ReproduceArgs {
  std::string table;
  int iterations = 500;
  double alpha = 0.05;
  bool seed_given = false;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_path = "results.csv";
  std::string json_path;
  std::string only;
  std::string lambdas;
  bool no_classical = false;
  bool timings = false;
  std::string manifest_path;
};

int run_reproduce(const ReproduceArgs& args) {
  const auto table = sfgof::parse_table_id(args.table);
  if (!table || *table == sfgof::TableId::custom)
    throw UsageError("unknown table id '" + args.table +
                     "' (expected exp-size, exp-power-hn, gamma-size, gamma-power-exp, "
                     "gamma-power-k3 or gamma-power-k05)");
  if (args.iterations < 100) throw UsageError("--m must be at least 100");
  if (!(args.alpha > 0.0) || !(args.alpha < 1.0)) throw UsageError("--alpha must lie in (0,1)");

  sfgof::McConfig config = sfgof::default_table_config(*table);
  config.iterations = args.iterations;
  config.alpha = args.alpha;
  config.master_seed = resolve_seed(args.seed_given, args.seed);
  config.threads = args.threads;
  config.include_classical = !args.no_classical;
  config.record_timings = args.timings;
  if (!args.lambdas.empty()) {
    config.lambdas = parse_double_list(args.lambdas);
    if (config.lambdas.empty()) throw UsageError("--lambdas must name at least one value");
    for (const double l : config.lambdas)
      if (!(l > 0.0)) throw UsageError("--lambdas entries must be positive");
  }
  if (!args.only.empty()) apply_only_filter(args.only, config);

  ManifestWriter manifest;
  manifest.command = "reproduce";
  manifest.master_seed = config.master_seed;
  manifest.config = {{"table", sfgof::table_id_name(*table)},
                     {"m", config.iterations},
                     {"alpha", config.alpha},
                     {"seed", config.master_seed},
                     {"params", config.params},
                     {"sample_sizes", config.sample_sizes},
                     {"lambdas", config.lambdas},
                     {"classical", config.include_classical},
                     {"timings", config.record_timings},
                     {"out", args.out_path}};

  const std::vector<sfgof::McTableRow> rows = sfgof::run_table(config);
  sfgof::write_text_file(args.out_path, sfgof::rows_to_csv(rows));
  if (!args.json_path.empty())
    sfgof::write_text_file(args.json_path, sfgof::rows_to_json(rows));

  std::string manifest_path =
      args.manifest_path.empty() ? args.out_path + ".manifest.json" : args.manifest_path;
  manifest.write(manifest_path);
  std::printf("wrote %s (%zu rows) and %s\n", args.out_path.c_str(), rows.size(),
              manifest_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goodness-of-fit tests for the composed error of stochastic frontier models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sfgof::kVersion);

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand("fit", "Fit a frontier model by maximum likelihood");
  fit->add_option("data", fit_args.data_path, "CSV file with a y column and optional x1..xd")
      ->required();
  fit->add_option("--variant", fit_args.variant, "Inefficiency null: exp or gamma2");
  fit->add_option("--orientation", fit_args.orientation, "production or cost");
  fit->add_flag("--no-intercept", fit_args.no_intercept, "Do not prepend a column of ones");
  fit->add_option("--json", fit_args.json_path, "Write the fit as JSON");
  fit->add_option("--manifest", fit_args.manifest_path, "Run manifest path");

  TestArgs test_args;
  CLI::App* test = app.add_subcommand("test", "Bootstrap goodness-of-fit test on one dataset");
  test->add_option("data", test_args.data_path, "CSV file with a y column and optional x1..xd")
      ->required();
  test->add_option("--stat", test_args.stat, "cf, ks or cvm");
  test->add_option("--lambda", test_args.lambda, "Weight decay for the cf statistic");
  test->add_option("--variant", test_args.variant, "Inefficiency null: exp or gamma2");
  test->add_option("--orientation", test_args.orientation, "production or cost");
  test->add_flag("--no-intercept", test_args.no_intercept, "Do not prepend a column of ones");
  test->add_option("--b", test_args.replicates, "Bootstrap replicates (>= 199)");
  test->add_option("--alpha", test_args.alpha, "Test level");
  test->add_option("--seed", test_args.seed, "Master seed")
      ->each([&](const std::string&) { test_args.seed_given = true; });
  test->add_option("--threads", test_args.threads, "Worker threads (default: hardware)");
  test->add_option("--manifest", test_args.manifest_path, "Run manifest path");

  ReproduceArgs rep_args;
  CLI::App* rep = app.add_subcommand("reproduce", "Run a size/power study table");
  rep->add_option("table", rep_args.table, "exp-size, exp-power-hn, gamma-size, gamma-power-exp, "
                                           "gamma-power-k3 or gamma-power-k05")
      ->required();
  rep->add_option("--m", rep_args.iterations, "Monte Carlo iterations per cell (>= 100)");
  rep->add_option("--alpha", rep_args.alpha, "Test level");
  rep->add_option("--seed", rep_args.seed, "Master seed")
      ->each([&](const std::string&) { rep_args.seed_given = true; });
  rep->add_option("--threads", rep_args.threads, "Worker threads (default: hardware)");
  rep->add_option("--out", rep_args.out_path, "Output CSV path");
  rep->add_option("--json", rep_args.json_path, "Also write rows as JSON");
  rep->add_option("--only", rep_args.only, "Restrict grids, e.g. theta=1,n=100");
  rep->add_option("--lambdas", rep_args.lambdas, "Comma-separated lambda grid");
  rep->add_flag("--no-classical", rep_args.no_classical, "Skip the KS and CvM columns");
  rep->add_flag("--timings", rep_args.timings,
                "Record per-cell wall time in elapsed_s (breaks byte reproducibility)");
  rep->add_option("--manifest", rep_args.manifest_path, "Run manifest path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (fit->parsed()) return run_fit(fit_args);
    if (test->parsed()) return run_test(test_args);
    if (rep->parsed()) return run_reproduce(rep_args);
    std::cerr << "no subcommand given\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sfgof::FitNotConvergedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const sfgof::ResamplingBudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBootstrapBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
