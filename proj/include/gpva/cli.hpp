#pragma once

// Command-line front end: `corr`, `select`, `simulate` and `ree` subcommands.
// All commands write to the given streams so they can be driven in-process.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gpva/common.hpp"
#include "gpva/corrkit.hpp"
#include "gpva/dataio.hpp"
#include "gpva/polychoric.hpp"
#include "gpva/pva.hpp"
#include "gpva/simgen.hpp"

namespace gpva::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;  // pipeline or I/O failure
inline constexpr int kUsage = 2;    // invalid flags or flag combination

struct CommandConfig {
  std::string subcommand;

  std::string input;
  std::string schema;
  std::string matrix;
  std::string method = "pearson";
  std::string family = "gaussian";
  std::string out;
  bool json = false;
  bool all_methods = false;
  double pd_floor = kDefaultPdFloor;
  int max_levels = 10;

  // select
  int q = 0;

  // simulate
  std::optional<std::uint64_t> seed;
  int replicates = 200;
  std::string figure;
  std::vector<int> n_grid{500};
  std::vector<int> q_grid{5};
  int p = 10;
  std::string transform = "none";
  std::string targets = "ideal";
  std::vector<std::string> methods;
  unsigned threads = 0;

  // ree
  std::vector<int> subset;
  std::vector<int> reference;

  Format format() const { return json ? Format::Json : Format::Csv; }
};

/// Flag validation failure detected before any computation.
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

class Output {
public:
  Output(const std::string &path, std::ostream &fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*file_) throw IoError(path, "cannot open for writing");
    }
    stream_ = file_ ? file_.get() : &fallback;
    path_ = path;
  }
  std::ostream &stream() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw IoError(path_.empty() ? "stdout" : path_, "write failed");
  }

private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream *stream_ = nullptr;
  std::string path_;
};

inline Dataset load_input(const CommandConfig &cfg) {
  if (cfg.input.empty()) throw UsageError("--input is required");
  if (cfg.max_levels < 2) throw UsageError("--max-levels must be >= 2");
  if (cfg.schema.empty()) return load_csv(cfg.input, std::nullopt, cfg.max_levels);
  // Schema entries are matched by column name, so read the header first.
  std::ifstream head(cfg.input, std::ios::binary);
  if (!head) throw IoError(cfg.input, "cannot open input file");
  std::string line;
  std::getline(head, line);
  std::istringstream header_stream(line);
  const auto header = parse_csv_records(header_stream);
  std::vector<std::string> names;
  if (!header.empty())
    for (const auto &h : header[0]) names.push_back(trim(h));
  return load_csv(cfg.input, load_schema_csv(cfg.schema, names), cfg.max_levels);
}

inline void check_method_admissible(CorrFamily m, const Dataset &ds) {
  if (m == CorrFamily::Polychoric && !ds.has_ordinal())
    throw UsageError("method polychoric requires at least one ordinal column");
}

inline CorrelationMatrix estimate(CorrFamily m, const Dataset &ds, double pd_floor) {
  try {
    return estimate_correlation(m, ds.values, ds.schema.kinds, pd_floor);
  } catch (const ColumnError &e) {
    throw std::runtime_error("column " + column_name(ds.names, e.column()) + ": " + e.reason());
  }
}

inline CorrFamily parse_method(const std::string &s) {
  try {
    return parse_corr_family(s);
  } catch (const std::invalid_argument &e) {
    throw UsageError(e.what());
  }
}

inline LatentFamily parse_family(const std::string &s) {
  try {
    return parse_latent_family(s);
  } catch (const std::invalid_argument &e) {
    throw UsageError(e.what());
  }
}

inline std::vector<Index> to_indices(const std::vector<int> &v) { return {v.begin(), v.end()}; }

} // namespace detail

/// Estimate a correlation matrix and write it.
inline int cmd_corr(const CommandConfig &cfg, std::ostream &out, std::ostream &err) {
  const CorrFamily method = detail::parse_method(cfg.method);
  if (!(cfg.pd_floor > 0.0)) throw UsageError("--pd-floor must be positive");
  const Dataset ds = detail::load_input(cfg);
  detail::check_method_admissible(method, ds);
  const auto corr = detail::estimate(method, ds, cfg.pd_floor);
  for (const auto &[a, b] : corr.boundary_pairs)
    err << "warning: estimate for " << column_name(ds.names, a) << " / " << column_name(ds.names, b)
        << " hit the +-0.999 clamp\n";
  detail::Output o(cfg.out, out);
  write_correlation(o.stream(), corr, ds.names, cfg.format());
  o.finish();
  return kOk;
}

/// Greedy principal variables on a dataset; `--all-methods` emits a rank table.
inline int cmd_select(const CommandConfig &cfg, std::ostream &out, std::ostream &err) {
  if (!(cfg.pd_floor > 0.0)) throw UsageError("--pd-floor must be positive");
  const LatentFamily family = detail::parse_family(cfg.family);
  std::optional<CorrFamily> single;
  if (!cfg.all_methods) single = detail::parse_method(cfg.method);
  const Dataset ds = detail::load_input(cfg);
  if (cfg.q < 1 || cfg.q >= ds.cols())
    throw UsageError("--q must satisfy 1 <= q < p (p = " + std::to_string(ds.cols()) + ")");

  std::vector<CorrFamily> methods;
  if (single) {
    detail::check_method_admissible(*single, ds);
    methods.push_back(*single);
  } else {
    methods = {CorrFamily::Pearson, CorrFamily::Spearman, CorrFamily::GaussianCopula};
    if (ds.has_ordinal()) methods.push_back(CorrFamily::Polychoric);
  }

  std::vector<std::pair<CorrFamily, SelectionResult>> results;
  for (auto m : methods) {
    const auto corr = detail::estimate(m, ds, cfg.pd_floor);
    auto sel = greedy_select(corr, cfg.q, family, cfg.pd_floor);
    if (sel.repaired_input) err << "note: " << to_string(m) << " matrix was repaired to be positive definite\n";
    results.emplace_back(m, std::move(sel));
  }

  detail::Output o(cfg.out, out);
  if (single) write_selection(o.stream(), results.front().second, ds.names, cfg.format());
  else write_rank_table(o.stream(), results, ds.names, cfg.format());
  o.finish();
  return kOk;
}

inline std::vector<Scenario> custom_scenarios(const CommandConfig &cfg, std::uint64_t seed) {
  const LatentFamily family = detail::parse_family(cfg.family);
  const Transform transform = parse_transform(cfg.transform);
  const TransformTargets targets = parse_targets(cfg.targets);
  std::vector<CorrFamily> methods;
  for (const auto &m : cfg.methods) methods.push_back(parse_corr_family(m));
  if (methods.empty()) methods = default_methods(transform);

  std::vector<Scenario> out;
  for (int q : cfg.q_grid)
    for (int n : cfg.n_grid) {
      Scenario s;
      s.p = cfg.p;
      s.q = q;
      s.n = n;
      s.latent = family;
      s.transform = transform;
      s.targets = targets;
      s.methods = methods;
      s.replicates = cfg.replicates;
      s.seed = seed;
      s.validate();
      out.push_back(s);
    }
  return out;
}

/// Run a figure preset or a custom scenario grid and write tidy results.
inline int cmd_simulate(const CommandConfig &cfg, std::ostream &out, std::ostream &err) {
  if (!cfg.seed) throw UsageError("simulate requires --seed");
  if (cfg.replicates < 1) throw UsageError("--replicates must be >= 1");

  std::vector<Scenario> scenarios;
  std::vector<Metric> metrics{Metric::ProportionIdeal, Metric::Ree};
  std::string figure;
  try {
    if (!cfg.figure.empty()) {
      auto preset = figure_preset(cfg.figure, cfg.replicates, *cfg.seed);
      scenarios = std::move(preset.scenarios);
      metrics = std::move(preset.metrics);
      figure = cfg.figure;
    } else {
      scenarios = custom_scenarios(cfg, *cfg.seed);
    }
  } catch (const std::invalid_argument &e) {
    throw UsageError(e.what());
  }

  std::vector<TidyRecord> rows;
  for (const auto &s : scenarios) {
    ScenarioResult r;
    try {
      r = run_scenario(s, cfg.threads);
    } catch (const ExclusionCeilingError &e) {
      err << "error: scenario n=" << s.n << " q=" << s.q << " transform=" << to_string(s.transform)
          << " latent=" << s.latent.name() << ": " << e.what() << '\n';
      return kFailure;
    }
    for (const auto &reason : r.exclusion_reasons) err << "excluded " << reason << '\n';
    auto tidy = to_tidy(r, metrics, figure);
    rows.insert(rows.end(), tidy.begin(), tidy.end());
  }
  detail::Output o(cfg.out, out);
  write_tidy(o.stream(), rows, cfg.format());
  o.finish();
  return kOk;
}

/// REE of --subset against --reference on a matrix file or an estimated matrix.
inline int cmd_ree(const CommandConfig &cfg, std::ostream &out, std::ostream &) {
  const LatentFamily family = detail::parse_family(cfg.family);
  if (cfg.subset.empty() || cfg.reference.empty()) throw UsageError("--subset and --reference are required");
  if (cfg.subset.size() != cfg.reference.size()) throw UsageError("--subset and --reference must have equal size");
  if (cfg.matrix.empty() == cfg.input.empty()) throw UsageError("give exactly one of --matrix or --input");

  Matrix sigma;
  if (!cfg.matrix.empty()) {
    std::ifstream in(cfg.matrix, std::ios::binary);
    if (!in) throw IoError(cfg.matrix, "cannot open matrix file");
    std::vector<std::string> names;
    sigma = read_correlation_csv(in, names, cfg.matrix);
  } else {
    const CorrFamily method = detail::parse_method(cfg.method);
    const Dataset ds = detail::load_input(cfg);
    detail::check_method_admissible(method, ds);
    sigma = detail::estimate(method, ds, cfg.pd_floor).values;
  }
  const Index p = sigma.rows();
  for (int j : cfg.subset)
    if (j < 0 || j >= p) throw UsageError("--subset index " + std::to_string(j) + " out of range");
  for (int j : cfg.reference)
    if (j < 0 || j >= p) throw UsageError("--reference index " + std::to_string(j) + " out of range");

  const auto s = detail::to_indices(cfg.subset);
  const auto ref = detail::to_indices(cfg.reference);
  const double value = ree(sigma, s, ref, family);
  const double tr_s = residual_trace(sigma, s, family);
  const double tr_ref = residual_trace(sigma, ref, family);

  detail::Output o(cfg.out, out);
  if (cfg.json) {
    o.stream() << json{{"ree", value}, {"trace_subset", tr_s}, {"trace_reference", tr_ref}}.dump(2) << '\n';
  } else {
    o.stream() << "ree,trace_subset,trace_reference\n"
               << format_double(value) << ',' << format_double(tr_s) << ',' << format_double(tr_ref) << '\n';
  }
  o.finish();
  return kOk;
}

inline int dispatch(const CommandConfig &cfg, std::ostream &out, std::ostream &err) {
  try {
    if (cfg.subcommand == "corr") return cmd_corr(cfg, out, err);
    if (cfg.subcommand == "select") return cmd_select(cfg, out, err);
    if (cfg.subcommand == "simulate") return cmd_simulate(cfg, out, err);
    if (cfg.subcommand == "ree") return cmd_ree(cfg, out, err);
    err << "error: unknown subcommand '" << cfg.subcommand << "'\n";
    return kUsage;
  } catch (const UsageError &e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

/// Parses argv with CLI11 and runs the selected subcommand.
inline int run(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr) {
  CLI::App app{"Generalized principal variables analysis"};
  app.require_subcommand(1);
  CommandConfig cfg;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--input", cfg.input, "Input CSV (header row, numeric cells)");
    sub->add_option("--schema", cfg.schema, "Schema CSV: name,kind[:levels]");
    sub->add_option("--method", cfg.method, "pearson|spearman|copula|polychoric");
    sub->add_option("--family", cfg.family, "gaussian|t:NU|laplace:R");
    sub->add_option("--out", cfg.out, "Output path (default stdout)");
    sub->add_flag("--json", cfg.json, "Write JSON instead of CSV");
    sub->add_option("--pd-floor", cfg.pd_floor, "Eigenvalue floor for PD repair");
    sub->add_option("--max-levels", cfg.max_levels, "Largest integer level count inferred as ordinal");
  };

  auto *corr = app.add_subcommand("corr", "Estimate a correlation matrix");
  add_common(corr);

  auto *select = app.add_subcommand("select", "Greedy principal variable selection");
  add_common(select);
  select->add_option("--q", cfg.q, "Number of variables to select")->required();
  select->add_flag("--all-methods", cfg.all_methods, "Run every admissible method side by side");

  auto *simulate = app.add_subcommand("simulate", "Run simulation scenarios");
  simulate->add_option("--family", cfg.family, "gaussian|t:NU|laplace:R");
  simulate->add_option("--seed", cfg.seed, "Master seed (required)");
  simulate->add_option("--replicates", cfg.replicates, "Replicates per scenario");
  simulate->add_option("--figure", cfg.figure, "Preset grid: 1, 2, 3, A1, A2");
  simulate->add_option("--n", cfg.n_grid, "Sample sizes")->delimiter(',');
  simulate->add_option("--q", cfg.q_grid, "Selection sizes")->delimiter(',');
  simulate->add_option("--p", cfg.p, "Number of variables");
  simulate->add_option("--transform", cfg.transform, "none|continuous|ordinal");
  simulate->add_option("--targets", cfg.targets, "ideal|all");
  simulate->add_option("--methods", cfg.methods, "Correlation methods")->delimiter(',');
  simulate->add_option("--threads", cfg.threads, "Worker threads (0 = hardware)");
  simulate->add_option("--out", cfg.out, "Output path (default stdout)");
  simulate->add_flag("--json", cfg.json, "Write JSON instead of CSV");

  auto *ree_cmd = app.add_subcommand("ree", "Relative explanatory efficiency of two subsets");
  add_common(ree_cmd);
  ree_cmd->add_option("--matrix", cfg.matrix, "Correlation matrix CSV (as written by corr)");
  ree_cmd->add_option("--subset", cfg.subset, "Candidate subset S (0-based indices)")->delimiter(',');
  ree_cmd->add_option("--reference", cfg.reference, "Reference subset S* (0-based indices)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();
  return dispatch(cfg, out, err);
}

} // namespace gpva::cli
