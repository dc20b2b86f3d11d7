// Copyright 2026 The abcboost Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/// Command-line front end: train, evaluate, experiment and ablation.
///
/// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#ifndef ABCBOOST_CLI_HPP_
#define ABCBOOST_CLI_HPP_

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "abcboost/boosting.hpp"
#include "abcboost/dataset.hpp"
#include "abcboost/metrics.hpp"
#include "abcboost/model.hpp"

namespace abcboost::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Bad flag values detected after parsing.
class UsageError : public Error {
 public:
  using Error::Error;
};

inline constexpr const char* kHistoryHeader = "iter,train_loss,base_class,test_errors";
inline constexpr const char* kSummaryHeader = "variant,J,nu,best_test_errors,best_iter,final_train_loss";
inline constexpr const char* kAblationHeader = "series,iter,train_loss,base_class,test_errors";

// Locale-independent, round-trippable.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string history_row(const RoundRecord& r) {
  std::string row = std::to_string(r.round) + "," + format_real(r.train_loss) + ",";
  if (r.base) row += std::to_string(*r.base);
  row += ",";
  if (r.test_errors) row += std::to_string(*r.test_errors);
  return row;
}

struct HistoryRow {
  int iter = 0;
  double train_loss = 0.0;
  std::optional<int> base_class;
  std::optional<std::size_t> test_errors;
};

inline std::vector<HistoryRow> read_history_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open history file '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kHistoryHeader) throw Error("bad history header in " + path);
  std::vector<HistoryRow> rows;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split(detail::trim(line), ',');
    if (cells.size() != 4) throw Error("bad history row in " + path);
    HistoryRow r;
    r.iter = std::stoi(std::string(cells[0]));
    r.train_loss = *detail::parse_real(cells[1]);
    if (!cells[2].empty()) r.base_class = std::stoi(std::string(cells[2]));
    if (!cells[3].empty()) r.test_errors = static_cast<std::size_t>(std::stoull(std::string(cells[3])));
    rows.push_back(r);
  }
  return rows;
}

// Best (smallest) test errors over the boosting rounds, earliest round on ties.
struct BestErrors {
  std::size_t errors = 0;
  int iter = 0;
};

inline std::optional<BestErrors> best_test_errors(const std::vector<RoundRecord>& history) {
  std::optional<BestErrors> best;
  for (const auto& r : history) {
    if (r.round == 0 || !r.test_errors) continue;
    if (!best || *r.test_errors < best->errors) best = BestErrors{*r.test_errors, r.round};
  }
  return best;
}

// Flags shared by every command that loads training data.
struct DataArgs {
  std::string data;
  std::string test;
  std::string format = "csv";
  int label_col = 0;
  double split = 0.0;  // > 0: carve the test set out of --data
  std::uint64_t seed = 0;

  void add_to(CLI::App& app) {
    app.add_option("--data", data, "Training data file")->required();
    auto* t = app.add_option("--test", test, "Test data file");
    app.add_option("--format", format, "Data format")->check(CLI::IsMember({"csv", "libsvm"}));
    app.add_option("--label-col", label_col, "CSV label column (0-based)")->check(CLI::NonNegativeNumber);
    app.add_option("--split", split, "Hold out this fraction of --data as the test set")
        ->check(CLI::Range(0.0, 1.0))
        ->excludes(t);
    app.add_option("--seed", seed, "Seed for splitting and random choices");
  }

  // Train and optional test datasets; test rows are encoded with the
  // training label mapping.
  std::pair<Dataset, std::optional<Dataset>> load() const {
    LoadOptions options;
    options.format = parse_data_format(format);
    options.label_column = label_col;
    Dataset train_set = load_dataset(data, options);
    if (split > 0.0) {
      if (split >= 1.0) throw UsageError("--split must lie in (0, 1)");
      auto [a, b] = train_test_split(train_set, 1.0 - split, seed);
      return {std::move(a), std::move(b)};
    }
    if (test.empty()) return {std::move(train_set), std::nullopt};
    LabelMapping mapping = train_set.mapping();
    options.mapping = &mapping;
    options.dims = train_set.dims();
    Dataset test_set = load_dataset(test, options);
    return {std::move(train_set), std::move(test_set)};
  }
};

struct ModelArgs {
  std::string variant = "abc";
  int leaves = 10;
  double shrinkage = 0.1;
  int rounds = 1000;
  int min_leaf = 1;
  bool recenter = false;
  std::optional<int> base;
  std::string initial_base = "lowest";

  void add_to(CLI::App& app, bool with_variant) {
    if (with_variant) {
      app.add_option("--variant", variant, "mart, abc, mb, fixed_base (with --base) or b<k>");
      app.add_option("--leaves", leaves, "Terminal nodes per tree (J)");
      app.add_option("--shrinkage", shrinkage, "Shrinkage (nu)");
    }
    app.add_option("--rounds", rounds, "Boosting rounds (M)");
    app.add_option("--min-leaf", min_leaf, "Minimum samples per leaf");
    app.add_flag("--recenter", recenter, "Re-center mart scores to sum to zero after every round");
    if (with_variant) app.add_option("--base", base, "Fixed base class for --variant fixed_base");
    app.add_option("--initial-base", initial_base, "Initial base class: lowest, random or an index");
  }

  TrainConfig config(int leaves_J, double nu, const std::string& variant_name, std::uint64_t seed) const {
    TrainConfig c;
    c.leaves = leaves_J;
    c.shrinkage = nu;
    c.rounds = rounds;
    c.min_samples_leaf = min_leaf;
    c.recenter = recenter;
    c.seed = seed;
    try {
      c.variant = Variant::parse(variant_name, base);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    if (initial_base == "random") {
      c.initial_base_mode = InitialBase::kRandom;
    } else if (initial_base != "lowest") {
      try {
        c.initial_base = std::stoi(initial_base);
      } catch (const std::exception&) {
        throw UsageError("--initial-base must be lowest, random or a class index");
      }
    }
    return c;
  }
};

inline void validate_for(const TrainConfig& c, const Dataset& d) {
  try {
    c.validate(d.num_classes);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

// Trains one configuration, streaming its history rows to `history_path`.
inline TrainResult train_with_history(const Dataset& train_set, const std::optional<Dataset>& test_set,
                                      const TrainConfig& config, const std::filesystem::path& history_path) {
  std::ofstream history = open_output(history_path);
  history << kHistoryHeader << '\n';
  return train(train_set, config, test_set ? &*test_set : nullptr, [&](const RoundRecord& r, const TrainState&) {
    history << history_row(r) << '\n';
    history.flush();
  });
}

inline void print_report(std::ostream& out, const std::string& label, const EvalReport& report) {
  out << label << " errors: " << report.error_count << "\n";
  out << label << " error_rate: " << format_real(report.error_rate) << "\n";
  if (report.loss) out << label << " loss: " << format_real(*report.loss) << "\n";
  if (report.comparison) {
    out << "R_err(%): " << format_real(report.comparison->relative_improvement) << "\n";
    out << "p_value: " << format_real(report.comparison->test.p_value) << "\n";
    if (report.comparison->test.degenerate) out << "p_value_degenerate: true\n";
  }
}

struct TrainArgs {
  DataArgs data;
  ModelArgs model;
  std::string out = "abcboost_out";
};

inline int cmd_train(const TrainArgs& args, std::ostream& out) {
  TrainConfig config = args.model.config(args.model.leaves, args.model.shrinkage, args.model.variant, args.data.seed);
  auto [train_set, test_set] = args.data.load();
  validate_for(config, train_set);
  const std::filesystem::path dir(args.out);
  TrainResult result = train_with_history(train_set, test_set, config, dir / "history.csv");
  save_model(result.model, (dir / "model.json").string());

  out << "variant: " << config.variant.name() << "\n";
  out << "rounds: " << result.model.round_count() << "\n";
  print_report(out, "train", evaluate(result.model, train_set));
  if (test_set) {
    print_report(out, "test", evaluate(result.model, *test_set));
    if (auto best = best_test_errors(result.history)) {
      out << "best test errors: " << best->errors << " at iter " << best->iter << "\n";
    }
  }
  out << "model: " << (dir / "model.json").string() << "\n";
  out << "history: " << (dir / "history.csv").string() << "\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string model;
  std::string data;
  std::string format = "csv";
  int label_col = 0;
  std::string baseline;
};

inline int cmd_evaluate(const EvaluateArgs& args, std::ostream& out) {
  Model model = load_model(args.model);
  LabelMapping mapping(model.class_names);
  LoadOptions options;
  options.format = parse_data_format(args.format);
  options.label_column = args.label_col;
  options.mapping = &mapping;
  options.dims = model.dims;
  Dataset data = load_dataset(args.data, options);
  std::optional<Model> baseline;
  if (!args.baseline.empty()) {
    baseline = load_model(args.baseline);
    if (baseline->dims != model.dims || baseline->class_names != model.class_names) {
      throw Error("baseline model is incompatible with the evaluated model");
    }
  }
  print_report(out, "eval", evaluate(model, data, baseline ? &*baseline : nullptr));
  return kExitOk;
}

struct ExperimentArgs {
  DataArgs data;
  ModelArgs model;
  std::vector<int> leaves{4, 6, 8, 10, 12, 14, 16};
  std::vector<double> shrinkages{0.04, 0.06, 0.08, 0.1};
  std::vector<std::string> variants{"mart", "abc"};
  std::string out = "experiment_out";
};

inline std::string cell_name(const std::string& variant, int J, double nu) {
  std::ostringstream s;
  s << variant << "_J" << J << "_nu" << format_real(nu);
  return s.str();
}

inline int cmd_experiment(const ExperimentArgs& args, std::ostream& out, std::ostream& err) {
  if (args.leaves.empty() || args.shrinkages.empty() || args.variants.empty()) {
    throw UsageError("experiment grid lists must be nonempty");
  }
  if (args.data.test.empty() && args.data.split <= 0.0) throw UsageError("experiment needs --test or --split");
  std::vector<TrainConfig> configs;
  std::vector<std::string> names;
  for (const auto& v : args.variants) {
    for (int J : args.leaves) {
      for (double nu : args.shrinkages) {
        configs.push_back(args.model.config(J, nu, v, args.data.seed));
        names.push_back(cell_name(configs.back().variant.name(), J, nu));
      }
    }
  }
  auto [train_set, test_set] = args.data.load();
  for (const auto& c : configs) validate_for(c, train_set);

  const std::filesystem::path dir(args.out);
  std::ofstream summary = open_output(dir / "summary.csv");
  summary << kSummaryHeader << '\n';
  bool failed = false;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const TrainConfig& config = configs[c];
    try {
      TrainResult result = train_with_history(train_set, test_set, config, dir / (names[c] + ".history.csv"));
      auto best = best_test_errors(result.history);
      summary << config.variant.name() << ',' << config.leaves << ',' << format_real(config.shrinkage) << ','
              << (best ? std::to_string(best->errors) : "") << ',' << (best ? std::to_string(best->iter) : "")
              << ',' << format_real(result.history.back().train_loss) << '\n';
      summary.flush();
      out << names[c] << ": best test errors " << (best ? std::to_string(best->errors) : "n/a") << "\n";
    } catch (const std::exception& e) {
      failed = true;
      summary << config.variant.name() << ',' << config.leaves << ',' << format_real(config.shrinkage) << ",,,\n";
      err << names[c] << ": failed: " << e.what() << "\n";
    }
  }
  out << "summary: " << (dir / "summary.csv").string() << "\n";
  return failed ? kExitRuntime : kExitOk;
}

struct AblationArgs {
  DataArgs data;
  ModelArgs model;
  std::vector<int> bases{1, 7};
  std::string out = "ablation_out";
};

inline int cmd_ablation(const AblationArgs& args, std::ostream& out) {
  auto [train_set, test_set] = args.data.load();
  if (train_set.num_classes < 3) throw UsageError("ablation needs a dataset with K >= 3");
  std::vector<std::string> series{"mart", "abc", "mb"};
  for (int b : args.bases) {
    if (b < 0 || b >= train_set.num_classes) {
      throw UsageError("fixed base " + std::to_string(b) + " out of range for K=" +
                       std::to_string(train_set.num_classes));
    }
    series.push_back("b" + std::to_string(b));
  }
  std::vector<TrainConfig> configs;
  for (const auto& s : series) {
    configs.push_back(args.model.config(args.model.leaves, args.model.shrinkage, s, args.data.seed));
    validate_for(configs.back(), train_set);
  }

  const std::filesystem::path dir(args.out);
  std::ofstream combined = open_output(dir / "ablation.csv");
  combined << kAblationHeader << '\n';
  for (std::size_t s = 0; s < series.size(); ++s) {
    TrainResult result = train(train_set, configs[s], test_set ? &*test_set : nullptr,
                               [&](const RoundRecord& r, const TrainState&) {
                                 combined << series[s] << ',' << history_row(r) << '\n';
                               });
    combined.flush();
    out << series[s] << ": rounds " << result.model.round_count() << ", final train loss "
        << format_real(result.history.back().train_loss);
    if (auto best = best_test_errors(result.history)) {
      out << ", best test errors " << best->errors << " at iter " << best->iter;
    }
    out << "\n";
  }
  out << "history: " << (dir / "ablation.csv").string() << "\n";
  return kExitOk;
}

// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Multi-class gradient boosting with MART and adaptive-base-class MART"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train one model and write model.json + history.csv");
  train_args.data.add_to(*train_cmd);
  train_args.model.add_to(*train_cmd, true);
  train_cmd->add_option("--out", train_args.out, "Output directory");

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a saved model on a dataset");
  eval_cmd->add_option("--model", eval_args.model, "Model file")->required();
  eval_cmd->add_option("--data", eval_args.data, "Data file")->required();
  eval_cmd->add_option("--format", eval_args.format, "Data format")->check(CLI::IsMember({"csv", "libsvm"}));
  eval_cmd->add_option("--label-col", eval_args.label_col, "CSV label column (0-based)")
      ->check(CLI::NonNegativeNumber);
  eval_cmd->add_option("--baseline", eval_args.baseline, "Baseline model for R_err and the p-value");

  ExperimentArgs exp_args;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a variant x J x nu grid");
  exp_args.data.add_to(*exp_cmd);
  exp_args.model.add_to(*exp_cmd, false);
  exp_cmd->add_option("--leaves", exp_args.leaves, "J values")->delimiter(',');
  exp_cmd->add_option("--shrinkage", exp_args.shrinkages, "nu values")->delimiter(',');
  exp_cmd->add_option("--variants,--variant", exp_args.variants, "Variants")->delimiter(',');
  exp_cmd->add_option("--base", exp_args.model.base, "Fixed base class for fixed_base cells");
  exp_cmd->add_option("--out", exp_args.out, "Output directory");

  AblationArgs abl_args;
  auto* abl_cmd = app.add_subcommand("ablation", "Compare mart, abc, mb and fixed-base variants");
  abl_args.data.add_to(*abl_cmd);
  abl_args.model.add_to(*abl_cmd, true);
  abl_cmd->add_option("--bases", abl_args.bases, "Fixed base classes")->delimiter(',');
  abl_cmd->add_option("--out", abl_args.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train_args, out);
    if (*eval_cmd) return cmd_evaluate(eval_args, out);
    if (*exp_cmd) return cmd_experiment(exp_args, out, err);
    if (*abl_cmd) return cmd_ablation(abl_args, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace abcboost::cli

#endif  // ABCBOOST_CLI_HPP_
