//
// Copyright 2026 The dpem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// `dpem` command line:
//
//   dpem run      --config <json> --out <csv> [--seed N] [--silent-noise] [--jobs N]
//   dpem baseline --config <json> --out <csv> [--seed N] [--jobs N]
//   dpem classify --data <csv> --config <json> --out <csv> [--seed N] [--jobs N]
//
// Exit codes: 0 success, 1 runtime or I/O failure, 2 validation failure.

#ifndef DPEM_CLI_HPP_
#define DPEM_CLI_HPP_

#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dpem/errors.hpp"
#include "dpem/harness/classification.hpp"
#include "dpem/harness/config_io.hpp"
#include "dpem/harness/experiment.hpp"
#include "dpem/harness/parallel.hpp"
#include "dpem/harness/results_io.hpp"

namespace dpem::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitValidation = 2;

namespace detail {

struct CommonOptions {
  std::string config;
  std::string out;
  std::string data;
  std::optional<std::uint64_t> seed;
  bool silent_noise = false;
  std::size_t jobs = 0;
};

inline std::string Summary(const harness::AggregateResult& result) {
  std::string line;
  for (const auto& cell : result.cells) {
    if (!line.empty()) line += "; ";
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s=%g: mean final error %.4e", result.sweep_param.c_str(),
                  cell.params.sweep_value, cell.mean_final_error());
    line += buf;
  }
  return line + " (" + std::to_string(result.cells.front().reps.size()) + " reps)";
}

// Runs `body`, translating exceptions into the exit-code contract.
template <typename Body>
int Guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

inline int Experiment(const CommonOptions& opts, harness::Runner runner, std::ostream& out,
                      std::ostream& err) {
  harness::ExperimentConfig config;
  int status = Guarded(err, [&] {
    config = harness::LoadExperimentConfig(opts.config);
    if (opts.seed) config.master_seed = *opts.seed;
    config.silent_noise = opts.silent_noise;
    harness::ValidateConfig(config);
    return kExitOk;
  });
  if (status != kExitOk) return status;
  return Guarded(err, [&] {
    const auto result = harness::run_experiment(config, runner, harness::ResolveJobs(opts.jobs));
    harness::write_results(result, opts.out);
    out << Summary(result) << "\n";
    return kExitOk;
  });
}

}  // namespace detail

// Parses argv (argv[0] is the program name) and dispatches to a subcommand.
inline int Main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Differentially private EM estimation: simulations, baselines, classification",
               "dpem"};
  app.require_subcommand(1);
  detail::CommonOptions opts;

  auto* run = app.add_subcommand("run", "run a private simulation experiment");
  run->add_option("--config", opts.config, "experiment JSON")->required();
  run->add_option("--out", opts.out, "results CSV")->required();
  run->add_option("--seed", opts.seed, "override master_seed");
  run->add_flag("--silent-noise", opts.silent_noise,
                "disable privacy noise (only with epsilon = inf)");
  run->add_option("--jobs", opts.jobs, "concurrent repetitions (default $DPEM_JOBS)");

  auto* baseline = app.add_subcommand("baseline", "run non-private gradient EM on the same config");
  baseline->add_option("--config", opts.config, "experiment JSON")->required();
  baseline->add_option("--out", opts.out, "results CSV")->required();
  baseline->add_option("--seed", opts.seed, "override master_seed");
  baseline->add_option("--jobs", opts.jobs, "concurrent repetitions (default $DPEM_JOBS)");

  auto* classify = app.add_subcommand("classify", "private two-class classification");
  classify->add_option("--data", opts.data, "labeled CSV with a `label` column")->required();
  classify->add_option("--config", opts.config, "classification JSON")->required();
  classify->add_option("--out", opts.out, "results CSV")->required();
  classify->add_option("--seed", opts.seed, "override master_seed");
  classify->add_option("--jobs", opts.jobs, "concurrent repetitions (default $DPEM_JOBS)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitValidation;
  }

  if (*run) return detail::Experiment(opts, harness::Runner::kPrivate, out, err);
  if (*baseline) return detail::Experiment(opts, harness::Runner::kBaseline, out, err);

  harness::ClassificationConfig config;
  harness::LabeledData data;
  const int status = detail::Guarded(err, [&] {
    config = harness::ParseClassificationConfig(harness::ReadTextFile(opts.config));
    if (opts.seed) config.master_seed = *opts.seed;
    data = harness::LoadLabeledCsv(opts.data);
    return kExitOk;
  });
  if (status != kExitOk) return status;
  return detail::Guarded(err, [&] {
    const auto report = harness::run_classification(data, config.params, config.reps,
                                                    config.master_seed,
                                                    harness::ResolveJobs(opts.jobs));
    harness::write_results(report, opts.out);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "s_hat=%zu epsilon=%g: misclassification %.4f (sd %.4f, %zu reps)",
                  report.s_hat, report.epsilon, report.misclassification_rate, report.std_error,
                  report.reps);
    out << buf << "\n";
    return kExitOk;
  });
}

}  // namespace dpem::cli

#endif  // DPEM_CLI_HPP_
