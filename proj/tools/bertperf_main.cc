/* Copyright 2026 The bertperf Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Command-line front end: analyze, sweep, whatif, lamb-verify, dump-graph.
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bertperf/config.h"
#include "bertperf/opgraph.h"
#include "bertperf/parallel.h"
#include "bertperf/report.h"
#include "bertperf/verify/lamb_oracle.h"
#include "bertperf/whatif.h"

namespace {

using namespace bertperf;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfigError = 2;

RunConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  std::stringstream text;
  text << in.rdbuf();
  return ParseConfig(text.str());
}

void WriteOutput(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("--out", "cannot write " + path);
  out << text;
}

struct AnalyzeArgs {
  std::string config;
  std::string precision;
  std::string format = "json";
  std::string out;
  std::string schedule_out;
};

int RunAnalyze(const AnalyzeArgs& a) {
  RunConfig run = LoadConfig(a.config);
  if (!a.precision.empty()) run.model.precision = ParsePrecision(a.precision);
  const Format format = ParseFormat(a.format);
  const ScheduledGraph schedule = Simulate(run);
  SweepRow row;
  row.value = "";
  row.run = run;
  row.breakdown = Breakdown(schedule);
  WriteOutput(Emit(std::span<const SweepRow>(&row, 1), format), a.out);
  if (!a.schedule_out.empty()) {
    std::ofstream out(a.schedule_out);
    if (!out) throw ConfigError("--schedule-out", "cannot write " + a.schedule_out);
    out << DumpSchedule(schedule);
  }
  return kExitOk;
}

struct SweepArgs {
  std::string config;
  std::string axis;
  std::vector<std::string> values;
  std::string format = "csv";
  std::string out;
};

int RunSweep(const SweepArgs& a) {
  const RunConfig base = LoadConfig(a.config);
  const SweepAxis axis = ParseSweepAxis(a.axis);
  const Format format = ParseFormat(a.format);
  const std::vector<SweepRow> rows = Sweep(axis, a.values, base);
  WriteOutput(Emit(rows, format), a.out);
  for (const SweepRow& row : rows) {
    if (!row.breakdown) {
      std::cerr << a.axis << "=" << row.value << ": " << row.error << "\n";
    }
  }
  return kExitOk;
}

struct WhatifArgs {
  std::string config;
  std::string transform;
  std::string format = "json";
  std::string out;
};

int RunWhatif(const WhatifArgs& a) {
  const RunConfig run = LoadConfig(a.config);
  BuildOptions opts;
  opts.shard = ShardSpec{run.parallelism.model_degree};
  OpGraph baseline;
  OpGraph variant;
  if (a.transform == "fuse-linear") {
    baseline = BuildIteration(run.model, opts);
    variant = FuseLinearGemms(baseline);
  } else if (a.transform == "fuse-elementwise") {
    opts.split_elementwise_chains = true;
    baseline = BuildIteration(run.model, opts);
    variant = FuseAllElementwiseChains(baseline);
  } else if (a.transform.rfind("microbatch:", 0) == 0) {
    const std::string count = a.transform.substr(std::string("microbatch:").size());
    std::int64_t k = 0;
    try {
      std::size_t used = 0;
      k = std::stoll(count, &used);
      if (used != count.size()) throw std::invalid_argument(count);
    } catch (const std::exception&) {
      throw ConfigError("--transform", "bad micro-batch count \"" + count + "\"");
    }
    baseline = ApplyMicrobatching(run.model, 1, opts);
    variant = ApplyMicrobatching(run.model, k, opts);
  } else {
    throw ConfigError("--transform", "unknown transform \"" + a.transform + "\"");
  }
  WriteOutput(EmitDelta(Compare(baseline, variant, run.hardware),
                        ParseFormat(a.format)),
              a.out);
  return kExitOk;
}

struct LambArgs {
  std::int64_t elements = 4096;
  std::int64_t trials = 1000;
  std::uint64_t seed = 0;
};

int RunLambVerify(const LambArgs& a) {
  if (a.elements < 1 || a.trials < 1) {
    throw ConfigError("--elements,--trials", "must be >= 1");
  }
  const verify::LambVerifyResult r =
      verify::VerifyLamb(a.elements, a.trials, a.seed);
  if (!r.passed) {
    std::cout << "FAIL " << r.failure << "\n";
    return kExitVerifyFailed;
  }
  std::printf("PASS trials=%lld max_abs_error=%.3g\n",
              static_cast<long long>(r.trials), r.max_abs_error);
  return kExitOk;
}

int RunDumpGraph(const std::string& config, const std::string& out) {
  const RunConfig run = LoadConfig(config);
  BuildOptions opts;
  opts.shard = ShardSpec{run.parallelism.model_degree};
  OpGraph graph = ApplyMicrobatching(run.model, run.parallelism.micro_batches, opts);
  ModelConfig micro = run.model;
  micro.batch_size /= run.parallelism.micro_batches;
  AddModelParallelComm(graph, micro, opts.shard);
  WriteOutput(DumpGraph(graph), out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analytical roofline model of BERT pre-training iterations"};
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "Runtime breakdown of one configuration");
  analyze_cmd->add_option("--config", analyze.config, "Run configuration (JSON)")->required();
  analyze_cmd->add_option("--precision", analyze.precision, "fp32 or mixed");
  analyze_cmd->add_option("--format", analyze.format, "json or csv");
  analyze_cmd->add_option("--out", analyze.out, "Output file (default stdout)");
  analyze_cmd->add_option("--schedule-out", analyze.schedule_out, "Per-op schedule as JSON lines");

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Breakdown table over one axis");
  sweep_cmd->add_option("--config", sweep.config, "Base configuration (JSON)")->required();
  sweep_cmd->add_option("--axis", sweep.axis,
                        "batch_size|seq_len|hidden_dim|num_layers|model_degree|data_degree|precision")
      ->required();
  sweep_cmd->add_option("--values", sweep.values, "Comma-separated values")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--format", sweep.format, "csv or json");
  sweep_cmd->add_option("--out", sweep.out, "Output file (default stdout)");

  WhatifArgs whatif;
  CLI::App* whatif_cmd = app.add_subcommand("whatif", "Baseline versus transformed graph");
  whatif_cmd->add_option("--config", whatif.config, "Run configuration (JSON)")->required();
  whatif_cmd->add_option("--transform", whatif.transform,
                         "fuse-linear|fuse-elementwise|microbatch:k")
      ->required();
  whatif_cmd->add_option("--format", whatif.format, "json or csv");
  whatif_cmd->add_option("--out", whatif.out, "Output file (default stdout)");

  LambArgs lamb;
  CLI::App* lamb_cmd = app.add_subcommand("lamb-verify", "Check the LAMB update against its oracle");
  lamb_cmd->add_option("--elements", lamb.elements, "Largest vector length");
  lamb_cmd->add_option("--trials", lamb.trials, "Number of random cases");
  lamb_cmd->add_option("--seed", lamb.seed, "RNG seed");

  std::string dump_config;
  std::string dump_out;
  CLI::App* dump_cmd = app.add_subcommand("dump-graph", "Operator graph as JSON lines");
  dump_cmd->add_option("--config", dump_config, "Run configuration (JSON)")->required();
  dump_cmd->add_option("--out", dump_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*analyze_cmd) return RunAnalyze(analyze);
    if (*sweep_cmd) return RunSweep(sweep);
    if (*whatif_cmd) return RunWhatif(whatif);
    if (*lamb_cmd) return RunLambVerify(lamb);
    if (*dump_cmd) return RunDumpGraph(dump_config, dump_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerifyFailed;
  }
  return kExitOk;
}
