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

#include "bertperf/report.h"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace bertperf {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view ToString(CategoryGroup g) {
  switch (g) {
    case CategoryGroup::kTransformer: return "Transformer";
    case CategoryGroup::kEmbedding: return "Embedding";
    case CategoryGroup::kOutputLayer: return "OutputLayer";
    case CategoryGroup::kLambUpdate: return "LambUpdate";
    case CategoryGroup::kCommunication: return "Communication";
    case CategoryGroup::kGradAccumulate: return "GradAccumulate";
  }
  return "?";
}

CategoryGroup GroupOf(Category c) {
  switch (c) {
    case Category::kLinearTransformGEMM:
    case Category::kAttentionBGEMM:
    case Category::kFCGEMM:
    case Category::kAttnScaleMaskSoftmaxDropout:
    case Category::kGeLU:
    case Category::kDropResidualLayerNorm:
      return CategoryGroup::kTransformer;
    case Category::kEmbedding: return CategoryGroup::kEmbedding;
    case Category::kOutputLayer: return CategoryGroup::kOutputLayer;
    case Category::kLambStage1:
    case Category::kLambStage2:
    case Category::kGlobalGradNorm:
      return CategoryGroup::kLambUpdate;
    case Category::kAllReduce: return CategoryGroup::kCommunication;
    case Category::kGradAccumulate: return CategoryGroup::kGradAccumulate;
  }
  return CategoryGroup::kTransformer;
}

namespace {

template <typename Key>
const Share* FindShare(const std::map<Key, Share>& m, Key k) {
  auto it = m.find(k);
  return it == m.end() ? nullptr : &it->second;
}

}  // namespace

double IterationBreakdown::fraction(CategoryGroup g) const {
  const Share* s = FindShare(groups, g);
  return s ? s->fraction : 0.0;
}
double IterationBreakdown::fraction(Category c) const {
  const Share* s = FindShare(categories, c);
  return s ? s->fraction : 0.0;
}
double IterationBreakdown::time(CategoryGroup g) const {
  const Share* s = FindShare(groups, g);
  return s ? s->time : 0.0;
}
double IterationBreakdown::time(Category c) const {
  const Share* s = FindShare(categories, c);
  return s ? s->time : 0.0;
}

IterationBreakdown Breakdown(const ScheduledGraph& schedule) {
  if (schedule.entries.size() != schedule.ops.size()) {
    throw std::invalid_argument("schedule has " +
                                std::to_string(schedule.entries.size()) +
                                " entries for " +
                                std::to_string(schedule.ops.size()) + " ops");
  }
  IterationBreakdown b;
  if (schedule.ops.empty()) return b;
  for (CategoryGroup g : kAllGroups) b.groups[g] = {};
  for (Category c : kAllCategories) b.categories[c] = {};
  for (std::size_t i = 0; i < schedule.ops.size(); ++i) {
    const double t = schedule.entries[i].exposed;
    const Category c = schedule.ops[i].category;
    b.categories[c].time += t;
    b.groups[GroupOf(c)].time += t;
    b.total_time += t;
  }
  if (b.total_time > 0.0) {
    for (auto& [g, s] : b.groups) s.fraction = s.time / b.total_time;
    for (auto& [c, s] : b.categories) s.fraction = s.time / b.total_time;
  }
  return b;
}

ScheduledGraph Simulate(const RunConfig& run, const BuildOptions& options) {
  Validate(run);
  const ModelConfig& cfg = run.model;
  const ParallelismConfig& par = run.parallelism;
  BuildOptions opts = options;
  opts.shard = ShardSpec{par.model_degree};

  OpGraph graph = ApplyMicrobatching(cfg, par.micro_batches, opts);
  ModelConfig micro = cfg;
  micro.batch_size = cfg.batch_size / par.micro_batches;
  AddModelParallelComm(graph, micro, opts.shard);
  return ApplyDataParallel(graph, cfg, par, run.hardware, opts.shard);
}

std::string_view ToString(SweepAxis a) {
  switch (a) {
    case SweepAxis::kBatchSize: return "batch_size";
    case SweepAxis::kSeqLen: return "seq_len";
    case SweepAxis::kHiddenDim: return "hidden_dim";
    case SweepAxis::kNumLayers: return "num_layers";
    case SweepAxis::kModelDegree: return "model_degree";
    case SweepAxis::kDataDegree: return "data_degree";
    case SweepAxis::kPrecision: return "precision";
  }
  return "?";
}

SweepAxis ParseSweepAxis(std::string_view name) {
  for (SweepAxis a :
       {SweepAxis::kBatchSize, SweepAxis::kSeqLen, SweepAxis::kHiddenDim,
        SweepAxis::kNumLayers, SweepAxis::kModelDegree, SweepAxis::kDataDegree,
        SweepAxis::kPrecision}) {
    if (ToString(a) == name) return a;
  }
  throw ConfigError("axis", "unknown sweep axis \"" + std::string(name) + "\"");
}

namespace {

std::int64_t ParseCount(std::string_view text) {
  std::int64_t value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("value", "not an integer: \"" + std::string(text) + "\"");
  }
  return value;
}

}  // namespace

std::vector<SweepRow> Sweep(SweepAxis axis, std::span<const std::string> values,
                            const RunConfig& base) {
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (const std::string& value : values) {
    SweepRow row;
    row.value = value;
    row.run = base;
    try {
      ModelConfig& m = row.run.model;
      ParallelismConfig& p = row.run.parallelism;
      switch (axis) {
        case SweepAxis::kBatchSize: m.batch_size = ParseCount(value); break;
        case SweepAxis::kSeqLen: m.seq_len = ParseCount(value); break;
        case SweepAxis::kHiddenDim:
          m.hidden_dim = ParseCount(value);
          m.intermediate_dim = 4 * m.hidden_dim;
          break;
        case SweepAxis::kNumLayers: m.num_layers = ParseCount(value); break;
        case SweepAxis::kModelDegree: p.model_degree = ParseCount(value); break;
        case SweepAxis::kDataDegree: p.data_degree = ParseCount(value); break;
        case SweepAxis::kPrecision: m.precision = ParsePrecision(value); break;
      }
      row.breakdown = Breakdown(Simulate(row.run));
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Format ParseFormat(std::string_view name) {
  if (name == "json") return Format::kJSON;
  if (name == "csv") return Format::kCSV;
  throw ConfigError("format", "expected json or csv");
}

double RoundSignificant(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return std::strtod(buf, nullptr);
}

namespace {

std::string Num(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

ordered_json AxisColumns(const RunConfig& run) {
  return ordered_json{{"batch_size", run.model.batch_size},
                      {"seq_len", run.model.seq_len},
                      {"hidden_dim", run.model.hidden_dim},
                      {"num_layers", run.model.num_layers},
                      {"model_degree", run.parallelism.model_degree},
                      {"data_degree", run.parallelism.data_degree},
                      {"precision", std::string(ToString(run.model.precision))}};
}

ordered_json ShareJson(const Share& s) {
  return ordered_json{{"time_seconds", RoundSignificant(s.time)},
                      {"fraction", RoundSignificant(s.fraction)}};
}

std::string CsvEscape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string Emit(std::span<const SweepRow> rows, Format format) {
  if (format == Format::kJSON) {
    ordered_json doc;
    doc["rows"] = ordered_json::array();
    for (const SweepRow& row : rows) {
      ordered_json r;
      r["value"] = row.value;
      r["config"] = AxisColumns(row.run);
      if (!row.breakdown) {
        r["error"] = row.error;
        doc["rows"].push_back(std::move(r));
        continue;
      }
      const IterationBreakdown& b = *row.breakdown;
      r["total_time_seconds"] = RoundSignificant(b.total_time);
      r["groups"] = ordered_json::object();
      for (const auto& [g, s] : b.groups) {
        r["groups"][std::string(ToString(g))] = ShareJson(s);
      }
      r["categories"] = ordered_json::object();
      for (const auto& [c, s] : b.categories) {
        r["categories"][std::string(ToString(c))] = ShareJson(s);
      }
      doc["rows"].push_back(std::move(r));
    }
    return doc.dump(2) + "\n";
  }

  std::string out;
  const ordered_json header_cols = AxisColumns(RunConfig{});
  for (const auto& [name, unused] : header_cols.items()) out += name + ",";
  for (CategoryGroup g : kAllGroups) out += std::string(ToString(g)) + ",";
  out += "total_time_seconds\n";
  for (const SweepRow& row : rows) {
    const ordered_json cols = AxisColumns(row.run);
    for (const auto& [name, value] : cols.items()) {
      out += value.is_string() ? CsvEscape(value.get<std::string>())
                               : value.dump();
      out += ",";
    }
    if (!row.breakdown) {
      // Rejected row: config columns only.
      for (std::size_t i = 0; i < std::size(kAllGroups); ++i) out += ",";
      out += "\n";
      continue;
    }
    for (CategoryGroup g : kAllGroups) {
      out += Num(row.breakdown->fraction(g)) + ",";
    }
    out += Num(row.breakdown->total_time) + "\n";
  }
  return out;
}

std::vector<IterationBreakdown> ReadBreakdownsJson(std::string_view text) {
  const json doc = json::parse(text);
  std::vector<IterationBreakdown> out;
  for (const json& r : doc.at("rows")) {
    IterationBreakdown b;
    if (!r.contains("total_time_seconds")) {
      out.push_back(b);
      continue;
    }
    b.total_time = r.at("total_time_seconds").get<double>();
    for (CategoryGroup g : kAllGroups) {
      const json& s = r.at("groups").at(std::string(ToString(g)));
      b.groups[g] = {s.at("time_seconds").get<double>(),
                     s.at("fraction").get<double>()};
    }
    for (Category c : kAllCategories) {
      const json& s = r.at("categories").at(std::string(ToString(c)));
      b.categories[c] = {s.at("time_seconds").get<double>(),
                         s.at("fraction").get<double>()};
    }
    out.push_back(std::move(b));
  }
  return out;
}

namespace {

ordered_json TotalsJson(const GraphTotals& t) {
  ordered_json j{{"flops", t.flops},
                 {"bytes", t.bytes},
                 {"kernels", t.kernels},
                 {"time_seconds", RoundSignificant(t.time)}};
  j["time_by_category"] = ordered_json::object();
  for (Category c : kAllCategories) {
    auto it = t.time_by_category.find(c);
    j["time_by_category"][std::string(ToString(c))] =
        RoundSignificant(it == t.time_by_category.end() ? 0.0 : it->second);
  }
  return j;
}

}  // namespace

std::string EmitDelta(const DeltaReport& r, Format format) {
  if (format == Format::kJSON) {
    ordered_json doc;
    doc["baseline"] = TotalsJson(r.baseline);
    doc["variant"] = TotalsJson(r.variant);
    ordered_json d{{"flops", r.flops_delta},
                   {"bytes", r.bytes_delta},
                   {"kernels", r.kernel_delta},
                   {"time_seconds", RoundSignificant(r.time_delta)}};
    d["time_by_category"] = ordered_json::object();
    for (const auto& [c, t] : r.time_delta_by_category) {
      d["time_by_category"][std::string(ToString(c))] = RoundSignificant(t);
    }
    doc["delta"] = std::move(d);
    return doc.dump(2) + "\n";
  }

  std::string out = "label,flops,bytes,kernels,time_seconds";
  for (Category c : kAllCategories) out += "," + std::string(ToString(c));
  out += "\n";
  auto row = [&out](const char* label, std::int64_t flops, std::int64_t bytes,
                    std::int64_t kernels, double time,
                    const std::map<Category, double>& by_cat) {
    out += std::string(label) + "," + std::to_string(flops) + "," +
           std::to_string(bytes) + "," + std::to_string(kernels) + "," +
           Num(time);
    for (Category c : kAllCategories) {
      auto it = by_cat.find(c);
      out += "," + Num(it == by_cat.end() ? 0.0 : it->second);
    }
    out += "\n";
  };
  row("baseline", r.baseline.flops, r.baseline.bytes, r.baseline.kernels,
      r.baseline.time, r.baseline.time_by_category);
  row("variant", r.variant.flops, r.variant.bytes, r.variant.kernels,
      r.variant.time, r.variant.time_by_category);
  row("delta", r.flops_delta, r.bytes_delta, r.kernel_delta, r.time_delta,
      r.time_delta_by_category);
  return out;
}

}  // namespace bertperf
