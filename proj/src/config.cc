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

#include "bertperf/config.h"

#include <cmath>
#include <functional>
#include <map>
#include <string>

#include "json.hpp"

namespace bertperf {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view ToString(Precision p) {
  return p == Precision::kFP32 ? "fp32" : "mixed";
}

std::string_view ToString(DataType t) {
  return t == DataType::kFP32 ? "FP32" : "FP16";
}

Precision ParsePrecision(std::string_view text) {
  if (text == "fp32" || text == "FP32") return Precision::kFP32;
  if (text == "mixed" || text == "Mixed") return Precision::kMixed;
  throw ConfigError("precision",
                    "expected \"fp32\" or \"mixed\", got \"" +
                        std::string(text) + "\"");
}

namespace {

void RequirePositive(std::int64_t value, const char* key) {
  if (value < 1) {
    throw ConfigError(key, "must be >= 1, got " + std::to_string(value));
  }
}

void RequirePositiveRate(double value, const char* key) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(key, "must be a finite value > 0");
  }
}

void RequireFraction(double value, const char* key) {
  if (!(value > 0.0 && value <= 1.0)) {
    throw ConfigError(key, "must lie in (0, 1]");
  }
}

}  // namespace

void Validate(const ModelConfig& cfg) {
  RequirePositive(cfg.num_layers, "model.num_layers");
  RequirePositive(cfg.hidden_dim, "model.hidden_dim");
  RequirePositive(cfg.num_heads, "model.num_heads");
  RequirePositive(cfg.intermediate_dim, "model.intermediate_dim");
  RequirePositive(cfg.seq_len, "model.seq_len");
  RequirePositive(cfg.batch_size, "model.batch_size");
  RequirePositive(cfg.vocab_size, "model.vocab_size");
  RequirePositive(cfg.max_positions, "model.max_positions");
  if (cfg.hidden_dim % cfg.num_heads != 0) {
    throw ConfigError("model.hidden_dim,model.num_heads",
                      std::to_string(cfg.hidden_dim) +
                          " is not divisible by " +
                          std::to_string(cfg.num_heads));
  }
  if (cfg.seq_len > cfg.max_positions) {
    throw ConfigError("model.seq_len,model.max_positions",
                      "seq_len exceeds max_positions");
  }
}

void Validate(const HardwareSpec& hw) {
  RequirePositiveRate(hw.peak_flops_fp32, "hardware.peak_flops_fp32");
  RequirePositiveRate(hw.peak_flops_fp16, "hardware.peak_flops_fp16");
  RequirePositiveRate(hw.mem_bandwidth, "hardware.mem_bandwidth");
  RequirePositiveRate(hw.launch_overhead, "hardware.launch_overhead");
  RequirePositiveRate(hw.link_bandwidth, "hardware.link_bandwidth");
  RequireFraction(hw.compute_efficiency, "hardware.compute_efficiency");
  RequireFraction(hw.bandwidth_efficiency, "hardware.bandwidth_efficiency");
  if (hw.peak_flops_fp16 < hw.peak_flops_fp32) {
    throw ConfigError("hardware.peak_flops_fp16,hardware.peak_flops_fp32",
                      "fp16 peak must be >= fp32 peak");
  }
}

void Validate(const ParallelismConfig& par, const ModelConfig& cfg) {
  RequirePositive(par.data_degree, "parallelism.data_degree");
  RequirePositive(par.model_degree, "parallelism.model_degree");
  RequirePositive(par.micro_batches, "parallelism.micro_batches");
  if (cfg.batch_size % par.micro_batches != 0) {
    throw ConfigError("model.batch_size,parallelism.micro_batches",
                      "batch_size is not divisible by micro_batches");
  }
  if (cfg.num_heads % par.model_degree != 0) {
    throw ConfigError("model.num_heads,parallelism.model_degree",
                      "num_heads is not divisible by model_degree");
  }
  if (cfg.intermediate_dim % par.model_degree != 0) {
    throw ConfigError("model.intermediate_dim,parallelism.model_degree",
                      "intermediate_dim is not divisible by model_degree");
  }
}

void Validate(const RunConfig& run) {
  Validate(run.model);
  Validate(run.hardware);
  Validate(run.parallelism, run.model);
}

namespace {

using FieldSetter = std::function<void(const json&, const std::string& key)>;

std::int64_t AsCount(const json& value, const std::string& key) {
  if (!value.is_number_integer()) {
    throw ConfigError(key, "expected an integer");
  }
  return value.get<std::int64_t>();
}

double AsRate(const json& value, const std::string& key) {
  if (!value.is_number()) throw ConfigError(key, "expected a number");
  return value.get<double>();
}

void ApplySection(const json& doc, const char* section,
                  const std::map<std::string, FieldSetter>& fields) {
  auto it = doc.find(section);
  if (it == doc.end()) return;
  if (!it->is_object()) {
    throw ConfigError(section, "expected an object");
  }
  for (const auto& [name, value] : it->items()) {
    const std::string key = std::string(section) + "." + name;
    auto field = fields.find(name);
    if (field == fields.end()) throw ConfigError(key, "unknown key");
    field->second(value, key);
  }
}

}  // namespace

RunConfig ParseConfig(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError("<document>", "top level must be an object");
  }
  for (const auto& [name, value] : doc.items()) {
    if (name != "model" && name != "hardware" && name != "parallelism") {
      throw ConfigError(name, "unknown key");
    }
  }

  RunConfig run;
  ModelConfig& m = run.model;
  HardwareSpec& hw = run.hardware;
  ParallelismConfig& par = run.parallelism;

  auto count = [](std::int64_t& dst) -> FieldSetter {
    return [&dst](const json& v, const std::string& key) {
      dst = AsCount(v, key);
    };
  };
  auto rate = [](double& dst) -> FieldSetter {
    return [&dst](const json& v, const std::string& key) {
      dst = AsRate(v, key);
    };
  };

  ApplySection(
      doc, "model",
      {{"num_layers", count(m.num_layers)},
       {"hidden_dim", count(m.hidden_dim)},
       {"num_heads", count(m.num_heads)},
       {"intermediate_dim", count(m.intermediate_dim)},
       {"seq_len", count(m.seq_len)},
       {"batch_size", count(m.batch_size)},
       {"vocab_size", count(m.vocab_size)},
       {"max_positions", count(m.max_positions)},
       {"precision", [&m](const json& v, const std::string& key) {
          if (!v.is_string()) throw ConfigError(key, "expected a string");
          try {
            m.precision = ParsePrecision(v.get<std::string>());
          } catch (const ConfigError& e) {
            throw ConfigError(key, e.what());
          }
        }}});
  ApplySection(doc, "hardware",
               {{"peak_flops_fp32", rate(hw.peak_flops_fp32)},
                {"peak_flops_fp16", rate(hw.peak_flops_fp16)},
                {"mem_bandwidth", rate(hw.mem_bandwidth)},
                {"launch_overhead", rate(hw.launch_overhead)},
                {"link_bandwidth", rate(hw.link_bandwidth)},
                {"compute_efficiency", rate(hw.compute_efficiency)},
                {"bandwidth_efficiency", rate(hw.bandwidth_efficiency)}});
  ApplySection(doc, "parallelism",
               {{"data_degree", count(par.data_degree)},
                {"model_degree", count(par.model_degree)},
                {"micro_batches", count(par.micro_batches)},
                {"overlap_comm", [&par](const json& v, const std::string& key) {
                   if (!v.is_boolean()) {
                     throw ConfigError(key, "expected a boolean");
                   }
                   par.overlap_comm = v.get<bool>();
                 }}});

  Validate(run);
  return run;
}

std::string EmitConfig(const RunConfig& run) {
  const ModelConfig& m = run.model;
  const HardwareSpec& hw = run.hardware;
  const ParallelismConfig& par = run.parallelism;
  ordered_json doc;
  doc["model"] = {{"num_layers", m.num_layers},
                  {"hidden_dim", m.hidden_dim},
                  {"num_heads", m.num_heads},
                  {"intermediate_dim", m.intermediate_dim},
                  {"seq_len", m.seq_len},
                  {"batch_size", m.batch_size},
                  {"vocab_size", m.vocab_size},
                  {"max_positions", m.max_positions},
                  {"precision", std::string(ToString(m.precision))}};
  doc["hardware"] = {{"peak_flops_fp32", hw.peak_flops_fp32},
                     {"peak_flops_fp16", hw.peak_flops_fp16},
                     {"mem_bandwidth", hw.mem_bandwidth},
                     {"launch_overhead", hw.launch_overhead},
                     {"link_bandwidth", hw.link_bandwidth},
                     {"compute_efficiency", hw.compute_efficiency},
                     {"bandwidth_efficiency", hw.bandwidth_efficiency}};
  doc["parallelism"] = {{"data_degree", par.data_degree},
                        {"model_degree", par.model_degree},
                        {"overlap_comm", par.overlap_comm},
                        {"micro_batches", par.micro_batches}};
  return doc.dump(2) + "\n";
}

ModelConfig Preset(std::string_view name) {
  ModelConfig cfg;  // BERT Large, phase 1
  if (name == "bert_large_phase1") return cfg;
  if (name == "bert_large_phase2") {
    cfg.seq_len = 512;
    cfg.batch_size = 4;
    return cfg;
  }
  if (name == "bert_base_phase1") {
    cfg.num_layers = 12;
    cfg.hidden_dim = 768;
    cfg.num_heads = 12;
    cfg.intermediate_dim = 3072;
    return cfg;
  }
  throw ConfigError("preset", "unknown preset \"" + std::string(name) + "\"");
}

ParamReport ParamCount(const ModelConfig& cfg) {
  Validate(cfg);
  const std::int64_t d = cfg.hidden_dim;
  const std::int64_t ff = cfg.intermediate_dim;
  ParamReport r;
  r.per_transformer_layer = 4 * (d * d + d)    // Q, K, V, output projection
                            + (d * ff + ff)    // FC-1
                            + (ff * d + d)     // FC-2
                            + 2 * (2 * d);     // two LayerNorms
  r.embeddings = cfg.vocab_size * d + cfg.max_positions * d + 2 * d;
  r.total = cfg.num_layers * r.per_transformer_layer + r.embeddings;
  return r;
}

}  // namespace bertperf
