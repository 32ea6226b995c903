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

#ifndef BERTPERF_CONFIG_H_
#define BERTPERF_CONFIG_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace bertperf {

// Training precision of a whole iteration. Mixed runs forward/backward with
// FP16 operands and keeps the optimizer state in FP32.
enum class Precision { kFP32, kMixed };

// Storage type of a single operation's operands.
enum class DataType { kFP32, kFP16 };

constexpr std::int64_t BytesPerElement(DataType t) {
  return t == DataType::kFP32 ? 4 : 2;
}

// Operand type for forward/backward (non-optimizer) operations.
constexpr DataType ActivationType(Precision p) {
  return p == Precision::kFP32 ? DataType::kFP32 : DataType::kFP16;
}

std::string_view ToString(Precision p);
std::string_view ToString(DataType t);
Precision ParsePrecision(std::string_view text);

// Raised for malformed documents and invariant violations. `key()` names the
// offending field ("model.hidden_dim"), or several comma-separated fields for
// cross-field constraints.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Transformer hyperparameters. Defaults are BERT Large, pre-training
// phase 1.
struct ModelConfig {
  std::int64_t num_layers = 24;          // N
  std::int64_t hidden_dim = 1024;        // d_model
  std::int64_t num_heads = 16;           // h
  std::int64_t intermediate_dim = 4096;  // d_ff
  std::int64_t seq_len = 128;            // n
  std::int64_t batch_size = 32;          // B, per data-parallel replica
  std::int64_t vocab_size = 30522;
  std::int64_t max_positions = 512;
  Precision precision = Precision::kFP32;

  std::int64_t head_dim() const { return hidden_dim / num_heads; }
  std::int64_t tokens() const { return seq_len * batch_size; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Parametric accelerator. All rates are in base SI units. The defaults
// describe an MI100-class device: vector FP32 peak, matrix-core FP16 peak,
// HBM2 bandwidth and a PCIe 4.0 x16 link.
struct HardwareSpec {
  double peak_flops_fp32 = 23.1e12;
  double peak_flops_fp16 = 184.6e12;
  double mem_bandwidth = 1.2e12;
  double launch_overhead = 5e-6;
  double link_bandwidth = 32e9;
  double compute_efficiency = 0.85;
  double bandwidth_efficiency = 0.80;

  double peak_flops(DataType t) const {
    return t == DataType::kFP32 ? peak_flops_fp32 : peak_flops_fp16;
  }

  friend bool operator==(const HardwareSpec&, const HardwareSpec&) = default;
};

struct ParallelismConfig {
  std::int64_t data_degree = 1;   // D
  std::int64_t model_degree = 1;  // M
  bool overlap_comm = true;
  std::int64_t micro_batches = 1;  // k

  friend bool operator==(const ParallelismConfig&,
                         const ParallelismConfig&) = default;
};

struct RunConfig {
  ModelConfig model;
  HardwareSpec hardware;
  ParallelismConfig parallelism;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Each throws ConfigError naming the violated key(s).
void Validate(const ModelConfig& cfg);
void Validate(const HardwareSpec& hw);
void Validate(const ParallelismConfig& par, const ModelConfig& cfg);
void Validate(const RunConfig& run);

// Parses a JSON document with optional top-level objects "model",
// "hardware" and "parallelism". Missing fields keep their defaults; unknown
// keys are rejected.
RunConfig ParseConfig(std::string_view text);
std::string EmitConfig(const RunConfig& run);

// Known names: bert_large_phase1, bert_large_phase2, bert_base_phase1.
ModelConfig Preset(std::string_view name);

struct ParamReport {
  std::int64_t per_transformer_layer = 0;
  std::int64_t embeddings = 0;
  std::int64_t total = 0;
};

// Weights and biases of the encoder stack and embedding tables. The
// pre-training output heads are not counted.
ParamReport ParamCount(const ModelConfig& cfg);

}  // namespace bertperf

#endif  // BERTPERF_CONFIG_H_
