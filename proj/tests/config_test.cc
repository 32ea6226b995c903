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

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

namespace bertperf {
namespace {

// Parameter tensors listed one by one as (rows, cols); a bias or LayerNorm
// vector is (1, len).
std::int64_t TensorSum(const std::vector<std::pair<std::int64_t, std::int64_t>>& t) {
  std::int64_t total = 0;
  for (const auto& [r, c] : t) total += r * c;
  return total;
}

std::int64_t LayerTensorsOracle(std::int64_t d, std::int64_t ff) {
  return TensorSum({
      {d, d}, {1, d},    // query
      {d, d}, {1, d},    // key
      {d, d}, {1, d},    // value
      {d, d}, {1, d},    // attention output
      {1, d}, {1, d},    // attention LayerNorm gamma, beta
      {d, ff}, {1, ff},  // FC-1
      {ff, d}, {1, d},   // FC-2
      {1, d}, {1, d},    // output LayerNorm gamma, beta
  });
}

std::int64_t EmbeddingTensorsOracle(std::int64_t v, std::int64_t pos,
                                    std::int64_t d) {
  return TensorSum({{v, d}, {pos, d}, {1, d}, {1, d}});
}

std::string ErrorKey(const std::string& doc) {
  try {
    ParseConfig(doc);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

TEST(ParseConfigTest, PhaseOneDocument) {
  const RunConfig run = ParseConfig(R"({
    "model": {"num_layers": 24, "hidden_dim": 1024, "num_heads": 16,
              "intermediate_dim": 4096, "seq_len": 128, "batch_size": 32,
              "precision": "fp32"}
  })");
  EXPECT_EQ(run.model, Preset("bert_large_phase1"));
  EXPECT_EQ(run.model.seq_len, 128);
  EXPECT_EQ(run.model.batch_size, 32);
}

TEST(ParseConfigTest, EmptyParallelismTakesSingleDeviceDefaults) {
  const RunConfig run = ParseConfig(R"({"parallelism": {}})");
  EXPECT_EQ(run.parallelism.data_degree, 1);
  EXPECT_EQ(run.parallelism.model_degree, 1);
  EXPECT_TRUE(run.parallelism.overlap_comm);
  EXPECT_EQ(run.parallelism.micro_batches, 1);
}

TEST(ParseConfigTest, IndivisibleHeadsNameBothKeys) {
  const std::string key =
      ErrorKey(R"({"model": {"hidden_dim": 1000, "num_heads": 16}})");
  EXPECT_NE(key.find("hidden_dim"), std::string::npos);
  EXPECT_NE(key.find("num_heads"), std::string::npos);
}

TEST(ParseConfigTest, RejectsMalformedAndUnknown) {
  EXPECT_EQ(ErrorKey("{"), "<document>");
  EXPECT_EQ(ErrorKey("[1, 2]"), "<document>");
  EXPECT_EQ(ErrorKey(R"({"optimizer": {}})"), "optimizer");
  EXPECT_EQ(ErrorKey(R"({"model": {"layers": 3}})"), "model.layers");
  EXPECT_EQ(ErrorKey(R"({"model": {"num_layers": 2.5}})"), "model.num_layers");
  EXPECT_EQ(ErrorKey(R"({"model": {"num_layers": "24"}})"), "model.num_layers");
  EXPECT_EQ(ErrorKey(R"({"model": {"batch_size": 0}})"), "model.batch_size");
  EXPECT_EQ(ErrorKey(R"({"model": {"precision": "bf16"}})"), "model.precision");
  EXPECT_EQ(ErrorKey(R"({"parallelism": {"overlap_comm": 1}})"),
            "parallelism.overlap_comm");
  EXPECT_EQ(ErrorKey(R"({"hardware": {"compute_efficiency": 1.5}})"),
            "hardware.compute_efficiency");
  EXPECT_EQ(ErrorKey(R"({"hardware": {"mem_bandwidth": -1}})"),
            "hardware.mem_bandwidth");
}

TEST(ParseConfigTest, CrossFieldInvariants) {
  EXPECT_NE(ErrorKey(R"({"model": {"seq_len": 1024}})"), "");
  EXPECT_NE(ErrorKey(R"({"hardware": {"peak_flops_fp16": 1e12}})"), "");
  EXPECT_NE(ErrorKey(R"({"parallelism": {"micro_batches": 3}})"), "");
  EXPECT_NE(ErrorKey(R"({"parallelism": {"model_degree": 3}})"), "");
  const std::string key = ErrorKey(
      R"({"model": {"num_heads": 8, "intermediate_dim": 4098},
          "parallelism": {"model_degree": 4}})");
  EXPECT_NE(key.find("intermediate_dim"), std::string::npos);
}

TEST(ParseConfigTest, RoundTripIsIdentity) {
  RunConfig run;
  run.model = Preset("bert_base_phase1");
  run.model.precision = Precision::kMixed;
  run.model.vocab_size = 32000;
  run.hardware.peak_flops_fp32 = 19.5e12;
  run.hardware.launch_overhead = 3.25e-6;
  run.hardware.bandwidth_efficiency = 0.7;
  run.parallelism = {8, 2, false, 4};
  const std::string text = EmitConfig(run);
  EXPECT_EQ(ParseConfig(text), run);
  EXPECT_EQ(EmitConfig(ParseConfig(text)), text);
  EXPECT_EQ(text.back(), '\n');

  const RunConfig defaults;
  EXPECT_EQ(ParseConfig(EmitConfig(defaults)), defaults);
}

TEST(PresetTest, KnownPresets) {
  const ModelConfig p1 = Preset("bert_large_phase1");
  EXPECT_EQ(p1.num_layers, 24);
  EXPECT_EQ(p1.hidden_dim, 1024);
  EXPECT_EQ(p1.num_heads, 16);
  EXPECT_EQ(p1.intermediate_dim, 4096);
  EXPECT_EQ(p1.vocab_size, 30522);
  EXPECT_EQ(p1.seq_len, 128);
  EXPECT_EQ(p1.batch_size, 32);

  ModelConfig p2 = Preset("bert_large_phase2");
  EXPECT_EQ(p2.seq_len, 512);
  EXPECT_EQ(p2.batch_size, 4);
  p2.seq_len = p1.seq_len;
  p2.batch_size = p1.batch_size;
  EXPECT_EQ(p2, p1);

  const ModelConfig base = Preset("bert_base_phase1");
  EXPECT_EQ(base.num_layers, 12);
  EXPECT_EQ(base.hidden_dim, 768);
  EXPECT_EQ(base.num_heads, 12);
  EXPECT_EQ(base.intermediate_dim, 3072);

  EXPECT_THROW(Preset("bert_huge"), ConfigError);
}

TEST(ParamCountTest, BertLarge) {
  const ParamReport p = ParamCount(Preset("bert_large_phase1"));
  EXPECT_EQ(p.per_transformer_layer, 12596224);
  EXPECT_EQ(p.per_transformer_layer, LayerTensorsOracle(1024, 4096));
  EXPECT_EQ(p.embeddings, EmbeddingTensorsOracle(30522, 512, 1024));
  EXPECT_EQ(p.total, 24 * p.per_transformer_layer + p.embeddings);
  EXPECT_EQ(p.total, 334090240);
  EXPECT_GE(p.total, 300000000);
  EXPECT_LE(p.total, 345000000);
}

TEST(ParamCountTest, UnitDimensions) {
  ModelConfig cfg;
  cfg.hidden_dim = 1;
  cfg.intermediate_dim = 1;
  cfg.num_heads = 1;
  cfg.vocab_size = 1;
  cfg.max_positions = 1;
  cfg.seq_len = 1;
  EXPECT_EQ(ParamCount(cfg).per_transformer_layer, 16);
}

TEST(ParamCountTest, QuadraticInHiddenDim) {
  ModelConfig cfg;
  std::int64_t previous = 0;
  for (std::int64_t d : {256, 512, 1024, 2048}) {
    cfg.hidden_dim = d;
    cfg.intermediate_dim = 4 * d;
    const std::int64_t per_layer = ParamCount(cfg).per_transformer_layer;
    EXPECT_EQ(per_layer, LayerTensorsOracle(d, 4 * d));
    if (previous > 0) {
      EXPECT_NEAR(static_cast<double>(per_layer) / previous, 4.0, 0.04) << d;
    }
    previous = per_layer;
  }
}

TEST(ParamCountTest, LinearInLayers) {
  for (std::int64_t n : {1, 3, 12, 24}) {
    ModelConfig cfg;
    cfg.num_layers = n;
    const ParamReport one = ParamCount(cfg);
    cfg.num_layers = 2 * n;
    const ParamReport two = ParamCount(cfg);
    EXPECT_EQ(two.total - two.embeddings, 2 * (one.total - one.embeddings));
  }
}

}  // namespace
}  // namespace bertperf
