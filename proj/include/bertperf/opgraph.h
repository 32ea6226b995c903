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

#ifndef BERTPERF_OPGRAPH_H_
#define BERTPERF_OPGRAPH_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bertperf/config.h"

namespace bertperf {

enum class Phase {
  kForward,
  kBackwardActGrad,
  kBackwardWeightGrad,
  kUpdate,
  kCommunication,
};

enum class Category {
  kLinearTransformGEMM,
  kAttentionBGEMM,
  kFCGEMM,
  kAttnScaleMaskSoftmaxDropout,
  kGeLU,
  kDropResidualLayerNorm,
  kEmbedding,
  kOutputLayer,
  kLambStage1,
  kLambStage2,
  kGlobalGradNorm,
  kAllReduce,
  kGradAccumulate,
};

inline constexpr Category kAllCategories[] = {
    Category::kLinearTransformGEMM,
    Category::kAttentionBGEMM,
    Category::kFCGEMM,
    Category::kAttnScaleMaskSoftmaxDropout,
    Category::kGeLU,
    Category::kDropResidualLayerNorm,
    Category::kEmbedding,
    Category::kOutputLayer,
    Category::kLambStage1,
    Category::kLambStage2,
    Category::kGlobalGradNorm,
    Category::kAllReduce,
    Category::kGradAccumulate,
};

std::string_view ToString(Phase p);
std::string_view ToString(Category c);

// Rows of the GEMM size table: every GEMM of a transformer layer is one of
// these, evaluated in one of three passes.
enum class GemmSite { kLinearTrans, kAttnScore, kAttnOutput, kFC1, kFC2 };
enum class GemmPass { kForward, kBackwardActGrad, kBackwardWeightGrad };

struct GemmShape {
  std::int64_t m = 1;
  std::int64_t n = 1;
  std::int64_t k = 1;
  std::int64_t batch = 1;
  bool trans_a = false;
  bool trans_b = false;

  friend bool operator==(const GemmShape&, const GemmShape&) = default;
};

// A run of elementwise kernels over `elements` values. Each kernel reads
// `operand_reads` and writes `operand_writes` full tensors; every reduction
// pass re-reads one tensor. `launches` is 0 only for zero-cost placeholders.
struct ElementwiseOp {
  std::int64_t elements = 0;
  std::int64_t flops_per_element = 1;
  std::int64_t operand_reads = 1;
  std::int64_t operand_writes = 1;
  std::int64_t reduction_passes = 0;
  std::int64_t launches = 1;

  friend bool operator==(const ElementwiseOp&, const ElementwiseOp&) = default;
};

// Full reduction to a scalar over `elements` values, `passes` sweeps.
struct ReductionOp {
  std::int64_t elements = 0;
  std::int64_t passes = 1;

  friend bool operator==(const ReductionOp&, const ReductionOp&) = default;
};

// One AllReduce. `payload_bytes` is the tensor size on each participant;
// the volume actually moved follows the ring algorithm over `devices`.
struct CommEvent {
  std::int64_t payload_bytes = 0;
  std::int64_t devices = 1;
  bool overlappable = false;
  std::optional<std::int64_t> anchor_layer;

  friend bool operator==(const CommEvent&, const CommEvent&) = default;
};

using OpKind = std::variant<GemmShape, ElementwiseOp, ReductionOp, CommEvent>;

struct OpDescriptor {
  std::int64_t id = 0;
  std::optional<std::int64_t> layer;
  Phase phase = Phase::kForward;
  Category category = Category::kEmbedding;
  // Role within the layer: "query", "attn_score", "fc1", "lamb_stage1", ...
  // Unique per (layer, phase, micro_batch).
  std::string label;
  OpKind kind;
  DataType precision = DataType::kFP32;
  std::int64_t micro_batch = 0;
  // Elementwise kernels sharing a non-negative site id form a declared
  // producer/consumer chain that may be fused.
  std::int64_t fusion_site = -1;

  bool is_gemm() const { return std::holds_alternative<GemmShape>(kind); }
  bool is_collective() const { return std::holds_alternative<CommEvent>(kind); }
  const GemmShape& gemm() const { return std::get<GemmShape>(kind); }

  friend bool operator==(const OpDescriptor&, const OpDescriptor&) = default;
};

using OpGraph = std::vector<OpDescriptor>;

// Intra-layer (Megatron-style) partitioning of a layer over `degree`
// devices: Q/K/V and FC-1 split their output features, the attention output
// projection and FC-2 split their input features, heads are distributed,
// dropout/residual/LayerNorm stay replicated.
struct ShardSpec {
  std::int64_t degree = 1;
};

struct BuildOptions {
  ShardSpec shard;
  // Emit the attention-score and dropout/residual/LayerNorm groups as their
  // individual kernels instead of one minimal-traffic op per group.
  bool split_elementwise_chains = false;
};

GemmShape GemmDims(GemmSite site, GemmPass pass, const ModelConfig& cfg,
                   ShardSpec shard = {});

// Operations of one training iteration on one device: forward and backward
// through every encoder layer, then the global gradient norm and a LAMB
// stage pair per layer (plus one for the embeddings).
OpGraph BuildIteration(const ModelConfig& cfg, const BuildOptions& options = {});

// Forward+backward operations of every layer for one (micro-)batch. Shared by
// BuildIteration and the micro-batching transform.
OpGraph BuildForwardBackward(const ModelConfig& cfg, const BuildOptions& options,
                             std::int64_t micro_batch = 0);

// LAMB update sequence; element counts are divided by the shard degree.
OpGraph BuildUpdate(const ModelConfig& cfg, ShardSpec shard = {});

// Reassigns ids 0..size-1 in order.
void Renumber(OpGraph& graph);

struct ChainMismatch {
  std::string producer;
  std::string consumer;
  std::string dim;
  std::int64_t expected = 0;
  std::int64_t actual = 0;
};

// Checks producer/consumer dimension compatibility along the attention and
// feed-forward dataflow of every layer's forward pass. Empty means ok; the
// first entry is the first incompatibility found.
std::vector<ChainMismatch> ChainCheck(const OpGraph& graph,
                                      const ModelConfig& cfg);

// Per-layer element counts of the non-GEMM groups (DropResidualLayerNorm is
// per site; there are two sites per layer).
std::map<Category, std::int64_t> NonGemmElementCounts(const ModelConfig& cfg,
                                                      ShardSpec shard = {});

// Serializes one op per line as JSON with a fixed field order.
std::string DumpGraph(const OpGraph& graph);

}  // namespace bertperf

#endif  // BERTPERF_OPGRAPH_H_
