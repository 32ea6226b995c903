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

#include "bertperf/opgraph.h"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace bertperf {

std::string_view ToString(Phase p) {
  switch (p) {
    case Phase::kForward: return "Forward";
    case Phase::kBackwardActGrad: return "BackwardActGrad";
    case Phase::kBackwardWeightGrad: return "BackwardWeightGrad";
    case Phase::kUpdate: return "Update";
    case Phase::kCommunication: return "Communication";
  }
  return "?";
}

std::string_view ToString(Category c) {
  switch (c) {
    case Category::kLinearTransformGEMM: return "LinearTransformGEMM";
    case Category::kAttentionBGEMM: return "AttentionBGEMM";
    case Category::kFCGEMM: return "FCGEMM";
    case Category::kAttnScaleMaskSoftmaxDropout:
      return "AttnScaleMaskSoftmaxDropout";
    case Category::kGeLU: return "GeLU";
    case Category::kDropResidualLayerNorm: return "DropResidualLayerNorm";
    case Category::kEmbedding: return "Embedding";
    case Category::kOutputLayer: return "OutputLayer";
    case Category::kLambStage1: return "LambStage1";
    case Category::kLambStage2: return "LambStage2";
    case Category::kGlobalGradNorm: return "GlobalGradNorm";
    case Category::kAllReduce: return "AllReduce";
    case Category::kGradAccumulate: return "GradAccumulate";
  }
  return "?";
}

namespace {

std::int64_t CheckedShardDiv(std::int64_t value, std::int64_t degree,
                             const char* what) {
  if (degree < 1 || value % degree != 0) {
    throw std::invalid_argument(std::string(what) +
                                " is not divisible by the model degree");
  }
  return value / degree;
}

// Dense layer with `in` input features and `out` output features applied to
// `tokens` token vectors.
GemmShape LinearDims(std::int64_t in, std::int64_t out, std::int64_t tokens,
                     GemmPass pass) {
  switch (pass) {
    case GemmPass::kForward:
      return {out, tokens, in, 1, false, false};
    case GemmPass::kBackwardActGrad:
      return {in, tokens, out, 1, true, false};
    case GemmPass::kBackwardWeightGrad:
      return {in, out, tokens, 1, false, true};
  }
  return {};
}

GemmShape OutputProjectionDims(GemmPass pass, const ModelConfig& cfg,
                               ShardSpec shard) {
  const std::int64_t d = cfg.hidden_dim;
  return LinearDims(CheckedShardDiv(d, shard.degree, "hidden_dim"), d,
                    cfg.tokens(), pass);
}

}  // namespace

GemmShape GemmDims(GemmSite site, GemmPass pass, const ModelConfig& cfg,
                   ShardSpec shard) {
  const std::int64_t d = cfg.hidden_dim;
  const std::int64_t n = cfg.seq_len;
  const std::int64_t dh = cfg.head_dim();
  const std::int64_t tokens = cfg.tokens();

  switch (site) {
    case GemmSite::kLinearTrans:
      return LinearDims(d, CheckedShardDiv(d, shard.degree, "hidden_dim"),
                        tokens, pass);
    case GemmSite::kFC1:
      return LinearDims(
          d, CheckedShardDiv(cfg.intermediate_dim, shard.degree,
                             "intermediate_dim"),
          tokens, pass);
    case GemmSite::kFC2:
      return LinearDims(
          CheckedShardDiv(cfg.intermediate_dim, shard.degree,
                          "intermediate_dim"),
          d, tokens, pass);
    case GemmSite::kAttnScore:
    case GemmSite::kAttnOutput:
      break;
  }

  const std::int64_t batch =
      cfg.batch_size * CheckedShardDiv(cfg.num_heads, shard.degree, "num_heads");
  if (site == GemmSite::kAttnScore) {
    switch (pass) {
      case GemmPass::kForward: return {n, n, dh, batch, false, false};
      case GemmPass::kBackwardActGrad: return {n, dh, n, batch, true, false};
      case GemmPass::kBackwardWeightGrad: return {dh, n, n, batch, false, true};
    }
  }
  switch (pass) {
    case GemmPass::kForward: return {dh, n, n, batch, false, false};
    case GemmPass::kBackwardActGrad: return {dh, n, n, batch, true, false};
    case GemmPass::kBackwardWeightGrad: return {n, n, dh, batch, false, true};
  }
  return {};
}

std::map<Category, std::int64_t> NonGemmElementCounts(const ModelConfig& cfg,
                                                      ShardSpec shard) {
  const std::int64_t heads =
      CheckedShardDiv(cfg.num_heads, shard.degree, "num_heads");
  const std::int64_t ff =
      CheckedShardDiv(cfg.intermediate_dim, shard.degree, "intermediate_dim");
  return {
      {Category::kAttnScaleMaskSoftmaxDropout,
       cfg.batch_size * heads * cfg.seq_len * cfg.seq_len},
      {Category::kGeLU, cfg.tokens() * ff},
      {Category::kDropResidualLayerNorm, cfg.tokens() * cfg.hidden_dim},
  };
}

namespace {

// One kernel of an elementwise chain, forward direction.
struct KernelSpec {
  const char* label;
  std::int64_t flops_per_element;
  std::int64_t reads;
  std::int64_t writes;
  std::int64_t reduction_passes;
};

struct ChainSpec {
  const char* group_label;
  Category category;
  std::vector<KernelSpec> kernels;
};

// Chains in forward order. The per-kernel figures add up so that fusing a
// chain reproduces the grouped op: reads beyond the first kernel's count
// only operands that come from outside the chain.
ChainSpec AttentionChain() {
  return {"attn_scale_mask_softmax_dropout",
          Category::kAttnScaleMaskSoftmaxDropout,
          {{"attn_scale", 1, 1, 1, 0},
           {"attn_mask", 1, 2, 1, 0},
           {"attn_softmax", 5, 1, 1, 1},
           {"attn_dropout", 1, 1, 1, 0}}};
}

ChainSpec DropResidualLayerNormChain(const char* prefix) {
  const bool attn = std::string_view(prefix) == "attn_out";
  return {attn ? "attn_out_drln" : "ffn_out_drln",
          Category::kDropResidualLayerNorm,
          {{attn ? "attn_out_dropout" : "ffn_out_dropout", 1, 1, 1, 0},
           {attn ? "attn_out_residual" : "ffn_out_residual", 1, 2, 1, 0},
           {attn ? "attn_out_layernorm" : "ffn_out_layernorm", 6, 1, 1, 1}}};
}

ChainSpec GeluChain() {
  return {"gelu", Category::kGeLU, {{"gelu", 10, 1, 1, 0}}};
}

// Collapses a forward chain into its minimal-traffic single op.
KernelSpec Grouped(const ChainSpec& chain) {
  KernelSpec g{chain.group_label, 0, 0, 0, 0};
  for (std::size_t i = 0; i < chain.kernels.size(); ++i) {
    const KernelSpec& k = chain.kernels[i];
    g.flops_per_element += k.flops_per_element;
    g.reads += i == 0 ? k.reads : k.reads - 1;
    g.reduction_passes += k.reduction_passes;
  }
  g.writes = chain.kernels.back().writes;
  return g;
}

class LayerEmitter {
 public:
  LayerEmitter(const ModelConfig& cfg, const BuildOptions& options,
               std::int64_t micro_batch, OpGraph& out)
      : cfg_(cfg),
        options_(options),
        micro_batch_(micro_batch),
        act_(ActivationType(cfg.precision)),
        out_(out) {}

  void Gemm(std::int64_t layer, Phase phase, Category category,
            const char* label, GemmShape shape) {
    OpDescriptor op;
    op.layer = layer;
    op.phase = phase;
    op.category = category;
    op.label = label;
    op.kind = shape;
    op.precision = act_;
    op.micro_batch = micro_batch_;
    out_.push_back(std::move(op));
  }

  // Emits the chain for `layer` in the given direction.
  void Chain(std::int64_t layer, bool backward, const ChainSpec& chain,
             std::int64_t elements, std::int64_t chain_index) {
    const std::int64_t site =
        ((micro_batch_ * cfg_.num_layers + layer) * 2 + (backward ? 1 : 0)) *
            8 +
        chain_index;
    std::vector<KernelSpec> kernels;
    if (options_.split_elementwise_chains) {
      kernels = chain.kernels;
    } else {
      kernels = {Grouped(chain)};
    }
    if (backward) std::reverse(kernels.begin(), kernels.end());
    for (const KernelSpec& k : kernels) {
      OpDescriptor op;
      op.layer = layer;
      op.phase = backward ? Phase::kBackwardActGrad : Phase::kForward;
      op.category = chain.category;
      op.label = k.label;
      op.kind = ElementwiseOp{elements, k.flops_per_element,
                              k.reads + (backward ? 1 : 0), k.writes,
                              k.reduction_passes, 1};
      op.precision = act_;
      op.micro_batch = micro_batch_;
      op.fusion_site = site;
      out_.push_back(std::move(op));
    }
  }

  void Placeholder(Category category, const char* label) {
    OpDescriptor op;
    op.phase = Phase::kForward;
    op.category = category;
    op.label = label;
    op.kind = ElementwiseOp{0, 0, 0, 0, 0, 0};
    op.precision = act_;
    op.micro_batch = micro_batch_;
    out_.push_back(std::move(op));
  }

 private:
  const ModelConfig& cfg_;
  const BuildOptions& options_;
  std::int64_t micro_batch_;
  DataType act_;
  OpGraph& out_;
};

struct GemmSiteSpec {
  const char* label;
  Category category;
  GemmSite site;
  bool output_projection;
};

constexpr GemmSiteSpec kQuery{"query", Category::kLinearTransformGEMM,
                              GemmSite::kLinearTrans, false};
constexpr GemmSiteSpec kKey{"key", Category::kLinearTransformGEMM,
                            GemmSite::kLinearTrans, false};
constexpr GemmSiteSpec kValue{"value", Category::kLinearTransformGEMM,
                              GemmSite::kLinearTrans, false};
constexpr GemmSiteSpec kScore{"attn_score", Category::kAttentionBGEMM,
                              GemmSite::kAttnScore, false};
constexpr GemmSiteSpec kContext{"attn_context", Category::kAttentionBGEMM,
                                GemmSite::kAttnOutput, false};
constexpr GemmSiteSpec kOutProj{"out_proj", Category::kLinearTransformGEMM,
                                GemmSite::kLinearTrans, true};
constexpr GemmSiteSpec kFC1{"fc1", Category::kFCGEMM, GemmSite::kFC1, false};
constexpr GemmSiteSpec kFC2{"fc2", Category::kFCGEMM, GemmSite::kFC2, false};

// Forward order of one encoder layer. Chains are referenced by index.
enum class StepKind { kGemm, kChain };
struct Step {
  StepKind kind;
  GemmSiteSpec gemm;
  int chain;  // 0 attention, 1 attn_out drln, 2 gelu, 3 ffn_out drln
};

const std::vector<Step>& LayerSteps() {
  static const std::vector<Step> steps = {
      {StepKind::kGemm, kQuery, -1},   {StepKind::kGemm, kKey, -1},
      {StepKind::kGemm, kValue, -1},   {StepKind::kGemm, kScore, -1},
      {StepKind::kChain, {}, 0},       {StepKind::kGemm, kContext, -1},
      {StepKind::kGemm, kOutProj, -1}, {StepKind::kChain, {}, 1},
      {StepKind::kGemm, kFC1, -1},     {StepKind::kChain, {}, 2},
      {StepKind::kGemm, kFC2, -1},     {StepKind::kChain, {}, 3},
  };
  return steps;
}

GemmShape SiteDims(const GemmSiteSpec& spec, GemmPass pass,
                   const ModelConfig& cfg, ShardSpec shard) {
  return spec.output_projection ? OutputProjectionDims(pass, cfg, shard)
                                : GemmDims(spec.site, pass, cfg, shard);
}

}  // namespace

OpGraph BuildForwardBackward(const ModelConfig& cfg, const BuildOptions& options,
                             std::int64_t micro_batch) {
  Validate(cfg);
  const ShardSpec shard = options.shard;
  const auto counts = NonGemmElementCounts(cfg, shard);
  const ChainSpec chains[] = {AttentionChain(),
                              DropResidualLayerNormChain("attn_out"),
                              GeluChain(),
                              DropResidualLayerNormChain("ffn_out")};
  auto chain_elements = [&](int chain) {
    return counts.at(chains[chain].category);
  };

  OpGraph graph;
  LayerEmitter emit(cfg, options, micro_batch, graph);
  emit.Placeholder(Category::kEmbedding, "embedding");
  for (std::int64_t layer = 0; layer < cfg.num_layers; ++layer) {
    for (const Step& s : LayerSteps()) {
      if (s.kind == StepKind::kGemm) {
        emit.Gemm(layer, Phase::kForward, s.gemm.category, s.gemm.label,
                  SiteDims(s.gemm, GemmPass::kForward, cfg, shard));
      } else {
        emit.Chain(layer, false, chains[s.chain], chain_elements(s.chain),
                   s.chain);
      }
    }
  }
  emit.Placeholder(Category::kOutputLayer, "output_layer");

  const auto& steps = LayerSteps();
  for (std::int64_t layer = cfg.num_layers - 1; layer >= 0; --layer) {
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
      if (it->kind == StepKind::kGemm) {
        emit.Gemm(layer, Phase::kBackwardActGrad, it->gemm.category,
                  it->gemm.label,
                  SiteDims(it->gemm, GemmPass::kBackwardActGrad, cfg, shard));
        emit.Gemm(layer, Phase::kBackwardWeightGrad, it->gemm.category,
                  it->gemm.label,
                  SiteDims(it->gemm, GemmPass::kBackwardWeightGrad, cfg, shard));
      } else {
        emit.Chain(layer, true, chains[it->chain], chain_elements(it->chain),
                   it->chain);
      }
    }
  }
  return graph;
}

OpGraph BuildUpdate(const ModelConfig& cfg, ShardSpec shard) {
  const ParamReport params = ParamCount(cfg);
  const std::int64_t degree = std::max<std::int64_t>(shard.degree, 1);
  auto per_device = [degree](std::int64_t count) {
    return (count + degree - 1) / degree;
  };

  OpGraph graph;
  auto push = [&graph](std::optional<std::int64_t> layer, Category category,
                       const char* label, OpKind kind) {
    OpDescriptor op;
    op.layer = layer;
    op.phase = Phase::kUpdate;
    op.category = category;
    op.label = label;
    op.kind = std::move(kind);
    op.precision = DataType::kFP32;
    graph.push_back(std::move(op));
  };
  // The global norm must complete before any parameter is touched.
  push(std::nullopt, Category::kGlobalGradNorm, "grad_norm",
       ReductionOp{per_device(params.total), 1});
  auto lamb_pair = [&](std::optional<std::int64_t> layer, std::int64_t count) {
    // Stage 1 reads w, g, m, v and writes m, v, u; the layer norms of w and
    // u are accumulated in the same pass. Stage 2 reads w, u and writes w.
    push(layer, Category::kLambStage1, "lamb_stage1",
         ElementwiseOp{count, 18, 4, 3, 0, 1});
    push(layer, Category::kLambStage2, "lamb_stage2",
         ElementwiseOp{count, 2, 2, 1, 0, 1});
  };
  for (std::int64_t layer = 0; layer < cfg.num_layers; ++layer) {
    lamb_pair(layer, per_device(params.per_transformer_layer));
  }
  lamb_pair(std::nullopt, per_device(params.embeddings));
  return graph;
}

OpGraph BuildIteration(const ModelConfig& cfg, const BuildOptions& options) {
  OpGraph graph = BuildForwardBackward(cfg, options, 0);
  OpGraph update = BuildUpdate(cfg, options.shard);
  graph.insert(graph.end(), std::make_move_iterator(update.begin()),
               std::make_move_iterator(update.end()));
  Renumber(graph);
  return graph;
}

void Renumber(OpGraph& graph) {
  for (std::size_t i = 0; i < graph.size(); ++i) {
    graph[i].id = static_cast<std::int64_t>(i);
  }
}

namespace {

struct LayerForward {
  std::map<std::string, const OpDescriptor*, std::less<>> ops;

  const OpDescriptor* find(std::string_view label) const {
    auto it = ops.find(label);
    return it == ops.end() ? nullptr : it->second;
  }
};

std::int64_t Elements(const OpDescriptor& op) {
  if (const auto* e = std::get_if<ElementwiseOp>(&op.kind)) return e->elements;
  if (const auto* r = std::get_if<ReductionOp>(&op.kind)) return r->elements;
  return -1;
}

}  // namespace

std::vector<ChainMismatch> ChainCheck(const OpGraph& graph,
                                      const ModelConfig& cfg) {
  // Group forward ops by (micro_batch, layer).
  std::map<std::pair<std::int64_t, std::int64_t>, LayerForward> layers;
  for (const OpDescriptor& op : graph) {
    if (op.phase != Phase::kForward || !op.layer) continue;
    layers[{op.micro_batch, *op.layer}].ops.emplace(op.label, &op);
  }

  std::vector<ChainMismatch> out;
  for (const auto& [key, layer] : layers) {
    const std::string prefix = "layer" + std::to_string(key.second) + "/";
    auto name = [&prefix](std::string_view label) {
      return prefix + std::string(label);
    };
    auto expect = [&](std::string_view producer, std::string_view consumer,
                      const char* dim, std::int64_t expected,
                      std::int64_t actual) {
      if (expected != actual) {
        out.push_back({name(producer), name(consumer), dim, expected, actual});
      }
    };
    auto gemm = [&](std::string_view label) -> const GemmShape* {
      const OpDescriptor* op = layer.find(label);
      if (op == nullptr || !op->is_gemm()) {
        out.push_back({name(label), name(label), "missing", 1, 0});
        return nullptr;
      }
      return &op->gemm();
    };
    // First kernel of a chain, either grouped or split.
    auto chain_head = [&](std::string_view grouped,
                          std::string_view split) -> std::int64_t {
      const OpDescriptor* op = layer.find(grouped);
      if (op == nullptr) op = layer.find(split);
      if (op == nullptr) {
        out.push_back({name(grouped), name(grouped), "missing", 1, 0});
        return -1;
      }
      return Elements(*op);
    };

    // Projections may be three separate GEMMs or one fused QKV GEMM.
    GemmShape q, k, v;
    if (const OpDescriptor* qkv = layer.find("qkv"); qkv && qkv->is_gemm()) {
      q = k = v = qkv->gemm();
      q.m = k.m = v.m = qkv->gemm().m / 3;
    } else {
      const GemmShape* pq = gemm("query");
      const GemmShape* pk = gemm("key");
      const GemmShape* pv = gemm("value");
      if (!pq || !pk || !pv) return out;
      q = *pq;
      k = *pk;
      v = *pv;
    }
    const GemmShape* score = gemm("attn_score");
    const GemmShape* context = gemm("attn_context");
    const GemmShape* proj = gemm("out_proj");
    const GemmShape* fc1 = gemm("fc1");
    const GemmShape* fc2 = gemm("fc2");
    if (!score || !context || !proj || !fc1 || !fc2) return out;
    const std::int64_t softmax =
        chain_head("attn_scale_mask_softmax_dropout", "attn_scale");
    const std::int64_t drln1 = chain_head("attn_out_drln", "attn_out_dropout");
    const std::int64_t gelu = chain_head("gelu", "gelu");
    const std::int64_t drln2 = chain_head("ffn_out_drln", "ffn_out_dropout");

    expect("input", "query", "k", cfg.hidden_dim, q.k);
    expect("input", "key", "k", cfg.hidden_dim, k.k);
    expect("input", "value", "k", cfg.hidden_dim, v.k);
    // (d_model x n*B) reshaped to (B*h) x (d_model/h) x n.
    expect("query", "attn_score", "elements", q.m * q.n,
           score->batch * score->k * score->m);
    expect("key", "attn_score", "elements", k.m * k.n,
           score->batch * score->k * score->n);
    expect("attn_score", "attn_scale_mask_softmax_dropout", "elements",
           score->batch * score->m * score->n, softmax);
    expect("attn_score", "attn_context", "k", score->n, context->k);
    expect("attn_score", "attn_context", "n", score->m, context->n);
    expect("attn_score", "attn_context", "batch", score->batch, context->batch);
    expect("value", "attn_context", "elements", v.m * v.n,
           context->batch * context->m * context->k);
    // Head outputs concatenate back to d_model x n*B.
    expect("attn_context", "out_proj", "elements",
           context->batch * context->m * context->n, proj->k * proj->n);
    expect("query", "out_proj", "n", q.n, proj->n);
    expect("out_proj", "attn_out_drln", "elements", proj->m * proj->n, drln1);
    expect("attn_out_drln", "fc1", "k", proj->m, fc1->k);
    expect("attn_out_drln", "fc1", "n", proj->n, fc1->n);
    expect("fc1", "gelu", "elements", fc1->m * fc1->n, gelu);
    expect("gelu", "fc2", "k", fc1->m, fc2->k);
    expect("gelu", "fc2", "n", fc1->n, fc2->n);
    expect("fc2", "ffn_out_drln", "elements", fc2->m * fc2->n, drln2);
  }
  return out;
}

}  // namespace bertperf
