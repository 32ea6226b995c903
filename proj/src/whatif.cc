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

#include "bertperf/whatif.h"

#include <algorithm>
#include <stdexcept>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "bertperf/parallel.h"
#include "bertperf/roofline.h"

namespace bertperf {

namespace {

std::string FusedLabel(const OpGraph& graph, std::span<const std::size_t> group) {
  const std::string_view first = graph[group.front()].label;
  auto starts = [first](std::string_view prefix) {
    return first.substr(0, prefix.size()) == prefix;
  };
  if (starts("attn_out_")) return "attn_out_drln";
  if (starts("ffn_out_")) return "ffn_out_drln";
  if (starts("attn_")) return "attn_scale_mask_softmax_dropout";
  std::string label;
  for (std::size_t i : group) {
    if (!label.empty()) label += '+';
    label += graph[i].label;
  }
  return label;
}

OpDescriptor FuseChain(const OpGraph& graph, std::span<const std::size_t> group) {
  const OpDescriptor& head = graph[group.front()];
  const auto* first = std::get_if<ElementwiseOp>(&head.kind);
  if (first == nullptr || head.fusion_site < 0) {
    throw std::invalid_argument("op " + head.label +
                                " is not part of a declared elementwise chain");
  }
  ElementwiseOp fused = *first;
  fused.launches = 1;
  for (std::size_t pos = 1; pos < group.size(); ++pos) {
    const OpDescriptor& op = graph[group[pos]];
    const auto* e = std::get_if<ElementwiseOp>(&op.kind);
    if (group[pos] != group[pos - 1] + 1) {
      throw std::invalid_argument("fusion group is not contiguous");
    }
    if (e == nullptr || op.fusion_site != head.fusion_site) {
      throw std::invalid_argument("op " + op.label + " does not continue the " +
                                  head.label + " chain");
    }
    if (op.precision != head.precision || e->elements != first->elements) {
      throw std::invalid_argument("chain members differ in shape or precision");
    }
    fused.flops_per_element += e->flops_per_element;
    // One read comes from the predecessor and now stays on chip.
    fused.operand_reads += e->operand_reads - 1;
    fused.reduction_passes += e->reduction_passes;
    fused.operand_writes = e->operand_writes;
  }
  OpDescriptor out = head;
  out.kind = fused;
  out.label = FusedLabel(graph, group);
  return out;
}

}  // namespace

OpGraph FuseElementwise(const OpGraph& graph, std::span<const std::size_t> group) {
  if (group.empty()) throw std::invalid_argument("empty fusion group");
  for (std::size_t i : group) {
    if (i >= graph.size()) throw std::invalid_argument("fusion index out of range");
  }
  if (group.size() == 1) return graph;
  OpDescriptor fused = FuseChain(graph, group);
  OpGraph out;
  out.reserve(graph.size() - group.size() + 1);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (i == group.front()) {
      out.push_back(fused);
    } else if (i < group.front() || i > group.back()) {
      out.push_back(graph[i]);
    }
  }
  Renumber(out);
  return out;
}

OpGraph FuseAllElementwiseChains(const OpGraph& graph) {
  OpGraph out;
  out.reserve(graph.size());
  std::size_t i = 0;
  while (i < graph.size()) {
    const OpDescriptor& op = graph[i];
    std::size_t end = i + 1;
    if (op.fusion_site >= 0 && std::holds_alternative<ElementwiseOp>(op.kind)) {
      while (end < graph.size() && graph[end].fusion_site == op.fusion_site &&
             std::holds_alternative<ElementwiseOp>(graph[end].kind)) {
        ++end;
      }
    }
    if (end - i >= 2) {
      std::vector<std::size_t> group(end - i);
      for (std::size_t j = 0; j < group.size(); ++j) group[j] = i + j;
      out.push_back(FuseChain(graph, group));
    } else {
      out.push_back(op);
    }
    i = end;
  }
  Renumber(out);
  return out;
}

OpGraph FuseLinearGemms(const OpGraph& graph) {
  using Key = std::tuple<std::int64_t, std::int64_t, Phase>;
  std::map<Key, std::vector<std::size_t>> sites;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const OpDescriptor& op = graph[i];
    if (op.label == "qkv") {
      throw std::invalid_argument("graph already has fused QKV projections");
    }
    if (!op.is_gemm() || !op.layer) continue;
    if (op.label == "query" || op.label == "key" || op.label == "value") {
      sites[{op.micro_batch, *op.layer, op.phase}].push_back(i);
    }
  }

  std::vector<bool> drop(graph.size(), false);
  std::map<std::size_t, OpDescriptor> replace;
  for (const auto& [key, members] : sites) {
    if (members.size() != 3) {
      throw std::invalid_argument("layer " + std::to_string(std::get<1>(key)) +
                                  " lacks a full Q/K/V projection set");
    }
    const GemmShape& s = graph[members[0]].gemm();
    for (std::size_t i : members) {
      if (!(graph[i].gemm() == s)) {
        throw std::invalid_argument("Q/K/V projections differ in shape");
      }
    }
    GemmShape fused = s;
    switch (std::get<2>(key)) {
      case Phase::kForward: fused.m = 3 * s.m; break;          // concat outputs
      case Phase::kBackwardActGrad: fused.k = 3 * s.k; break;  // sum over outputs
      case Phase::kBackwardWeightGrad: fused.n = 3 * s.n; break;
      default: throw std::invalid_argument("Q/K/V projection in a non-GEMM phase");
    }
    OpDescriptor op = graph[members[0]];
    op.label = "qkv";
    op.kind = fused;
    replace.emplace(members[0], std::move(op));
    drop[members[1]] = true;
    drop[members[2]] = true;
  }

  OpGraph out;
  out.reserve(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (drop[i]) continue;
    auto it = replace.find(i);
    out.push_back(it != replace.end() ? it->second : graph[i]);
  }
  Renumber(out);
  return out;
}

OpGraph ApplyMicrobatching(const ModelConfig& cfg, std::int64_t micro_batches,
                           const BuildOptions& options) {
  if (micro_batches < 1 || cfg.batch_size % micro_batches != 0) {
    throw ConfigError("model.batch_size,parallelism.micro_batches",
                      "batch_size " + std::to_string(cfg.batch_size) +
                          " is not divisible by " +
                          std::to_string(micro_batches) + " micro-batches");
  }
  if (micro_batches == 1) return BuildIteration(cfg, options);

  ModelConfig micro = cfg;
  micro.batch_size = cfg.batch_size / micro_batches;
  const std::int64_t degree = std::max<std::int64_t>(options.shard.degree, 1);
  const std::int64_t params = (ParamCount(cfg).total + degree - 1) / degree;

  OpGraph graph;
  for (std::int64_t mb = 0; mb < micro_batches; ++mb) {
    OpGraph pass = BuildForwardBackward(micro, options, mb);
    graph.insert(graph.end(), std::make_move_iterator(pass.begin()),
                 std::make_move_iterator(pass.end()));
    // accumulator += g: read g, read accumulator, write accumulator.
    OpDescriptor acc;
    acc.phase = Phase::kUpdate;
    acc.category = Category::kGradAccumulate;
    acc.label = "grad_accumulate";
    acc.kind = ElementwiseOp{params, 1, 2, 1, 0, 1};
    acc.precision = DataType::kFP32;
    acc.micro_batch = mb;
    graph.push_back(std::move(acc));
  }
  OpGraph update = BuildUpdate(cfg, options.shard);
  for (OpDescriptor& op : update) op.micro_batch = micro_batches - 1;
  graph.insert(graph.end(), std::make_move_iterator(update.begin()),
               std::make_move_iterator(update.end()));
  Renumber(graph);
  return graph;
}

GraphTotals Totals(const OpGraph& graph, const HardwareSpec& hw) {
  GraphTotals t;
  for (const OpDescriptor& op : graph) {
    double time = 0.0;
    std::int64_t bytes = 0;
    if (op.is_collective()) {
      time = CollectiveTime(std::get<CommEvent>(op.kind), hw);
    } else {
      const CostEstimate c = op.is_gemm()
                                 ? GemmCost(op.gemm(), op.precision, hw)
                                 : ElementwiseCost(op, hw);
      time = c.time;
      bytes = c.bytes();
      t.flops += c.flops;
      ++t.kernels;
    }
    t.bytes += bytes;
    t.time += time;
    t.time_by_category[op.category] += time;
    t.bytes_by_category[op.category] += bytes;
  }
  return t;
}

DeltaReport Compare(const OpGraph& baseline, const OpGraph& variant,
                    const HardwareSpec& hw) {
  DeltaReport r;
  r.baseline = Totals(baseline, hw);
  r.variant = Totals(variant, hw);
  r.flops_delta = r.variant.flops - r.baseline.flops;
  r.bytes_delta = r.variant.bytes - r.baseline.bytes;
  r.kernel_delta = r.variant.kernels - r.baseline.kernels;
  r.time_delta = r.variant.time - r.baseline.time;
  for (Category c : kAllCategories) {
    auto time_of = [c](const GraphTotals& t) {
      auto it = t.time_by_category.find(c);
      return it == t.time_by_category.end() ? 0.0 : it->second;
    };
    auto bytes_of = [c](const GraphTotals& t) -> std::int64_t {
      auto it = t.bytes_by_category.find(c);
      return it == t.bytes_by_category.end() ? 0 : it->second;
    };
    r.time_delta_by_category[c] = time_of(r.variant) - time_of(r.baseline);
    r.bytes_delta_by_category[c] = bytes_of(r.variant) - bytes_of(r.baseline);
  }
  return r;
}

std::int64_t GemmFlops(const OpGraph& graph) {
  std::int64_t flops = 0;
  for (const OpDescriptor& op : graph) {
    if (!op.is_gemm()) continue;
    const GemmShape& s = op.gemm();
    flops += 2 * s.m * s.n * s.k * s.batch;
  }
  return flops;
}

}  // namespace bertperf
