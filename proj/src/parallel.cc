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

#include "bertperf/parallel.h"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <utility>

#include "json.hpp"

namespace bertperf {

double RingAllReduceBytes(double payload_bytes, std::int64_t devices) {
  if (devices < 1) {
    throw std::invalid_argument("ring AllReduce needs at least one device");
  }
  const double d = static_cast<double>(devices);
  return 2.0 * (d - 1.0) * payload_bytes / d;
}

double CollectiveTime(const CommEvent& event, const HardwareSpec& hw) {
  return RingAllReduceBytes(static_cast<double>(event.payload_bytes),
                            event.devices) /
         hw.link_bandwidth;
}

double ScheduledGraph::total_time() const {
  double total = 0.0;
  for (const ScheduleEntry& e : entries) total += e.exposed;
  return total;
}

double ScheduledGraph::exposed_comm_time() const {
  double total = 0.0;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (ops[i].is_collective()) total += entries[i].exposed;
  }
  return total;
}

ScheduledGraph ScheduleSerial(OpGraph graph, const HardwareSpec& hw) {
  ScheduledGraph s;
  s.estimates.reserve(graph.size());
  s.entries.reserve(graph.size());
  for (const OpDescriptor& op : graph) {
    if (op.is_collective()) {
      const double t = CollectiveTime(std::get<CommEvent>(op.kind), hw);
      s.estimates.emplace_back();
      s.entries.push_back({t, t});
    } else {
      CostEstimate c = op.is_gemm() ? GemmCost(op.gemm(), op.precision, hw)
                                    : ElementwiseCost(op, hw);
      s.entries.push_back({c.time, c.time});
      s.estimates.push_back(c);
    }
  }
  s.ops = std::move(graph);
  return s;
}

namespace {

bool IsBackward(Phase p) {
  return p == Phase::kBackwardActGrad || p == Phase::kBackwardWeightGrad;
}

OpDescriptor MakeAllReduce(std::string label, std::optional<std::int64_t> layer,
                           std::int64_t payload, std::int64_t devices,
                           bool overlappable, DataType precision,
                           std::int64_t micro_batch) {
  OpDescriptor op;
  op.layer = layer;
  op.phase = Phase::kCommunication;
  op.category = Category::kAllReduce;
  op.label = std::move(label);
  op.kind = CommEvent{payload, devices, overlappable, layer};
  op.precision = precision;
  op.micro_batch = micro_batch;
  return op;
}

std::int64_t CeilDiv(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

}  // namespace

void AddModelParallelComm(OpGraph& graph, const ModelConfig& cfg,
                          ShardSpec shard) {
  if (shard.degree <= 1) return;
  const DataType act = ActivationType(cfg.precision);
  const std::int64_t payload = cfg.tokens() * cfg.hidden_dim * BytesPerElement(act);

  // Each collective follows the op that produces the partial sums.
  auto anchor = [](const OpDescriptor& op) -> const char* {
    if (op.phase == Phase::kForward && op.label == "out_proj") {
      return "mp_attn_allreduce_fwd";
    }
    if (op.phase == Phase::kForward && op.label == "fc2") {
      return "mp_ffn_allreduce_fwd";
    }
    if (op.phase == Phase::kBackwardActGrad && op.label == "fc1") {
      return "mp_ffn_allreduce_bwd";
    }
    if (op.phase == Phase::kBackwardActGrad &&
        (op.label == "query" || op.label == "qkv")) {
      return "mp_attn_allreduce_bwd";
    }
    return nullptr;
  };

  OpGraph out;
  out.reserve(graph.size() + 4 * static_cast<std::size_t>(cfg.num_layers));
  for (OpDescriptor& op : graph) {
    const char* label = op.layer ? anchor(op) : nullptr;
    const auto layer = op.layer;
    const auto micro_batch = op.micro_batch;
    out.push_back(std::move(op));
    if (label != nullptr) {
      out.push_back(MakeAllReduce(label, layer, payload, shard.degree, false,
                                  act, micro_batch));
    }
  }
  graph = std::move(out);
  Renumber(graph);
}

ScheduledGraph ApplyDataParallel(const OpGraph& graph, const ModelConfig& cfg,
                                 const ParallelismConfig& par,
                                 const HardwareSpec& hw, ShardSpec shard) {
  ScheduledGraph serial = ScheduleSerial(graph, hw);
  if (par.data_degree <= 1) return serial;

  const ParamReport params = ParamCount(cfg);
  const std::int64_t degree = std::max<std::int64_t>(shard.degree, 1);
  const DataType grad_type = ActivationType(cfg.precision);
  const std::int64_t bpe = BytesPerElement(grad_type);
  const std::int64_t layer_bytes =
      CeilDiv(params.per_transformer_layer, degree) * bpe;
  const std::int64_t embedding_bytes = CeilDiv(params.embeddings, degree) * bpe;

  std::int64_t last_mb = 0;
  for (const OpDescriptor& op : serial.ops) {
    last_mb = std::max(last_mb, op.micro_batch);
  }

  // Backward extent of each layer in the final micro-batch.
  std::map<std::int64_t, std::pair<std::size_t, std::size_t>> extent;
  std::size_t backward_end = 0;
  bool any_backward = false;
  for (std::size_t i = 0; i < serial.ops.size(); ++i) {
    const OpDescriptor& op = serial.ops[i];
    if (op.micro_batch != last_mb || !IsBackward(op.phase) || !op.layer) {
      continue;
    }
    auto [it, inserted] = extent.try_emplace(*op.layer, i, i);
    if (!inserted) it->second.second = i;
    backward_end = std::max(backward_end, i);
    any_backward = true;
  }
  if (!any_backward) return serial;

  std::map<std::int64_t, double> backward_time;
  for (const auto& [layer, range] : extent) {
    double t = 0.0;
    for (std::size_t i = range.first; i <= range.second; ++i) {
      t += serial.entries[i].duration;
    }
    backward_time[layer] = t;
  }
  // Insertion points: after the last backward op of each layer.
  std::map<std::size_t, std::int64_t> insert_after;
  for (const auto& [layer, range] : extent) insert_after[range.second] = layer;

  ScheduledGraph out;
  auto push = [&out](OpDescriptor op, CostEstimate est, ScheduleEntry entry) {
    out.ops.push_back(std::move(op));
    out.estimates.push_back(est);
    out.entries.push_back(entry);
  };
  for (std::size_t i = 0; i < serial.ops.size(); ++i) {
    push(serial.ops[i], serial.estimates[i], serial.entries[i]);
    if (par.overlap_comm) {
      auto at = insert_after.find(i);
      if (at == insert_after.end()) continue;
      const std::int64_t layer = at->second;
      const std::int64_t payload =
          layer_bytes + (layer == 0 ? embedding_bytes : 0);
      OpDescriptor ev = MakeAllReduce("dp_grad_allreduce", layer, payload,
                                      par.data_degree, true, grad_type, last_mb);
      const double t = CollectiveTime(std::get<CommEvent>(ev.kind), hw);
      // Hidden behind the backward pass of the next layer to compute.
      auto next = backward_time.find(layer - 1);
      const double hidden = next == backward_time.end() ? 0.0 : next->second;
      push(std::move(ev), {}, {t, std::max(0.0, t - hidden)});
    } else if (i == backward_end) {
      const std::int64_t payload =
          layer_bytes * cfg.num_layers + embedding_bytes;
      OpDescriptor ev = MakeAllReduce("dp_grad_allreduce", std::nullopt,
                                      payload, par.data_degree, false,
                                      grad_type, last_mb);
      const double t = CollectiveTime(std::get<CommEvent>(ev.kind), hw);
      push(std::move(ev), {}, {t, t});
    }
  }
  Renumber(out.ops);
  return out;
}

ModelParallelResult ApplyModelParallel(const ModelConfig& cfg,
                                       const ParallelismConfig& par,
                                       const HardwareSpec& hw) {
  Validate(par, cfg);
  const ShardSpec shard{par.model_degree};
  ModelParallelResult r;
  r.view.model = cfg;
  r.view.degree = shard.degree;
  r.view.heads_per_device = cfg.num_heads / shard.degree;
  r.view.intermediate_per_device = cfg.intermediate_dim / shard.degree;
  r.view.projection_per_device = cfg.hidden_dim / shard.degree;
  r.view.lamb_elements_per_device = CeilDiv(ParamCount(cfg).total, shard.degree);

  BuildOptions options;
  options.shard = shard;
  r.graph = BuildIteration(cfg, options);
  AddModelParallelComm(r.graph, cfg, shard);
  r.schedule = ScheduleSerial(r.graph, hw);
  return r;
}

ScheduledGraph ApplyHybrid(const ModelConfig& cfg, const ParallelismConfig& par,
                           const HardwareSpec& hw) {
  ModelParallelResult mp = ApplyModelParallel(cfg, par, hw);
  return ApplyDataParallel(mp.graph, cfg, par, hw, ShardSpec{par.model_degree});
}

ModelConfig SplitGlobalBatch(const ModelConfig& cfg, std::int64_t global_batch,
                             std::int64_t data_degree) {
  if (data_degree < 1 || global_batch < 1 || global_batch % data_degree != 0) {
    throw ConfigError("batch_size,parallelism.data_degree",
                      "global batch " + std::to_string(global_batch) +
                          " does not split over " +
                          std::to_string(data_degree) + " replicas");
  }
  ModelConfig out = cfg;
  out.batch_size = global_batch / data_degree;
  return out;
}

std::string DumpSchedule(const ScheduledGraph& schedule) {
  std::string out;
  for (std::size_t i = 0; i < schedule.ops.size(); ++i) {
    const OpDescriptor& op = schedule.ops[i];
    const ScheduleEntry& e = schedule.entries[i];
    nlohmann::ordered_json j;
    j["id"] = op.id;
    j["label"] = op.label;
    j["category"] = ToString(op.category);
    if (op.layer) {
      j["layer"] = *op.layer;
    } else {
      j["layer"] = nullptr;
    }
    j["duration_seconds"] = e.duration;
    j["exposed_seconds"] = e.exposed;
    j["overlapped"] = e.exposed < e.duration;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace bertperf
