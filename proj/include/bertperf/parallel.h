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

#ifndef BERTPERF_PARALLEL_H_
#define BERTPERF_PARALLEL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "bertperf/config.h"
#include "bertperf/opgraph.h"
#include "bertperf/roofline.h"

namespace bertperf {

// Bytes each device sends (and receives) during a ring AllReduce of
// `payload_bytes` over `devices` participants: 2 (D-1)/D * payload.
double RingAllReduceBytes(double payload_bytes, std::int64_t devices);

// Single link per device, no latency term.
double CollectiveTime(const CommEvent& event, const HardwareSpec& hw);

struct ScheduleEntry {
  double duration = 0.0;  // modeled run time of the op on its resource
  double exposed = 0.0;   // contribution to iteration wall time
};

// A costed op sequence for one device. `entries` and `estimates` are indexed
// like `ops`; collectives carry a default CostEstimate.
struct ScheduledGraph {
  OpGraph ops;
  std::vector<CostEstimate> estimates;
  std::vector<ScheduleEntry> entries;

  double total_time() const;
  // Exposed time of collective ops only.
  double exposed_comm_time() const;
};

// Every op runs back to back; nothing is hidden.
ScheduledGraph ScheduleSerial(OpGraph graph, const HardwareSpec& hw);

// Adds the four per-layer activation/error AllReduces of intra-layer model
// parallelism (two forward, two backward), each over the full B*n*d_model
// activation. No-op for degree 1.
void AddModelParallelComm(OpGraph& graph, const ModelConfig& cfg,
                          ShardSpec shard);

// Gradient AllReduce over `par.data_degree` replicas, one bucket per layer
// (the embedding gradients ride with layer 0, the last one produced). With
// overlap, layer L's bucket is hidden behind layer L-1's backward pass and
// only the non-hidden remainder counts; layer 0's bucket is always exposed.
// Without overlap, one monolithic AllReduce follows the backward pass.
// `shard` divides the gradient payload for hybrid runs.
ScheduledGraph ApplyDataParallel(const OpGraph& graph, const ModelConfig& cfg,
                                 const ParallelismConfig& par,
                                 const HardwareSpec& hw, ShardSpec shard = {});

// Per-device view of a model split over M devices.
struct ModelShardView {
  ModelConfig model;
  std::int64_t degree = 1;
  std::int64_t heads_per_device = 0;
  std::int64_t intermediate_per_device = 0;
  std::int64_t projection_per_device = 0;
  std::int64_t lamb_elements_per_device = 0;
};

struct ModelParallelResult {
  ModelShardView view;
  OpGraph graph;
  ScheduledGraph schedule;
};

ModelParallelResult ApplyModelParallel(const ModelConfig& cfg,
                                       const ParallelismConfig& par,
                                       const HardwareSpec& hw);

// Model-parallel split first, then data-parallel gradient exchange of the
// per-device (1/M) gradients over D replicas.
ScheduledGraph ApplyHybrid(const ModelConfig& cfg, const ParallelismConfig& par,
                           const HardwareSpec& hw);

// Per-replica mini-batch for a global batch spread over `data_degree`
// replicas. Throws ConfigError when it does not divide.
ModelConfig SplitGlobalBatch(const ModelConfig& cfg, std::int64_t global_batch,
                             std::int64_t data_degree);

// JSON lines: id, label, category, layer, duration_seconds,
// exposed_seconds, overlapped.
std::string DumpSchedule(const ScheduledGraph& schedule);

}  // namespace bertperf

#endif  // BERTPERF_PARALLEL_H_
