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

#ifndef BERTPERF_ROOFLINE_H_
#define BERTPERF_ROOFLINE_H_

#include <cstdint>
#include <string_view>
#include <vector>

#include "bertperf/config.h"
#include "bertperf/opgraph.h"

namespace bertperf {

enum class Bound { kCompute, kBandwidth, kLatency };

std::string_view ToString(Bound b);

struct CostEstimate {
  std::int64_t flops = 0;
  std::int64_t bytes_read = 0;
  std::int64_t bytes_written = 0;
  double time = 0.0;  // seconds
  Bound bound = Bound::kLatency;

  std::int64_t bytes() const { return bytes_read + bytes_written; }
  // FLOPs per byte moved; 0 for ops that move nothing.
  double arithmetic_intensity() const {
    return bytes() > 0 ? static_cast<double>(flops) / static_cast<double>(bytes())
                       : 0.0;
  }
};

// Roofline time with a per-kernel launch floor:
//   launches * launch_overhead
//     + max(flops / (peak * compute_eff), bytes / (bw * bandwidth_eff)).
// Every operand is assumed to touch DRAM exactly once per kernel.
CostEstimate GemmCost(const GemmShape& shape, DataType precision,
                      const HardwareSpec& hw);

// Accepts Elementwise and Reduction ops; throws std::invalid_argument
// otherwise.
CostEstimate ElementwiseCost(const OpDescriptor& op, const HardwareSpec& hw);

// Dispatches per op. Collectives are costed by the parallel module; meeting
// one here throws std::logic_error.
std::vector<CostEstimate> EstimateGraph(const OpGraph& graph,
                                        const HardwareSpec& hw);

}  // namespace bertperf

#endif  // BERTPERF_ROOFLINE_H_
