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

#include "bertperf/roofline.h"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace bertperf {

std::string_view ToString(Bound b) {
  switch (b) {
    case Bound::kCompute: return "Compute";
    case Bound::kBandwidth: return "Bandwidth";
    case Bound::kLatency: return "Latency";
  }
  return "?";
}

namespace {

CostEstimate Roofline(std::int64_t flops, std::int64_t bytes_read,
                      std::int64_t bytes_written, std::int64_t launches,
                      DataType precision, const HardwareSpec& hw) {
  CostEstimate c;
  c.flops = flops;
  c.bytes_read = bytes_read;
  c.bytes_written = bytes_written;
  const double compute = static_cast<double>(flops) /
                         (hw.peak_flops(precision) * hw.compute_efficiency);
  const double memory = static_cast<double>(bytes_read + bytes_written) /
                        (hw.mem_bandwidth * hw.bandwidth_efficiency);
  const double launch = static_cast<double>(launches) * hw.launch_overhead;
  c.time = launch + std::max(compute, memory);
  if (launch > compute && launch > memory) {
    c.bound = Bound::kLatency;
  } else if (compute > memory) {
    c.bound = Bound::kCompute;
  } else if (memory > 0.0) {
    c.bound = Bound::kBandwidth;
  } else {
    c.bound = Bound::kLatency;  // zero-cost placeholder
  }
  return c;
}

}  // namespace

CostEstimate GemmCost(const GemmShape& s, DataType precision,
                      const HardwareSpec& hw) {
  if (s.m < 1 || s.n < 1 || s.k < 1 || s.batch < 1) {
    throw std::invalid_argument("GEMM with a zero dimension");
  }
  const std::int64_t bpe = BytesPerElement(precision);
  const std::int64_t flops = 2 * s.m * s.n * s.k * s.batch;
  const std::int64_t read = (s.m * s.k + s.k * s.n) * s.batch * bpe;
  const std::int64_t written = s.m * s.n * s.batch * bpe;
  return Roofline(flops, read, written, 1, precision, hw);
}

CostEstimate ElementwiseCost(const OpDescriptor& op, const HardwareSpec& hw) {
  const std::int64_t bpe = BytesPerElement(op.precision);
  if (const auto* e = std::get_if<ElementwiseOp>(&op.kind)) {
    const std::int64_t read =
        e->elements * (e->operand_reads + e->reduction_passes) * bpe;
    const std::int64_t written = e->elements * e->operand_writes * bpe;
    return Roofline(e->elements * e->flops_per_element, read, written,
                    e->launches, op.precision, hw);
  }
  if (const auto* r = std::get_if<ReductionOp>(&op.kind)) {
    // Square-and-accumulate per element per pass; one scalar result.
    return Roofline(2 * r->elements * r->passes, r->passes * r->elements * bpe,
                    bpe, 1, op.precision, hw);
  }
  throw std::invalid_argument("op " + std::to_string(op.id) + " (" + op.label +
                              ") is not elementwise or a reduction");
}

std::vector<CostEstimate> EstimateGraph(const OpGraph& graph,
                                        const HardwareSpec& hw) {
  std::vector<CostEstimate> out;
  out.reserve(graph.size());
  for (const OpDescriptor& op : graph) {
    if (op.is_collective()) {
      throw std::logic_error("collective op " + std::to_string(op.id) +
                             " must be costed by the parallel schedule");
    }
    out.push_back(op.is_gemm() ? GemmCost(op.gemm(), op.precision, hw)
                               : ElementwiseCost(op, hw));
  }
  return out;
}

}  // namespace bertperf
