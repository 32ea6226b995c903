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

#ifndef BERTPERF_WHATIF_H_
#define BERTPERF_WHATIF_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "bertperf/config.h"
#include "bertperf/opgraph.h"

namespace bertperf {

// Fuses graph[group[0]], ..., graph[group.back()] into one kernel. The group
// must be contiguous, elementwise, and share a fusion site. The fused
// kernel keeps only the first kernel's reads plus any operand later kernels
// take from outside the chain, writes only the last kernel's outputs, keeps
// every reduction pass, and launches once. Throws std::invalid_argument for
// anything that is not a declared chain.
OpGraph FuseElementwise(const OpGraph& graph, std::span<const std::size_t> group);

// Fuses every declared chain of two or more kernels.
OpGraph FuseAllElementwiseChains(const OpGraph& graph);

// Replaces the Q/K/V projections of every layer and pass with one GEMM over
// the concatenated weights ("qkv"). The shared input is then read once in the
// forward and weight-gradient passes, and the activation-gradient pass writes
// a single summed result. Throws std::invalid_argument if already fused.
OpGraph FuseLinearGemms(const OpGraph& graph);

// Gradient accumulation: k forward/backward passes at batch B/k, one
// accumulate op per micro-batch and a single LAMB update. k = 1 returns the
// plain iteration.
OpGraph ApplyMicrobatching(const ModelConfig& cfg, std::int64_t micro_batches,
                           const BuildOptions& options = {});

struct GraphTotals {
  std::int64_t flops = 0;
  std::int64_t bytes = 0;
  std::int64_t kernels = 0;  // non-collective ops
  double time = 0.0;         // serial execution, seconds
  std::map<Category, double> time_by_category;
  std::map<Category, std::int64_t> bytes_by_category;
};

GraphTotals Totals(const OpGraph& graph, const HardwareSpec& hw);

// Every delta is variant - baseline.
struct DeltaReport {
  GraphTotals baseline;
  GraphTotals variant;
  std::int64_t flops_delta = 0;
  std::int64_t bytes_delta = 0;
  std::int64_t kernel_delta = 0;
  double time_delta = 0.0;
  std::map<Category, double> time_delta_by_category;
  std::map<Category, std::int64_t> bytes_delta_by_category;
};

DeltaReport Compare(const OpGraph& baseline, const OpGraph& variant,
                    const HardwareSpec& hw);

// Total multiply-add FLOPs of the GEMM ops only.
std::int64_t GemmFlops(const OpGraph& graph);

}  // namespace bertperf

#endif  // BERTPERF_WHATIF_H_
