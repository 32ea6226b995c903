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

#ifndef BERTPERF_REPORT_H_
#define BERTPERF_REPORT_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bertperf/config.h"
#include "bertperf/opgraph.h"
#include "bertperf/parallel.h"
#include "bertperf/whatif.h"

namespace bertperf {

// Top-level runtime buckets. A layer's forward and backward work is kept
// together under Transformer; optimizer work is reported separately.
enum class CategoryGroup {
  kTransformer,
  kEmbedding,
  kOutputLayer,
  kLambUpdate,
  kCommunication,
  kGradAccumulate,
};

inline constexpr CategoryGroup kAllGroups[] = {
    CategoryGroup::kTransformer,   CategoryGroup::kEmbedding,
    CategoryGroup::kOutputLayer,   CategoryGroup::kLambUpdate,
    CategoryGroup::kCommunication, CategoryGroup::kGradAccumulate,
};

std::string_view ToString(CategoryGroup g);
CategoryGroup GroupOf(Category c);

struct Share {
  double time = 0.0;
  double fraction = 0.0;
};

struct IterationBreakdown {
  double total_time = 0.0;
  // Both maps are empty for an empty schedule; otherwise every group and
  // every category is present.
  std::map<CategoryGroup, Share> groups;
  std::map<Category, Share> categories;

  double fraction(CategoryGroup g) const;
  double fraction(Category c) const;
  double time(CategoryGroup g) const;
  double time(Category c) const;
};

// Sums exposed time per group. Throws std::invalid_argument if the schedule
// entries are not indexed like its ops.
IterationBreakdown Breakdown(const ScheduledGraph& schedule);

// Whole pipeline for one configuration: micro-batching, model-parallel
// split, then data-parallel gradient exchange.
ScheduledGraph Simulate(const RunConfig& run, const BuildOptions& options = {});

enum class SweepAxis {
  kBatchSize,
  kSeqLen,
  kHiddenDim,  // intermediate_dim follows as 4 * hidden_dim
  kNumLayers,
  kModelDegree,
  kDataDegree,
  kPrecision,
};

std::string_view ToString(SweepAxis a);
SweepAxis ParseSweepAxis(std::string_view name);

struct SweepRow {
  std::string value;  // the swept value as given
  RunConfig run;
  std::optional<IterationBreakdown> breakdown;
  std::string error;  // set when the value was rejected
};

// One row per value, in input order. Invalid values produce an error row and
// do not stop the sweep.
std::vector<SweepRow> Sweep(SweepAxis axis, std::span<const std::string> values,
                            const RunConfig& base);

enum class Format { kJSON, kCSV };
Format ParseFormat(std::string_view name);

// CSV: the seven sweep-axis config columns, one fraction column per group,
// then total_time_seconds. JSON: {"rows": [...]}. Reals carry 9 significant
// digits; output ends with a newline.
std::string Emit(std::span<const SweepRow> rows, Format format);

// Reads back the "rows" of an Emit(..., kJSON) document.
std::vector<IterationBreakdown> ReadBreakdownsJson(std::string_view text);

std::string EmitDelta(const DeltaReport& report, Format format);

// Rounds to 9 significant digits.
double RoundSignificant(double value);

}  // namespace bertperf

#endif  // BERTPERF_REPORT_H_
