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
#include <cstdint>
#include <stdexcept>

#include <gtest/gtest.h>

#include "bertperf/config.h"
#include "bertperf/opgraph.h"

namespace bertperf {
namespace {

// Roofline time recomputed from first principles for comparison.
double OracleTime(double flops, double bytes, double launches, double peak,
                  const HardwareSpec& hw) {
  const double compute = flops / (peak * hw.compute_efficiency);
  const double memory = bytes / (hw.mem_bandwidth * hw.bandwidth_efficiency);
  return launches * hw.launch_overhead + (compute > memory ? compute : memory);
}

OpDescriptor Elementwise(std::int64_t elements, std::int64_t flops, std::int64_t reads,
                         std::int64_t writes, std::int64_t passes = 0,
                         DataType t = DataType::kFP32) {
  OpDescriptor op;
  op.category = Category::kGeLU;
  op.kind = ElementwiseOp{elements, flops, reads, writes, passes, 1};
  op.precision = t;
  return op;
}

TEST(GemmCostTest, Fc1Forward) {
  const HardwareSpec hw;
  const ModelConfig c = Preset("bert_large_phase1");
  const CostEstimate e =
      GemmCost(GemmDims(GemmSite::kFC1, GemmPass::kForward, c), DataType::kFP32, hw);
  EXPECT_EQ(e.flops, 34359738368);
  EXPECT_EQ(e.flops, 2LL * 4096 * 4096 * 1024);
  EXPECT_EQ(e.bytes(), 100663296);
  EXPECT_EQ(e.bytes(), (4096LL * 1024 + 1024 * 4096 + 4096 * 4096) * 4);
  EXPECT_NEAR(e.arithmetic_intensity(), 1024.0 / 3.0, 1e-9);
  EXPECT_EQ(e.bound, Bound::kCompute);
  EXPECT_DOUBLE_EQ(e.time, OracleTime(e.flops, e.bytes(), 1, hw.peak_flops_fp32, hw));
}

TEST(GemmCostTest, AttentionScoreForward) {
  const HardwareSpec hw;
  const ModelConfig c = Preset("bert_large_phase1");
  const CostEstimate e = GemmCost(
      GemmDims(GemmSite::kAttnScore, GemmPass::kForward, c), DataType::kFP32, hw);
  EXPECT_EQ(e.flops, 1073741824);
  EXPECT_EQ(e.bytes(), 67108864);
  EXPECT_DOUBLE_EQ(e.arithmetic_intensity(), 16.0);
}

TEST(GemmCostTest, UnitGemmIsLatencyBound) {
  const HardwareSpec hw;
  const CostEstimate e = GemmCost(GemmShape{}, DataType::kFP16, hw);
  EXPECT_EQ(e.flops, 2);
  EXPECT_EQ(e.bytes(), 3 * 2);
  EXPECT_EQ(e.bound, Bound::kLatency);
  EXPECT_NEAR(e.time, hw.launch_overhead, 1e-10);
  EXPECT_GE(e.time, hw.launch_overhead);
}

TEST(GemmCostTest, ZeroDimensionThrows) {
  GemmShape s;
  s.k = 0;
  EXPECT_THROW(GemmCost(s, DataType::kFP32, HardwareSpec{}), std::invalid_argument);
}

TEST(GemmCostTest, IntensityIndependentOfBatchField) {
  const HardwareSpec hw;
  for (std::int64_t b : {1, 7, 512}) {
    GemmShape s{128, 128, 64, 1};
    const double base = GemmCost(s, DataType::kFP32, hw).arithmetic_intensity();
    s.batch = b;
    EXPECT_DOUBLE_EQ(GemmCost(s, DataType::kFP32, hw).arithmetic_intensity(), base);
  }
}

TEST(GemmCostTest, IntensityOrdering) {
  const HardwareSpec hw;
  for (const char* name : {"bert_large_phase1", "bert_large_phase2", "bert_base_phase1"}) {
    const ModelConfig c = Preset(name);
    for (GemmPass pass : {GemmPass::kForward, GemmPass::kBackwardActGrad,
                          GemmPass::kBackwardWeightGrad}) {
      auto ai = [&](GemmSite site) {
        return GemmCost(GemmDims(site, pass, c), DataType::kFP32, hw)
            .arithmetic_intensity();
      };
      EXPECT_GT(ai(GemmSite::kFC1), ai(GemmSite::kLinearTrans)) << name;
      EXPECT_GT(ai(GemmSite::kFC2), ai(GemmSite::kLinearTrans)) << name;
      EXPECT_GT(ai(GemmSite::kLinearTrans), ai(GemmSite::kAttnScore)) << name;
      EXPECT_GT(ai(GemmSite::kLinearTrans), ai(GemmSite::kAttnOutput)) << name;
    }
  }
}

TEST(GemmCostTest, MixedNeverSlower) {
  const HardwareSpec hw;
  for (const OpDescriptor& op : BuildIteration(Preset("bert_large_phase1"))) {
    if (!op.is_gemm()) continue;
    EXPECT_LE(GemmCost(op.gemm(), DataType::kFP16, hw).time,
              GemmCost(op.gemm(), DataType::kFP32, hw).time);
  }
}

TEST(GemmCostTest, Monotonicity) {
  const GemmShape shapes[] = {{4096, 4096, 1024, 1}, {128, 128, 64, 512}, {1, 1, 1, 1}};
  for (const GemmShape& s : shapes) {
    const HardwareSpec base;
    const double t = GemmCost(s, DataType::kFP32, base).time;
    HardwareSpec faster = base;
    faster.peak_flops_fp32 *= 2;
    faster.peak_flops_fp16 *= 2;
    EXPECT_LE(GemmCost(s, DataType::kFP32, faster).time, t);
    HardwareSpec wider = base;
    wider.mem_bandwidth *= 2;
    EXPECT_LE(GemmCost(s, DataType::kFP32, wider).time, t);
    HardwareSpec slow_launch = base;
    slow_launch.launch_overhead *= 2;
    EXPECT_GE(GemmCost(s, DataType::kFP32, slow_launch).time, t);
  }
}

TEST(ElementwiseCostTest, GeluForward) {
  const HardwareSpec hw;
  const OpDescriptor gelu = Elementwise(16777216, 10, 1, 1);
  const CostEstimate e = ElementwiseCost(gelu, hw);
  EXPECT_EQ(e.bytes(), 134217728);
  EXPECT_DOUBLE_EQ(e.arithmetic_intensity(), 1.25);
  EXPECT_EQ(e.bound, Bound::kBandwidth);
  EXPECT_DOUBLE_EQ(e.time, OracleTime(e.flops, e.bytes(), 1, hw.peak_flops_fp32, hw));
}

TEST(ElementwiseCostTest, LambStage1ReadsSixteenBytesPerParameter) {
  const std::int64_t p = ParamCount(Preset("bert_large_phase1")).per_transformer_layer;
  for (const OpDescriptor& op : BuildUpdate(Preset("bert_large_phase1"))) {
    if (op.category != Category::kLambStage1 || op.layer != 0) continue;
    EXPECT_EQ(ElementwiseCost(op, HardwareSpec{}).bytes_read, 16 * p);
  }
}

TEST(ElementwiseCostTest, ZeroElements) {
  const HardwareSpec hw;
  const CostEstimate e = ElementwiseCost(Elementwise(0, 5, 2, 1), hw);
  EXPECT_EQ(e.flops, 0);
  EXPECT_EQ(e.bytes(), 0);
  EXPECT_DOUBLE_EQ(e.time, hw.launch_overhead);
  EXPECT_EQ(e.bound, Bound::kLatency);
}

TEST(ElementwiseCostTest, ReductionPassesAddReadTraffic) {
  const HardwareSpec hw;
  const CostEstimate plain = ElementwiseCost(Elementwise(1000, 8, 2, 1, 0), hw);
  const CostEstimate reduced = ElementwiseCost(Elementwise(1000, 8, 2, 1, 1), hw);
  EXPECT_EQ(reduced.bytes_read - plain.bytes_read, 1000 * 4);
  EXPECT_EQ(reduced.bytes_written, plain.bytes_written);

  OpDescriptor norm;
  norm.category = Category::kGlobalGradNorm;
  norm.kind = ReductionOp{1000, 2};
  const CostEstimate r = ElementwiseCost(norm, hw);
  EXPECT_EQ(r.bytes_read, 2 * 1000 * 4);
  EXPECT_EQ(r.bytes_written, 4);
}

TEST(ElementwiseCostTest, MixedHalvesBytesKeepsFloor) {
  const HardwareSpec hw;
  const CostEstimate fp32 = ElementwiseCost(Elementwise(1 << 20, 8, 2, 1, 1), hw);
  const CostEstimate fp16 =
      ElementwiseCost(Elementwise(1 << 20, 8, 2, 1, 1, DataType::kFP16), hw);
  EXPECT_EQ(2 * fp16.bytes(), fp32.bytes());
  EXPECT_GE(fp16.time, hw.launch_overhead);
  EXPECT_LT(fp16.time, fp32.time);
}

TEST(ElementwiseCostTest, RejectsOtherKinds) {
  OpDescriptor op;
  op.kind = GemmShape{};
  EXPECT_THROW(ElementwiseCost(op, HardwareSpec{}), std::invalid_argument);
}

TEST(EstimateGraphTest, BoundsOnBertLarge) {
  const HardwareSpec hw;
  const OpGraph g = BuildIteration(Preset("bert_large_phase1"));
  const std::vector<CostEstimate> est = EstimateGraph(g, hw);
  ASSERT_EQ(est.size(), g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i].category == Category::kFCGEMM) {
      EXPECT_EQ(est[i].bound, Bound::kCompute);
    }
    if (g[i].category == Category::kAttnScaleMaskSoftmaxDropout ||
        g[i].category == Category::kGeLU ||
        g[i].category == Category::kDropResidualLayerNorm) {
      EXPECT_NE(est[i].bound, Bound::kCompute);
      // Far below the machine balance of the device.
      EXPECT_LT(est[i].arithmetic_intensity(),
                hw.peak_flops_fp32 / hw.mem_bandwidth / 4);
    }
  }
  EXPECT_NEAR(hw.peak_flops_fp32 * hw.compute_efficiency /
                  (hw.mem_bandwidth * hw.bandwidth_efficiency),
              20.45, 0.01);
}

TEST(EstimateGraphTest, EmptyAndCollective) {
  EXPECT_TRUE(EstimateGraph({}, HardwareSpec{}).empty());
  OpDescriptor comm;
  comm.kind = CommEvent{1024, 2, false, {}};
  EXPECT_THROW(EstimateGraph({comm}, HardwareSpec{}), std::logic_error);
}

TEST(EstimateGraphTest, Deterministic) {
  const OpGraph g = BuildIteration(Preset("bert_base_phase1"));
  const auto a = EstimateGraph(g, HardwareSpec{});
  const auto b = EstimateGraph(g, HardwareSpec{});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].time, b[i].time);
    EXPECT_EQ(a[i].bytes(), b[i].bytes());
  }
}

}  // namespace
}  // namespace bertperf
