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

#include <string>

#include "bertperf/opgraph.h"
#include "json.hpp"

namespace bertperf {

namespace {

using nlohmann::ordered_json;

struct KindFields {
  ordered_json& j;

  void operator()(const GemmShape& g) const {
    j["kind"] = "GEMM";
    j["m"] = g.m;
    j["n"] = g.n;
    j["k"] = g.k;
    j["batch"] = g.batch;
    j["trans_a"] = g.trans_a;
    j["trans_b"] = g.trans_b;
  }
  void operator()(const ElementwiseOp& e) const {
    j["kind"] = "Elementwise";
    j["elements"] = e.elements;
    j["flops_per_element"] = e.flops_per_element;
    j["operand_reads"] = e.operand_reads;
    j["operand_writes"] = e.operand_writes;
    j["reduction_passes"] = e.reduction_passes;
    j["launches"] = e.launches;
  }
  void operator()(const ReductionOp& r) const {
    j["kind"] = "Reduction";
    j["elements"] = r.elements;
    j["passes"] = r.passes;
  }
  void operator()(const CommEvent& c) const {
    j["kind"] = "Collective";
    j["payload_bytes"] = c.payload_bytes;
    j["devices"] = c.devices;
    j["overlappable"] = c.overlappable;
    if (c.anchor_layer) {
      j["anchor_layer"] = *c.anchor_layer;
    } else {
      j["anchor_layer"] = nullptr;
    }
  }
};

}  // namespace

std::string DumpGraph(const OpGraph& graph) {
  std::string out;
  for (const OpDescriptor& op : graph) {
    ordered_json j;
    j["id"] = op.id;
    if (op.layer) {
      j["layer"] = *op.layer;
    } else {
      j["layer"] = nullptr;
    }
    j["phase"] = ToString(op.phase);
    j["category"] = ToString(op.category);
    j["label"] = op.label;
    std::visit(KindFields{j}, op.kind);
    j["precision"] = ToString(op.precision);
    j["micro_batch"] = op.micro_batch;
    j["fusion_site"] = op.fusion_site;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace bertperf
