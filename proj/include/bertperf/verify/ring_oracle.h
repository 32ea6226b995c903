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

#ifndef BERTPERF_VERIFY_RING_ORACLE_H_
#define BERTPERF_VERIFY_RING_ORACLE_H_

#include <cstdint>
#include <vector>

namespace bertperf::verify {

struct RingSimulation {
  // Elements each device sent over the 2 (D-1) steps.
  std::vector<std::int64_t> sent;
  std::vector<std::int64_t> received;
  // Every device ended with the elementwise sum of all inputs.
  bool reduced_correctly = false;
};

// Step-by-step ring AllReduce (reduce-scatter then all-gather) of
// `devices * chunk` elements per device.
RingSimulation SimulateRingAllReduce(std::int64_t devices, std::int64_t chunk);

}  // namespace bertperf::verify

#endif  // BERTPERF_VERIFY_RING_ORACLE_H_
