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

#include "bertperf/verify/ring_oracle.h"

#include <stdexcept>

namespace bertperf::verify {

RingSimulation SimulateRingAllReduce(std::int64_t devices, std::int64_t chunk) {
  if (devices < 1 || chunk < 1) {
    throw std::invalid_argument("ring simulation needs devices, chunk >= 1");
  }
  const std::int64_t d = devices;
  // data[dev][c][i]: device dev, chunk c, element i. Device dev starts with
  // value (dev + 1) * (c * chunk + i + 1) so sums are easy to predict.
  std::vector<std::vector<std::vector<double>>> data(
      d, std::vector<std::vector<double>>(d, std::vector<double>(chunk)));
  for (std::int64_t dev = 0; dev < d; ++dev) {
    for (std::int64_t c = 0; c < d; ++c) {
      for (std::int64_t i = 0; i < chunk; ++i) {
        data[dev][c][i] = static_cast<double>((dev + 1) * (c * chunk + i + 1));
      }
    }
  }

  RingSimulation sim;
  sim.sent.assign(d, 0);
  sim.received.assign(d, 0);

  // Reduce-scatter: at step s, device dev sends chunk (dev - s) mod d to
  // its right neighbour, which accumulates it.
  for (std::int64_t step = 0; step < d - 1; ++step) {
    std::vector<std::vector<double>> outgoing(d);
    for (std::int64_t dev = 0; dev < d; ++dev) {
      outgoing[dev] = data[dev][((dev - step) % d + d) % d];
    }
    for (std::int64_t dev = 0; dev < d; ++dev) {
      const std::int64_t dst = (dev + 1) % d;
      const std::int64_t c = ((dev - step) % d + d) % d;
      for (std::int64_t i = 0; i < chunk; ++i) data[dst][c][i] += outgoing[dev][i];
      sim.sent[dev] += chunk;
      sim.received[dst] += chunk;
    }
  }
  // Device dev now owns the full sum of chunk (dev + 1) mod d. All-gather:
  // at step s, device dev forwards chunk (dev + 1 - s) mod d.
  for (std::int64_t step = 0; step < d - 1; ++step) {
    std::vector<std::vector<double>> outgoing(d);
    for (std::int64_t dev = 0; dev < d; ++dev) {
      outgoing[dev] = data[dev][((dev + 1 - step) % d + d) % d];
    }
    for (std::int64_t dev = 0; dev < d; ++dev) {
      const std::int64_t dst = (dev + 1) % d;
      const std::int64_t c = ((dev + 1 - step) % d + d) % d;
      data[dst][c] = outgoing[dev];
      sim.sent[dev] += chunk;
      sim.received[dst] += chunk;
    }
  }

  const double device_sum = static_cast<double>(d * (d + 1) / 2);
  sim.reduced_correctly = true;
  for (std::int64_t dev = 0; dev < d; ++dev) {
    for (std::int64_t c = 0; c < d; ++c) {
      for (std::int64_t i = 0; i < chunk; ++i) {
        const double expected = device_sum * static_cast<double>(c * chunk + i + 1);
        if (data[dev][c][i] != expected) sim.reduced_correctly = false;
      }
    }
  }
  return sim;
}

}  // namespace bertperf::verify
