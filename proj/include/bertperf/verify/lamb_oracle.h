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

#ifndef BERTPERF_VERIFY_LAMB_ORACLE_H_
#define BERTPERF_VERIFY_LAMB_ORACLE_H_

#include <cstdint>
#include <string>
#include <vector>

// Reference routes kept independent of the library implementation: plain
// loops over std::vector, no shared helpers.
namespace bertperf::verify {

struct LambOracleState {
  std::vector<double> w;
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-6;
  double weight_decay = 0.01;
  double learning_rate = 1e-3;
};

// One full LAMB step for one layer, computed in a single sweep structure.
void MonolithicLambStep(LambOracleState& s, const std::vector<double>& g);

// sqrt(sum g^2) computed by first finding the largest magnitude and then
// summing squares of the scaled values.
double TwoPassNorm(const std::vector<std::vector<double>>& grads);

struct LambVerifyResult {
  bool passed = true;
  std::int64_t trials = 0;
  double max_abs_error = 0.0;
  std::string failure;  // first failing case, empty on success
};

// Random trials: lengths uniform in [1, max_elements], random weights,
// gradients and optimizer state. Compares the two-stage implementation
// against MonolithicLambStep elementwise (weights, m, v).
LambVerifyResult VerifyLamb(std::int64_t max_elements, std::int64_t trials,
                            std::uint64_t seed, double tolerance = 1e-12);

}  // namespace bertperf::verify

#endif  // BERTPERF_VERIFY_LAMB_ORACLE_H_
