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

#include "bertperf/verify/lamb_oracle.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "bertperf/lambref.h"

namespace bertperf::verify {

void MonolithicLambStep(LambOracleState& s, const std::vector<double>& g) {
  const std::size_t n = s.w.size();
  if (g.size() != n || s.m.size() != n || s.v.size() != n) {
    throw std::invalid_argument("oracle length mismatch");
  }
  s.step += 1;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));

  std::vector<double> u(n);
  double w_sq = 0.0;
  double u_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * g[i];
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * g[i] * g[i];
    const double m_hat = s.m[i] / bc1;
    const double v_hat = s.v[i] / bc2;
    u[i] = m_hat / (std::sqrt(v_hat) + s.epsilon) + s.weight_decay * s.w[i];
    w_sq += s.w[i] * s.w[i];
    u_sq += u[i] * u[i];
  }
  const double w_norm = std::sqrt(w_sq);
  const double u_norm = std::sqrt(u_sq);
  const double ratio = (w_norm > 0.0 && u_norm > 0.0) ? w_norm / u_norm : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    s.w[i] = s.w[i] - s.learning_rate * ratio * u[i];
  }
}

double TwoPassNorm(const std::vector<std::vector<double>>& grads) {
  double scale = 0.0;
  for (const auto& layer : grads) {
    for (double x : layer) {
      if (!std::isfinite(x)) throw std::domain_error("non-finite gradient");
      scale = std::max(scale, std::fabs(x));
    }
  }
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  for (const auto& layer : grads) {
    for (double x : layer) {
      const double y = x / scale;
      sum += y * y;
    }
  }
  return scale * std::sqrt(sum);
}

LambVerifyResult VerifyLamb(std::int64_t max_elements, std::int64_t trials,
                            std::uint64_t seed, double tolerance) {
  if (max_elements < 1 || trials < 0) {
    throw std::invalid_argument("need max_elements >= 1 and trials >= 0");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> length(1, max_elements);
  std::uniform_int_distribution<std::int64_t> prior_steps(0, 50);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> lr(1e-4, 1e-1);
  std::uniform_real_distribution<double> decay(0.0, 0.1);

  LambVerifyResult result;
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    const std::int64_t n = length(rng);
    LambOracleState oracle;
    oracle.w.resize(n);
    oracle.m.resize(n);
    oracle.v.resize(n);
    std::vector<double> g(n);
    for (std::int64_t i = 0; i < n; ++i) {
      oracle.w[i] = normal(rng);
      g[i] = normal(rng);
      oracle.m[i] = 0.1 * normal(rng);
      oracle.v[i] = 0.01 * std::fabs(normal(rng));
    }
    oracle.step = prior_steps(rng);
    oracle.learning_rate = lr(rng);
    oracle.weight_decay = decay(rng);

    LambState<double> state;
    state.weights = Eigen::Map<const LambVector<double>>(oracle.w.data(), n);
    state.momentum = Eigen::Map<const LambVector<double>>(oracle.m.data(), n);
    state.velocity = Eigen::Map<const LambVector<double>>(oracle.v.data(), n);
    state.step = oracle.step;
    state.params.learning_rate = oracle.learning_rate;
    state.params.weight_decay = oracle.weight_decay;
    const LambVector<double> grads =
        Eigen::Map<const LambVector<double>>(g.data(), n);

    const UpdateDirection<double> dir = LambStage1(state, grads);
    LambStage2(state, dir);
    MonolithicLambStep(oracle, g);

    ++result.trials;
    for (std::int64_t i = 0; i < n; ++i) {
      const double err = std::max({std::fabs(state.weights[i] - oracle.w[i]),
                                   std::fabs(state.momentum[i] - oracle.m[i]),
                                   std::fabs(state.velocity[i] - oracle.v[i])});
      result.max_abs_error = std::max(result.max_abs_error, err);
      if (!(err <= tolerance) && result.passed) {
        result.passed = false;
        std::ostringstream msg;
        msg << "trial " << trial << " (length " << n << ") element " << i
            << ": two-stage w=" << state.weights[i]
            << " oracle w=" << oracle.w[i] << " |err|=" << err;
        result.failure = msg.str();
      }
    }
    if (!result.passed) break;
  }
  return result;
}

}  // namespace bertperf::verify
