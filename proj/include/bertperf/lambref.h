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

#ifndef BERTPERF_LAMBREF_H_
#define BERTPERF_LAMBREF_H_

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <utility>

#include <Eigen/Dense>

namespace bertperf {

// Two-stage LAMB update for a single layer. Stage 1 produces the
// Adam-style direction u and the norms feeding the trust ratio; stage 2
// applies w <- w - lr * (||w|| / ||u||) * u.
template <typename Scalar>
struct LambHyperParams {
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar epsilon = Scalar(1e-6);
  Scalar weight_decay = Scalar(0.01);
  Scalar learning_rate = Scalar(1e-3);
};

template <typename Scalar>
using LambVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct LambState {
  LambVector<Scalar> weights;
  LambVector<Scalar> momentum;
  LambVector<Scalar> velocity;
  std::int64_t step = 0;
  LambHyperParams<Scalar> params;

  // Fresh optimizer state (m = v = 0, t = 0) for the given weights.
  static LambState Initial(LambVector<Scalar> w,
                           LambHyperParams<Scalar> hp = {}) {
    LambState s;
    s.momentum = LambVector<Scalar>::Zero(w.size());
    s.velocity = LambVector<Scalar>::Zero(w.size());
    s.weights = std::move(w);
    s.params = hp;
    return s;
  }
};

template <typename Scalar>
struct UpdateDirection {
  LambVector<Scalar> update;
  Scalar weight_norm = Scalar(0);
  Scalar update_norm = Scalar(0);
};

namespace lamb_detail {

template <typename Scalar>
void CheckState(const LambState<Scalar>& s) {
  if (s.momentum.size() != s.weights.size() ||
      s.velocity.size() != s.weights.size()) {
    throw std::invalid_argument("LAMB state vectors differ in length");
  }
  const auto& p = s.params;
  if (!(p.beta1 >= 0 && p.beta1 < 1) || !(p.beta2 >= 0 && p.beta2 < 1)) {
    throw std::invalid_argument("LAMB betas must lie in [0, 1)");
  }
  if (!(p.epsilon > 0) || !(p.weight_decay >= 0) || !(p.learning_rate > 0)) {
    throw std::invalid_argument("LAMB epsilon/lr must be > 0, decay >= 0");
  }
  if (s.step < 0) throw std::invalid_argument("LAMB step must be >= 0");
}

}  // namespace lamb_detail

// Advances t, updates m and v in place and returns the update direction.
template <typename Scalar>
UpdateDirection<Scalar> LambStage1(
    LambState<Scalar>& state,
    const Eigen::Ref<const LambVector<std::type_identity_t<Scalar>>>& grads) {
  lamb_detail::CheckState(state);
  if (grads.size() != state.weights.size()) {
    throw std::invalid_argument("gradient length does not match weights");
  }
  if (!grads.allFinite() || !state.weights.allFinite() ||
      !state.momentum.allFinite() || !state.velocity.allFinite()) {
    throw std::domain_error("non-finite LAMB input");
  }
  const auto& p = state.params;
  const std::int64_t t = state.step + 1;

  state.momentum = p.beta1 * state.momentum + (Scalar(1) - p.beta1) * grads;
  state.velocity = p.beta2 * state.velocity +
                   (Scalar(1) - p.beta2) * grads.cwiseProduct(grads);
  state.step = t;

  const Scalar m_corr =
      Scalar(1) - std::pow(p.beta1, static_cast<Scalar>(t));
  const Scalar v_corr =
      Scalar(1) - std::pow(p.beta2, static_cast<Scalar>(t));

  UpdateDirection<Scalar> dir;
  dir.update = ((state.momentum / m_corr).array() /
                    ((state.velocity / v_corr).array().sqrt() + p.epsilon) +
                p.weight_decay * state.weights.array())
                   .matrix();
  dir.weight_norm = state.weights.norm();
  dir.update_norm = dir.update.norm();
  return dir;
}

// Trust ratio ||w|| / ||u||, taken as 1 when either norm is zero.
template <typename Scalar>
Scalar TrustRatio(const UpdateDirection<Scalar>& dir) {
  if (dir.weight_norm == Scalar(0) || dir.update_norm == Scalar(0)) {
    return Scalar(1);
  }
  return dir.weight_norm / dir.update_norm;
}

// Writes and returns the new weights.
template <typename Scalar>
const LambVector<Scalar>& LambStage2(LambState<Scalar>& state,
                                     const UpdateDirection<Scalar>& dir) {
  if (dir.update.size() != state.weights.size()) {
    throw std::invalid_argument("update length does not match weights");
  }
  if (!dir.update.allFinite() || !std::isfinite(dir.weight_norm) ||
      !std::isfinite(dir.update_norm)) {
    throw std::domain_error("non-finite LAMB direction");
  }
  const Scalar scale = state.params.learning_rate * TrustRatio(dir);
  state.weights -= scale * dir.update;
  return state.weights;
}

// L2 norm over the gradients of every layer. The update of any layer may
// only start once this is known.
template <typename Scalar>
Scalar GlobalGradNorm(std::span<const LambVector<Scalar>> grads) {
  Scalar sum = Scalar(0);
  for (const auto& g : grads) {
    if (!g.allFinite()) throw std::domain_error("non-finite gradient");
    sum += g.squaredNorm();
  }
  return std::sqrt(sum);
}

struct LambTraffic {
  std::int64_t bytes_read = 0;
  std::int64_t bytes_written = 0;
};

// Minimum DRAM traffic of one LAMB update over `params` parameters: read
// w, g, m, v and write w, m, v, all FP32 regardless of training precision.
constexpr LambTraffic TrafficAccount(std::int64_t params) {
  if (params < 0) throw std::invalid_argument("negative parameter count");
  return {4 * params * 4, 3 * params * 4};
}

}  // namespace bertperf

#endif  // BERTPERF_LAMBREF_H_
