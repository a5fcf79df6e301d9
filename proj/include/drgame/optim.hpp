// Copyright 2026 The DRGame Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace drgame {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adaptive-moment optimizer over a fixed set of parameter slots. Call
// begin_step() once per step, then update() for each slot.
class Adam {
 public:
  explicit Adam(AdamConfig config) : config_(config) {}

  void begin_step() { ++t_; }

  void update(size_t slot, Eigen::Ref<Eigen::MatrixXd> param,
              const Eigen::Ref<const Eigen::MatrixXd>& grad) {
    if (slot >= m_.size()) {
      m_.resize(slot + 1);
      v_.resize(slot + 1);
    }
    if (m_[slot].size() == 0) {
      m_[slot] = Eigen::MatrixXd::Zero(param.rows(), param.cols());
      v_[slot] = Eigen::MatrixXd::Zero(param.rows(), param.cols());
    }
    auto& m = m_[slot];
    auto& v = v_[slot];
    m = config_.beta1 * m + (1.0 - config_.beta1) * grad;
    v = config_.beta2 * v + (1.0 - config_.beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    param.array() -= config_.lr * (m.array() / bc1) /
                     ((v.array() / bc2).sqrt() + config_.eps);
  }

  long steps() const { return t_; }

 private:
  AdamConfig config_;
  long t_ = 0;
  std::vector<Eigen::MatrixXd> m_;
  std::vector<Eigen::MatrixXd> v_;
};

}  // namespace drgame
