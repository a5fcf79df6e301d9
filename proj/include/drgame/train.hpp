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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "drgame/cluster_select.hpp"
#include "drgame/dataset.hpp"
#include "drgame/gnn.hpp"
#include "drgame/random.hpp"
#include "drgame/sparse.hpp"

namespace drgame::train {

// Per-item loss weight favoring rare categories:
//   n = Q^T 1,  n~ = 1 / n,  w = Q (n~ / ||n~||_1 * |C|).
Eigen::VectorXd category_weights(const CategoryMatrix& categories);

// Uniform negatives from the items a user has not trained on.
class NegativeSampler {
 public:
  NegativeSampler(std::vector<std::vector<Index>> train_items_by_user,
                  Index num_items);

  // DataError when the user has trained on every item.
  Index sample(Index user, Rng& rng) const;
  bool is_positive(Index user, Index item) const;

 private:
  std::vector<std::vector<Index>> positives_;
  Index num_items_;
};

struct Triple {
  Index user;
  Index positive;
  Index negative;
};

enum class RegularizationScope {
  kBatch,  // layer-0 rows touched by the batch, plus the logits
  kFull,   // every parameter
};

struct LossAndGradients {
  double loss = 0.0;       // weighted BPR sum + regularization
  double data_loss = 0.0;  // weighted BPR sum alone
  Eigen::MatrixXd user_embeddings;
  Eigen::MatrixXd item_embeddings;
  Eigen::VectorXd layer_logits;
};

// -sum_b w[i_b] log sigmoid(y(u_b, i_b) - y(u_b, j_b)) + lambda ||Theta||^2,
// with scores taken from the full propagation. Gradients are exact.
// NumericError on a non-finite loss.
LossAndGradients bpr_loss(
    std::span<const Triple> batch, const gnn::ModelParams& params,
    const gnn::PropagationGraph& graph, const Eigen::VectorXd& weights,
    double lambda,
    RegularizationScope scope = RegularizationScope::kBatch);

// Same objective without gradients.
double bpr_loss_value(
    std::span<const Triple> batch, const gnn::ModelParams& params,
    const gnn::PropagationGraph& graph, const Eigen::VectorXd& weights,
    double lambda,
    RegularizationScope scope = RegularizationScope::kBatch);

struct TrainConfig {
  double lr = 0.001;
  double lambda = 1e-5;
  int batch_size = 2048;
  int dim = 32;
  int layers = 3;
  int patience = 10;
  int max_epochs = 1000;
  uint64_t seed = 0;
  int negatives = 1;
  int validation_n = 100;  // early stopping on validation Recall@N
  RegularizationScope regularization = RegularizationScope::kBatch;
};

// Counts epochs since the last strict improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  // Records the metric of the next epoch; true when it is a new best.
  bool update(double metric);
  bool should_stop() const { return epoch_ - best_epoch_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  int epoch() const { return epoch_; }
  double best() const { return best_; }

 private:
  int patience_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  double best_ = -1.0;
};

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;  // per training triple
  double validation_recall = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  int stop_epoch = 0;
  double wall_seconds = 0.0;

  nlohmann::json to_json() const;
};

struct FitResult {
  gnn::ModelParams params;  // from the best validation epoch
  TrainReport report;
};

// Mini-batch Adam over shuffled training interactions with early stopping
// on validation recall. `initial` overrides the random initialization.
FitResult fit(const SplitDataset& split,
              const cluster::DirectedSubgraphPair& graphs,
              const Eigen::VectorXd& weights, const TrainConfig& config,
              std::optional<gnn::ModelParams> initial = std::nullopt);

// Validation Recall@N of a parameter set (users without validation items
// are skipped).
double validation_recall(const gnn::ModelParams& params,
                         const gnn::PropagationGraph& graph,
                         const std::vector<std::vector<Index>>& train_items,
                         const std::vector<std::vector<Index>>& held_out,
                         int n);

}  // namespace drgame::train
