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

#include "drgame/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "drgame/error.hpp"
#include "drgame/eval.hpp"
#include "drgame/optim.hpp"

namespace drgame::train {

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// -log sigmoid(x), stable for large |x|.
double neg_log_sigmoid(double x) {
  return std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

std::vector<Index> unique_sorted(std::vector<Index> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

struct BatchNodes {
  std::vector<Index> users;
  std::vector<Index> items;
};

BatchNodes batch_nodes(std::span<const Triple> batch) {
  BatchNodes nodes;
  for (const auto& t : batch) {
    nodes.users.push_back(t.user);
    nodes.items.push_back(t.positive);
    nodes.items.push_back(t.negative);
  }
  nodes.users = unique_sorted(std::move(nodes.users));
  nodes.items = unique_sorted(std::move(nodes.items));
  return nodes;
}

double regularization(std::span<const Triple> batch,
                      const gnn::ModelParams& params,
                      RegularizationScope scope) {
  double total = params.layer_logits.squaredNorm();
  if (scope == RegularizationScope::kFull) {
    return total + params.user_embeddings.squaredNorm() +
           params.item_embeddings.squaredNorm();
  }
  const BatchNodes nodes = batch_nodes(batch);
  for (Index u : nodes.users) total += params.user_embeddings.row(u).squaredNorm();
  for (Index i : nodes.items) total += params.item_embeddings.row(i).squaredNorm();
  return total;
}

void check_batch(std::span<const Triple> batch, const gnn::ModelParams& params,
                 const Eigen::VectorXd& weights) {
  if (weights.size() != params.item_embeddings.rows()) {
    throw DataError("bpr_loss: one weight per item required");
  }
  for (const auto& t : batch) {
    if (t.user < 0 || t.user >= params.user_embeddings.rows() ||
        t.positive < 0 || t.positive >= params.item_embeddings.rows() ||
        t.negative < 0 || t.negative >= params.item_embeddings.rows()) {
      throw DataError("bpr_loss: triple index out of range");
    }
  }
}

}  // namespace

Eigen::VectorXd category_weights(const CategoryMatrix& categories) {
  const Index num_cats = categories.cols();
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(num_cats);
  for (Index c : categories.indices()) counts(c) += 1.0;
  for (Index c = 0; c < num_cats; ++c) {
    if (counts(c) == 0.0) {
      throw DataError("category " + std::to_string(c) + " has no items");
    }
  }
  const Eigen::VectorXd inverse = counts.cwiseInverse();
  const Eigen::VectorXd scaled =
      inverse / inverse.lpNorm<1>() * static_cast<double>(num_cats);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(categories.rows());
  for (Index i = 0; i < categories.rows(); ++i) {
    for (Index c : categories.row_indices(i)) w(i) += scaled(c);
  }
  return w;
}

NegativeSampler::NegativeSampler(
    std::vector<std::vector<Index>> train_items_by_user, Index num_items)
    : positives_(std::move(train_items_by_user)), num_items_(num_items) {
  for (auto& items : positives_) items = unique_sorted(std::move(items));
}

bool NegativeSampler::is_positive(Index user, Index item) const {
  const auto& items = positives_.at(user);
  return std::binary_search(items.begin(), items.end(), item);
}

Index NegativeSampler::sample(Index user, Rng& rng) const {
  if (static_cast<Index>(positives_.at(user).size()) >= num_items_) {
    throw DataError("user " + std::to_string(user) +
                    " has interacted with every item; no negative exists");
  }
  while (true) {
    const auto j = static_cast<Index>(rng.index(num_items_));
    if (!is_positive(user, j)) return j;
  }
}

double bpr_loss_value(std::span<const Triple> batch,
                      const gnn::ModelParams& params,
                      const gnn::PropagationGraph& graph,
                      const Eigen::VectorXd& weights, double lambda,
                      RegularizationScope scope) {
  check_batch(batch, params, weights);
  const auto fwd = gnn::propagate(params, graph, params.layers());
  double data = 0.0;
  for (const auto& t : batch) {
    const double margin =
        fwd.user.row(t.user).dot(fwd.item.row(t.positive) - fwd.item.row(t.negative));
    data += weights(t.positive) * neg_log_sigmoid(margin);
  }
  return data + lambda * regularization(batch, params, scope);
}

LossAndGradients bpr_loss(std::span<const Triple> batch,
                          const gnn::ModelParams& params,
                          const gnn::PropagationGraph& graph,
                          const Eigen::VectorXd& weights, double lambda,
                          RegularizationScope scope) {
  check_batch(batch, params, weights);
  const int layers = params.layers();
  const auto fwd = gnn::propagate(params, graph, layers);

  // Gradients w.r.t. the fused tables.
  Eigen::MatrixXd d_user = Eigen::MatrixXd::Zero(fwd.user.rows(), fwd.user.cols());
  Eigen::MatrixXd d_item = Eigen::MatrixXd::Zero(fwd.item.rows(), fwd.item.cols());
  LossAndGradients out;
  for (const auto& t : batch) {
    const auto eu = fwd.user.row(t.user);
    const auto ei = fwd.item.row(t.positive);
    const auto ej = fwd.item.row(t.negative);
    const double margin = eu.dot(ei - ej);
    const double w = weights(t.positive);
    out.data_loss += w * neg_log_sigmoid(margin);
    const double g = -w * (1.0 - sigmoid(margin));  // d loss / d margin
    d_user.row(t.user) += g * (ei - ej);
    d_item.row(t.positive) += g * eu;
    d_item.row(t.negative) -= g * eu;
  }

  // Attention: d loss / d alpha_l, then through the softmax.
  const Eigen::VectorXd& alpha = fwd.attention;
  Eigen::VectorXd d_alpha(layers + 1);
  for (int l = 0; l <= layers; ++l) {
    d_alpha(l) = d_user.cwiseProduct(fwd.user_layers[l]).sum() +
                 d_item.cwiseProduct(fwd.item_layers[l]).sum();
  }
  out.layer_logits =
      alpha.cwiseProduct((d_alpha.array() - alpha.dot(d_alpha)).matrix());

  // Back through the linear propagation, deepest layer first. The
  // transposed operators route gradients along the reversed edges.
  const CsrMatrix into_users_t = graph.into_users.transpose();  // |I| x |U|
  const CsrMatrix into_items_t = graph.into_items.transpose();  // |U| x |I|
  Eigen::MatrixXd g_user = alpha(layers) * d_user;
  Eigen::MatrixXd g_item = alpha(layers) * d_item;
  for (int l = layers - 1; l >= 0; --l) {
    Eigen::MatrixXd next_user = alpha(l) * d_user + into_items_t.multiply(g_item);
    Eigen::MatrixXd next_item = alpha(l) * d_item + into_users_t.multiply(g_user);
    g_user = std::move(next_user);
    g_item = std::move(next_item);
  }
  out.user_embeddings = std::move(g_user);
  out.item_embeddings = std::move(g_item);

  const double reg = regularization(batch, params, scope);
  out.layer_logits += 2.0 * lambda * params.layer_logits;
  if (scope == RegularizationScope::kFull) {
    out.user_embeddings += 2.0 * lambda * params.user_embeddings;
    out.item_embeddings += 2.0 * lambda * params.item_embeddings;
  } else {
    const BatchNodes nodes = batch_nodes(batch);
    for (Index u : nodes.users) {
      out.user_embeddings.row(u) += 2.0 * lambda * params.user_embeddings.row(u);
    }
    for (Index i : nodes.items) {
      out.item_embeddings.row(i) += 2.0 * lambda * params.item_embeddings.row(i);
    }
  }
  out.loss = out.data_loss + lambda * reg;
  if (!std::isfinite(out.loss)) {
    throw NumericError("bpr_loss: non-finite loss (data term " +
                       std::to_string(out.data_loss) + ")");
  }
  return out;
}

bool EarlyStopping::update(double metric) {
  ++epoch_;
  if (epoch_ == 1 || metric > best_) {
    best_ = metric;
    best_epoch_ = epoch_;
    return true;
  }
  return false;
}

nlohmann::json TrainReport::to_json() const {
  nlohmann::json epochs_json = nlohmann::json::array();
  for (const auto& e : epochs) {
    epochs_json.push_back({{"epoch", e.epoch},
                           {"mean_loss", e.mean_loss},
                           {"validation_recall", e.validation_recall}});
  }
  return {{"epochs", epochs_json},
          {"best_epoch", best_epoch},
          {"stop_epoch", stop_epoch},
          {"wall_seconds", wall_seconds}};
}

double validation_recall(const gnn::ModelParams& params,
                         const gnn::PropagationGraph& graph,
                         const std::vector<std::vector<Index>>& train_items,
                         const std::vector<std::vector<Index>>& held_out,
                         int n) {
  const auto fwd = gnn::propagate(params, graph, params.layers());
  std::vector<std::vector<Index>> ranked(held_out.size());
  bool any = false;
  for (size_t u = 0; u < held_out.size(); ++u) {
    if (held_out[u].empty()) continue;
    any = true;
    ranked[u] = gnn::recommend_top_n(fwd.user, fwd.item, static_cast<Index>(u),
                                     n, train_items[u])
                    .items;
  }
  if (!any) return 0.0;
  return eval::recall_at_n(ranked, held_out, n);
}

FitResult fit(const SplitDataset& split,
              const cluster::DirectedSubgraphPair& graphs,
              const Eigen::VectorXd& weights, const TrainConfig& config,
              std::optional<gnn::ModelParams> initial) {
  if (config.batch_size < 1 || config.patience < 1 || config.max_epochs < 1 ||
      config.negatives < 1 || config.lr <= 0 || config.lambda < 0) {
    throw UsageError("invalid training configuration");
  }
  const auto start = std::chrono::steady_clock::now();
  const Index num_users = graphs.num_users;
  const Index num_items = graphs.num_items;
  const auto graph = gnn::PropagationGraph::from_subgraphs(graphs);
  const auto train_items = items_by_user(split.train, num_users);
  const auto valid_items = items_by_user(split.validation, num_users);
  const NegativeSampler sampler(train_items, num_items);

  FitResult result;
  gnn::ModelParams params =
      initial ? std::move(*initial)
              : gnn::init_params(num_users, num_items, config.dim,
                                 config.layers, config.seed);
  if (params.layers() != config.layers ||
      params.user_embeddings.rows() != num_users ||
      params.item_embeddings.rows() != num_items) {
    throw DataError("initial parameters do not match the graph");
  }

  Rng shuffle_rng = Rng::stream(config.seed, rng_stream::kShuffle);
  Rng negative_rng = Rng::stream(config.seed, rng_stream::kNegatives);
  Adam adam(AdamConfig{.lr = config.lr});
  EarlyStopping stopper(config.patience);
  std::vector<Edge> order(split.train.begin(), split.train.end());
  std::vector<Triple> batch;
  batch.reserve(static_cast<size_t>(config.batch_size) * config.negatives);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<Edge>(order));
    double epoch_loss = 0.0;
    int64_t triples = 0;
    for (size_t begin = 0; begin < order.size();
         begin += static_cast<size_t>(config.batch_size)) {
      const size_t end =
          std::min(order.size(), begin + static_cast<size_t>(config.batch_size));
      batch.clear();
      for (size_t k = begin; k < end; ++k) {
        for (int n = 0; n < config.negatives; ++n) {
          batch.push_back({order[k].user, order[k].item,
                           sampler.sample(order[k].user, negative_rng)});
        }
      }
      const auto g = bpr_loss(batch, params, graph, weights, config.lambda,
                              config.regularization);
      epoch_loss += g.loss;
      triples += static_cast<int64_t>(batch.size());
      adam.begin_step();
      adam.update(0, params.user_embeddings, g.user_embeddings);
      adam.update(1, params.item_embeddings, g.item_embeddings);
      adam.update(2, params.layer_logits, g.layer_logits);
    }

    EpochRecord record;
    record.epoch = epoch;
    record.mean_loss = triples ? epoch_loss / static_cast<double>(triples) : 0.0;
    record.validation_recall = validation_recall(params, graph, train_items,
                                                 valid_items, config.validation_n);
    result.report.epochs.push_back(record);
    if (stopper.update(record.validation_recall)) result.params = params;
    if (stopper.should_stop()) break;
  }
  result.report.best_epoch = stopper.best_epoch();
  result.report.stop_epoch = stopper.epoch();
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

}  // namespace drgame::train
