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
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "drgame/cluster_select.hpp"
#include "drgame/sparse.hpp"

namespace drgame::gnn {

// Trainable parameters: layer-0 embeddings and one attention logit per
// layer (L + 1 in total).
struct ModelParams {
  Eigen::MatrixXd user_embeddings;  // |U| x d
  Eigen::MatrixXd item_embeddings;  // |I| x d
  Eigen::VectorXd layer_logits;     // L + 1

  int layers() const { return static_cast<int>(layer_logits.size()) - 1; }
  int dim() const { return static_cast<int>(user_embeddings.cols()); }
};

// Normal(0, scale^2) embeddings and zero logits (uniform attention).
ModelParams init_params(Index num_users, Index num_items, int dim, int layers,
                        uint64_t seed, double scale = 0.1);

// The two directed subgraphs as weighted sparse operators. Each weight is
// 1 / sqrt(|N_u| |N_i|) using degrees of the full interaction graph.
struct PropagationGraph {
  Index num_users = 0;
  Index num_items = 0;
  CsrMatrix into_users;  // |U| x |I|, from item->user edges
  CsrMatrix into_items;  // |I| x |U|, from user->item edges

  // std::logic_error if an edge touches a node of degree 0.
  static PropagationGraph from_subgraphs(
      const cluster::DirectedSubgraphPair& graphs);
};

struct PropagationResult {
  std::vector<Eigen::MatrixXd> user_layers;  // L + 1 tables
  std::vector<Eigen::MatrixXd> item_layers;
  Eigen::VectorXd attention;                 // softmax of the logits
  Eigen::MatrixXd user;                      // fused
  Eigen::MatrixXd item;
};

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

// Fused tables sum_l alpha_l * layer_l with alpha = softmax(logits), shared
// by users and items.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> combine_layers(
    std::span<const Eigen::MatrixXd> user_layers,
    std::span<const Eigen::MatrixXd> item_layers,
    const Eigen::VectorXd& logits);

// Synchronous layer updates: both sides read layer l to build layer l + 1.
// `layers` must equal params.layers().
PropagationResult propagate(const ModelParams& params,
                            const PropagationGraph& graph, int layers);
PropagationResult propagate(const ModelParams& params,
                            const cluster::DirectedSubgraphPair& graphs,
                            int layers);

inline double score(const Eigen::Ref<const Eigen::RowVectorXd>& user,
                    const Eigen::Ref<const Eigen::RowVectorXd>& item) {
  return user.dot(item);
}

struct TopN {
  std::vector<Index> items;
  std::vector<double> scores;
  bool truncated = false;  // fewer than n items were available
};

// Items outside `exclusions` (sorted) ranked by score, ties by index.
TopN recommend_top_n(const Eigen::MatrixXd& users, const Eigen::MatrixXd& items,
                     Index user, int n, std::span<const Index> exclusions);

}  // namespace drgame::gnn
