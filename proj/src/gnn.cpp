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

#include "drgame/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "drgame/error.hpp"
#include "drgame/random.hpp"

namespace drgame::gnn {

ModelParams init_params(Index num_users, Index num_items, int dim, int layers,
                        uint64_t seed, double scale) {
  if (dim < 1 || layers < 0) throw UsageError("bad model shape");
  Rng rng = Rng::stream(seed, rng_stream::kModelInit);
  ModelParams p;
  p.user_embeddings.resize(num_users, dim);
  p.item_embeddings.resize(num_items, dim);
  for (Eigen::Index r = 0; r < num_users; ++r) {
    for (int c = 0; c < dim; ++c) p.user_embeddings(r, c) = scale * rng.normal();
  }
  for (Eigen::Index r = 0; r < num_items; ++r) {
    for (int c = 0; c < dim; ++c) p.item_embeddings(r, c) = scale * rng.normal();
  }
  p.layer_logits = Eigen::VectorXd::Zero(layers + 1);
  return p;
}

PropagationGraph PropagationGraph::from_subgraphs(
    const cluster::DirectedSubgraphPair& graphs) {
  PropagationGraph g;
  g.num_users = graphs.num_users;
  g.num_items = graphs.num_items;
  auto weight = [&](const cluster::SelectedEdge& e) {
    const Index du = graphs.user_degree.at(e.user);
    const Index di = graphs.item_degree.at(e.item);
    if (du <= 0 || di <= 0) {
      throw std::logic_error("selected edge (" + std::to_string(e.user) + "," +
                             std::to_string(e.item) +
                             ") touches a node with no interactions");
    }
    return 1.0 / std::sqrt(static_cast<double>(du) * static_cast<double>(di));
  };
  std::vector<Triplet> to_users;
  to_users.reserve(graphs.item_to_user.size());
  for (const auto& e : graphs.item_to_user) {
    to_users.push_back({e.user, e.item, weight(e)});
  }
  std::vector<Triplet> to_items;
  to_items.reserve(graphs.user_to_item.size());
  for (const auto& e : graphs.user_to_item) {
    to_items.push_back({e.item, e.user, weight(e)});
  }
  g.into_users =
      CsrMatrix::from_triplets(g.num_users, g.num_items, std::move(to_users));
  g.into_items =
      CsrMatrix::from_triplets(g.num_items, g.num_users, std::move(to_items));
  return g;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double top = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - top).exp().matrix();
  return e / e.sum();
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> combine_layers(
    std::span<const Eigen::MatrixXd> user_layers,
    std::span<const Eigen::MatrixXd> item_layers,
    const Eigen::VectorXd& logits) {
  if (user_layers.empty() || user_layers.size() != item_layers.size() ||
      static_cast<Eigen::Index>(user_layers.size()) != logits.size()) {
    throw DataError("combine_layers: need one logit per layer");
  }
  const Eigen::VectorXd alpha = softmax(logits);
  Eigen::MatrixXd user = alpha(0) * user_layers[0];
  Eigen::MatrixXd item = alpha(0) * item_layers[0];
  for (size_t l = 1; l < user_layers.size(); ++l) {
    user += alpha(l) * user_layers[l];
    item += alpha(l) * item_layers[l];
  }
  return {std::move(user), std::move(item)};
}

PropagationResult propagate(const ModelParams& params,
                            const PropagationGraph& graph, int layers) {
  if (layers < 0 || layers != params.layers()) {
    throw UsageError("propagate: expected " + std::to_string(params.layers()) +
                     " layers, got " + std::to_string(layers));
  }
  if (params.user_embeddings.rows() != graph.num_users ||
      params.item_embeddings.rows() != graph.num_items) {
    throw DataError("propagate: embedding tables do not match the graph");
  }
  PropagationResult r;
  r.user_layers.reserve(layers + 1);
  r.item_layers.reserve(layers + 1);
  r.user_layers.push_back(params.user_embeddings);
  r.item_layers.push_back(params.item_embeddings);
  for (int l = 0; l < layers; ++l) {
    Eigen::MatrixXd next_user = graph.into_users.multiply(r.item_layers[l]);
    Eigen::MatrixXd next_item = graph.into_items.multiply(r.user_layers[l]);
    r.user_layers.push_back(std::move(next_user));
    r.item_layers.push_back(std::move(next_item));
  }
  r.attention = softmax(params.layer_logits);
  std::tie(r.user, r.item) =
      combine_layers(r.user_layers, r.item_layers, params.layer_logits);
  return r;
}

PropagationResult propagate(const ModelParams& params,
                            const cluster::DirectedSubgraphPair& graphs,
                            int layers) {
  return propagate(params, PropagationGraph::from_subgraphs(graphs), layers);
}

TopN recommend_top_n(const Eigen::MatrixXd& users, const Eigen::MatrixXd& items,
                     Index user, int n, std::span<const Index> exclusions) {
  if (n < 1) throw UsageError("top-N requires N >= 1");
  if (user < 0 || user >= users.rows()) {
    throw DataError("unknown user index " + std::to_string(user));
  }
  const Eigen::VectorXd scores = items * users.row(user).transpose();
  std::vector<Index> candidates;
  candidates.reserve(items.rows());
  for (Index i = 0; i < items.rows(); ++i) {
    if (!std::binary_search(exclusions.begin(), exclusions.end(), i)) {
      candidates.push_back(i);
    }
  }
  TopN out;
  const size_t take = std::min<size_t>(n, candidates.size());
  out.truncated = take < static_cast<size_t>(n);
  auto better = [&](Index a, Index b) {
    return scores(a) != scores(b) ? scores(a) > scores(b) : a < b;
  };
  std::partial_sort(candidates.begin(), candidates.begin() + take,
                    candidates.end(), better);
  out.items.assign(candidates.begin(), candidates.begin() + take);
  for (Index i : out.items) out.scores.push_back(scores(i));
  return out;
}

}  // namespace drgame::gnn
