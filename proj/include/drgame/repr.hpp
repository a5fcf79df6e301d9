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

// Category-aware representation learning.
//
// The item-category membership matrix is viewed as an undirected bipartite
// graph (items first, then categories) and embedded with Deep Graph
// Infomax: a one-layer encoder PReLU(A_hat X W) over a learnable feature
// table X, a row-shuffled corruption of X, a sigmoid-of-mean summary and a
// bilinear discriminator trained with binary cross-entropy.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "drgame/bipl.hpp"
#include "drgame/sparse.hpp"

namespace drgame::repr {

struct ItemCategoryGraph {
  Index num_items = 0;
  Index num_categories = 0;
  int64_t num_edges = 0;
  // D^-1/2 (A + I) D^-1/2 over all item and category nodes; symmetric.
  CsrMatrix adjacency;

  Index num_nodes() const { return num_items + num_categories; }
};

ItemCategoryGraph build_category_graph(const CategoryMatrix& categories);

// Self-looped symmetric normalization of an arbitrary undirected edge list
// over `num_nodes` nodes. Each undirected edge is listed once.
CsrMatrix normalized_adjacency(Index num_nodes,
                               std::span<const std::pair<Index, Index>> edges);

struct DgiParams {
  Eigen::MatrixXd features;  // nodes x d
  Eigen::MatrixXd weight;    // d x d
  double slope = 0.25;       // PReLU negative slope
  Eigen::MatrixXd bilinear;  // d x d
};

DgiParams init_dgi_params(Index num_nodes, int dim, uint64_t seed);

// Positive embeddings PReLU(adjacency * features * weight).
Eigen::MatrixXd dgi_encode(const CsrMatrix& adjacency,
                           const Eigen::MatrixXd& features,
                           const DgiParams& params);

struct DgiGradients {
  double loss = 0.0;
  Eigen::MatrixXd features;
  Eigen::MatrixXd weight;
  double slope = 0.0;
  Eigen::MatrixXd bilinear;
};

// Mean BCE over the 2N positive/corrupted scores, where the corrupted
// feature table has row k equal to features row permutation[k].
double dgi_loss(const CsrMatrix& adjacency, const DgiParams& params,
                std::span<const Index> permutation);
DgiGradients dgi_loss_and_gradients(const CsrMatrix& adjacency,
                                    const DgiParams& params,
                                    std::span<const Index> permutation);

struct DgiConfig {
  int dim = 32;
  int epochs = 200;
  double lr = 0.001;
  uint64_t seed = 0;
};

struct DgiResult {
  Eigen::MatrixXd item_embeddings;      // |I| x d
  Eigen::MatrixXd category_embeddings;  // |C| x d
  std::vector<double> losses;           // one per epoch, before its update
  DgiParams params;
};

// Full-batch training with Adam and a fresh corruption each epoch.
// NumericError on a non-finite loss.
DgiResult train_dgi(const ItemCategoryGraph& graph, const DgiConfig& config);

// E_U = P * E_C.
Eigen::MatrixXd user_embeddings(const bipl::CategoryPreference& preference,
                                const Eigen::MatrixXd& category_embeddings);

// [Q * E_C | E_I], width 2d.
Eigen::MatrixXd augmented_item_embeddings(
    const CategoryMatrix& categories,
    const Eigen::MatrixXd& category_embeddings,
    const Eigen::MatrixXd& item_embeddings);

}  // namespace drgame::repr
