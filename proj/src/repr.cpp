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

#include "drgame/repr.hpp"

#include <cmath>
#include <numeric>

#include "drgame/error.hpp"
#include "drgame/optim.hpp"
#include "drgame/random.hpp"

namespace drgame::repr {

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

Eigen::MatrixXd permute_rows(const Eigen::MatrixXd& m,
                             std::span<const Index> permutation) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    out.row(k) = m.row(permutation[k]);
  }
  return out;
}

Eigen::MatrixXd prelu(const Eigen::MatrixXd& z, double slope) {
  return z.unaryExpr([slope](double v) { return v > 0 ? v : slope * v; });
}

struct Forward {
  Eigen::MatrixXd agg;            // A X
  Eigen::MatrixXd agg_corrupt;    // A X~
  Eigen::MatrixXd pre;            // A X W
  Eigen::MatrixXd pre_corrupt;
  Eigen::MatrixXd pos;            // PReLU(pre)
  Eigen::MatrixXd neg;
  Eigen::VectorXd summary;        // sigmoid(mean(pos))
  Eigen::VectorXd projected;      // B * summary
  Eigen::VectorXd pos_scores;
  Eigen::VectorXd neg_scores;
  double loss = 0.0;
};

Forward forward(const CsrMatrix& adjacency, const DgiParams& p,
                std::span<const Index> permutation) {
  const Eigen::Index n = p.features.rows();
  if (static_cast<Eigen::Index>(permutation.size()) != n ||
      adjacency.rows() != n) {
    throw DataError("dgi: permutation/adjacency size mismatch");
  }
  Forward f;
  f.agg = adjacency.multiply(p.features);
  f.agg_corrupt = adjacency.multiply(permute_rows(p.features, permutation));
  f.pre = f.agg * p.weight;
  f.pre_corrupt = f.agg_corrupt * p.weight;
  f.pos = prelu(f.pre, p.slope);
  f.neg = prelu(f.pre_corrupt, p.slope);
  Eigen::VectorXd mean = f.pos.colwise().mean().transpose();
  f.summary = mean.unaryExpr([](double v) { return sigmoid(v); });
  f.projected = p.bilinear * f.summary;
  f.pos_scores = f.pos * f.projected;
  f.neg_scores = f.neg * f.projected;
  double total = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    total += softplus(-f.pos_scores(k));  // -log sigmoid(pos)
    total += softplus(f.neg_scores(k));   // -log(1 - sigmoid(neg))
  }
  f.loss = total / (2.0 * static_cast<double>(n));
  return f;
}

}  // namespace

CsrMatrix normalized_adjacency(Index num_nodes,
                               std::span<const std::pair<Index, Index>> edges) {
  std::vector<double> degree(num_nodes, 1.0);  // self-loop
  for (auto [a, b] : edges) {
    degree.at(a) += 1.0;
    degree.at(b) += 1.0;
  }
  std::vector<Triplet> t;
  t.reserve(edges.size() * 2 + num_nodes);
  for (Index v = 0; v < num_nodes; ++v) t.push_back({v, v, 1.0 / degree[v]});
  for (auto [a, b] : edges) {
    const double w = 1.0 / std::sqrt(degree[a] * degree[b]);
    t.push_back({a, b, w});
    t.push_back({b, a, w});
  }
  return CsrMatrix::from_triplets(num_nodes, num_nodes, std::move(t));
}

ItemCategoryGraph build_category_graph(const CategoryMatrix& categories) {
  ItemCategoryGraph g;
  g.num_items = categories.rows();
  g.num_categories = categories.cols();
  std::vector<std::pair<Index, Index>> edges;
  edges.reserve(categories.nnz());
  for (Index i = 0; i < categories.rows(); ++i) {
    for (Index c : categories.row_indices(i)) {
      edges.emplace_back(i, g.num_items + c);
    }
  }
  g.num_edges = static_cast<int64_t>(edges.size());
  g.adjacency = normalized_adjacency(g.num_nodes(), edges);
  return g;
}

DgiParams init_dgi_params(Index num_nodes, int dim, uint64_t seed) {
  if (dim < 1) throw UsageError("embedding dimension must be >= 1");
  Rng rng = Rng::stream(seed, rng_stream::kDgiInit);
  DgiParams p;
  p.features.resize(num_nodes, dim);
  for (Eigen::Index r = 0; r < p.features.rows(); ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) p.features(r, c) = 0.1 * rng.normal();
  }
  const double bound = std::sqrt(6.0 / (2.0 * dim));
  auto glorot = [&](Eigen::MatrixXd& m) {
    m.resize(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
      for (Eigen::Index c = 0; c < dim; ++c) {
        m(r, c) = bound * (2.0 * rng.uniform() - 1.0);
      }
    }
  };
  glorot(p.weight);
  glorot(p.bilinear);
  p.slope = 0.25;
  return p;
}

Eigen::MatrixXd dgi_encode(const CsrMatrix& adjacency,
                           const Eigen::MatrixXd& features,
                           const DgiParams& params) {
  return prelu(adjacency.multiply(features) * params.weight, params.slope);
}

double dgi_loss(const CsrMatrix& adjacency, const DgiParams& params,
                std::span<const Index> permutation) {
  return forward(adjacency, params, permutation).loss;
}

DgiGradients dgi_loss_and_gradients(const CsrMatrix& adjacency,
                                    const DgiParams& p,
                                    std::span<const Index> permutation) {
  const Forward f = forward(adjacency, p, permutation);
  const Eigen::Index n = p.features.rows();
  const double scale = 1.0 / (2.0 * static_cast<double>(n));

  // d loss / d score.
  Eigen::VectorXd g_pos(n);
  Eigen::VectorXd g_neg(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    g_pos(k) = -scale * (1.0 - sigmoid(f.pos_scores(k)));
    g_neg(k) = scale * sigmoid(f.neg_scores(k));
  }

  Eigen::MatrixXd d_pos = g_pos * f.projected.transpose();
  const Eigen::MatrixXd d_neg = g_neg * f.projected.transpose();
  const Eigen::VectorXd d_projected =
      f.pos.transpose() * g_pos + f.neg.transpose() * g_neg;

  DgiGradients g;
  g.loss = f.loss;
  g.bilinear = d_projected * f.summary.transpose();
  const Eigen::VectorXd d_summary = p.bilinear.transpose() * d_projected;
  const Eigen::VectorXd d_mean =
      d_summary.cwiseProduct(f.summary)
          .cwiseProduct((1.0 - f.summary.array()).matrix());
  d_pos.rowwise() += d_mean.transpose() / static_cast<double>(n);

  auto prelu_backward = [&](const Eigen::MatrixXd& pre,
                            const Eigen::MatrixXd& upstream,
                            double& d_slope) {
    Eigen::MatrixXd d_pre(pre.rows(), pre.cols());
    for (Eigen::Index r = 0; r < pre.rows(); ++r) {
      for (Eigen::Index c = 0; c < pre.cols(); ++c) {
        const double z = pre(r, c);
        if (z > 0) {
          d_pre(r, c) = upstream(r, c);
        } else {
          d_pre(r, c) = p.slope * upstream(r, c);
          d_slope += z * upstream(r, c);
        }
      }
    }
    return d_pre;
  };
  g.slope = 0.0;
  const Eigen::MatrixXd d_pre = prelu_backward(f.pre, d_pos, g.slope);
  const Eigen::MatrixXd d_pre_corrupt =
      prelu_backward(f.pre_corrupt, d_neg, g.slope);

  g.weight = f.agg.transpose() * d_pre + f.agg_corrupt.transpose() * d_pre_corrupt;
  // The adjacency is symmetric, so A^T = A.
  g.features = adjacency.multiply(d_pre * p.weight.transpose());
  const Eigen::MatrixXd d_corrupt =
      adjacency.multiply(d_pre_corrupt * p.weight.transpose());
  for (Eigen::Index k = 0; k < n; ++k) {
    g.features.row(permutation[k]) += d_corrupt.row(k);
  }
  return g;
}

DgiResult train_dgi(const ItemCategoryGraph& graph, const DgiConfig& config) {
  if (config.epochs < 1) throw UsageError("dgi epochs must be >= 1");
  const Index n = graph.num_nodes();
  DgiResult result;
  result.params = init_dgi_params(n, config.dim, config.seed);
  DgiParams& p = result.params;
  Rng corruption = Rng::stream(config.seed, rng_stream::kDgiCorruption);
  Adam adam(AdamConfig{.lr = config.lr});
  std::vector<Index> perm(n);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(perm.begin(), perm.end(), 0);
    corruption.shuffle(std::span<Index>(perm));
    DgiGradients g = dgi_loss_and_gradients(graph.adjacency, p, perm);
    if (!std::isfinite(g.loss)) {
      throw NumericError("dgi: non-finite loss at epoch " +
                         std::to_string(epoch + 1));
    }
    result.losses.push_back(g.loss);
    adam.begin_step();
    adam.update(0, p.features, g.features);
    adam.update(1, p.weight, g.weight);
    adam.update(2, Eigen::Map<Eigen::MatrixXd>(&p.slope, 1, 1),
                Eigen::Map<const Eigen::MatrixXd>(&g.slope, 1, 1));
    adam.update(3, p.bilinear, g.bilinear);
  }

  const Eigen::MatrixXd embeddings =
      dgi_encode(graph.adjacency, p.features, p);
  result.item_embeddings = embeddings.topRows(graph.num_items);
  result.category_embeddings = embeddings.bottomRows(graph.num_categories);
  return result;
}

Eigen::MatrixXd user_embeddings(const bipl::CategoryPreference& preference,
                                const Eigen::MatrixXd& category_embeddings) {
  if (preference.cols() != category_embeddings.rows()) {
    throw DataError("user_embeddings: P has " +
                    std::to_string(preference.cols()) + " columns but E_C has " +
                    std::to_string(category_embeddings.rows()) + " rows");
  }
  return preference * category_embeddings;
}

Eigen::MatrixXd augmented_item_embeddings(
    const CategoryMatrix& categories,
    const Eigen::MatrixXd& category_embeddings,
    const Eigen::MatrixXd& item_embeddings) {
  if (categories.cols() != category_embeddings.rows() ||
      categories.rows() != item_embeddings.rows() ||
      category_embeddings.cols() != item_embeddings.cols()) {
    throw DataError("augmented_item_embeddings: shape mismatch");
  }
  const Eigen::Index d = item_embeddings.cols();
  Eigen::MatrixXd out(item_embeddings.rows(), 2 * d);
  out.leftCols(d) = categories.multiply(category_embeddings);
  out.rightCols(d) = item_embeddings;
  return out;
}

}  // namespace drgame::repr
