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
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "drgame/sparse.hpp"

namespace drgame::cluster {

enum class EntityKind { kUser, kItem };

struct ClusterAssignment {
  EntityKind kind = EntityKind::kUser;
  Index k = 0;
  std::vector<Index> assignment;  // entity -> cluster id in [0, k)
  Eigen::MatrixXd centroids;      // k x dim
  int iterations = 0;
};

struct KMeansOptions {
  int max_iter = 100;
  double tol = 1e-4;
};

// Lloyd's algorithm from k-means++ seeding. Stops once no centroid moves
// more than `tol` (Euclidean) or after max_iter rounds. A cluster that
// empties takes over the point farthest from its own centroid among
// clusters with more than one member, so no cluster is ever empty.
ClusterAssignment kmeans(const Eigen::MatrixXd& points, Index k, uint64_t seed,
                         const KMeansOptions& options = {},
                         EntityKind kind = EntityKind::kUser);

// round(beta * n) clamped to [1, n].
Index cluster_count(double beta, Index n);

// Every entity in its own cluster, which makes selection keep every edge.
ClusterAssignment singleton_clusters(Index n, EntityKind kind);

struct SelectedEdge {
  Index user;
  Index item;

  auto operator<=>(const SelectedEdge&) const = default;
};

// Per cluster of items touching u's neighborhood, the neighbor with the
// largest H(u, .); ties go to the lowest item index. Clusters with no
// neighbor of u contribute nothing.
std::vector<SelectedEdge> select_items_for_user(
    Index user, const ImplicitPreference& preference,
    const ClusterAssignment& item_clusters);

// Mirror of select_items_for_user. `preference_by_item` is H transposed
// (item x user).
std::vector<SelectedEdge> select_users_for_item(
    Index item, const CsrMatrix& preference_by_item,
    const ClusterAssignment& user_clusters);

struct DirectedSubgraphPair {
  Index num_users = 0;
  Index num_items = 0;
  // Edges (u, i) where i feeds u, and where u feeds i; both sorted.
  std::vector<SelectedEdge> item_to_user;
  std::vector<SelectedEdge> user_to_item;
  // Degrees in the full interaction graph.
  std::vector<Index> user_degree;
  std::vector<Index> item_degree;
};

DirectedSubgraphPair build_subgraphs(const ImplicitPreference& preference,
                                     const ClusterAssignment& user_clusters,
                                     const ClusterAssignment& item_clusters);

// Both directions carry every interaction: plain symmetric propagation.
DirectedSubgraphPair full_subgraphs(const CsrMatrix& interactions);

// CSV user_idx,item_idx,direction with direction "i2u" or "u2i".
void write_subgraphs_csv(const std::filesystem::path& path,
                         const DirectedSubgraphPair& graphs);
// Degrees are recomputed from `interactions`.
DirectedSubgraphPair read_subgraphs_csv(const std::filesystem::path& path,
                                        const CsrMatrix& interactions);

// CSV entity_idx,cluster_id.
void write_clusters_csv(const std::filesystem::path& path,
                        const ClusterAssignment& clusters);

}  // namespace drgame::cluster
