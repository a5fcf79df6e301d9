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

#include "drgame/cluster_select.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "drgame/error.hpp"
#include "drgame/io.hpp"
#include "drgame/random.hpp"

namespace drgame::cluster {

namespace {

std::vector<Index> kmeanspp_seeds(const Eigen::MatrixXd& points, Index k,
                                  Rng& rng) {
  const Index n = static_cast<Index>(points.rows());
  std::vector<Index> seeds;
  std::vector<char> chosen(n, 0);
  std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
  Index next = static_cast<Index>(rng.index(n));
  while (true) {
    seeds.push_back(next);
    chosen[next] = 1;
    if (static_cast<Index>(seeds.size()) == k) break;
    double total = 0.0;
    for (Index p = 0; p < n; ++p) {
      dist2[p] = std::min(dist2[p], (points.row(p) - points.row(next)).squaredNorm());
      if (!chosen[p]) total += dist2[p];
    }
    if (total > 0.0) {
      double target = rng.uniform() * total;
      next = -1;
      for (Index p = 0; p < n; ++p) {
        if (chosen[p]) continue;
        next = p;
        target -= dist2[p];
        if (target < 0.0) break;
      }
    } else {
      // Only duplicates left: pick uniformly among unchosen points.
      Index nth = static_cast<Index>(rng.index(n - seeds.size()));
      for (Index p = 0; p < n; ++p) {
        if (chosen[p]) continue;
        if (nth-- == 0) {
          next = p;
          break;
        }
      }
    }
  }
  return seeds;
}

}  // namespace

Index cluster_count(double beta, Index n) {
  if (n < 1) throw DataError("cannot cluster an empty set");
  const auto k = static_cast<Index>(std::llround(beta * n));
  return std::clamp<Index>(k, 1, n);
}

ClusterAssignment kmeans(const Eigen::MatrixXd& points, Index k, uint64_t seed,
                         const KMeansOptions& options, EntityKind kind) {
  const Index n = static_cast<Index>(points.rows());
  if (k < 1 || k > n) {
    throw UsageError("kmeans: k=" + std::to_string(k) + " outside [1, " +
                     std::to_string(n) + "]");
  }
  if (!points.allFinite()) throw DataError("kmeans: non-finite point");

  Rng rng(seed);
  ClusterAssignment out;
  out.kind = kind;
  out.k = k;
  out.assignment.assign(n, 0);
  out.centroids.resize(k, points.cols());
  const auto seeds = kmeanspp_seeds(points, k, rng);
  for (Index c = 0; c < k; ++c) out.centroids.row(c) = points.row(seeds[c]);

  std::vector<Index> sizes(k);
  for (int iter = 1; iter <= std::max(options.max_iter, 1); ++iter) {
    out.iterations = iter;
    std::fill(sizes.begin(), sizes.end(), 0);
    for (Index p = 0; p < n; ++p) {
      Index best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Index c = 0; c < k; ++c) {
        const double d = (points.row(p) - out.centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      out.assignment[p] = best;
      ++sizes[best];
    }

    for (Index c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      Index far = -1;
      double far_d = -1.0;
      for (Index p = 0; p < n; ++p) {
        const Index owner = out.assignment[p];
        if (sizes[owner] < 2) continue;
        const double d =
            (points.row(p) - out.centroids.row(owner)).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = p;
        }
      }
      --sizes[out.assignment[far]];
      out.assignment[far] = c;
      sizes[c] = 1;
    }

    Eigen::MatrixXd updated = Eigen::MatrixXd::Zero(k, points.cols());
    for (Index p = 0; p < n; ++p) updated.row(out.assignment[p]) += points.row(p);
    double shift = 0.0;
    for (Index c = 0; c < k; ++c) {
      updated.row(c) /= static_cast<double>(sizes[c]);
      shift = std::max(shift, (updated.row(c) - out.centroids.row(c)).norm());
    }
    out.centroids = std::move(updated);
    if (shift < options.tol) break;
  }
  return out;
}

ClusterAssignment singleton_clusters(Index n, EntityKind kind) {
  ClusterAssignment out;
  out.kind = kind;
  out.k = n;
  out.assignment.resize(n);
  for (Index p = 0; p < n; ++p) out.assignment[p] = p;
  return out;
}

namespace {

// Shared argmax-per-cluster over one row of H (or of H transposed).
template <typename Emit>
void select_per_cluster(std::span<const Index> neighbors,
                        std::span<const double> scores,
                        const ClusterAssignment& clusters, Emit&& emit) {
  // Neighbors are sorted, so a strict > keeps the lowest index on ties.
  std::unordered_map<Index, Index> best;  // cluster -> position
  best.reserve(neighbors.size());
  for (size_t k = 0; k < neighbors.size(); ++k) {
    const Index cluster = clusters.assignment.at(neighbors[k]);
    auto [it, inserted] = best.emplace(cluster, static_cast<Index>(k));
    if (!inserted && scores[k] > scores[it->second]) {
      it->second = static_cast<Index>(k);
    }
  }
  std::vector<Index> picked;
  picked.reserve(best.size());
  for (const auto& b : best) picked.push_back(neighbors[b.second]);
  std::sort(picked.begin(), picked.end());
  for (Index neighbor : picked) emit(neighbor);
}

}  // namespace

std::vector<SelectedEdge> select_items_for_user(
    Index user, const ImplicitPreference& preference,
    const ClusterAssignment& item_clusters) {
  std::vector<SelectedEdge> edges;
  select_per_cluster(preference.row_indices(user), preference.row_values(user),
                     item_clusters,
                     [&](Index item) { edges.push_back({user, item}); });
  return edges;
}

std::vector<SelectedEdge> select_users_for_item(
    Index item, const CsrMatrix& preference_by_item,
    const ClusterAssignment& user_clusters) {
  std::vector<SelectedEdge> edges;
  select_per_cluster(preference_by_item.row_indices(item),
                     preference_by_item.row_values(item), user_clusters,
                     [&](Index user) { edges.push_back({user, item}); });
  return edges;
}

namespace {

void fill_degrees(const CsrMatrix& interactions, DirectedSubgraphPair& g) {
  g.num_users = interactions.rows();
  g.num_items = interactions.cols();
  g.user_degree.assign(g.num_users, 0);
  g.item_degree.assign(g.num_items, 0);
  for (Index u = 0; u < g.num_users; ++u) {
    g.user_degree[u] = interactions.row_size(u);
    for (Index i : interactions.row_indices(u)) ++g.item_degree[i];
  }
}

}  // namespace

DirectedSubgraphPair build_subgraphs(const ImplicitPreference& preference,
                                     const ClusterAssignment& user_clusters,
                                     const ClusterAssignment& item_clusters) {
  if (static_cast<Index>(user_clusters.assignment.size()) != preference.rows() ||
      static_cast<Index>(item_clusters.assignment.size()) != preference.cols()) {
    throw DataError("build_subgraphs: cluster assignment sizes do not match H");
  }
  DirectedSubgraphPair g;
  fill_degrees(preference, g);
  for (Index u = 0; u < g.num_users; ++u) {
    auto e = select_items_for_user(u, preference, item_clusters);
    g.item_to_user.insert(g.item_to_user.end(), e.begin(), e.end());
  }
  const CsrMatrix by_item = preference.transpose();
  for (Index i = 0; i < g.num_items; ++i) {
    auto e = select_users_for_item(i, by_item, user_clusters);
    g.user_to_item.insert(g.user_to_item.end(), e.begin(), e.end());
  }
  std::sort(g.user_to_item.begin(), g.user_to_item.end());
  return g;
}

DirectedSubgraphPair full_subgraphs(const CsrMatrix& interactions) {
  DirectedSubgraphPair g;
  fill_degrees(interactions, g);
  for (Index u = 0; u < g.num_users; ++u) {
    for (Index i : interactions.row_indices(u)) g.item_to_user.push_back({u, i});
  }
  g.user_to_item = g.item_to_user;
  return g;
}

void write_subgraphs_csv(const std::filesystem::path& path,
                         const DirectedSubgraphPair& graphs) {
  std::string out = "user_idx,item_idx,direction\n";
  for (const auto& e : graphs.item_to_user) {
    out += std::to_string(e.user) + ',' + std::to_string(e.item) + ",i2u\n";
  }
  for (const auto& e : graphs.user_to_item) {
    out += std::to_string(e.user) + ',' + std::to_string(e.item) + ",u2i\n";
  }
  io::write_file_atomic(path, out);
}

DirectedSubgraphPair read_subgraphs_csv(const std::filesystem::path& path,
                                        const CsrMatrix& interactions) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  DirectedSubgraphPair g;
  fill_degrees(interactions, g);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = io::split_csv_line(line);
    if (f.size() != 3) throw DataError(path.string() + ": bad edge line");
    SelectedEdge e{static_cast<Index>(std::stol(f[0])),
                   static_cast<Index>(std::stol(f[1]))};
    if (!interactions.contains(e.user, e.item)) {
      throw DataError(path.string() + ": selected edge is not an interaction");
    }
    (f[2] == "i2u" ? g.item_to_user : g.user_to_item).push_back(e);
  }
  std::sort(g.item_to_user.begin(), g.item_to_user.end());
  std::sort(g.user_to_item.begin(), g.user_to_item.end());
  return g;
}

void write_clusters_csv(const std::filesystem::path& path,
                        const ClusterAssignment& clusters) {
  std::string out = "entity_idx,cluster_id\n";
  for (size_t p = 0; p < clusters.assignment.size(); ++p) {
    out += std::to_string(p) + ',' + std::to_string(clusters.assignment[p]) + '\n';
  }
  io::write_file_atomic(path, out);
}

}  // namespace drgame::cluster
