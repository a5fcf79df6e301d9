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


#include <doctest.h>

#include <map>
#include <set>

#include "../support/oracles.hpp"
#include "../support/tempdir.hpp"
#include "drgame/cluster_select.hpp"
#include "drgame/error.hpp"

using namespace drgame;
using cluster::ClusterAssignment;
using cluster::EntityKind;
using cluster::SelectedEdge;

namespace {

ClusterAssignment fixed_clusters(std::vector<Index> assignment, EntityKind kind) {
  ClusterAssignment c;
  c.kind = kind;
  c.k = *std::max_element(assignment.begin(), assignment.end()) + 1;
  c.assignment = std::move(assignment);
  return c;
}

ImplicitPreference random_h(Index users, Index items, double density, Rng& rng) {
  std::vector<Triplet> t;
  for (Index u = 0; u < users; ++u) {
    for (Index i = 0; i < items; ++i) {
      if (u == i % users || rng.uniform() < density) {
        // Coarse values so ties happen.
        t.push_back({u, i, 0.25 * (1 + rng.index(4))});
      }
    }
  }
  return ImplicitPreference(CsrMatrix::from_triplets(users, items, std::move(t)));
}

ClusterAssignment random_clusters(Index n, Index k, EntityKind kind, Rng& rng) {
  std::vector<Index> a(n);
  for (Index x = 0; x < n; ++x) a[x] = x < k ? x : static_cast<Index>(rng.index(k));
  ClusterAssignment c;
  c.kind = kind;
  c.k = k;
  c.assignment = a;
  return c;
}

// For each (node, cluster) scan every neighbor and keep the strict maximum.
std::set<SelectedEdge> oracle_items_for_users(const Eigen::MatrixXd& h,
                                              const Eigen::MatrixXd& support,
                                              const ClusterAssignment& items) {
  std::set<SelectedEdge> out;
  for (Index u = 0; u < h.rows(); ++u) {
    for (Index c = 0; c < items.k; ++c) {
      Index best = -1;
      for (Index i = 0; i < h.cols(); ++i) {
        if (support(u, i) == 0 || items.assignment[i] != c) continue;
        if (best < 0 || h(u, i) > h(u, best)) best = i;
      }
      if (best >= 0) out.insert({u, best});
    }
  }
  return out;
}

std::set<SelectedEdge> oracle_users_for_items(const Eigen::MatrixXd& h,
                                              const Eigen::MatrixXd& support,
                                              const ClusterAssignment& users) {
  std::set<SelectedEdge> out;
  for (Index i = 0; i < h.cols(); ++i) {
    for (Index c = 0; c < users.k; ++c) {
      Index best = -1;
      for (Index u = 0; u < h.rows(); ++u) {
        if (support(u, i) == 0 || users.assignment[u] != c) continue;
        if (best < 0 || h(u, i) > h(best, i)) best = u;
      }
      if (best >= 0) out.insert({best, i});
    }
  }
  return out;
}

Eigen::MatrixXd support_of(const CsrMatrix& m) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  for (const auto& t : m.triplets()) s(t.row, t.col) = 1;
  return s;
}

}  // namespace

TEST_CASE("kmeans with k = n and k = 1") {
  Eigen::MatrixXd pts(4, 2);
  pts << 0, 0, 1, 0, 5, 5, 9, 1;
  auto all = cluster::kmeans(pts, 4, 1);
  std::set<Index> ids(all.assignment.begin(), all.assignment.end());
  CHECK(ids.size() == 4);
  for (Index x = 0; x < 4; ++x) {
    CHECK((all.centroids.row(all.assignment[x]) - pts.row(x)).norm() == 0.0);
  }
  auto one = cluster::kmeans(pts, 1, 1);
  CHECK(one.k == 1);
  CHECK((one.centroids.row(0) - pts.colwise().mean()).norm() < 1e-12);
}

TEST_CASE("kmeans recovers two separated blobs") {
  Rng rng(21);
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Eigen::MatrixXd pts(60, 3);
    std::vector<int> label(60);
    for (int x = 0; x < 60; ++x) {
      label[x] = x % 2;
      for (int d = 0; d < 3; ++d) {
        pts(x, d) = (d == 0 ? 10.0 * label[x] : 0.0) + 0.1 * rng.normal();
      }
    }
    auto c = cluster::kmeans(pts, 2, seed);
    for (int x = 0; x < 60; ++x) {
      CHECK((c.assignment[x] == c.assignment[0]) == (label[x] == label[0]));
    }
  }
}

TEST_CASE("kmeans input errors") {
  Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(3, 2);
  CHECK_THROWS_AS(cluster::kmeans(pts, 4, 0), UsageError);
  CHECK_THROWS_AS(cluster::kmeans(pts, 0, 0), UsageError);
  pts(1, 1) = std::nan("");
  CHECK_THROWS_AS(cluster::kmeans(pts, 2, 0), DataError);
}

TEST_CASE("kmeans never leaves a cluster empty and is deterministic") {
  Eigen::MatrixXd pts(6, 1);
  pts << 0, 0, 0, 0, 0, 1;  // many duplicates
  auto a = cluster::kmeans(pts, 4, 3);
  std::vector<int> sizes(4, 0);
  for (Index x : a.assignment) ++sizes[x];
  for (int s : sizes) CHECK(s > 0);
  auto b = cluster::kmeans(pts, 4, 3);
  CHECK(a.assignment == b.assignment);
}

TEST_CASE("cluster counts") {
  CHECK(cluster::cluster_count(0.6, 10) == 6);
  CHECK(cluster::cluster_count(0.06, 100) == 6);
  CHECK(cluster::cluster_count(0.001, 10) == 1);
  CHECK(cluster::cluster_count(1.0, 7) == 7);
}

TEST_CASE("per-cluster argmax for a user") {
  // Items 3 and 7 share cluster 0; item 1 sits alone in cluster 1.
  std::vector<Index> a(8, 2);
  a[3] = a[7] = 0;
  a[1] = 1;
  auto items = fixed_clusters(a, EntityKind::kItem);
  ImplicitPreference h(CsrMatrix::from_triplets(1, 8, {{0, 3, 0.2}, {0, 7, 0.9}}));
  auto edges = cluster::select_items_for_user(0, h, items);
  REQUIRE(edges.size() == 1);
  CHECK(edges[0] == SelectedEdge{0, 7});

  ImplicitPreference tie(CsrMatrix::from_triplets(1, 8, {{0, 2, 0.5}, {0, 5, 0.5}}));
  auto t = cluster::select_items_for_user(0, tie, items);
  REQUIRE(t.size() == 1);
  CHECK(t[0] == SelectedEdge{0, 2});
}

TEST_CASE("per-cluster argmax for an item") {
  std::vector<Index> a(10, 1);
  a[1] = a[9] = 0;
  auto users = fixed_clusters(a, EntityKind::kUser);
  ImplicitPreference h(CsrMatrix::from_triplets(10, 1, {{1, 0, 0.4}, {9, 0, 0.8}}));
  auto edges = cluster::select_users_for_item(0, h.transpose(), users);
  REQUIRE(edges.size() == 1);
  CHECK(edges[0] == SelectedEdge{9, 0});

  auto singles = cluster::singleton_clusters(10, EntityKind::kUser);
  CHECK(cluster::select_users_for_item(0, h.transpose(), singles).size() == 2);
}

TEST_CASE("singleton clusters reproduce the full graph") {
  Rng rng(4);
  auto h = random_h(6, 5, 0.4, rng);
  auto g = cluster::build_subgraphs(h, cluster::singleton_clusters(6, EntityKind::kUser),
                                    cluster::singleton_clusters(5, EntityKind::kItem));
  auto full = cluster::full_subgraphs(h);
  CHECK(g.item_to_user == full.item_to_user);
  CHECK(g.user_to_item == full.user_to_item);
  CHECK(static_cast<int64_t>(g.item_to_user.size()) == h.nnz());
}

TEST_CASE("one item cluster keeps one in-edge per user") {
  Rng rng(8);
  auto h = random_h(7, 9, 0.5, rng);
  std::vector<Index> zeros(9, 0);
  auto g = cluster::build_subgraphs(h, cluster::singleton_clusters(7, EntityKind::kUser),
                                    fixed_clusters(zeros, EntityKind::kItem));
  std::map<Index, int> in_degree;
  for (const auto& e : g.item_to_user) ++in_degree[e.user];
  for (Index u = 0; u < 7; ++u) CHECK(in_degree[u] == 1);
}

TEST_CASE("selection matches the brute-force oracle and its invariants") {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const Index nu = 5, ni = 6;
    auto h = random_h(nu, ni, 0.5, rng);
    const Index ku = 1 + static_cast<Index>(rng.index(nu));
    const Index ki = 1 + static_cast<Index>(rng.index(ni));
    auto users = random_clusters(nu, ku, EntityKind::kUser, rng);
    auto items = random_clusters(ni, ki, EntityKind::kItem, rng);
    auto g = cluster::build_subgraphs(h, users, items);

    const Eigen::MatrixXd hd = h.to_dense();
    const Eigen::MatrixXd s = support_of(h);
    std::set<SelectedEdge> i2u(g.item_to_user.begin(), g.item_to_user.end());
    std::set<SelectedEdge> u2i(g.user_to_item.begin(), g.user_to_item.end());
    CHECK(i2u == oracle_items_for_users(hd, s, items));
    CHECK(u2i == oracle_users_for_items(hd, s, users));

    std::vector<int> in_u(nu, 0), in_i(ni, 0);
    for (const auto& e : i2u) {
      CHECK(h.contains(e.user, e.item));
      ++in_u[e.user];
    }
    for (const auto& e : u2i) {
      CHECK(h.contains(e.user, e.item));
      ++in_i[e.item];
    }
    for (Index u = 0; u < nu; ++u) {
      CHECK(in_u[u] <= std::min<Index>(ki, h.row_size(u)));
      CHECK(g.user_degree[u] == h.row_size(u));
    }
    const CsrMatrix ht = h.transpose();
    for (Index i = 0; i < ni; ++i) {
      CHECK(in_i[i] <= std::min<Index>(ku, ht.row_size(i)));
      CHECK(g.item_degree[i] == ht.row_size(i));
    }
  }
}

TEST_CASE("subgraphs and clusters persist") {
  Rng rng(2);
  auto h = random_h(4, 4, 0.6, rng);
  auto users = random_clusters(4, 2, EntityKind::kUser, rng);
  auto items = random_clusters(4, 2, EntityKind::kItem, rng);
  auto g = cluster::build_subgraphs(h, users, items);
  testing_support::TempDir dir;
  cluster::write_subgraphs_csv(dir / "g.csv", g);
  auto back = cluster::read_subgraphs_csv(dir / "g.csv", h);
  CHECK(back.item_to_user == g.item_to_user);
  CHECK(back.user_to_item == g.user_to_item);
  CHECK(back.user_degree == g.user_degree);
  CHECK(back.item_degree == g.item_degree);
  cluster::write_clusters_csv(dir / "c.csv", users);
  CHECK(std::filesystem::exists(dir / "c.csv"));
}
