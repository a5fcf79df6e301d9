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

#include <algorithm>
#include <numeric>

#include "../support/oracles.hpp"
#include "drgame/error.hpp"
#include "drgame/eval.hpp"

using namespace drgame;

namespace {

CategoryMatrix categories(Index items, Index cats,
                          std::vector<std::pair<Index, Index>> members) {
  std::vector<Triplet> t;
  for (auto [i, c] : members) t.push_back({i, c, 1.0});
  return CategoryMatrix(CsrMatrix::from_triplets(items, cats, std::move(t)));
}

}  // namespace

TEST_CASE("recall examples") {
  eval::RankedLists ranked{{0, 1, 2}, {3, 4}};
  CHECK(eval::recall_at_n(ranked, {{0, 2}, {3}}, 3) == 1.0);
  CHECK(eval::recall_at_n(ranked, {{5}, {6}}, 3) == 0.0);
  // Hits 1 of 2 and 2 of 4.
  eval::RankedLists two{{0, 9}, {1, 2, 8}};
  CHECK(eval::recall_at_n(two, {{0, 5}, {1, 2, 6, 7}}, 3) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(eval::recall_at_n(ranked, {{}, {}}, 3), DataError);
}

TEST_CASE("hit ratio definitions") {
  eval::RankedLists all{{0, 1}, {2}};
  auto full = eval::hit_ratio_at_n(all, {{0, 1}, {2}}, 5);
  CHECK(full.primary == 1.0);
  CHECK(full.classic == 1.0);

  std::vector<Index> top(100);
  std::iota(top.begin(), top.end(), 10);
  auto one = eval::hit_ratio_at_n({top}, {{0, 1, 2, 50}}, 100);
  CHECK(one.primary == 0.25);
  CHECK(one.classic == 1.0);

  auto none = eval::hit_ratio_at_n({{7}}, {{1}}, 1);
  CHECK(none.primary == 0.0);
  CHECK(none.classic == 0.0);
}

TEST_CASE("coverage examples") {
  auto q = categories(3, 4, {{0, 0}, {1, 1}, {1, 0}, {2, 0}});
  CHECK(eval::coverage_at_n({{0, 1}}, q, 2) == 0.5);
  // Two items sharing one category count it once.
  CHECK(eval::coverage_at_n({{0, 2}}, q, 2) == 0.25);
  auto all = categories(2, 2, {{0, 0}, {1, 1}});
  CHECK(eval::coverage_at_n({{0, 1}, {1, 0}}, all, 2) == 1.0);
}

TEST_CASE("metrics match brute force and grow with N") {
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const Index users = 10, items = 40;
    auto q = CategoryMatrix(oracle::random_categories(items, 7, rng));
    eval::RankedLists ranked(users);
    eval::HeldOut test(users);
    for (Index u = 0; u < users; ++u) {
      std::vector<Index> perm(items);
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(std::span<Index>(perm));
      ranked[u].assign(perm.begin(), perm.begin() + 30);
      if (u == 3) continue;  // one user without held-out items
      const int t = 1 + rng.index(8);
      std::vector<Index> held(perm.begin() + 20 - t / 2, perm.begin() + 20 - t / 2 + t);
      std::sort(held.begin(), held.end());
      test[u] = held;
    }
    std::vector<Index> evaluated;
    for (Index u = 0; u < users; ++u) {
      if (!test[u].empty()) evaluated.push_back(u);
    }
    double prev_recall = 0, prev_cov = 0;
    for (int n : {5, 10, 20, 30}) {
      const double r = eval::recall_at_n(ranked, test, n);
      const auto h = eval::hit_ratio_at_n(ranked, test, n);
      const double c = eval::coverage_at_n(ranked, q, n, evaluated);
      CHECK(std::abs(r - oracle::recall(ranked, test, n)) <= 1e-12);
      CHECK(std::abs(h.primary - oracle::hit_primary(ranked, test, n)) <= 1e-12);
      CHECK(std::abs(h.classic - oracle::hit_classic(ranked, test, n)) <= 1e-12);
      CHECK(std::abs(c - oracle::coverage(ranked, test, q.to_dense(), n)) <= 1e-12);
      CHECK(r >= prev_recall);
      CHECK(c >= prev_cov);
      for (double v : {r, h.primary, h.classic, c}) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
      prev_recall = r;
      prev_cov = c;
    }
    auto report = eval::evaluate_rankings(ranked, test, q, std::vector<int>{5, 10});
    CHECK(report.evaluated_users == 9);
    CHECK(report.skipped_users == 1);
  }
}

TEST_CASE("evaluate excludes training items and a perfect model scores one") {
  // Three users; user u likes item u in test and item u + 3 in train.
  SplitDataset split;
  for (Index u = 0; u < 3; ++u) {
    split.train.push_back({u, u + 3, 1});
    split.test.push_back({u, u, 1});
  }
  Eigen::MatrixXd users = Eigen::MatrixXd::Zero(3, 6);
  Eigen::MatrixXd items = Eigen::MatrixXd::Zero(6, 6);
  for (Index u = 0; u < 3; ++u) {
    users(u, u) = 1;
    items(u, u) = 1;
    items(u + 3, u) = 5;  // training item scores higher but must be excluded
  }
  auto q = categories(6, 2, {{0, 0}, {1, 1}, {2, 0}, {3, 1}, {4, 0}, {5, 1}});
  auto report = eval::evaluate(users, items, split, q, std::vector<int>{1, 2, 3});
  for (const auto& m : report.at) {
    CHECK(m.recall == 1.0);
    CHECK(m.hit_ratio_primary == 1.0);
    CHECK(m.hit_ratio_classic == 1.0);
  }
  CHECK(report.at[0].coverage == 0.5);
  auto json = report.to_json();
  CHECK(json["metrics"][0]["N"] == 1);
  CHECK(json.contains("config_fingerprint"));
}

TEST_CASE("sweep csv layout") {
  eval::SweepRow row{{0.6, 0.06, true, false, true}, {10, 0.5, 0.5, 0.75, 0.25, 1.0}};
  std::vector<eval::SweepRow> rows{row, row};
  const std::string csv = eval::sweep_csv(rows);
  CHECK(csv.rfind("beta_u,beta_i,selection_us,selection_is,weights,N,recall,"
                  "hit_ratio_primary,hit_ratio_classic,coverage\n", 0) == 0);
  CHECK(csv.find("0.6,0.06,1,0,1,10,0.5,0.5,0.75,0.25\n") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
