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

// Top-N accuracy and category-diversity metrics.
//
// All per-user metrics average over the users whose held-out list is
// non-empty; other users are skipped and counted.

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "drgame/dataset.hpp"
#include "drgame/sparse.hpp"

namespace drgame::eval {

// Ranked item lists indexed by user; only the first N entries are read.
using RankedLists = std::vector<std::vector<Index>>;
// Held-out items per user, sorted.
using HeldOut = std::vector<std::vector<Index>>;

// Mean of |top-N and test_u| / |test_u|.
double recall_at_n(const RankedLists& ranked, const HeldOut& test, int n);

struct HitRatio {
  double primary;  // mean of hits / min(N, |test_u|)
  double classic;  // share of users with at least one hit
};
HitRatio hit_ratio_at_n(const RankedLists& ranked, const HeldOut& test, int n);

// Mean over `users` of |union of categories in top-N| / |C|. Every category
// of a multi-category item counts.
double coverage_at_n(const RankedLists& ranked, const CategoryMatrix& categories,
                     int n, std::span<const Index> users);
// Same, over every user in `ranked`.
double coverage_at_n(const RankedLists& ranked, const CategoryMatrix& categories,
                     int n);
// Catalog-level variant: categories covered by the union of all lists.
double global_coverage_at_n(const RankedLists& ranked,
                            const CategoryMatrix& categories, int n,
                            std::span<const Index> users);

struct MetricsAtN {
  int n = 0;
  double recall = 0.0;
  double hit_ratio_primary = 0.0;
  double hit_ratio_classic = 0.0;
  double coverage = 0.0;
  double global_coverage = 0.0;
};

struct MetricsReport {
  std::vector<MetricsAtN> at;
  Index evaluated_users = 0;
  Index skipped_users = 0;  // empty held-out set
  std::string fingerprint;

  nlohmann::json to_json() const;
};

// Top-max(N) per user from the fused tables, excluding training items,
// then every metric at each N against the chosen held-out fold.
MetricsReport evaluate(const Eigen::MatrixXd& user_embeddings,
                       const Eigen::MatrixXd& item_embeddings,
                       const SplitDataset& split,
                       const CategoryMatrix& categories,
                       std::span<const int> ns, Fold held_out = Fold::kTest);

// Same from precomputed rankings.
MetricsReport evaluate_rankings(const RankedLists& ranked, const HeldOut& test,
                                const CategoryMatrix& categories,
                                std::span<const int> ns);

struct SweepCell {
  double beta_u = 0.6;
  double beta_i = 0.06;
  bool selection_us = true;  // item selection for users (item->user graph)
  bool selection_is = true;  // user selection for items (user->item graph)
  bool weights = true;       // category loss weights

  std::string label() const;
};

struct SweepRow {
  SweepCell cell;
  MetricsAtN metrics;
};

// Header: beta_u,beta_i,selection_us,selection_is,weights,N,recall,
// hit_ratio_primary,hit_ratio_classic,coverage
std::string sweep_csv(std::span<const SweepRow> rows);

}  // namespace drgame::eval
