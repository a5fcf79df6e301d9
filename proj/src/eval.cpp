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

#include "drgame/eval.hpp"

#include <algorithm>

#include "drgame/error.hpp"
#include "drgame/gnn.hpp"
#include "drgame/io.hpp"

namespace drgame::eval {

namespace {

std::span<const Index> head(const std::vector<Index>& list, int n) {
  return {list.data(), std::min<size_t>(list.size(), static_cast<size_t>(n))};
}

size_t hits(std::span<const Index> top, const std::vector<Index>& test) {
  size_t count = 0;
  for (Index i : top) {
    if (std::binary_search(test.begin(), test.end(), i)) ++count;
  }
  return count;
}

void check(const RankedLists& ranked, const HeldOut& test, int n) {
  if (n < 1) throw UsageError("N must be >= 1");
  if (ranked.size() != test.size()) {
    throw DataError("rankings and held-out sets cover different users");
  }
}

std::vector<Index> users_with_tests(const HeldOut& test) {
  std::vector<Index> users;
  for (size_t u = 0; u < test.size(); ++u) {
    if (!test[u].empty()) users.push_back(static_cast<Index>(u));
  }
  if (users.empty()) throw DataError("no user has a non-empty held-out set");
  return users;
}

}  // namespace

double recall_at_n(const RankedLists& ranked, const HeldOut& test, int n) {
  check(ranked, test, n);
  const auto users = users_with_tests(test);
  double total = 0.0;
  for (Index u : users) {
    total += static_cast<double>(hits(head(ranked[u], n), test[u])) /
             static_cast<double>(test[u].size());
  }
  return total / static_cast<double>(users.size());
}

HitRatio hit_ratio_at_n(const RankedLists& ranked, const HeldOut& test, int n) {
  check(ranked, test, n);
  const auto users = users_with_tests(test);
  HitRatio out{0.0, 0.0};
  for (Index u : users) {
    const size_t h = hits(head(ranked[u], n), test[u]);
    out.primary += static_cast<double>(h) /
                   static_cast<double>(std::min<size_t>(n, test[u].size()));
    out.classic += h > 0 ? 1.0 : 0.0;
  }
  out.primary /= static_cast<double>(users.size());
  out.classic /= static_cast<double>(users.size());
  return out;
}

double coverage_at_n(const RankedLists& ranked, const CategoryMatrix& categories,
                     int n, std::span<const Index> users) {
  if (n < 1) throw UsageError("N must be >= 1");
  if (users.empty()) throw DataError("coverage over an empty user set");
  const Index num_cats = categories.cols();
  std::vector<char> seen(num_cats);
  double total = 0.0;
  for (Index u : users) {
    std::fill(seen.begin(), seen.end(), 0);
    Index covered = 0;
    for (Index i : head(ranked.at(u), n)) {
      for (Index c : categories.row_indices(i)) {
        if (!seen[c]) {
          seen[c] = 1;
          ++covered;
        }
      }
    }
    total += static_cast<double>(covered) / static_cast<double>(num_cats);
  }
  return total / static_cast<double>(users.size());
}

double coverage_at_n(const RankedLists& ranked, const CategoryMatrix& categories,
                     int n) {
  std::vector<Index> users(ranked.size());
  for (size_t u = 0; u < users.size(); ++u) users[u] = static_cast<Index>(u);
  return coverage_at_n(ranked, categories, n, users);
}

double global_coverage_at_n(const RankedLists& ranked,
                            const CategoryMatrix& categories, int n,
                            std::span<const Index> users) {
  std::vector<char> seen(categories.cols(), 0);
  for (Index u : users) {
    for (Index i : head(ranked.at(u), n)) {
      for (Index c : categories.row_indices(i)) seen[c] = 1;
    }
  }
  return static_cast<double>(std::count(seen.begin(), seen.end(), 1)) /
         static_cast<double>(categories.cols());
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json metrics = nlohmann::json::array();
  for (const auto& m : at) {
    metrics.push_back({{"N", m.n},
                       {"recall", m.recall},
                       {"hit_ratio_primary", m.hit_ratio_primary},
                       {"hit_ratio_classic", m.hit_ratio_classic},
                       {"coverage", m.coverage},
                       {"global_coverage", m.global_coverage}});
  }
  return {{"metrics", metrics},
          {"evaluated_users", evaluated_users},
          {"skipped_users", skipped_users},
          {"config_fingerprint", fingerprint}};
}

MetricsReport evaluate_rankings(const RankedLists& ranked, const HeldOut& test,
                                const CategoryMatrix& categories,
                                std::span<const int> ns) {
  if (ns.empty()) throw UsageError("no N values to evaluate");
  const auto users = users_with_tests(test);
  MetricsReport report;
  report.evaluated_users = static_cast<Index>(users.size());
  report.skipped_users = static_cast<Index>(test.size() - users.size());
  for (int n : ns) {
    MetricsAtN m;
    m.n = n;
    m.recall = recall_at_n(ranked, test, n);
    const HitRatio hr = hit_ratio_at_n(ranked, test, n);
    m.hit_ratio_primary = hr.primary;
    m.hit_ratio_classic = hr.classic;
    m.coverage = coverage_at_n(ranked, categories, n, users);
    m.global_coverage = global_coverage_at_n(ranked, categories, n, users);
    report.at.push_back(m);
  }
  return report;
}

MetricsReport evaluate(const Eigen::MatrixXd& user_embeddings,
                       const Eigen::MatrixXd& item_embeddings,
                       const SplitDataset& split,
                       const CategoryMatrix& categories,
                       std::span<const int> ns, Fold held_out) {
  if (ns.empty()) throw UsageError("no N values to evaluate");
  const Index num_users = static_cast<Index>(user_embeddings.rows());
  const auto train = items_by_user(split.train, num_users);
  const auto& fold = held_out == Fold::kTest         ? split.test
                     : held_out == Fold::kValidation ? split.validation
                                                     : split.train;
  const auto test = items_by_user(fold, num_users);
  const int max_n = *std::max_element(ns.begin(), ns.end());
  RankedLists ranked(num_users);
  for (Index u = 0; u < num_users; ++u) {
    if (test[u].empty()) continue;
    ranked[u] = gnn::recommend_top_n(user_embeddings, item_embeddings, u, max_n,
                                     train[u])
                    .items;
  }
  return evaluate_rankings(ranked, test, categories, ns);
}

std::string SweepCell::label() const {
  return "beta_u=" + io::format_double(beta_u) +
         " beta_i=" + io::format_double(beta_i) +
         " us=" + (selection_us ? "on" : "off") +
         " is=" + (selection_is ? "on" : "off") +
         " weights=" + (weights ? "on" : "off");
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::string out =
      "beta_u,beta_i,selection_us,selection_is,weights,N,recall,"
      "hit_ratio_primary,hit_ratio_classic,coverage\n";
  for (const auto& r : rows) {
    out += io::format_double(r.cell.beta_u) + ',' +
           io::format_double(r.cell.beta_i) + ',' +
           (r.cell.selection_us ? "1" : "0") + ',' +
           (r.cell.selection_is ? "1" : "0") + ',' +
           (r.cell.weights ? "1" : "0") + ',' + std::to_string(r.metrics.n) +
           ',' + io::format_double(r.metrics.recall) + ',' +
           io::format_double(r.metrics.hit_ratio_primary) + ',' +
           io::format_double(r.metrics.hit_ratio_classic) + ',' +
           io::format_double(r.metrics.coverage) + '\n';
  }
  return out;
}

}  // namespace drgame::eval
