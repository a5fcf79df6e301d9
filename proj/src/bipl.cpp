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

#include "drgame/bipl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drgame/error.hpp"
#include "drgame/io.hpp"

namespace drgame::bipl {

PercentileMatrix percentile_transform(const PlaytimeMatrix& playtime) {
  // Column view: for each item, the playtimes of its interacting users.
  const CsrMatrix by_item = playtime.transpose();
  CsrMatrix ranked = by_item;
  std::vector<double> sorted;
  for (Index i = 0; i < by_item.rows(); ++i) {
    auto vals = by_item.row_values(i);
    if (vals.empty()) continue;
    sorted.assign(vals.begin(), vals.end());
    std::sort(sorted.begin(), sorted.end());
    const double total = static_cast<double>(sorted.size());
    auto out = ranked.row_values(i);
    for (size_t k = 0; k < vals.size(); ++k) {
      const auto at_most =
          std::upper_bound(sorted.begin(), sorted.end(), vals[k]) -
          sorted.begin();
      out[k] = static_cast<double>(at_most) / total;
    }
  }
  return PercentileMatrix(ranked.transpose());
}

CategoryPreference category_preference(const PlaytimeMatrix& playtime,
                                       const PercentileMatrix& percentile,
                                       const CategoryMatrix& categories,
                                       GlobalDenominator denominator) {
  if (playtime.cols() != categories.rows() ||
      !playtime.same_structure(percentile)) {
    throw DataError("category_preference: inconsistent shapes");
  }
  const Index num_users = playtime.rows();
  const Index num_cats = categories.cols();
  const CsrMatrix items_of_category = categories.transpose();

  // Global frequency of each category: #(i | Q(i, c) = 1).
  std::vector<double> frequency(num_cats, 0.0);
  for (Index c = 0; c < num_cats; ++c) {
    frequency[c] = items_of_category.row_size(c);
  }

  CategoryPreference pref = CategoryPreference::Zero(num_users, num_cats);
  std::vector<double> local(num_cats);
  std::vector<double> affinity(num_cats);  // row u of percentile * Q
  std::vector<char> game_counted(categories.rows());
  for (Index u = 0; u < num_users; ++u) {
    auto items = percentile.row_indices(u);
    if (items.empty()) continue;
    std::fill(local.begin(), local.end(), 0.0);
    std::fill(affinity.begin(), affinity.end(), 0.0);
    auto ranks = percentile.row_values(u);
    for (size_t k = 0; k < items.size(); ++k) {
      for (Index c : categories.row_indices(items[k])) {
        local[c] += 1.0;
        affinity[c] += ranks[k];
      }
    }

    double relevant_games = 0.0;
    if (denominator == GlobalDenominator::kAnyTouchedCategory) {
      std::fill(game_counted.begin(), game_counted.end(), 0);
      for (Index c = 0; c < num_cats; ++c) {
        if (affinity[c] <= 0.0) continue;
        for (Index i : items_of_category.row_indices(c)) {
          if (!game_counted[i]) {
            game_counted[i] = 1;
            relevant_games += 1.0;
          }
        }
      }
    } else {
      for (Index c = 0; c < num_cats; ++c) {
        if (affinity[c] > 0.0) relevant_games += frequency[c];
      }
    }

    const double interactions = static_cast<double>(items.size());
    for (Index c = 0; c < num_cats; ++c) {
      if (local[c] == 0.0) continue;
      const double p_local = local[c] / interactions;
      const double p_global = frequency[c] / relevant_games;
      pref(u, c) = p_local / p_global;
    }
  }
  return pref;
}

ImplicitPreference implicit_preference(const CategoryPreference& preference,
                                       const CategoryMatrix& categories,
                                       const PercentileMatrix& percentile) {
  if (preference.rows() != percentile.rows() ||
      preference.cols() != categories.cols() ||
      categories.rows() != percentile.cols()) {
    throw DataError("implicit_preference: inconsistent shapes");
  }
  std::vector<double> values(percentile.values().size());
  size_t k = 0;
  for (Index u = 0; u < percentile.rows(); ++u) {
    auto items = percentile.row_indices(u);
    auto ranks = percentile.row_values(u);
    for (size_t n = 0; n < items.size(); ++n, ++k) {
      double category_score = 0.0;
      for (Index c : categories.row_indices(items[n])) {
        category_score += preference(u, c);
      }
      values[k] = category_score * ranks[n];
    }
  }
  return ImplicitPreference(percentile.with_values(std::move(values)));
}

std::vector<HistogramBin> distribution_report(std::span<const double> values,
                                              int bins) {
  if (bins < 2) throw UsageError("histogram needs at least 2 bins");
  if (values.empty()) throw DataError("histogram of an empty matrix");
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *min_it;
  const double hi = *max_it;
  const double width = (hi - lo) / bins;
  std::vector<HistogramBin> out(static_cast<size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    out[b].lo = lo + width * b;
    out[b].hi = b + 1 == bins ? hi : lo + width * (b + 1);
    out[b].count = 0;
  }
  for (double v : values) {
    int b = width > 0.0 ? static_cast<int>((v - lo) / width) : 0;
    b = std::clamp(b, 0, bins - 1);
    ++out[b].count;
  }
  return out;
}

void write_histogram_csv(const std::filesystem::path& path,
                         std::span<const HistogramBin> bins) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (const auto& b : bins) {
    out += io::format_double(b.lo) + ',' + io::format_double(b.hi) + ',' +
           std::to_string(b.count) + '\n';
  }
  io::write_file_atomic(path, out);
}

double coefficient_of_variation(std::span<const double> values) {
  if (values.empty()) throw DataError("coefficient of variation of nothing");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= n;
  if (mean == 0.0) throw DataError("coefficient of variation with zero mean");
  return std::sqrt(var) / mean;
}

}  // namespace drgame::bipl
