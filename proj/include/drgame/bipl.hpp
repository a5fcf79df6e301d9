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

// Balance-driven implicit preference learning: turns raw playtime into
// per-item percentiles, user-category preference ratios, and the balanced
// per-interaction preference that drives neighbor selection.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "drgame/sparse.hpp"

namespace drgame::bipl {

// Dense |U| x |C| user-category preference.
using CategoryPreference = Eigen::MatrixXd;

// For an interaction (u, i), the share of item i's interacting users whose
// playtime is <= R(u, i), ties included. Values lie in (0, 1]; the support
// is exactly the support of R.
PercentileMatrix percentile_transform(const PlaytimeMatrix& playtime);

// Which games form the denominator of a user's global category share.
enum class GlobalDenominator {
  // Games carrying at least one category the user has touched (each game
  // counted once).
  kAnyTouchedCategory,
  // Alternative reading: one count per (game, touched category) pair, so
  // multi-category games weigh more.
  kTouchedCategoryOccurrences,
};

// P(u, c) = local share of category c among u's interactions divided by
// the global share of c among the games relevant to u. Users without
// interactions get a zero row.
CategoryPreference category_preference(
    const PlaytimeMatrix& playtime, const PercentileMatrix& percentile,
    const CategoryMatrix& categories,
    GlobalDenominator denominator = GlobalDenominator::kAnyTouchedCategory);

// H(u, i) = (sum_c P(u, c) Q(i, c)) * percentile(u, i), evaluated only on
// the stored entries of the percentile matrix.
ImplicitPreference implicit_preference(const CategoryPreference& preference,
                                       const CategoryMatrix& categories,
                                       const PercentileMatrix& percentile);

struct HistogramBin {
  double lo;
  double hi;
  int64_t count;
};

// Equal-width histogram of stored values over [min, max]. The last bin is
// closed on the right. When every value is equal they all land in bin 0.
std::vector<HistogramBin> distribution_report(std::span<const double> values,
                                              int bins);
inline std::vector<HistogramBin> distribution_report(const CsrMatrix& m,
                                                     int bins) {
  return distribution_report(m.values(), bins);
}

// CSV with header bin_lo,bin_hi,count.
void write_histogram_csv(const std::filesystem::path& path,
                         std::span<const HistogramBin> bins);

// Coefficient of variation (population std / mean) of the stored values.
double coefficient_of_variation(std::span<const double> values);

}  // namespace drgame::bipl
