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

#include "drgame/dataset.hpp"

namespace drgame::synthetic {

// Desk-scale stand-in for a game-store dump.
//
// Categories have Zipf-like popularity and are partitioned into groups;
// every user belongs to one group and draws most interactions from items of
// that group's categories. Items carry 1-3 categories. Playtimes are zero
// with probability `zero_share`, otherwise Pareto distributed.
struct SyntheticConfig {
  Index users = 200;
  Index items = 100;
  Index categories = 10;
  uint64_t seed = 0;
  double zero_share = 0.3;
  int min_interactions = 8;
  int max_interactions = 30;
  double in_group_share = 0.8;
  double category_skew = 1.0;  // popularity of category c ~ 1 / (c + 1)^skew
  double pareto_shape = 1.2;
  double pareto_scale = 10.0;  // minutes
};

struct SyntheticData {
  std::vector<RawInteraction> interactions;  // merged, sorted
  std::vector<RawItem> items;
};

// UsageError unless users, items and categories are all >= 2.
SyntheticData make_synthetic(const SyntheticConfig& config);

// Writes interactions.jsonl and items.jsonl into `dir`.
void write_synthetic(const SyntheticData& data,
                     const std::filesystem::path& dir);

}  // namespace drgame::synthetic
