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

#include "drgame/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "drgame/error.hpp"
#include "drgame/io.hpp"
#include "drgame/random.hpp"

namespace drgame::synthetic {

namespace {

// Index drawn proportionally to `weights` restricted to `candidates`.
Index draw_weighted(const std::vector<double>& weights,
                    const std::vector<Index>& candidates, Rng& rng) {
  double total = 0.0;
  for (Index c : candidates) total += weights[c];
  double target = rng.uniform() * total;
  for (Index c : candidates) {
    target -= weights[c];
    if (target < 0.0) return c;
  }
  return candidates.back();
}

std::string pad_id(const char* prefix, Index n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%05d", prefix, n);
  return buf;
}

}  // namespace

SyntheticData make_synthetic(const SyntheticConfig& config) {
  if (config.users < 2 || config.items < 2 || config.categories < 2) {
    throw UsageError("synthetic data needs at least 2 users, items, categories");
  }
  if (config.zero_share < 0.0 || config.zero_share > 1.0) {
    throw UsageError("zero_share must lie in [0, 1]");
  }
  Rng rng = Rng::stream(config.seed, rng_stream::kSynthetic);
  const Index num_cats = config.categories;
  const Index num_groups = std::clamp<Index>(num_cats / 2, 2, 5);

  std::vector<double> popularity(num_cats);
  for (Index c = 0; c < num_cats; ++c) {
    popularity[c] = 1.0 / std::pow(c + 1.0, config.category_skew);
  }
  std::vector<std::vector<Index>> group_categories(num_groups);
  std::vector<Index> all_categories(num_cats);
  for (Index c = 0; c < num_cats; ++c) {
    group_categories[c % num_groups].push_back(c);
    all_categories[c] = c;
  }

  // Item categories.
  std::vector<std::set<Index>> item_cats(config.items);
  for (Index i = 0; i < config.items; ++i) {
    const Index primary =
        i < num_cats ? i : draw_weighted(popularity, all_categories, rng);
    item_cats[i].insert(primary);
    const int extra = static_cast<int>(rng.index(3));
    for (int e = 0; e < extra; ++e) {
      const auto& pool = rng.uniform() < 0.7
                             ? group_categories[primary % num_groups]
                             : all_categories;
      item_cats[i].insert(draw_weighted(popularity, pool, rng));
    }
  }
  for (Index c = config.items; c < num_cats; ++c) {
    item_cats[c % config.items].insert(c);
  }
  std::vector<std::vector<Index>> items_of_category(num_cats);
  for (Index i = 0; i < config.items; ++i) {
    for (Index c : item_cats[i]) items_of_category[c].push_back(i);
  }

  SyntheticData data;
  for (Index i = 0; i < config.items; ++i) {
    RawItem item{pad_id("g", i), {}};
    for (Index c : item_cats[i]) item.categories.push_back(pad_id("cat", c));
    std::sort(item.categories.begin(), item.categories.end());
    data.items.push_back(std::move(item));
  }

  const int span_interactions =
      std::max(0, config.max_interactions - config.min_interactions);
  for (Index u = 0; u < config.users; ++u) {
    const auto& favored = group_categories[u % num_groups];
    int wanted = config.min_interactions +
                 static_cast<int>(rng.index(span_interactions + 1));
    wanted = std::min<int>(wanted, config.items - 1);
    std::set<Index> chosen;
    for (int attempt = 0;
         static_cast<int>(chosen.size()) < wanted && attempt < wanted * 50;
         ++attempt) {
      Index item;
      if (rng.uniform() < config.in_group_share) {
        const Index c = draw_weighted(popularity, favored, rng);
        const auto& pool = items_of_category[c];
        item = pool[rng.index(pool.size())];
      } else {
        item = static_cast<Index>(rng.index(config.items));
      }
      chosen.insert(item);
    }
    for (Index item : chosen) {
      int64_t playtime = 0;
      if (rng.uniform() >= config.zero_share) {
        double v = rng.uniform();
        while (v <= 0.0) v = rng.uniform();
        playtime = static_cast<int64_t>(
            std::floor(config.pareto_scale *
                       std::pow(v, -1.0 / config.pareto_shape)));
        playtime = std::max<int64_t>(playtime, 1);
      }
      data.interactions.push_back({pad_id("p", u), pad_id("g", item), playtime});
    }
  }
  data.interactions = merge_interactions(std::move(data.interactions));
  return data;
}

void write_synthetic(const SyntheticData& data,
                     const std::filesystem::path& dir) {
  std::string interactions;
  for (const auto& r : data.interactions) {
    interactions += nlohmann::json{{"user_id", r.user_id},
                                   {"item_id", r.item_id},
                                   {"playtime", r.playtime}}
                        .dump() +
                    '\n';
  }
  std::string items;
  for (const auto& item : data.items) {
    items += nlohmann::json{{"item_id", item.item_id},
                            {"categories", item.categories}}
                 .dump() +
             '\n';
  }
  io::write_file_atomic(dir / "interactions.jsonl", interactions);
  io::write_file_atomic(dir / "items.jsonl", items);
}

}  // namespace drgame::synthetic
