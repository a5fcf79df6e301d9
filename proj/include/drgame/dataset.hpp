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
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "drgame/sparse.hpp"

namespace drgame {

// Raw records, keyed by external string ids.

struct RawInteraction {
  std::string user_id;
  std::string item_id;
  int64_t playtime = 0;  // minutes

  auto operator<=>(const RawInteraction&) const = default;
};

struct RawItem {
  std::string item_id;
  std::vector<std::string> categories;  // sorted, unique

  bool operator==(const RawItem&) const = default;
};

enum class InputFormat { kJsonl, kCsv };

// Guesses from the extension: ".csv" is CSV, anything else JSON-lines.
InputFormat format_from_path(const std::filesystem::path& path);

// Parses the interaction file. Repeated (user, item) pairs are merged by
// summing playtime; the result is sorted by (user_id, item_id). Malformed
// records and negative playtimes raise DataError naming the line.
std::vector<RawInteraction> ingest_interactions(
    const std::filesystem::path& path, InputFormat format);
std::vector<RawInteraction> ingest_interactions(
    const std::filesystem::path& path);

// Sums playtime over duplicate pairs, sorted by (user_id, item_id).
std::vector<RawInteraction> merge_interactions(
    std::vector<RawInteraction> interactions);

// JSON-lines {item_id, categories}. Repeated item ids take the union of
// their categories. Sorted by item_id.
std::vector<RawItem> ingest_items(const std::filesystem::path& path);

struct KCoreResult {
  std::vector<RawInteraction> interactions;
  std::vector<RawItem> items;
  bool empty = false;  // set when nothing survived
};

// Drops items without categories (and interactions on items with no
// category record), then iteratively removes users and items with fewer
// than k interactions until every survivor has at least k.
KCoreResult filter_k_core(std::span<const RawInteraction> interactions,
                          std::span<const RawItem> items, int k);

// Bijection between external ids and dense indices, ordered by id.
class IdMap {
 public:
  IdMap() = default;
  explicit IdMap(std::vector<std::string> ids);  // sorted + deduplicated

  Index size() const { return static_cast<Index>(names_.size()); }
  std::optional<Index> find(const std::string& id) const;
  Index at(const std::string& id) const;  // DataError when unknown
  const std::string& name(Index index) const { return names_.at(index); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Index> index_;
};

struct Catalog {
  IdMap users;
  IdMap items;
  IdMap categories;

  // Users and items come from the interactions; categories from the items
  // that appear in them.
  static Catalog build(std::span<const RawInteraction> interactions,
                       std::span<const RawItem> items);
};

// One interaction in index space.
struct Edge {
  Index user = 0;
  Index item = 0;
  double playtime = 0.0;

  bool operator==(const Edge&) const = default;
};

std::vector<Edge> index_interactions(
    std::span<const RawInteraction> interactions, const Catalog& catalog);

PlaytimeMatrix build_playtime_matrix(std::span<const Edge> edges,
                                     Index num_users, Index num_items);

CategoryMatrix build_category_matrix(std::span<const RawItem> items,
                                     const Catalog& catalog);

// R and Q mirroring the inputs exactly. Unknown ids raise DataError.
std::pair<PlaytimeMatrix, CategoryMatrix> build_matrices(
    std::span<const RawInteraction> interactions,
    std::span<const RawItem> items, const Catalog& catalog);

struct SplitRatios {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;
};

enum class Fold { kTrain = 0, kValidation = 1, kTest = 2 };

struct SplitDataset {
  std::vector<Edge> train;
  std::vector<Edge> validation;
  std::vector<Edge> test;
  uint64_t seed = 0;
};

// Fold sizes for n records: validation and test get round(ratio * n),
// train takes the remainder.
struct FoldSizes {
  int64_t train;
  int64_t validation;
  int64_t test;
};
FoldSizes split_sizes(int64_t n, const SplitRatios& ratios);

// Uniform random partition of the records (global, not per user). Each fold
// is sorted by (user, item). Deterministic across platforms for a seed.
SplitDataset split(std::span<const Edge> edges, const SplitRatios& ratios,
                   uint64_t seed);

// Per-user sorted item lists of one fold.
std::vector<std::vector<Index>> items_by_user(std::span<const Edge> edges,
                                              Index num_users);

// Persistence: catalog as (external_id,index) CSVs, split as
// (user_idx,item_idx,playtime,fold).
void write_id_map_csv(const std::filesystem::path& path, const IdMap& map);
IdMap read_id_map_csv(const std::filesystem::path& path);
void write_split_csv(const std::filesystem::path& path,
                     const SplitDataset& split);
SplitDataset read_split_csv(const std::filesystem::path& path);

}  // namespace drgame
