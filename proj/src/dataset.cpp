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

#include "drgame/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "drgame/error.hpp"
#include "drgame/io.hpp"
#include "drgame/random.hpp"

namespace drgame {

namespace {

std::string where(const std::filesystem::path& path, int64_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

int64_t parse_playtime(const std::string& text,
                       const std::filesystem::path& path, int64_t line) {
  int64_t value = 0;
  size_t used = 0;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw DataError(where(path, line) + "playtime '" + text +
                    "' is not an integer");
  }
  if (used != text.size()) {
    throw DataError(where(path, line) + "playtime '" + text +
                    "' is not an integer");
  }
  if (value < 0) {
    throw DataError(where(path, line) + "negative playtime " + text);
  }
  return value;
}

RawInteraction parse_json_interaction(const std::string& text,
                                      const std::filesystem::path& path,
                                      int64_t line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    throw DataError(where(path, line) + "malformed JSON record");
  }
  if (!j.is_object() || !j.contains("user_id") || !j.contains("item_id") ||
      !j.contains("playtime")) {
    throw DataError(where(path, line) +
                    "record needs user_id, item_id and playtime");
  }
  auto as_key = [&](const nlohmann::json& v, const char* key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<int64_t>());
    throw DataError(where(path, line) + key + " must be a string");
  };
  RawInteraction r;
  r.user_id = as_key(j["user_id"], "user_id");
  r.item_id = as_key(j["item_id"], "item_id");
  const auto& pt = j["playtime"];
  if (pt.is_number_integer()) {
    r.playtime = pt.get<int64_t>();
    if (r.playtime < 0) {
      throw DataError(where(path, line) + "negative playtime " +
                      std::to_string(r.playtime));
    }
  } else if (pt.is_string()) {
    r.playtime = parse_playtime(pt.get<std::string>(), path, line);
  } else {
    throw DataError(where(path, line) + "playtime must be an integer");
  }
  return r;
}

}  // namespace

InputFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? InputFormat::kCsv : InputFormat::kJsonl;
}

std::vector<RawInteraction> merge_interactions(
    std::vector<RawInteraction> interactions) {
  std::sort(interactions.begin(), interactions.end(),
            [](const RawInteraction& a, const RawInteraction& b) {
              return std::tie(a.user_id, a.item_id) <
                     std::tie(b.user_id, b.item_id);
            });
  std::vector<RawInteraction> merged;
  merged.reserve(interactions.size());
  for (auto& r : interactions) {
    if (!merged.empty() && merged.back().user_id == r.user_id &&
        merged.back().item_id == r.item_id) {
      merged.back().playtime += r.playtime;
    } else {
      merged.push_back(std::move(r));
    }
  }
  return merged;
}

std::vector<RawInteraction> ingest_interactions(
    const std::filesystem::path& path, InputFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<RawInteraction> records;
  std::string line;
  int64_t line_no = 0;
  if (format == InputFormat::kCsv) {
    if (!std::getline(in, line)) return records;
    ++line_no;
    auto header = io::split_csv_line(line);
    if (header != std::vector<std::string>{"user_id", "item_id", "playtime"}) {
      throw DataError(where(path, 1) +
                      "expected header user_id,item_id,playtime");
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (format == InputFormat::kJsonl) {
      records.push_back(parse_json_interaction(line, path, line_no));
    } else {
      auto f = io::split_csv_line(line);
      if (f.size() != 3 || f[0].empty() || f[1].empty()) {
        throw DataError(where(path, line_no) +
                        "expected user_id,item_id,playtime");
      }
      records.push_back({f[0], f[1], parse_playtime(f[2], path, line_no)});
    }
  }
  return merge_interactions(std::move(records));
}

std::vector<RawInteraction> ingest_interactions(
    const std::filesystem::path& path) {
  return ingest_interactions(path, format_from_path(path));
}

std::vector<RawItem> ingest_items(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::map<std::string, std::set<std::string>> merged;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw DataError(where(path, line_no) + "malformed JSON record");
    }
    if (!j.is_object() || !j.contains("item_id")) {
      throw DataError(where(path, line_no) + "record needs item_id");
    }
    std::string id = j["item_id"].is_string()
                         ? j["item_id"].get<std::string>()
                         : j["item_id"].dump();
    auto& cats = merged[id];
    if (j.contains("categories") && !j["categories"].is_null()) {
      if (!j["categories"].is_array()) {
        throw DataError(where(path, line_no) + "categories must be an array");
      }
      for (const auto& c : j["categories"]) {
        if (!c.is_string()) {
          throw DataError(where(path, line_no) +
                          "category names must be strings");
        }
        cats.insert(c.get<std::string>());
      }
    }
  }
  std::vector<RawItem> items;
  items.reserve(merged.size());
  for (auto& [id, cats] : merged) {
    items.push_back({id, std::vector<std::string>(cats.begin(), cats.end())});
  }
  return items;
}

KCoreResult filter_k_core(std::span<const RawInteraction> interactions,
                          std::span<const RawItem> items, int k) {
  if (k < 1) throw UsageError("k-core requires k >= 1");
  std::unordered_map<std::string, size_t> item_slot;
  for (size_t n = 0; n < items.size(); ++n) {
    if (!items[n].categories.empty()) item_slot.emplace(items[n].item_id, n);
  }

  std::unordered_map<std::string, size_t> user_slot;
  std::vector<size_t> edge_user;
  std::vector<size_t> edge_item;
  std::vector<size_t> edge_record;
  for (size_t n = 0; n < interactions.size(); ++n) {
    auto it = item_slot.find(interactions[n].item_id);
    if (it == item_slot.end()) continue;
    auto [u, inserted] =
        user_slot.emplace(interactions[n].user_id, user_slot.size());
    edge_user.push_back(u->second);
    edge_item.push_back(it->second);
    edge_record.push_back(n);
  }

  std::vector<int64_t> user_deg(user_slot.size(), 0);
  std::vector<int64_t> item_deg(items.size(), 0);
  std::vector<std::vector<size_t>> user_edges(user_slot.size());
  std::vector<std::vector<size_t>> item_edges(items.size());
  for (size_t e = 0; e < edge_user.size(); ++e) {
    ++user_deg[edge_user[e]];
    ++item_deg[edge_item[e]];
    user_edges[edge_user[e]].push_back(e);
    item_edges[edge_item[e]].push_back(e);
  }

  std::vector<bool> edge_alive(edge_user.size(), true);
  std::vector<bool> user_alive(user_slot.size(), true);
  std::vector<bool> item_alive(items.size(), true);
  // Worklist of (is_user, slot) nodes whose degree fell below k.
  std::vector<std::pair<bool, size_t>> work;
  for (size_t u = 0; u < user_deg.size(); ++u) {
    if (user_deg[u] < k) work.emplace_back(true, u);
  }
  for (size_t i = 0; i < item_deg.size(); ++i) {
    if (item_deg[i] < k) work.emplace_back(false, i);
  }
  while (!work.empty()) {
    auto [is_user, slot] = work.back();
    work.pop_back();
    auto& alive = is_user ? user_alive : item_alive;
    if (!alive[slot]) continue;
    alive[slot] = false;
    for (size_t e : (is_user ? user_edges : item_edges)[slot]) {
      if (!edge_alive[e]) continue;
      edge_alive[e] = false;
      if (is_user) {
        const size_t i = edge_item[e];
        if (item_alive[i] && --item_deg[i] < k) work.emplace_back(false, i);
      } else {
        const size_t u = edge_user[e];
        if (user_alive[u] && --user_deg[u] < k) work.emplace_back(true, u);
      }
    }
  }

  KCoreResult result;
  std::vector<bool> item_used(items.size(), false);
  for (size_t e = 0; e < edge_user.size(); ++e) {
    if (!edge_alive[e]) continue;
    result.interactions.push_back(interactions[edge_record[e]]);
    item_used[edge_item[e]] = true;
  }
  for (size_t i = 0; i < items.size(); ++i) {
    if (item_used[i]) result.items.push_back(items[i]);
  }
  result.empty = result.interactions.empty();
  return result;
}

IdMap::IdMap(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  names_ = std::move(ids);
  index_.reserve(names_.size());
  for (size_t n = 0; n < names_.size(); ++n) {
    index_.emplace(names_[n], static_cast<Index>(n));
  }
}

std::optional<Index> IdMap::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Index IdMap::at(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw DataError("unknown id '" + id + "'");
  return it->second;
}

Catalog Catalog::build(std::span<const RawInteraction> interactions,
                       std::span<const RawItem> items) {
  std::vector<std::string> users;
  std::vector<std::string> item_ids;
  for (const auto& r : interactions) {
    users.push_back(r.user_id);
    item_ids.push_back(r.item_id);
  }
  Catalog catalog;
  catalog.users = IdMap(std::move(users));
  catalog.items = IdMap(item_ids);
  std::vector<std::string> categories;
  for (const auto& item : items) {
    if (!catalog.items.find(item.item_id)) continue;
    categories.insert(categories.end(), item.categories.begin(),
                      item.categories.end());
  }
  catalog.categories = IdMap(std::move(categories));
  return catalog;
}

std::vector<Edge> index_interactions(
    std::span<const RawInteraction> interactions, const Catalog& catalog) {
  std::vector<Edge> edges;
  edges.reserve(interactions.size());
  for (const auto& r : interactions) {
    edges.push_back({catalog.users.at(r.user_id), catalog.items.at(r.item_id),
                     static_cast<double>(r.playtime)});
  }
  return edges;
}

PlaytimeMatrix build_playtime_matrix(std::span<const Edge> edges,
                                     Index num_users, Index num_items) {
  std::vector<Triplet> t;
  t.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.playtime < 0) throw DataError("negative playtime in edge list");
    t.push_back({e.user, e.item, e.playtime});
  }
  return PlaytimeMatrix(
      CsrMatrix::from_triplets(num_users, num_items, std::move(t)));
}

CategoryMatrix build_category_matrix(std::span<const RawItem> items,
                                     const Catalog& catalog) {
  std::vector<Triplet> t;
  std::vector<bool> seen(static_cast<size_t>(catalog.items.size()), false);
  for (const auto& item : items) {
    auto row = catalog.items.find(item.item_id);
    if (!row) continue;
    if (item.categories.empty()) {
      throw DataError("item '" + item.item_id + "' has no categories");
    }
    seen[*row] = true;
    for (const auto& c : item.categories) {
      t.push_back({*row, catalog.categories.at(c), 1.0});
    }
  }
  for (Index i = 0; i < catalog.items.size(); ++i) {
    if (!seen[i]) {
      throw DataError("item '" + catalog.items.name(i) +
                      "' has no category record");
    }
  }
  return CategoryMatrix(CsrMatrix::from_triplets(
      catalog.items.size(), catalog.categories.size(), std::move(t)));
}

std::pair<PlaytimeMatrix, CategoryMatrix> build_matrices(
    std::span<const RawInteraction> interactions,
    std::span<const RawItem> items, const Catalog& catalog) {
  auto edges = index_interactions(interactions, catalog);
  return {build_playtime_matrix(edges, catalog.users.size(),
                                catalog.items.size()),
          build_category_matrix(items, catalog)};
}

FoldSizes split_sizes(int64_t n, const SplitRatios& ratios) {
  if (ratios.train <= 0 || ratios.validation <= 0 || ratios.test <= 0 ||
      std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw UsageError("split ratios must be positive and sum to 1");
  }
  FoldSizes s;
  s.validation = std::llround(ratios.validation * static_cast<double>(n));
  s.test = std::llround(ratios.test * static_cast<double>(n));
  s.train = n - s.validation - s.test;
  return s;
}

SplitDataset split(std::span<const Edge> edges, const SplitRatios& ratios,
                   uint64_t seed) {
  if (edges.size() < 3) {
    throw DataError("split needs at least 3 interactions, got " +
                    std::to_string(edges.size()));
  }
  const FoldSizes sizes =
      split_sizes(static_cast<int64_t>(edges.size()), ratios);
  std::vector<Edge> order(edges.begin(), edges.end());
  // Canonical order first so the partition does not depend on input order.
  std::sort(order.begin(), order.end(), [](const Edge& a, const Edge& b) {
    return a.user != b.user ? a.user < b.user : a.item < b.item;
  });
  Rng rng = Rng::stream(seed, rng_stream::kSplit);
  rng.shuffle(std::span<Edge>(order));

  SplitDataset out;
  out.seed = seed;
  auto first = order.begin();
  out.train.assign(first, first + sizes.train);
  out.validation.assign(first + sizes.train,
                        first + sizes.train + sizes.validation);
  out.test.assign(first + sizes.train + sizes.validation, order.end());
  auto by_key = [](const Edge& a, const Edge& b) {
    return a.user != b.user ? a.user < b.user : a.item < b.item;
  };
  std::sort(out.train.begin(), out.train.end(), by_key);
  std::sort(out.validation.begin(), out.validation.end(), by_key);
  std::sort(out.test.begin(), out.test.end(), by_key);
  return out;
}

std::vector<std::vector<Index>> items_by_user(std::span<const Edge> edges,
                                              Index num_users) {
  std::vector<std::vector<Index>> out(static_cast<size_t>(num_users));
  for (const auto& e : edges) out.at(e.user).push_back(e.item);
  for (auto& v : out) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return out;
}

void write_id_map_csv(const std::filesystem::path& path, const IdMap& map) {
  std::string out = "external_id,index\n";
  for (Index n = 0; n < map.size(); ++n) {
    const std::string& name = map.name(n);
    if (name.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : name) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      out += quoted + "\"";
    } else {
      out += name;
    }
    out += ',' + std::to_string(n) + '\n';
  }
  io::write_file_atomic(path, out);
}

IdMap read_id_map_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::string> names;
  int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = io::split_csv_line(line);
    if (f.size() != 2 || std::stol(f[1]) != static_cast<long>(names.size())) {
      throw DataError(where(path, line_no) + "indices must be dense and ordered");
    }
    names.push_back(f[0]);
  }
  IdMap map(names);
  if (map.names() != names) {
    throw DataError(path.string() + ": ids are not sorted and unique");
  }
  return map;
}

void write_split_csv(const std::filesystem::path& path,
                     const SplitDataset& split) {
  std::string out = "user_idx,item_idx,playtime,fold\n";
  auto emit = [&](const std::vector<Edge>& edges, const char* fold) {
    for (const auto& e : edges) {
      out += std::to_string(e.user) + ',' + std::to_string(e.item) + ',' +
             io::format_double(e.playtime) + ',' + fold + '\n';
    }
  };
  emit(split.train, "train");
  emit(split.validation, "validation");
  emit(split.test, "test");
  io::write_file_atomic(path, out);
}

SplitDataset read_split_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  SplitDataset out;
  int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = io::split_csv_line(line);
    if (f.size() != 4) {
      throw DataError(where(path, line_no) +
                      "expected user_idx,item_idx,playtime,fold");
    }
    Edge e{static_cast<Index>(std::stol(f[0])),
           static_cast<Index>(std::stol(f[1])), std::stod(f[2])};
    if (f[3] == "train") {
      out.train.push_back(e);
    } else if (f[3] == "validation") {
      out.validation.push_back(e);
    } else if (f[3] == "test") {
      out.test.push_back(e);
    } else {
      throw DataError(where(path, line_no) + "unknown fold '" + f[3] + "'");
    }
  }
  return out;
}

}  // namespace drgame
