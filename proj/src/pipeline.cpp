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

#include "drgame/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <ctime>
#include <iostream>

#include "drgame/error.hpp"
#include "drgame/io.hpp"
#include "drgame/parallel.hpp"

namespace drgame::pipeline {

using nlohmann::json;

// ---- configuration ------------------------------------------------------

json default_config() {
  return json::parse(R"({
    "paths": {"interactions": "", "items": "", "workdir": "work"},
    "dataset": {"k_core": 5, "split": [0.6, 0.2, 0.2], "seed": 2024},
    "bipl": {"global_denominator": "any_touched_category", "histogram_bins": 50},
    "repr": {"dim": 32, "dgi_epochs": 200, "dgi_lr": 0.001},
    "select": {"beta_u": 0.6, "beta_i": 0.06, "kmeans_max_iter": 100,
               "kmeans_tol": 0.0001, "selection_us": true, "selection_is": true},
    "gnn": {"layers": 3, "warm_start": false},
    "train": {"lr": 0.001, "lambda": 1e-05, "batch_size": 2048, "dim": 32,
              "patience": 10, "max_epochs": 1000, "negatives": 1,
              "validation_n": 100, "use_weights": true,
              "regularization": "batch"},
    "eval": {"ns": [100, 150, 200]},
    "sweep": {"beta_u": [0.6], "beta_i": [0.06], "selection_us": [true],
              "selection_is": [true], "weights": [true]}
  })");
}

namespace {

void merge_known(json& base, const json& patch, const std::string& prefix) {
  if (!patch.is_object()) throw UsageError("config must be a JSON object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw UsageError("unknown config key " + key);
    json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_known(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

const json& section(const json& config, const char* name) {
  if (!config.contains(name)) throw UsageError(std::string("missing config section ") + name);
  return config.at(name);
}

template <typename T>
T get(const json& config, const char* sec, const char* key) {
  try {
    return section(config, sec).at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("config ") + sec + "." + key + ": " + e.what());
  }
}

uint64_t master_seed(const json& config) {
  return get<uint64_t>(config, "dataset", "seed");
}

}  // namespace

void apply_override(json& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw UsageError("override must look like key.path=value, got '" +
                     std::string(assignment) + "'");
  }
  const std::string path(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json* slot = &config;
  size_t start = 0;
  while (true) {
    const size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (!slot->is_object() || !slot->contains(key)) {
      throw UsageError("unknown config key " + path);
    }
    slot = &(*slot)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  *slot = std::move(value);
}

json load_config(const std::optional<fs::path>& file,
                 std::span<const std::string> overrides) {
  json config = default_config();
  if (file) {
    json patch;
    try {
      patch = json::parse(io::read_file(*file));
    } catch (const json::exception& e) {
      throw UsageError("cannot parse config " + file->string() + ": " + e.what());
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
    merge_known(config, patch, "");
  }
  for (const auto& o : overrides) apply_override(config, o);
  return config;
}

std::string fingerprint(const json& value) {
  return io::hex64(io::fnv1a64(value.dump()));
}

SplitRatios split_ratios(const json& config) {
  const auto r = get<std::vector<double>>(config, "dataset", "split");
  if (r.size() != 3) throw UsageError("dataset.split needs three ratios");
  return {r[0], r[1], r[2]};
}

bipl::GlobalDenominator global_denominator(const json& config) {
  const auto mode = get<std::string>(config, "bipl", "global_denominator");
  if (mode == "any_touched_category") {
    return bipl::GlobalDenominator::kAnyTouchedCategory;
  }
  if (mode == "touched_category_occurrences") {
    return bipl::GlobalDenominator::kTouchedCategoryOccurrences;
  }
  throw UsageError("bipl.global_denominator must be any_touched_category or "
                   "touched_category_occurrences");
}

repr::DgiConfig dgi_config(const json& config) {
  repr::DgiConfig c;
  c.dim = get<int>(config, "repr", "dim");
  c.epochs = get<int>(config, "repr", "dgi_epochs");
  c.lr = get<double>(config, "repr", "dgi_lr");
  c.seed = master_seed(config);
  if (c.dim < 1 || c.epochs < 1 || c.lr <= 0) {
    throw UsageError("repr settings must be positive");
  }
  return c;
}

train::TrainConfig train_config(const json& config) {
  train::TrainConfig c;
  c.lr = get<double>(config, "train", "lr");
  c.lambda = get<double>(config, "train", "lambda");
  c.batch_size = get<int>(config, "train", "batch_size");
  c.dim = get<int>(config, "train", "dim");
  c.layers = get<int>(config, "gnn", "layers");
  c.patience = get<int>(config, "train", "patience");
  c.max_epochs = get<int>(config, "train", "max_epochs");
  c.negatives = get<int>(config, "train", "negatives");
  c.validation_n = get<int>(config, "train", "validation_n");
  c.seed = master_seed(config);
  const auto reg = get<std::string>(config, "train", "regularization");
  if (reg == "batch") {
    c.regularization = train::RegularizationScope::kBatch;
  } else if (reg == "full") {
    c.regularization = train::RegularizationScope::kFull;
  } else {
    throw UsageError("train.regularization must be batch or full");
  }
  if (c.lr <= 0 || c.lambda < 0 || c.batch_size < 1 || c.dim < 1 ||
      c.layers < 0 || c.patience < 1 || c.max_epochs < 1 || c.negatives < 1 ||
      c.validation_n < 1) {
    throw UsageError("train settings out of range");
  }
  return c;
}

std::vector<int> eval_ns(const json& config) {
  auto ns = get<std::vector<int>>(config, "eval", "ns");
  if (ns.empty()) throw UsageError("eval.ns is empty");
  for (int n : ns) {
    if (n < 1) throw UsageError("eval.ns entries must be >= 1");
  }
  return ns;
}

SelectOptions select_options(const json& config) {
  SelectOptions o;
  o.beta_u = get<double>(config, "select", "beta_u");
  o.beta_i = get<double>(config, "select", "beta_i");
  o.selection_us = get<bool>(config, "select", "selection_us");
  o.selection_is = get<bool>(config, "select", "selection_is");
  o.kmeans.max_iter = get<int>(config, "select", "kmeans_max_iter");
  o.kmeans.tol = get<double>(config, "select", "kmeans_tol");
  o.seed = master_seed(config);
  if (o.beta_u <= 0 || o.beta_u > 1 || o.beta_i <= 0 || o.beta_i > 1) {
    throw UsageError("select.beta_u and select.beta_i must lie in (0, 1]");
  }
  return o;
}

// ---- in-memory stages ---------------------------------------------------

Ingested ingest(std::span<const RawInteraction> interactions,
                std::span<const RawItem> items, int k_core,
                const SplitRatios& ratios, uint64_t seed) {
  auto filtered = filter_k_core(interactions, items, k_core);
  Ingested out;
  out.empty = filtered.empty;
  if (filtered.empty) return out;
  out.catalog = Catalog::build(filtered.interactions, filtered.items);
  auto [playtime, categories] =
      build_matrices(filtered.interactions, filtered.items, out.catalog);
  out.playtime = std::move(playtime);
  out.categories = std::move(categories);
  const auto edges = index_interactions(filtered.interactions, out.catalog);
  out.split = split(edges, ratios, seed);
  return out;
}

Preprocessed preprocess(const SplitDataset& split, Index num_users,
                        const CategoryMatrix& categories,
                        bipl::GlobalDenominator denominator) {
  Preprocessed p;
  p.train_playtime =
      build_playtime_matrix(split.train, num_users, categories.rows());
  p.percentile = bipl::percentile_transform(p.train_playtime);
  p.preference = bipl::category_preference(p.train_playtime, p.percentile,
                                           categories, denominator);
  p.implicit = bipl::implicit_preference(p.preference, categories, p.percentile);
  return p;
}

Embeddings embed(const CategoryMatrix& categories,
                 const bipl::CategoryPreference& preference,
                 const repr::DgiConfig& config) {
  const auto graph = repr::build_category_graph(categories);
  auto dgi = repr::train_dgi(graph, config);
  Embeddings e;
  e.items = std::move(dgi.item_embeddings);
  e.categories = std::move(dgi.category_embeddings);
  e.users = repr::user_embeddings(preference, e.categories);
  e.augmented_items =
      repr::augmented_item_embeddings(categories, e.categories, e.items);
  e.dgi_losses = std::move(dgi.losses);
  return e;
}

Selection select_edges(const ImplicitPreference& implicit,
                       const Embeddings& embeddings,
                       const SelectOptions& options) {
  const Index num_users = implicit.rows();
  const Index num_items = implicit.cols();
  if (embeddings.users.rows() != num_users ||
      embeddings.augmented_items.rows() != num_items) {
    throw DataError("embeddings do not match the preference matrix");
  }
  Selection s;
  // Item selection for users partitions the items, and vice versa.
  s.items = options.selection_us
                ? cluster::kmeans(embeddings.augmented_items,
                                  cluster::cluster_count(options.beta_i, num_items),
                                  Rng::splitmix64(options.seed ^ rng_stream::kKmeansItems),
                                  options.kmeans, cluster::EntityKind::kItem)
                : cluster::singleton_clusters(num_items, cluster::EntityKind::kItem);
  s.users = options.selection_is
                ? cluster::kmeans(embeddings.users,
                                  cluster::cluster_count(options.beta_u, num_users),
                                  Rng::splitmix64(options.seed ^ rng_stream::kKmeansUsers),
                                  options.kmeans, cluster::EntityKind::kUser)
                : cluster::singleton_clusters(num_users, cluster::EntityKind::kUser);
  s.graphs = cluster::build_subgraphs(implicit, s.users, s.items);
  return s;
}

gnn::ModelParams warm_start_params(const Embeddings& embeddings, int layers) {
  gnn::ModelParams p;
  const Eigen::Index d = embeddings.users.cols();
  p.user_embeddings = embeddings.users;
  p.item_embeddings = embeddings.augmented_items.leftCols(d);
  p.layer_logits = Eigen::VectorXd::Zero(layers + 1);
  return p;
}

ModelRun train_and_evaluate(const SplitDataset& split,
                            const CategoryMatrix& categories,
                            const cluster::DirectedSubgraphPair& graphs,
                            bool use_weights, const train::TrainConfig& config,
                            std::span<const int> ns,
                            const Embeddings* warm_start) {
  const Eigen::VectorXd weights =
      use_weights ? train::category_weights(categories)
                  : Eigen::VectorXd::Ones(categories.rows());
  std::optional<gnn::ModelParams> initial;
  if (warm_start) {
    if (warm_start->users.cols() != config.dim) {
      throw UsageError("gnn.warm_start needs repr.dim == train.dim");
    }
    initial = warm_start_params(*warm_start, config.layers);
  }
  ModelRun run;
  run.fit = train::fit(split, graphs, weights, config, std::move(initial));
  const auto fused = gnn::propagate(run.fit.params, graphs, config.layers);
  run.fused_users = fused.user;
  run.fused_items = fused.item;
  run.metrics = eval::evaluate(run.fused_users, run.fused_items, split,
                               categories, ns);
  return run;
}

// ---- workdir stages -----------------------------------------------------

const char* stage_name(Stage stage) {
  switch (stage) {
    case Stage::kIngest: return "ingest";
    case Stage::kPreprocess: return "preprocess";
    case Stage::kEmbed: return "embed";
    case Stage::kSelect: return "select";
    case Stage::kTrain: return "train";
    case Stage::kEvaluate: return "evaluate";
  }
  return "?";
}

namespace {

fs::path manifest_path(const fs::path& workdir, Stage stage) {
  return workdir / (std::string(stage_name(stage)) + ".manifest.json");
}

std::string hash_or_missing(const std::string& path) {
  if (path.empty() || !fs::exists(path)) return "missing";
  return io::hash_file(path);
}

json stage_config(const json& config, Stage stage) {
  switch (stage) {
    case Stage::kIngest:
      return {{"paths", {{"interactions", config["paths"]["interactions"]},
                         {"items", config["paths"]["items"]}}},
              {"dataset", config["dataset"]}};
    case Stage::kPreprocess: return {{"bipl", config["bipl"]}};
    case Stage::kEmbed:
      return {{"repr", config["repr"]}, {"seed", config["dataset"]["seed"]}};
    case Stage::kSelect:
      return {{"select", config["select"]}, {"seed", config["dataset"]["seed"]}};
    case Stage::kTrain:
      return {{"gnn", config["gnn"]},
              {"train", config["train"]},
              {"seed", config["dataset"]["seed"]}};
    case Stage::kEvaluate: return {{"eval", config["eval"]}};
  }
  return {};
}

std::optional<Stage> upstream_of(Stage stage) {
  if (stage == Stage::kIngest) return std::nullopt;
  return static_cast<Stage>(static_cast<int>(stage) - 1);
}

json read_json(const fs::path& path) {
  try {
    return json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

CsrMatrix dense_nonzeros(const Eigen::MatrixXd& m) {
  std::vector<Triplet> t;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (m(r, c) != 0.0) {
        t.push_back({static_cast<Index>(r), static_cast<Index>(c), m(r, c)});
      }
    }
  }
  return CsrMatrix::from_triplets(static_cast<Index>(m.rows()),
                                  static_cast<Index>(m.cols()), std::move(t));
}

struct StoredData {
  Catalog catalog;
  SplitDataset split;
  CategoryMatrix categories;
};

StoredData load_ingested(const fs::path& dir) {
  StoredData d;
  d.catalog.users = read_id_map_csv(dir / "users.csv");
  d.catalog.items = read_id_map_csv(dir / "items.csv");
  d.catalog.categories = read_id_map_csv(dir / "categories.csv");
  d.split = read_split_csv(dir / "split.csv");
  d.categories = CategoryMatrix(io::read_matrix_csv(dir / "category_matrix.csv").matrix);
  return d;
}

Embeddings load_embeddings(const fs::path& dir) {
  Embeddings e;
  e.items = io::read_dense_f32(dir / "item_embeddings.bin");
  e.categories = io::read_dense_f32(dir / "category_embeddings.bin");
  e.users = io::read_dense_f32(dir / "user_embeddings.bin");
  e.augmented_items = io::read_dense_f32(dir / "augmented_item_embeddings.bin");
  return e;
}

}  // namespace

Pipeline::Pipeline(json config, RunOptions options)
    : config_(std::move(config)), options_(options) {
  workdir_ = get<std::string>(config_, "paths", "workdir");
  if (workdir_.empty()) throw UsageError("paths.workdir is empty");
  fs::create_directories(workdir_);
  lock_path_ = workdir_ / ".lock";
  const int fd = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    throw UsageError("workdir " + workdir_.string() +
                     " is locked by another run (remove " +
                     lock_path_.string() + " if that run is gone)");
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

Pipeline::~Pipeline() {
  std::error_code ec;
  fs::remove(lock_path_, ec);
}

std::ostream& Pipeline::log() const {
  return options_.log ? *options_.log : std::cerr;
}

std::string Pipeline::stage_fingerprint(Stage stage) const {
  json basis = {{"stage", stage_name(stage)},
                {"config", stage_config(config_, stage)}};
  if (stage == Stage::kIngest) {
    basis["inputs"] = {
        hash_or_missing(config_["paths"]["interactions"].get<std::string>()),
        hash_or_missing(config_["paths"]["items"].get<std::string>())};
  } else {
    basis["upstream"] = stage_fingerprint(*upstream_of(stage));
  }
  return fingerprint(basis);
}

bool Pipeline::up_to_date(Stage stage) const {
  const fs::path path = manifest_path(workdir_, stage);
  if (!fs::exists(path)) return false;
  return read_json(path).value("fingerprint", "") == stage_fingerprint(stage);
}

void Pipeline::require(Stage upstream, Stage current) const {
  const fs::path path = manifest_path(workdir_, upstream);
  if (!fs::exists(path)) {
    throw UsageError(std::string(stage_name(current)) + " needs the output of " +
                     stage_name(upstream) + ": run " + stage_name(upstream) +
                     " first");
  }
  if (!options_.force && !up_to_date(upstream)) {
    log() << "warning: " << stage_name(upstream)
          << " output was produced with a different config or input; rerun it"
             " or pass --force to silence this\n";
  }
}

void Pipeline::write_manifest(Stage stage, const json& inputs) const {
  json manifest = {{"stage", stage_name(stage)},
                   {"fingerprint", stage_fingerprint(stage)},
                   {"config", stage_config(config_, stage)},
                   {"inputs", inputs},
                   {"seed", master_seed(config_)},
                   {"timestamp", timestamp()}};
  if (auto up = upstream_of(stage)) {
    manifest["upstream_fingerprint"] = stage_fingerprint(*up);
  }
  io::write_file_atomic(manifest_path(workdir_, stage), manifest.dump(2) + "\n");
}

void Pipeline::ingest() {
  const auto interactions_path = get<std::string>(config_, "paths", "interactions");
  const auto items_path = get<std::string>(config_, "paths", "items");
  if (interactions_path.empty() || items_path.empty()) {
    throw UsageError("paths.interactions and paths.items must be set");
  }
  const auto interactions = ingest_interactions(interactions_path);
  const auto items = ingest_items(items_path);
  const auto data = pipeline::ingest(interactions, items,
                                     get<int>(config_, "dataset", "k_core"),
                                     split_ratios(config_), master_seed(config_));
  if (data.empty) {
    throw DataError("k-core filtering left no interactions");
  }
  write_id_map_csv(workdir_ / "users.csv", data.catalog.users);
  write_id_map_csv(workdir_ / "items.csv", data.catalog.items);
  write_id_map_csv(workdir_ / "categories.csv", data.catalog.categories);
  write_split_csv(workdir_ / "split.csv", data.split);
  const std::string source = io::hash_file(interactions_path);
  io::write_matrix_csv(workdir_ / "playtime.csv", data.playtime, "R", source);
  io::write_matrix_csv(workdir_ / "category_matrix.csv", data.categories, "Q",
                       io::hash_file(items_path));
  log() << "ingest: " << data.catalog.users.size() << " users, "
        << data.catalog.items.size() << " items, " << data.playtime.nnz()
        << " interactions, " << data.catalog.categories.size()
        << " categories; split " << data.split.train.size() << "/"
        << data.split.validation.size() << "/" << data.split.test.size() << "\n";
  write_manifest(Stage::kIngest, {{"interactions", source},
                                  {"items", io::hash_file(items_path)}});
}

void Pipeline::preprocess() {
  require(Stage::kIngest, Stage::kPreprocess);
  const auto data = load_ingested(workdir_);
  const auto p = pipeline::preprocess(data.split, data.catalog.users.size(),
                                      data.categories, global_denominator(config_));
  const std::string source = io::hash_file(workdir_ / "split.csv");
  io::write_matrix_csv(workdir_ / "train_playtime.csv", p.train_playtime,
                       "R_train", source);
  io::write_matrix_csv(workdir_ / "percentile.csv", p.percentile, "R_tilde", source);
  io::write_matrix_csv(workdir_ / "preference.csv", dense_nonzeros(p.preference),
                       "P", source);
  io::write_matrix_csv(workdir_ / "implicit_preference.csv", p.implicit, "H",
                       source);
  const int bins = get<int>(config_, "bipl", "histogram_bins");
  if (p.train_playtime.nnz() > 0) {
    bipl::write_histogram_csv(workdir_ / "hist_playtime.csv",
                              bipl::distribution_report(p.train_playtime, bins));
    bipl::write_histogram_csv(workdir_ / "hist_percentile.csv",
                              bipl::distribution_report(p.percentile, bins));
    bipl::write_histogram_csv(workdir_ / "hist_implicit.csv",
                              bipl::distribution_report(p.implicit, bins));
  }
  log() << "preprocess: H has " << p.implicit.nnz() << " entries\n";
  write_manifest(Stage::kPreprocess, {{"split.csv", source}});
}

void Pipeline::embed() {
  require(Stage::kPreprocess, Stage::kEmbed);
  const auto data = load_ingested(workdir_);
  const auto pref_csv = io::read_matrix_csv(workdir_ / "preference.csv");
  const Eigen::MatrixXd preference = pref_csv.matrix.to_dense();
  const auto cfg = dgi_config(config_);
  const auto e = pipeline::embed(data.categories, preference, cfg);
  const json meta = {{"seed", cfg.seed}, {"epochs", cfg.epochs}};
  auto with_name = [&](const char* name) {
    json m = meta;
    m["name"] = name;
    return m;
  };
  io::write_dense_f32(workdir_ / "item_embeddings.bin", e.items, with_name("E_I"));
  io::write_dense_f32(workdir_ / "category_embeddings.bin", e.categories,
                      with_name("E_C"));
  io::write_dense_f32(workdir_ / "user_embeddings.bin", e.users, with_name("E_U"));
  io::write_dense_f32(workdir_ / "augmented_item_embeddings.bin",
                      e.augmented_items, with_name("E_I_augmented"));
  std::string losses = "epoch,loss\n";
  for (size_t k = 0; k < e.dgi_losses.size(); ++k) {
    losses += std::to_string(k + 1) + ',' + io::format_double(e.dgi_losses[k]) + '\n';
  }
  io::write_file_atomic(workdir_ / "dgi_loss.csv", losses);
  log() << "embed: DGI loss " << e.dgi_losses.front() << " -> "
        << e.dgi_losses.back() << "\n";
  write_manifest(Stage::kEmbed,
                 {{"category_matrix.csv", io::hash_file(workdir_ / "category_matrix.csv")},
                  {"preference.csv", io::hash_file(workdir_ / "preference.csv")}});
}

void Pipeline::select() {
  require(Stage::kEmbed, Stage::kSelect);
  const ImplicitPreference implicit(
      io::read_matrix_csv(workdir_ / "implicit_preference.csv").matrix);
  const auto e = load_embeddings(workdir_);
  const auto s = select_edges(implicit, e, select_options(config_));
  cluster::write_clusters_csv(workdir_ / "clusters_users.csv", s.users);
  cluster::write_clusters_csv(workdir_ / "clusters_items.csv", s.items);
  cluster::write_subgraphs_csv(workdir_ / "subgraphs.csv", s.graphs);
  log() << "select: " << s.users.k << " user clusters, " << s.items.k
        << " item clusters; kept " << s.graphs.item_to_user.size()
        << " item->user and " << s.graphs.user_to_item.size()
        << " user->item of " << implicit.nnz() << " edges\n";
  write_manifest(Stage::kSelect,
                 {{"implicit_preference.csv",
                   io::hash_file(workdir_ / "implicit_preference.csv")}});
}

void Pipeline::train() {
  require(Stage::kSelect, Stage::kTrain);
  const auto data = load_ingested(workdir_);
  const CsrMatrix implicit =
      io::read_matrix_csv(workdir_ / "implicit_preference.csv").matrix;
  const auto graphs = cluster::read_subgraphs_csv(workdir_ / "subgraphs.csv", implicit);
  const auto cfg = train_config(config_);
  const bool use_weights = get<bool>(config_, "train", "use_weights");
  const Eigen::VectorXd weights = use_weights
                                      ? train::category_weights(data.categories)
                                      : Eigen::VectorXd::Ones(data.categories.rows());
  std::optional<gnn::ModelParams> initial;
  if (get<bool>(config_, "gnn", "warm_start")) {
    const auto e = load_embeddings(workdir_);
    if (e.users.cols() != cfg.dim) {
      throw UsageError("gnn.warm_start needs repr.dim == train.dim");
    }
    initial = warm_start_params(e, cfg.layers);
  }
  const auto result = train::fit(data.split, graphs, weights, cfg, std::move(initial));
  const auto fused = gnn::propagate(result.params, graphs, cfg.layers);
  const std::string fp = stage_fingerprint(Stage::kTrain);
  const double best_metric =
      result.report.epochs.at(result.report.best_epoch - 1).validation_recall;
  const json meta = {{"config_hash", fp},
                     {"epoch", result.report.best_epoch},
                     {"validation_recall", best_metric}};
  io::write_dense_f32(workdir_ / "params_users.bin", result.params.user_embeddings, meta);
  io::write_dense_f32(workdir_ / "params_items.bin", result.params.item_embeddings, meta);
  io::write_dense_f32(workdir_ / "params_logits.bin",
                      Eigen::MatrixXd(result.params.layer_logits), meta);
  io::write_dense_f32(workdir_ / "fused_users.bin", fused.user, meta);
  io::write_dense_f32(workdir_ / "fused_items.bin", fused.item, meta);
  io::write_file_atomic(workdir_ / "train_report.json",
                        result.report.to_json().dump(2) + "\n");
  log() << "train: best epoch " << result.report.best_epoch << " of "
        << result.report.stop_epoch << ", validation recall@" << cfg.validation_n
        << " " << best_metric << "\n";
  write_manifest(Stage::kTrain,
                 {{"subgraphs.csv", io::hash_file(workdir_ / "subgraphs.csv")},
                  {"split.csv", io::hash_file(workdir_ / "split.csv")}});
}

void Pipeline::evaluate() {
  require(Stage::kTrain, Stage::kEvaluate);
  const auto data = load_ingested(workdir_);
  const auto users = io::read_dense_f32(workdir_ / "fused_users.bin");
  const auto items = io::read_dense_f32(workdir_ / "fused_items.bin");
  const auto ns = eval_ns(config_);
  auto report = eval::evaluate(users, items, data.split, data.categories, ns);
  report.fingerprint = stage_fingerprint(Stage::kEvaluate);
  io::write_file_atomic(workdir_ / "metrics.json", report.to_json().dump(2) + "\n");
  for (const auto& m : report.at) {
    log() << "evaluate: @" << m.n << " recall " << m.recall << " hit "
          << m.hit_ratio_primary << " coverage " << m.coverage << "\n";
  }
  write_manifest(Stage::kEvaluate,
                 {{"fused_users.bin", io::hash_file(workdir_ / "fused_users.bin")},
                  {"fused_items.bin", io::hash_file(workdir_ / "fused_items.bin")}});
}

void Pipeline::run(Stage stage) {
  switch (stage) {
    case Stage::kIngest: ingest(); break;
    case Stage::kPreprocess: preprocess(); break;
    case Stage::kEmbed: embed(); break;
    case Stage::kSelect: select(); break;
    case Stage::kTrain: train(); break;
    case Stage::kEvaluate: evaluate(); break;
  }
}

void Pipeline::all() {
  for (int s = static_cast<int>(Stage::kIngest);
       s <= static_cast<int>(Stage::kEvaluate); ++s) {
    const auto stage = static_cast<Stage>(s);
    if (!options_.force && up_to_date(stage)) {
      log() << stage_name(stage) << ": up to date, reusing artifacts\n";
      continue;
    }
    run(stage);
  }
}

nlohmann::json Pipeline::recommend(const std::string& user_id, int n) {
  require(Stage::kTrain, Stage::kEvaluate);
  const auto data = load_ingested(workdir_);
  const Index user = data.catalog.users.at(user_id);
  const auto users = io::read_dense_f32(workdir_ / "fused_users.bin");
  const auto items = io::read_dense_f32(workdir_ / "fused_items.bin");
  const auto train_items = items_by_user(data.split.train, data.catalog.users.size());
  const auto top = gnn::recommend_top_n(users, items, user, n, train_items[user]);
  json ids = json::array();
  for (Index i : top.items) ids.push_back(data.catalog.items.name(i));
  json out = {{"user_id", user_id}, {"item_ids", ids}, {"scores", top.scores}};
  if (top.truncated) out["truncated"] = true;
  return out;
}

void Pipeline::recommend_all(int n) {
  require(Stage::kTrain, Stage::kEvaluate);
  const auto data = load_ingested(workdir_);
  const auto users = io::read_dense_f32(workdir_ / "fused_users.bin");
  const auto items = io::read_dense_f32(workdir_ / "fused_items.bin");
  const Index num_users = data.catalog.users.size();
  const auto train_items = items_by_user(data.split.train, num_users);
  std::vector<std::string> lines(num_users);
  parallel_for(static_cast<size_t>(num_users), [&](size_t u) {
    const auto top = gnn::recommend_top_n(users, items, static_cast<Index>(u), n,
                                          train_items[u]);
    json ids = json::array();
    for (Index i : top.items) ids.push_back(data.catalog.items.name(i));
    lines[u] = json{{"user_id", data.catalog.users.name(static_cast<Index>(u))},
                    {"item_ids", ids},
                    {"scores", top.scores}}
                   .dump();
  });
  std::string out;
  for (const auto& l : lines) out += l + '\n';
  io::write_file_atomic(workdir_ / "recommendations.jsonl", out);
  log() << "recommend: wrote " << num_users << " lists to "
        << (workdir_ / "recommendations.jsonl").string() << "\n";
}

void Pipeline::sweep() {
  // Shared preprocessing: everything up to the embeddings.
  for (Stage stage : {Stage::kIngest, Stage::kPreprocess, Stage::kEmbed}) {
    if (!options_.force && up_to_date(stage)) continue;
    run(stage);
  }
  const auto data = load_ingested(workdir_);
  const ImplicitPreference implicit(
      io::read_matrix_csv(workdir_ / "implicit_preference.csv").matrix);
  const auto embeddings = load_embeddings(workdir_);
  const auto cfg = train_config(config_);
  const auto ns = eval_ns(config_);
  const bool warm = get<bool>(config_, "gnn", "warm_start");
  const json& grid = section(config_, "sweep");

  std::vector<eval::SweepCell> cells;
  for (double bu : grid.at("beta_u").get<std::vector<double>>()) {
    for (double bi : grid.at("beta_i").get<std::vector<double>>()) {
      for (bool us : grid.at("selection_us").get<std::vector<bool>>()) {
        for (bool is : grid.at("selection_is").get<std::vector<bool>>()) {
          for (bool w : grid.at("weights").get<std::vector<bool>>()) {
            cells.push_back({bu, bi, us, is, w});
          }
        }
      }
    }
  }
  if (cells.empty()) throw UsageError("sweep grid is empty");

  std::vector<eval::SweepRow> rows;
  std::string failures = "cell,error\n";
  bool any_failed = false;
  for (const auto& cell : cells) {
    try {
      SelectOptions opts = select_options(config_);
      opts.beta_u = cell.beta_u;
      opts.beta_i = cell.beta_i;
      opts.selection_us = cell.selection_us;
      opts.selection_is = cell.selection_is;
      const auto s = select_edges(implicit, embeddings, opts);
      const auto run = train_and_evaluate(data.split, data.categories, s.graphs,
                                          cell.weights, cfg, ns,
                                          warm ? &embeddings : nullptr);
      for (const auto& m : run.metrics.at) rows.push_back({cell, m});
      log() << "sweep: " << cell.label() << " done\n";
    } catch (const std::exception& e) {
      any_failed = true;
      failures += "\"" + cell.label() + "\",\"" + e.what() + "\"\n";
      log() << "sweep: " << cell.label() << " failed: " << e.what() << "\n";
    }
  }
  io::write_file_atomic(workdir_ / "sweep.csv", eval::sweep_csv(rows));
  if (any_failed) io::write_file_atomic(workdir_ / "sweep_failures.csv", failures);
}

}  // namespace drgame::pipeline
