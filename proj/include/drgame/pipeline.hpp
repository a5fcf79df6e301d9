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

// End-to-end orchestration.
//
// The in-memory functions (ingest, preprocess, embed, select_edges,
// train_and_evaluate) chain the library modules. Pipeline wraps them in
// workdir stages that persist their artifacts atomically next to a
// manifest, so later stages can run in separate processes.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "drgame/bipl.hpp"
#include "drgame/cluster_select.hpp"
#include "drgame/dataset.hpp"
#include "drgame/eval.hpp"
#include "drgame/gnn.hpp"
#include "drgame/repr.hpp"
#include "drgame/train.hpp"

namespace drgame::pipeline {

namespace fs = std::filesystem;

// ---- configuration ------------------------------------------------------

nlohmann::json default_config();

// Defaults, then the file (JSON, may be partial), then "a.b=value"
// overrides. Values parse as JSON when possible, otherwise as strings.
// Unknown keys raise UsageError.
nlohmann::json load_config(const std::optional<fs::path>& file,
                           std::span<const std::string> overrides);
void apply_override(nlohmann::json& config, std::string_view assignment);

// Hex FNV-1a of the canonical (sorted-key, compact) serialization.
std::string fingerprint(const nlohmann::json& value);

SplitRatios split_ratios(const nlohmann::json& config);
bipl::GlobalDenominator global_denominator(const nlohmann::json& config);
repr::DgiConfig dgi_config(const nlohmann::json& config);
train::TrainConfig train_config(const nlohmann::json& config);
std::vector<int> eval_ns(const nlohmann::json& config);

struct SelectOptions {
  double beta_u = 0.6;
  double beta_i = 0.06;
  bool selection_us = true;  // select items for each user
  bool selection_is = true;  // select users for each item
  cluster::KMeansOptions kmeans;
  uint64_t seed = 0;
};
SelectOptions select_options(const nlohmann::json& config);

// ---- in-memory stages ---------------------------------------------------

struct Ingested {
  Catalog catalog;
  SplitDataset split;
  CategoryMatrix categories;
  PlaytimeMatrix playtime;  // all interactions
  bool empty = false;
};

Ingested ingest(std::span<const RawInteraction> interactions,
                std::span<const RawItem> items, int k_core,
                const SplitRatios& ratios, uint64_t seed);

struct Preprocessed {
  PlaytimeMatrix train_playtime;
  PercentileMatrix percentile;
  bipl::CategoryPreference preference;
  ImplicitPreference implicit;
};

// Balanced preferences from the training fold only.
Preprocessed preprocess(const SplitDataset& split, Index num_users,
                        const CategoryMatrix& categories,
                        bipl::GlobalDenominator denominator =
                            bipl::GlobalDenominator::kAnyTouchedCategory);

struct Embeddings {
  Eigen::MatrixXd items;            // E_I
  Eigen::MatrixXd categories;       // E_C
  Eigen::MatrixXd users;            // E_U
  Eigen::MatrixXd augmented_items;  // [Q E_C | E_I]
  std::vector<double> dgi_losses;
};

Embeddings embed(const CategoryMatrix& categories,
                 const bipl::CategoryPreference& preference,
                 const repr::DgiConfig& config);

struct Selection {
  cluster::ClusterAssignment users;
  cluster::ClusterAssignment items;
  cluster::DirectedSubgraphPair graphs;
};

// Clusters users on E_U and items on the augmented item table, then keeps
// one neighbor per cluster. A disabled side keeps every edge.
Selection select_edges(const ImplicitPreference& implicit,
                       const Embeddings& embeddings,
                       const SelectOptions& options);

// Layer-0 tables from E_U and the first d columns of the augmented items.
gnn::ModelParams warm_start_params(const Embeddings& embeddings, int layers);

struct ModelRun {
  train::FitResult fit;
  Eigen::MatrixXd fused_users;
  Eigen::MatrixXd fused_items;
  eval::MetricsReport metrics;
};

ModelRun train_and_evaluate(const SplitDataset& split,
                            const CategoryMatrix& categories,
                            const cluster::DirectedSubgraphPair& graphs,
                            bool use_weights,
                            const train::TrainConfig& config,
                            std::span<const int> ns,
                            const Embeddings* warm_start = nullptr);

// ---- workdir stages -----------------------------------------------------

enum class Stage { kIngest, kPreprocess, kEmbed, kSelect, kTrain, kEvaluate };
const char* stage_name(Stage stage);

struct RunOptions {
  bool force = false;     // rerun everything, silence staleness warnings
  std::ostream* log = nullptr;  // progress and warnings; null = stderr
};

// Owns the workdir for its lifetime through a lock file.
class Pipeline {
 public:
  Pipeline(nlohmann::json config, RunOptions options);
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  void ingest();
  void preprocess();
  void embed();
  void select();
  void train();
  void evaluate();
  // Every stage in order, reusing stages whose manifest fingerprint matches.
  void all();
  void sweep();

  // Top-N for one external user id as {user_id, item_ids, scores}.
  nlohmann::json recommend(const std::string& user_id, int n);
  // JSON-lines for every user into recommendations.jsonl.
  void recommend_all(int n);

  const fs::path& workdir() const { return workdir_; }
  // Expected fingerprint of a stage under the current config and inputs.
  std::string stage_fingerprint(Stage stage) const;
  bool up_to_date(Stage stage) const;

 private:
  void run(Stage stage);
  void require(Stage upstream, Stage current) const;
  void write_manifest(Stage stage, const nlohmann::json& inputs) const;
  std::ostream& log() const;

  nlohmann::json config_;
  RunOptions options_;
  fs::path workdir_;
  fs::path lock_path_;
};

}  // namespace drgame::pipeline
