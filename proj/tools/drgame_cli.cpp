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


// drgame: command-line driver for the recommendation pipeline.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "drgame/error.hpp"
#include "drgame/pipeline.hpp"
#include "drgame/synthetic.hpp"

namespace {

using drgame::pipeline::Pipeline;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  bool force = false;
};

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("-c,--config", common.config_path, "JSON config file");
  sub->add_option("-o,--override", common.overrides,
                  "dotted key assignment, e.g. train.lr=0.01 (repeatable)");
  sub->add_flag("-f,--force", common.force,
                "rerun every stage and silence staleness warnings");
}

nlohmann::json load(const Common& common) {
  std::optional<std::filesystem::path> file;
  if (!common.config_path.empty()) file = common.config_path;
  return drgame::pipeline::load_config(file, common.overrides);
}

int run(int argc, char** argv) {
  CLI::App app{"Diversified game recommendation pipeline"};
  app.require_subcommand(1);
  Common common;

  struct StageCommand {
    const char* name;
    const char* help;
    void (Pipeline::*method)();
  };
  const StageCommand stages[] = {
      {"ingest", "read raw files, k-core filter, split", &Pipeline::ingest},
      {"preprocess", "percentile, category preference, implicit preference",
       &Pipeline::preprocess},
      {"embed", "category-aware representations", &Pipeline::embed},
      {"select", "cluster and select neighbors", &Pipeline::select},
      {"train", "weighted pairwise ranking training", &Pipeline::train},
      {"evaluate", "accuracy and diversity metrics", &Pipeline::evaluate},
      {"all", "every stage in order", &Pipeline::all},
      {"sweep", "grid over the sweep section", &Pipeline::sweep},
  };
  void (Pipeline::*chosen)() = nullptr;
  for (const auto& s : stages) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, common);
    sub->callback([&chosen, method = s.method] { chosen = method; });
  }

  auto* rec = app.add_subcommand("recommend", "top-N list for one user or all");
  add_common(rec, common);
  std::string user;
  int n = 10;
  bool every_user = false;
  rec->add_option("--user", user, "external user id");
  rec->add_option("--n", n, "list length")->check(CLI::PositiveNumber);
  rec->add_flag("--all", every_user, "write recommendations.jsonl for every user");

  auto* synth = app.add_subcommand("make-synthetic", "write a synthetic dataset");
  drgame::synthetic::SyntheticConfig sc;
  std::string out_dir;
  synth->add_option("--out", out_dir, "output directory")->required();
  synth->add_option("--users", sc.users);
  synth->add_option("--items", sc.items);
  synth->add_option("--categories", sc.categories);
  synth->add_option("--seed", sc.seed);
  synth->add_option("--zero-share", sc.zero_share);
  synth->add_option("--min-interactions", sc.min_interactions);
  synth->add_option("--max-interactions", sc.max_interactions);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (synth->parsed()) {
    drgame::synthetic::write_synthetic(drgame::synthetic::make_synthetic(sc),
                                       out_dir);
    return 0;
  }

  Pipeline pipeline(load(common), {common.force, &std::cerr});
  if (rec->parsed()) {
    if (every_user) {
      pipeline.recommend_all(n);
    } else {
      if (user.empty()) throw drgame::UsageError("recommend needs --user or --all");
      std::cout << pipeline.recommend(user, n).dump() << "\n";
    }
    return 0;
  }
  (pipeline.*chosen)();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const drgame::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const drgame::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const drgame::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
