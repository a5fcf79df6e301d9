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


#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <set>
#include <sstream>

#include "../support/tempdir.hpp"
#include "drgame/error.hpp"
#include "drgame/io.hpp"
#include "drgame/pipeline.hpp"
#include "drgame/synthetic.hpp"

using namespace drgame;
using nlohmann::json;
using testing_support::TempDir;

namespace {

struct CliResult {
  int code;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(DRGAME_CLI) + " " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (size_t n = std::fread(buf, 1, sizeof(buf), pipe)) out.append(buf, n);
  const int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

// Small, fast settings on a synthetic dataset written into `dir`.
json small_config(const TempDir& dir, Index users = 60, uint64_t seed = 4) {
  synthetic::SyntheticConfig sc;
  sc.users = users;
  sc.items = 40;
  sc.categories = 6;
  sc.seed = seed;
  synthetic::write_synthetic(synthetic::make_synthetic(sc), dir.path() / "data");
  json c = pipeline::default_config();
  c["paths"]["interactions"] = (dir.path() / "data" / "interactions.jsonl").string();
  c["paths"]["items"] = (dir.path() / "data" / "items.jsonl").string();
  c["paths"]["workdir"] = (dir.path() / "work").string();
  c["dataset"]["seed"] = seed;
  c["repr"]["dim"] = 8;
  c["repr"]["dgi_epochs"] = 20;
  c["train"]["dim"] = 8;
  c["train"]["lr"] = 0.01;
  c["train"]["batch_size"] = 128;
  c["train"]["max_epochs"] = 8;
  c["train"]["validation_n"] = 10;
  c["gnn"]["layers"] = 2;
  c["eval"]["ns"] = {5, 10};
  return c;
}

std::string write_config(const TempDir& dir, const json& c) {
  const auto path = dir.path() / "config.json";
  io::write_file_atomic(path, c.dump(2));
  return path.string();
}

}  // namespace

TEST_CASE("config overrides parse values and reject unknown keys") {
  auto c = pipeline::default_config();
  pipeline::apply_override(c, "train.lr=0.01");
  CHECK(c["train"]["lr"] == 0.01);
  pipeline::apply_override(c, "eval.ns=[10,20]");
  CHECK(pipeline::eval_ns(c) == std::vector<int>{10, 20});
  pipeline::apply_override(c, "paths.workdir=some/dir");
  CHECK(c["paths"]["workdir"] == "some/dir");
  CHECK_THROWS_AS(pipeline::apply_override(c, "train.nope=1"), UsageError);
  CHECK_THROWS_AS(pipeline::apply_override(c, "novalue"), UsageError);

  auto d = pipeline::default_config();
  CHECK(d["train"]["lr"] == 0.001);
  CHECK(d["train"]["lambda"] == 1e-5);
  CHECK(d["train"]["batch_size"] == 2048);
  CHECK(d["train"]["dim"] == 32);
  CHECK(d["train"]["patience"] == 10);
  CHECK(d["select"]["beta_u"] == 0.6);
  CHECK(d["select"]["beta_i"] == 0.06);
  CHECK(d["gnn"]["layers"] == 3);
  CHECK(d["dataset"]["k_core"] == 5);
  CHECK(pipeline::eval_ns(d) == std::vector<int>{100, 150, 200});
}

TEST_CASE("config files merge over defaults") {
  TempDir dir;
  io::write_file_atomic(dir / "c.json", R"({"train": {"lr": 0.5}})");
  std::vector<std::string> overrides{"train.batch_size=7"};
  auto c = pipeline::load_config(dir / "c.json", overrides);
  CHECK(c["train"]["lr"] == 0.5);
  CHECK(c["train"]["batch_size"] == 7);
  CHECK(c["train"]["lambda"] == 1e-5);
  io::write_file_atomic(dir / "bad.json", R"({"trian": {}})");
  CHECK_THROWS_AS(pipeline::load_config(dir / "bad.json", {}), UsageError);
  CHECK(pipeline::fingerprint(c) == pipeline::fingerprint(json::parse(c.dump())));
}

TEST_CASE("stages run in order and report missing upstream") {
  TempDir dir;
  auto c = small_config(dir);
  std::ostringstream log;
  pipeline::Pipeline p(c, {false, &log});
  try {
    p.evaluate();
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("run train first") != std::string::npos);
  }
  p.ingest();
  p.preprocess();
  p.embed();
  p.select();
  p.train();
  p.evaluate();
  for (const char* f : {"split.csv", "implicit_preference.csv", "hist_implicit.csv",
                        "user_embeddings.bin", "subgraphs.csv", "fused_users.bin",
                        "train_report.json", "metrics.json", "evaluate.manifest.json"}) {
    CHECK_MESSAGE(std::filesystem::exists(p.workdir() / f), f);
  }
  auto metrics = json::parse(io::read_file(p.workdir() / "metrics.json"));
  CHECK(metrics["metrics"].size() == 2);
  CHECK(p.up_to_date(pipeline::Stage::kEvaluate));

  auto rec = p.recommend("p00001", 5);
  CHECK(rec["item_ids"].size() == 5);
  const auto split = read_split_csv(p.workdir() / "split.csv");
  const auto items = read_id_map_csv(p.workdir() / "items.csv");
  const auto users = read_id_map_csv(p.workdir() / "users.csv");
  std::set<std::string> trained;
  for (const auto& e : split.train) {
    if (e.user == users.at("p00001")) trained.insert(items.name(e.item));
  }
  for (const auto& id : rec["item_ids"]) CHECK(trained.count(id.get<std::string>()) == 0);
  CHECK_THROWS_AS(p.recommend("nobody", 5), DataError);
}

TEST_CASE("manifests record overrides and staleness is detected") {
  TempDir dir;
  auto c = small_config(dir);
  {
    std::ostringstream log;
    pipeline::Pipeline p(c, {false, &log});
    p.all();
    auto manifest = json::parse(io::read_file(p.workdir() / "train.manifest.json"));
    CHECK(manifest["config"]["train"]["lr"] == 0.01);
    CHECK(manifest.contains("fingerprint"));
    CHECK(manifest.contains("timestamp"));
    CHECK(manifest["seed"] == 4);
  }
  {
    // Nothing changed: every stage is reused.
    std::ostringstream log;
    pipeline::Pipeline p(c, {false, &log});
    p.all();
    CHECK(log.str().find("evaluate: up to date") != std::string::npos);
    CHECK(log.str().find("ingest: up to date") != std::string::npos);
  }
  {
    // A changed select section makes train's upstream stale.
    auto changed = c;
    changed["select"]["beta_u"] = 0.5;
    std::ostringstream log;
    pipeline::Pipeline p(changed, {false, &log});
    CHECK_FALSE(p.up_to_date(pipeline::Stage::kSelect));
    CHECK_FALSE(p.up_to_date(pipeline::Stage::kEvaluate));
    CHECK(p.up_to_date(pipeline::Stage::kEmbed));
    p.train();
    CHECK(log.str().find("warning") != std::string::npos);
  }
}

TEST_CASE("force silences staleness warnings") {
  TempDir dir;
  auto c = small_config(dir);
  {
    std::ostringstream log;
    pipeline::Pipeline p(c, {false, &log});
    p.ingest();
    p.preprocess();
    p.embed();
    p.select();
  }
  c["select"]["beta_i"] = 0.5;
  std::ostringstream log;
  pipeline::Pipeline p(c, {true, &log});
  p.train();
  CHECK(log.str().find("warning") == std::string::npos);
}

TEST_CASE("the workdir is locked while a pipeline owns it") {
  TempDir dir;
  auto c = small_config(dir);
  std::ostringstream log;
  pipeline::Pipeline first(c, {false, &log});
  CHECK_THROWS_AS(pipeline::Pipeline(c, {false, &log}), UsageError);
}

TEST_CASE("sweep rows: one per cell and N, single cell equals plain run") {
  TempDir dir;
  auto c = small_config(dir);
  c["sweep"]["beta_u"] = {0.6, 1.0};
  c["sweep"]["beta_i"] = {0.06, 1.0};
  std::ostringstream log;
  pipeline::Pipeline p(c, {false, &log});
  p.sweep();
  const std::string csv = io::read_file(p.workdir() / "sweep.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 * 2);

  // The default cell, run through the stages.
  p.all();
  auto metrics = json::parse(io::read_file(p.workdir() / "metrics.json"));
  const double recall = metrics["metrics"][0]["recall"];
  const double coverage = metrics["metrics"][0]["coverage"];
  const std::string prefix = "0.6,0.06,1,1,1,5," + io::format_double(recall) + ",";
  CHECK(csv.find(prefix) != std::string::npos);
  CHECK(csv.find("," + io::format_double(coverage) + "\n") != std::string::npos);
}

TEST_CASE("cli exit codes and end-to-end run on the bundled data") {
  TempDir dir;
  auto c = small_config(dir);
  c["paths"]["interactions"] = std::string(DRGAME_DATA_DIR) + "/synthetic/interactions.jsonl";
  c["paths"]["items"] = std::string(DRGAME_DATA_DIR) + "/synthetic/items.jsonl";
  c["repr"]["dim"] = 32;
  c["train"]["dim"] = 32;
  const std::string cfg = write_config(dir, c);

  auto usage = run_cli("all -c " + cfg + " -o train.nope=1");
  CHECK(usage.code == 1);
  CHECK(run_cli("frobnicate").code == 1);

  auto early = run_cli("evaluate -c " + cfg);
  CHECK(early.code == 1);
  CHECK(early.output.find("run train first") != std::string::npos);

  auto missing = run_cli("all -c " + cfg + " -o paths.interactions=" +
                         (dir.path() / "nope.jsonl").string());
  CHECK(missing.code == 2);

  auto ok = run_cli("all -c " + cfg + " -o train.lr=0.02");
  CHECK(ok.code == 0);
  CHECK(std::filesystem::exists(dir.path() / "work" / "metrics.json"));
  auto manifest = json::parse(io::read_file(dir.path() / "work" / "train.manifest.json"));
  CHECK(manifest["config"]["train"]["lr"] == 0.02);

  auto rec = run_cli("recommend -c " + cfg + " -o train.lr=0.02 --user p00003 --n 4");
  CHECK(rec.code == 0);
  auto line = json::parse(rec.output.substr(rec.output.find('{')));
  CHECK(line["user_id"] == "p00003");
  CHECK(line["item_ids"].size() == 4);

  auto bad_data = dir.path() / "bad.jsonl";
  io::write_file_atomic(bad_data, "{\"user_id\":\"a\",\"item_id\":\"b\",\"playtime\":-3}\n");
  auto neg = run_cli("ingest -c " + cfg + " -o paths.interactions=" + bad_data.string());
  CHECK(neg.code == 2);
  CHECK(neg.output.find("bad.jsonl:1:") != std::string::npos);

  auto synth = run_cli("make-synthetic --out " + (dir.path() / "s").string() + " --users 1");
  CHECK(synth.code == 1);
}

TEST_CASE("synthetic generator contract") {
  synthetic::SyntheticConfig sc;
  sc.users = 700;
  sc.items = 200;
  sc.categories = 12;
  sc.seed = 9;
  auto data = synthetic::make_synthetic(sc);
  CHECK(data.interactions.size() >= 10000);
  double zeros = 0;
  for (const auto& r : data.interactions) zeros += r.playtime == 0;
  CHECK(std::abs(zeros / data.interactions.size() - 0.3) <= 0.03);

  bool multi = false;
  std::set<std::string> cats;
  for (const auto& item : data.items) {
    CHECK(item.categories.size() >= 1);
    CHECK(item.categories.size() <= 3);
    multi = multi || item.categories.size() > 1;
    cats.insert(item.categories.begin(), item.categories.end());
  }
  CHECK(multi);
  CHECK(cats.size() == 12);

  TempDir a, b;
  synthetic::write_synthetic(data, a.path());
  synthetic::write_synthetic(synthetic::make_synthetic(sc), b.path());
  CHECK(io::read_file(a / "interactions.jsonl") == io::read_file(b / "interactions.jsonl"));
  CHECK(io::read_file(a / "items.jsonl") == io::read_file(b / "items.jsonl"));

  sc.items = 1;
  CHECK_THROWS_AS(synthetic::make_synthetic(sc), UsageError);
}
