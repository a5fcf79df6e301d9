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


// Acceptance suite: one line per criterion, non-zero exit if any fails.
//
//   acceptance [--cli PATH] [--only N]
//
// With --cli the reproducibility check drives the command-line binary;
// otherwise it runs the pipeline in-process.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "../support/oracles.hpp"
#include "../support/tempdir.hpp"
#include "drgame/bipl.hpp"
#include "drgame/io.hpp"
#include "drgame/pipeline.hpp"
#include "drgame/synthetic.hpp"
#include "drgame/train.hpp"

using namespace drgame;
using nlohmann::json;

namespace {

// Pinned tolerances and budgets.
constexpr double kBiplTol = 1e-12;
constexpr double kPropagationTol = 1e-10;
constexpr double kGradientRelTol = 1e-4;
constexpr double kWeightTol = 1e-12;
constexpr double kMetricTol = 1e-12;
constexpr double kRecallRelativeDrop = 0.15;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string cli_path;

// ---- 1 ------------------------------------------------------------------

Outcome bipl_oracle() {
  Rng rng(1001);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto r = PlaytimeMatrix(oracle::random_playtime(50, 30, 0.25, 0.3, rng));
    auto q = CategoryMatrix(oracle::random_categories(30, 8, rng));
    auto rt = bipl::percentile_transform(r);
    auto p = bipl::category_preference(r, rt, q);
    auto h = bipl::implicit_preference(p, q, rt);
    const Eigen::MatrixXd rd = oracle::dense_playtime(r);
    const Eigen::MatrixXd qd = q.to_dense();
    const Eigen::MatrixXd rtd = oracle::percentile(rd);
    const Eigen::MatrixXd pd = oracle::preference(rd, rtd, qd);
    const Eigen::MatrixXd hd = oracle::implicit(pd, qd, rtd);
    worst = std::max({worst, oracle::max_abs_diff(rt.to_dense(), rtd),
                      oracle::max_abs_diff(p, pd),
                      oracle::max_abs_diff(h.to_dense(), hd)});
    if (!h.same_structure(r)) return {false, "support of H differs from R"};
  }
  return {worst <= kBiplTol, "max abs error " + fmt(worst) + " over 20 instances"};
}

// ---- 2 ------------------------------------------------------------------

Outcome balance() {
  synthetic::SyntheticConfig sc;
  sc.seed = 2;
  sc.zero_share = 0.3;
  auto data = synthetic::make_synthetic(sc);
  auto ing = pipeline::ingest(data.interactions, data.items, 5, {}, sc.seed);
  auto pre = pipeline::preprocess(ing.split, ing.catalog.users.size(), ing.categories);
  const double cv_r = bipl::coefficient_of_variation(pre.train_playtime.values());
  const double cv_h = bipl::coefficient_of_variation(pre.implicit.values());
  int64_t zero_total = 0, zero_positive = 0;
  const auto& rv = pre.train_playtime.values();
  const auto& hv = pre.implicit.values();
  for (size_t k = 0; k < rv.size(); ++k) {
    if (rv[k] == 0.0) {
      ++zero_total;
      zero_positive += hv[k] > 0.0;
    }
  }
  const bool pass = cv_h < cv_r && zero_total > 0 && zero_positive == zero_total;
  return {pass, "CV(R)=" + fmt(cv_r) + " CV(H)=" + fmt(cv_h) + ", " +
                    std::to_string(zero_positive) + "/" + std::to_string(zero_total) +
                    " zero-playtime interactions with H>0"};
}

// ---- 3 ------------------------------------------------------------------

Outcome low_frequency() {
  // c0 is carried by 10 games, c1 by 2; the user plays one of each.
  std::vector<Triplet> q;
  for (Index i = 0; i < 10; ++i) q.push_back({i, 0, 1.0});
  for (Index i = 10; i < 12; ++i) q.push_back({i, 1, 1.0});
  CategoryMatrix cats(CsrMatrix::from_triplets(12, 2, q));
  PlaytimeMatrix r(CsrMatrix::from_triplets(1, 12, {{0, 3, 20.0}, {0, 11, 20.0}}));
  auto p = bipl::category_preference(r, bipl::percentile_transform(r), cats);
  return {p(0, 1) >= p(0, 0),
          "P(rare)=" + fmt(p(0, 1)) + " P(frequent)=" + fmt(p(0, 0))};
}

// ---- 4 ------------------------------------------------------------------

Outcome selection_invariants() {
  Rng rng(4004);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index nu = 4 + rng.index(12), ni = 4 + rng.index(12);
    std::vector<Triplet> t;
    for (Index u = 0; u < nu; ++u) {
      for (Index i = 0; i < ni; ++i) {
        if (u == i % nu || i == u % ni || rng.uniform() < 0.35) {
          t.push_back({u, i, 0.1 + rng.uniform()});
        }
      }
    }
    ImplicitPreference h(CsrMatrix::from_triplets(nu, ni, std::move(t)));
    pipeline::Embeddings emb;
    emb.users.resize(nu, 4);
    emb.augmented_items.resize(ni, 8);
    for (Index x = 0; x < emb.users.size(); ++x) emb.users.data()[x] = rng.normal();
    for (Index x = 0; x < emb.augmented_items.size(); ++x) {
      emb.augmented_items.data()[x] = rng.normal();
    }
    pipeline::SelectOptions opt;
    opt.beta_u = 0.1 + 0.8 * rng.uniform();
    opt.beta_i = 0.1 + 0.8 * rng.uniform();
    opt.seed = trial;
    auto s = pipeline::select_edges(h, emb, opt);
    const CsrMatrix ht = h.transpose();
    std::vector<Index> in_u(nu, 0), in_i(ni, 0);
    for (const auto& e : s.graphs.item_to_user) {
      if (!h.contains(e.user, e.item)) return {false, "selected edge outside H"};
      ++in_u[e.user];
    }
    for (const auto& e : s.graphs.user_to_item) {
      if (!h.contains(e.user, e.item)) return {false, "selected edge outside H"};
      ++in_i[e.item];
    }
    for (Index u = 0; u < nu; ++u) {
      if (in_u[u] > std::min<Index>(s.items.k, h.row_size(u))) {
        return {false, "user in-degree exceeds min(k_i, degree)"};
      }
    }
    for (Index i = 0; i < ni; ++i) {
      if (in_i[i] > std::min<Index>(s.users.k, ht.row_size(i))) {
        return {false, "item in-degree exceeds min(k_u, degree)"};
      }
    }

    opt.beta_u = opt.beta_i = 1.0;
    auto all = pipeline::select_edges(h, emb, opt);
    auto full = cluster::full_subgraphs(h);
    if (all.graphs.item_to_user != full.item_to_user ||
        all.graphs.user_to_item != full.user_to_item) {
      return {false, "beta = 1 did not reproduce the full edge set"};
    }
    ++checked;
  }
  return {true, std::to_string(checked) + " instances: subset, degree bound and beta=1 identity hold"};
}

// ---- 5 ------------------------------------------------------------------

struct RandomGraph {
  Eigen::MatrixXd full, to_user, to_item;
  cluster::DirectedSubgraphPair pair;
};

RandomGraph random_graph(Index nu, Index ni, Rng& rng, bool keep_all) {
  RandomGraph g;
  g.full = Eigen::MatrixXd::Zero(nu, ni);
  for (Index u = 0; u < nu; ++u) {
    for (Index i = 0; i < ni; ++i) g.full(u, i) = rng.uniform() < 0.4;
  }
  for (Index u = 0; u < nu; ++u) g.full(u, rng.index(ni)) = 1;
  for (Index i = 0; i < ni; ++i) g.full(rng.index(nu), i) = 1;
  g.to_user = Eigen::MatrixXd::Zero(nu, ni);
  g.to_item = Eigen::MatrixXd::Zero(nu, ni);
  g.pair.num_users = nu;
  g.pair.num_items = ni;
  g.pair.user_degree.assign(nu, 0);
  g.pair.item_degree.assign(ni, 0);
  for (Index u = 0; u < nu; ++u) {
    for (Index i = 0; i < ni; ++i) {
      if (g.full(u, i) == 0) continue;
      ++g.pair.user_degree[u];
      ++g.pair.item_degree[i];
      if (keep_all || rng.uniform() < 0.6) {
        g.to_user(u, i) = 1;
        g.pair.item_to_user.push_back({u, i});
      }
      if (keep_all || rng.uniform() < 0.6) {
        g.to_item(u, i) = 1;
        g.pair.user_to_item.push_back({u, i});
      }
    }
  }
  return g;
}

Eigen::MatrixXd normal_matrix(Index r, Index c, Rng& rng, double scale = 1.0) {
  Eigen::MatrixXd m(r, c);
  for (Index x = 0; x < m.size(); ++x) m.data()[x] = scale * rng.normal();
  return m;
}

Outcome propagation_oracle() {
  Rng rng(5005);
  double worst_directed = 0, worst_symmetric = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Index nu = 1 + rng.index(10), ni = 1 + rng.index(10);
    const int layers = static_cast<int>(rng.index(4));
    gnn::ModelParams p;
    p.user_embeddings = normal_matrix(nu, 4, rng);
    p.item_embeddings = normal_matrix(ni, 4, rng);
    p.layer_logits = normal_matrix(layers + 1, 1, rng);

    auto g = random_graph(nu, ni, rng, false);
    auto out = gnn::propagate(p, g.pair, layers);
    auto ref = oracle::propagate(g.full, g.to_user, g.to_item, p.user_embeddings,
                                 p.item_embeddings, layers);
    const Eigen::VectorXd alpha = oracle::softmax(p.layer_logits);
    Eigen::MatrixXd fu = Eigen::MatrixXd::Zero(nu, 4), fi = Eigen::MatrixXd::Zero(ni, 4);
    for (int l = 0; l <= layers; ++l) {
      worst_directed = std::max({worst_directed,
                                 oracle::max_abs_diff(out.user_layers[l], ref.users[l]),
                                 oracle::max_abs_diff(out.item_layers[l], ref.items[l])});
      fu += alpha(l) * ref.users[l];
      fi += alpha(l) * ref.items[l];
    }
    worst_directed = std::max({worst_directed, oracle::max_abs_diff(out.user, fu),
                               oracle::max_abs_diff(out.item, fi)});

    auto sym = random_graph(nu, ni, rng, true);
    auto sym_out = gnn::propagate(p, sym.pair, layers);
    Eigen::MatrixXd e0(nu + ni, 4);
    e0 << p.user_embeddings, p.item_embeddings;
    auto powers = oracle::symmetric_layers(sym.full, e0, layers);
    for (int l = 0; l <= layers; ++l) {
      worst_symmetric = std::max(
          {worst_symmetric, oracle::max_abs_diff(sym_out.user_layers[l], powers[l].topRows(nu)),
           oracle::max_abs_diff(sym_out.item_layers[l], powers[l].bottomRows(ni))});
    }
  }
  return {worst_directed < kPropagationTol && worst_symmetric < kPropagationTol,
          "max error directed " + fmt(worst_directed) + ", symmetric " + fmt(worst_symmetric)};
}

// ---- 6 ------------------------------------------------------------------

Outcome gradient_check() {
  Rng rng(6006);
  double worst = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Index nu = 2 + rng.index(3), ni = 2 + rng.index(4);
    const int layers = trial % 3;
    auto g = random_graph(nu, ni, rng, false);
    auto graph = gnn::PropagationGraph::from_subgraphs(g.pair);
    gnn::ModelParams p;
    p.user_embeddings = normal_matrix(nu, 3, rng, 0.5);
    p.item_embeddings = normal_matrix(ni, 3, rng, 0.5);
    p.layer_logits = normal_matrix(layers + 1, 1, rng);
    Eigen::VectorXd w = (normal_matrix(ni, 1, rng).array().abs() + 0.1).matrix();
    std::vector<train::Triple> batch;
    for (int k = 0; k < 6; ++k) {
      const Index u = rng.index(nu), i = rng.index(ni);
      batch.push_back({u, i, static_cast<Index>((i + 1 + rng.index(ni - 1)) % ni)});
    }
    const double lambda = 0.01;
    const auto grads = train::bpr_loss(batch, p, graph, w, lambda);
    const double h = 1e-6;
    auto probe = [&](double& slot, double analytic) {
      const double saved = slot;
      slot = saved + h;
      const double up = train::bpr_loss_value(batch, p, graph, w, lambda);
      slot = saved - h;
      const double down = train::bpr_loss_value(batch, p, graph, w, lambda);
      slot = saved;
      const double numeric = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(analytic - numeric) /
                                  std::max(1e-8, std::abs(analytic) + std::abs(numeric)));
    };
    for (Index x = 0; x < p.user_embeddings.size(); ++x) {
      probe(p.user_embeddings.data()[x], grads.user_embeddings.data()[x]);
    }
    for (Index x = 0; x < p.item_embeddings.size(); ++x) {
      probe(p.item_embeddings.data()[x], grads.item_embeddings.data()[x]);
    }
    for (Index x = 0; x < p.layer_logits.size(); ++x) {
      probe(p.layer_logits(x), grads.layer_logits(x));
    }
  }
  return {worst < kGradientRelTol, "max relative error " + fmt(worst) + " over 10 instances"};
}

// ---- 7 ------------------------------------------------------------------

Outcome weight_formula() {
  CategoryMatrix worked(CsrMatrix::from_triplets(3, 2, {{0, 0, 1}, {1, 0, 1}, {2, 1, 1}}));
  const Eigen::VectorXd w = train::category_weights(worked);
  Eigen::Vector3d expect(2.0 / 3, 2.0 / 3, 4.0 / 3);
  double worst = (w - expect).cwiseAbs().maxCoeff();
  Rng rng(7007);
  for (int trial = 0; trial < 10; ++trial) {
    auto q = CategoryMatrix(oracle::random_categories(5 + rng.index(20), 2 + rng.index(6), rng));
    worst = std::max(worst, oracle::max_abs_diff(train::category_weights(q),
                                                 oracle::weights(q.to_dense())));
  }
  return {worst < kWeightTol, "max abs error " + fmt(worst) + " (worked example and 10 random Q)"};
}

// ---- 8 ------------------------------------------------------------------

Outcome metric_oracles() {
  Rng rng(8008);
  double worst = 0;
  bool monotone = true;
  for (int trial = 0; trial < 20; ++trial) {
    const Index users = 10, items = 50;
    auto q = CategoryMatrix(oracle::random_categories(items, 9, rng));
    eval::RankedLists ranked(users);
    eval::HeldOut test(users);
    std::vector<Index> evaluated;
    for (Index u = 0; u < users; ++u) {
      std::vector<Index> perm(items);
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(std::span<Index>(perm));
      ranked[u].assign(perm.begin(), perm.begin() + 40);
      if (rng.uniform() < 0.1) continue;
      std::vector<Index> held;
      for (Index i = 0; i < items; ++i) {
        if (rng.uniform() < 0.12) held.push_back(i);
      }
      if (held.empty()) held.push_back(perm[0]);
      test[u] = held;
      evaluated.push_back(u);
    }
    if (evaluated.empty()) continue;
    double prev_recall = -1, prev_cov = -1;
    for (int n : {5, 10, 20, 40}) {
      const double r = eval::recall_at_n(ranked, test, n);
      const auto h = eval::hit_ratio_at_n(ranked, test, n);
      const double c = eval::coverage_at_n(ranked, q, n, evaluated);
      worst = std::max({worst, std::abs(r - oracle::recall(ranked, test, n)),
                        std::abs(h.primary - oracle::hit_primary(ranked, test, n)),
                        std::abs(h.classic - oracle::hit_classic(ranked, test, n)),
                        std::abs(c - oracle::coverage(ranked, test, q.to_dense(), n))});
      monotone = monotone && r >= prev_recall && c >= prev_cov;
      prev_recall = r;
      prev_cov = c;
    }
  }
  return {worst <= kMetricTol && monotone,
          "max abs error " + fmt(worst) + (monotone ? ", monotone in N" : ", NOT monotone in N")};
}

// ---- 9 ------------------------------------------------------------------

Outcome dgi_sanity() {
  std::vector<Triplet> t;
  for (Index i = 0; i < 20; ++i) t.push_back({i, i < 10 ? 0 : 1, 1.0});
  auto graph = repr::build_category_graph(CategoryMatrix(CsrMatrix::from_triplets(20, 2, t)));
  std::string detail;
  bool pass = true;
  for (uint64_t seed : {1, 2, 3}) {
    auto r = repr::train_dgi(graph, {8, 300, 0.01, seed});
    double intra = 0, inter = 0;
    int ni = 0, nx = 0;
    for (Index a = 0; a < 20; ++a) {
      for (Index b = a + 1; b < 20; ++b) {
        const auto ea = r.item_embeddings.row(a), eb = r.item_embeddings.row(b);
        const double cos = ea.dot(eb) / (ea.norm() * eb.norm() + 1e-300);
        if ((a < 10) == (b < 10)) {
          intra += cos;
          ++ni;
        } else {
          inter += cos;
          ++nx;
        }
      }
    }
    intra /= ni;
    inter /= nx;
    const bool ok = r.losses.back() < r.losses.front() && intra > inter;
    pass = pass && ok;
    detail += "seed " + std::to_string(seed) + ": loss " + fmt(r.losses.front()) + "->" +
              fmt(r.losses.back()) + " cos " + fmt(intra) + "/" + fmt(inter) + "; ";
  }
  return {pass, detail};
}

// ---- 10 -----------------------------------------------------------------

json desk_config(uint64_t seed) {
  json c = pipeline::default_config();
  c["dataset"]["seed"] = seed;
  c["train"]["lr"] = 0.01;
  c["train"]["batch_size"] = 256;
  c["train"]["max_epochs"] = 60;
  c["train"]["validation_n"] = 10;
  c["eval"]["ns"] = {10};
  return c;
}

Outcome directional_diversity() {
  double cov_full = 0, cov_base = 0, rec_full = 0, rec_base = 0;
  std::string detail;
  const uint64_t seeds[] = {1, 2, 3};
  for (uint64_t seed : seeds) {
    synthetic::SyntheticConfig sc;
    sc.users = 200;
    sc.items = 100;
    sc.categories = 10;
    sc.seed = seed;
    auto data = synthetic::make_synthetic(sc);
    const json c = desk_config(seed);
    auto ing = pipeline::ingest(data.interactions, data.items,
                                c["dataset"]["k_core"], pipeline::split_ratios(c), seed);
    auto pre = pipeline::preprocess(ing.split, ing.catalog.users.size(), ing.categories);
    auto emb = pipeline::embed(ing.categories, pre.preference, pipeline::dgi_config(c));
    const auto cfg = pipeline::train_config(c);
    const auto ns = pipeline::eval_ns(c);

    auto full_opts = pipeline::select_options(c);
    auto full_sel = pipeline::select_edges(pre.implicit, emb, full_opts);
    auto full = pipeline::train_and_evaluate(ing.split, ing.categories, full_sel.graphs,
                                             true, cfg, ns);
    auto base_opts = full_opts;
    base_opts.beta_u = base_opts.beta_i = 1.0;
    auto base_sel = pipeline::select_edges(pre.implicit, emb, base_opts);
    auto base = pipeline::train_and_evaluate(ing.split, ing.categories, base_sel.graphs,
                                             false, cfg, ns);
    const auto& f = full.metrics.at[0];
    const auto& b = base.metrics.at[0];
    cov_full += f.coverage / 3;
    cov_base += b.coverage / 3;
    rec_full += f.recall / 3;
    rec_base += b.recall / 3;
    detail += "seed " + std::to_string(seed) + " cov " + fmt(f.coverage) + "/" +
              fmt(b.coverage) + " rec " + fmt(f.recall) + "/" + fmt(b.recall) + "; ";
  }
  const double drop = (rec_base - rec_full) / rec_base;
  const bool pass = cov_full > cov_base && std::abs(drop) <= kRecallRelativeDrop;
  return {pass, "mean Coverage@10 " + fmt(cov_full) + " vs " + fmt(cov_base) +
                    ", mean Recall@10 " + fmt(rec_full) + " vs " + fmt(rec_base) +
                    " (relative change " + fmt(-drop) + ") [" + detail + "]"};
}

// ---- 11 -----------------------------------------------------------------

int run_command(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome reproducibility() {
  testing_support::TempDir dir;
  synthetic::SyntheticConfig sc;
  sc.seed = 11;
  synthetic::write_synthetic(synthetic::make_synthetic(sc), dir.path() / "data");
  json c = desk_config(11);
  c["paths"]["interactions"] = (dir.path() / "data" / "interactions.jsonl").string();
  c["paths"]["items"] = (dir.path() / "data" / "items.jsonl").string();
  c["eval"]["ns"] = {10, 20};
  std::string metrics[2];
  for (int run = 0; run < 2; ++run) {
    const auto work = dir.path() / ("work" + std::to_string(run));
    c["paths"]["workdir"] = work.string();
    if (!cli_path.empty()) {
      const auto cfg = dir.path() / "config.json";
      io::write_file_atomic(cfg, c.dump(2));
      const int code = run_command(cli_path + " all -c " + cfg.string() + " > /dev/null 2>&1");
      if (code != 0) return {false, "cli exited with " + std::to_string(code)};
    } else {
      std::ostringstream log;
      pipeline::Pipeline(c, {false, &log}).all();
    }
    metrics[run] = io::read_file(work / "metrics.json");
  }
  const bool same = metrics[0] == metrics[1] && !metrics[0].empty();
  return {same, std::string(same ? "byte-identical" : "DIFFERENT") + " metrics.json (" +
                    std::to_string(metrics[0].size()) + " bytes, " +
                    (cli_path.empty() ? "in-process" : "via cli") + ")"};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int a = 1; a < argc; ++a) {
    if (!std::strcmp(argv[a], "--cli") && a + 1 < argc) {
      cli_path = argv[++a];
    } else if (!std::strcmp(argv[a], "--only") && a + 1 < argc) {
      only = std::atoi(argv[++a]);
    } else {
      std::cerr << "usage: acceptance [--cli PATH] [--only N]\n";
      return 2;
    }
  }

  const Criterion criteria[] = {
      {1, "preference transforms match the dense oracle", 5, bipl_oracle},
      {2, "implicit preference is more balanced than playtime", 5, balance},
      {3, "rare categories get at least the frequent category's preference", 1, low_frequency},
      {4, "selection invariants", 5, selection_invariants},
      {5, "propagation matches dense oracles", 5, propagation_oracle},
      {6, "ranking-loss gradients match finite differences", 30, gradient_check},
      {7, "category weights match the oracle", 1, weight_formula},
      {8, "metrics match brute force", 1, metric_oracles},
      {9, "graph infomax sanity", 30, dgi_sanity},
      {10, "diversity improves over the ablation at comparable recall", 600, directional_diversity},
      {11, "repeated runs give byte-identical metrics", 600, reproducibility},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (only && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs < c.budget_seconds;
    const bool pass = o.pass && in_budget;
    failures += !pass;
    std::printf("criterion %2d: %s  %s: %s [%.2f s, budget %.0f s%s]\n", c.id,
                pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                c.budget_seconds, in_budget ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  if (!only) {
    std::printf("criterion 12: SKIP  full-scale run on the original store data is "
                "optional and not gated (see README)\n");
  }
  std::printf("%s: %d failing criteria\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}
