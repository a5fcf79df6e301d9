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


// Python bindings. Sparse matrices cross the boundary as COO triplets in
// and CSR (indptr, indices, data, shape) tuples out; the package wrapper
// turns those into scipy matrices. Configs cross as JSON text.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "drgame/bipl.hpp"
#include "drgame/cluster_select.hpp"
#include "drgame/error.hpp"
#include "drgame/eval.hpp"
#include "drgame/gnn.hpp"
#include "drgame/pipeline.hpp"
#include "drgame/repr.hpp"
#include "drgame/synthetic.hpp"
#include "drgame/train.hpp"

namespace py = pybind11;
using namespace drgame;
using nlohmann::json;

namespace {

using Csr = std::tuple<std::vector<int64_t>, std::vector<Index>, std::vector<double>,
                       std::pair<Index, Index>>;

CsrMatrix from_coo(const std::vector<Index>& rows, const std::vector<Index>& cols,
                   const std::vector<double>& values, Index num_rows, Index num_cols) {
  if (rows.size() != cols.size() || rows.size() != values.size()) {
    throw UsageError("rows, cols and values must have equal length");
  }
  std::vector<Triplet> t;
  t.reserve(rows.size());
  for (size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= num_rows || cols[k] < 0 || cols[k] >= num_cols) {
      throw UsageError("coordinate out of range at position " + std::to_string(k));
    }
    t.push_back({rows[k], cols[k], values[k]});
  }
  return CsrMatrix::from_triplets(num_rows, num_cols, std::move(t));
}

CategoryMatrix categories_from(const std::vector<Index>& items,
                               const std::vector<Index>& cats, Index num_items,
                               Index num_categories) {
  return CategoryMatrix(from_coo(items, cats, std::vector<double>(items.size(), 1.0),
                                 num_items, num_categories));
}

Csr to_csr(const CsrMatrix& m) {
  return {m.indptr(), m.indices(), m.values(), {m.rows(), m.cols()}};
}

bipl::GlobalDenominator denominator_from(const std::string& name) {
  if (name == "any_touched_category") return bipl::GlobalDenominator::kAnyTouchedCategory;
  if (name == "touched_category_occurrences") {
    return bipl::GlobalDenominator::kTouchedCategoryOccurrences;
  }
  throw UsageError("unknown global denominator '" + name + "'");
}

py::dict preferences(const std::vector<Index>& users, const std::vector<Index>& items,
                     const std::vector<double>& playtime, Index num_users, Index num_items,
                     const std::vector<Index>& cat_items, const std::vector<Index>& cat_ids,
                     Index num_categories, const std::string& denominator) {
  PlaytimeMatrix r(from_coo(users, items, playtime, num_users, num_items));
  auto q = categories_from(cat_items, cat_ids, num_items, num_categories);
  PercentileMatrix rt = bipl::percentile_transform(r);
  bipl::CategoryPreference p = bipl::category_preference(r, rt, q, denominator_from(denominator));
  ImplicitPreference h = bipl::implicit_preference(p, q, rt);
  py::dict out;
  out["percentile"] = to_csr(rt);
  out["preference"] = p;
  out["implicit"] = to_csr(h);
  return out;
}

}  // namespace

PYBIND11_MODULE(_drgame, m) {
  m.doc() = "Diversified game recommendation core";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  static py::exception<UsageError> usage(m, "UsageError", base.ptr());
  static py::exception<DataError> data(m, "DataError", base.ptr());
  static py::exception<NumericError> numeric(m, "NumericError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const UsageError& e) {
      py::set_error(usage, e.what());
    } catch (const DataError& e) {
      py::set_error(data, e.what());
    } catch (const NumericError& e) {
      py::set_error(numeric, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  m.def("preferences", &preferences, py::arg("users"), py::arg("items"),
        py::arg("playtime"), py::arg("num_users"), py::arg("num_items"),
        py::arg("category_items"), py::arg("category_ids"), py::arg("num_categories"),
        py::arg("denominator") = "any_touched_category",
        "Percentile, category preference and implicit preference matrices.");

  m.def("category_weights",
        [](const std::vector<Index>& items, const std::vector<Index>& cats, Index num_items,
           Index num_categories) {
          return train::category_weights(categories_from(items, cats, num_items, num_categories));
        },
        py::arg("category_items"), py::arg("category_ids"), py::arg("num_items"),
        py::arg("num_categories"));

  m.def("category_embeddings",
        [](const std::vector<Index>& items, const std::vector<Index>& cats, Index num_items,
           Index num_categories, int dim, int epochs, double lr, uint64_t seed) {
          auto graph = repr::build_category_graph(
              categories_from(items, cats, num_items, num_categories));
          auto r = repr::train_dgi(graph, {dim, epochs, lr, seed});
          return py::make_tuple(r.item_embeddings, r.category_embeddings, r.losses);
        },
        py::arg("category_items"), py::arg("category_ids"), py::arg("num_items"),
        py::arg("num_categories"), py::arg("dim") = 32, py::arg("epochs") = 200,
        py::arg("lr") = 0.001, py::arg("seed") = 0,
        "Graph-infomax embeddings: (items, categories, losses).");

  m.def("kmeans",
        [](const Eigen::MatrixXd& points, Index k, uint64_t seed, int max_iter, double tol) {
          auto a = cluster::kmeans(points, k, seed, {max_iter, tol});
          return py::make_tuple(a.assignment, a.centroids);
        },
        py::arg("points"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iter") = 100,
        py::arg("tol") = 1e-4);
  m.def("cluster_count", &cluster::cluster_count, py::arg("beta"), py::arg("n"));

  m.def("softmax", &gnn::softmax, py::arg("logits"));

  m.def("recall_at_n", &eval::recall_at_n, py::arg("ranked"), py::arg("test"), py::arg("n"));
  m.def("hit_ratio_at_n",
        [](const eval::RankedLists& ranked, const eval::HeldOut& test, int n) {
          auto h = eval::hit_ratio_at_n(ranked, test, n);
          return py::make_tuple(h.primary, h.classic);
        },
        py::arg("ranked"), py::arg("test"), py::arg("n"),
        "(primary, classic) hit ratios.");
  m.def("coverage_at_n",
        [](const eval::RankedLists& ranked, const std::vector<Index>& items,
           const std::vector<Index>& cats, Index num_items, Index num_categories, int n) {
          return eval::coverage_at_n(ranked, categories_from(items, cats, num_items, num_categories),
                                     n);
        },
        py::arg("ranked"), py::arg("category_items"), py::arg("category_ids"),
        py::arg("num_items"), py::arg("num_categories"), py::arg("n"));

  m.def("make_synthetic",
        [](Index users, Index items, Index categories, uint64_t seed, double zero_share,
           const std::optional<std::filesystem::path>& out) {
          synthetic::SyntheticConfig c;
          c.users = users;
          c.items = items;
          c.categories = categories;
          c.seed = seed;
          c.zero_share = zero_share;
          auto d = synthetic::make_synthetic(c);
          if (out) synthetic::write_synthetic(d, *out);
          py::list interactions, item_rows;
          for (const auto& r : d.interactions) {
            interactions.append(py::make_tuple(r.user_id, r.item_id, r.playtime));
          }
          for (const auto& i : d.items) item_rows.append(py::make_tuple(i.item_id, i.categories));
          return py::make_tuple(interactions, item_rows);
        },
        py::arg("users") = 200, py::arg("items") = 100, py::arg("categories") = 10,
        py::arg("seed") = 0, py::arg("zero_share") = 0.3, py::arg("out") = py::none(),
        "Synthetic (interactions, items); also written as JSONL when `out` is set.");

  m.def("default_config_json", [] { return pipeline::default_config().dump(); });
  m.def("load_config_json",
        [](const std::optional<std::filesystem::path>& file,
           const std::vector<std::string>& overrides) {
          return pipeline::load_config(file, overrides).dump();
        },
        py::arg("file") = py::none(), py::arg("overrides") = std::vector<std::string>{});

  py::class_<pipeline::Pipeline>(m, "Pipeline")
      .def(py::init([](const std::string& config_json, bool force) {
             return std::make_unique<pipeline::Pipeline>(json::parse(config_json),
                                                         pipeline::RunOptions{force, nullptr});
           }),
           py::arg("config_json"), py::arg("force") = false)
      .def("ingest", &pipeline::Pipeline::ingest, py::call_guard<py::gil_scoped_release>())
      .def("preprocess", &pipeline::Pipeline::preprocess,
           py::call_guard<py::gil_scoped_release>())
      .def("embed", &pipeline::Pipeline::embed, py::call_guard<py::gil_scoped_release>())
      .def("select", &pipeline::Pipeline::select, py::call_guard<py::gil_scoped_release>())
      .def("train", &pipeline::Pipeline::train, py::call_guard<py::gil_scoped_release>())
      .def("evaluate", &pipeline::Pipeline::evaluate, py::call_guard<py::gil_scoped_release>())
      .def("all", &pipeline::Pipeline::all, py::call_guard<py::gil_scoped_release>())
      .def("sweep", &pipeline::Pipeline::sweep, py::call_guard<py::gil_scoped_release>())
      .def("recommend_json",
           [](pipeline::Pipeline& p, const std::string& user, int n) {
             return p.recommend(user, n).dump();
           },
           py::arg("user_id"), py::arg("n") = 10)
      .def("recommend_all", &pipeline::Pipeline::recommend_all, py::arg("n") = 10)
      .def_property_readonly("workdir",
                             [](const pipeline::Pipeline& p) { return p.workdir(); });
}
