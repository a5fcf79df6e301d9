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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace drgame {

using Index = int32_t;

struct Triplet {
  Index row;
  Index col;
  double value;
};

// Compressed sparse row matrix whose *structure* carries meaning: a stored
// entry with value 0 is different from an absent entry. Column indices in
// each row are strictly increasing.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(Index rows, Index cols);

  // Duplicate coordinates are rejected; callers merge beforehand.
  static CsrMatrix from_triplets(Index rows, Index cols,
                                 std::vector<Triplet> triplets);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  int64_t nnz() const { return static_cast<int64_t>(indices_.size()); }

  std::span<const Index> row_indices(Index r) const {
    return {indices_.data() + indptr_[r],
            static_cast<size_t>(indptr_[r + 1] - indptr_[r])};
  }
  std::span<const double> row_values(Index r) const {
    return {values_.data() + indptr_[r],
            static_cast<size_t>(indptr_[r + 1] - indptr_[r])};
  }
  std::span<double> row_values(Index r) {
    return {values_.data() + indptr_[r],
            static_cast<size_t>(indptr_[r + 1] - indptr_[r])};
  }
  Index row_size(Index r) const {
    return static_cast<Index>(indptr_[r + 1] - indptr_[r]);
  }

  const std::vector<int64_t>& indptr() const { return indptr_; }
  const std::vector<Index>& indices() const { return indices_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool contains(Index r, Index c) const;
  // Stored value, or `fallback` when the entry is absent.
  double get(Index r, Index c, double fallback = 0.0) const;

  CsrMatrix transpose() const;
  std::vector<Triplet> triplets() const;

  // Same structure, new values (size must equal nnz()).
  CsrMatrix with_values(std::vector<double> values) const;
  bool same_structure(const CsrMatrix& other) const;

  // this (rows x cols) times dense (cols x d).
  Eigen::MatrixXd multiply(const Eigen::MatrixXd& dense) const;

  Eigen::MatrixXd to_dense() const;

  bool operator==(const CsrMatrix& other) const = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<int64_t> indptr_{0};
  std::vector<Index> indices_;
  std::vector<double> values_;
};

// User x item playtime. Stored entries are interactions (playtime >= 0).
struct PlaytimeMatrix : CsrMatrix {
  PlaytimeMatrix() = default;
  explicit PlaytimeMatrix(CsrMatrix m) : CsrMatrix(std::move(m)) {}
};

// Binary item x category membership.
struct CategoryMatrix : CsrMatrix {
  CategoryMatrix() = default;
  explicit CategoryMatrix(CsrMatrix m) : CsrMatrix(std::move(m)) {}
};

// Per-item rank-normalized playtime in (0, 1].
struct PercentileMatrix : CsrMatrix {
  PercentileMatrix() = default;
  explicit PercentileMatrix(CsrMatrix m) : CsrMatrix(std::move(m)) {}
};

// Balanced implicit preference; support equals the playtime support.
struct ImplicitPreference : CsrMatrix {
  ImplicitPreference() = default;
  explicit ImplicitPreference(CsrMatrix m) : CsrMatrix(std::move(m)) {}
};

}  // namespace drgame
