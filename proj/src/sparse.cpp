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

#include "drgame/sparse.hpp"

#include <algorithm>

#include "drgame/error.hpp"

namespace drgame {

CsrMatrix::CsrMatrix(Index rows, Index cols)
    : rows_(rows), cols_(cols), indptr_(static_cast<size_t>(rows) + 1, 0) {}

CsrMatrix CsrMatrix::from_triplets(Index rows, Index cols,
                                   std::vector<Triplet> triplets) {
  if (rows < 0 || cols < 0) throw DataError("negative matrix dimension");
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  CsrMatrix m(rows, cols);
  m.indices_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  for (size_t k = 0; k < triplets.size(); ++k) {
    const Triplet& t = triplets[k];
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw DataError("triplet (" + std::to_string(t.row) + "," +
                      std::to_string(t.col) + ") outside " +
                      std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
      throw DataError("duplicate entry (" + std::to_string(t.row) + "," +
                      std::to_string(t.col) + ")");
    }
    m.indices_.push_back(t.col);
    m.values_.push_back(t.value);
    ++m.indptr_[static_cast<size_t>(t.row) + 1];
  }
  for (Index r = 0; r < rows; ++r) m.indptr_[r + 1] += m.indptr_[r];
  return m;
}

bool CsrMatrix::contains(Index r, Index c) const {
  auto cols = row_indices(r);
  return std::binary_search(cols.begin(), cols.end(), c);
}

double CsrMatrix::get(Index r, Index c, double fallback) const {
  auto cols = row_indices(r);
  auto it = std::lower_bound(cols.begin(), cols.end(), c);
  if (it == cols.end() || *it != c) return fallback;
  return values_[indptr_[r] + (it - cols.begin())];
}

CsrMatrix CsrMatrix::transpose() const {
  CsrMatrix t(cols_, rows_);
  t.indices_.resize(indices_.size());
  t.values_.resize(values_.size());
  for (Index c : indices_) ++t.indptr_[static_cast<size_t>(c) + 1];
  for (Index c = 0; c < cols_; ++c) t.indptr_[c + 1] += t.indptr_[c];
  std::vector<int64_t> cursor(t.indptr_.begin(), t.indptr_.end() - 1);
  // Rows are visited in increasing order, so each transposed row ends up
  // sorted by column.
  for (Index r = 0; r < rows_; ++r) {
    for (int64_t k = indptr_[r]; k < indptr_[r + 1]; ++k) {
      const int64_t dst = cursor[indices_[k]]++;
      t.indices_[dst] = r;
      t.values_[dst] = values_[k];
    }
  }
  return t;
}

std::vector<Triplet> CsrMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(indices_.size());
  for (Index r = 0; r < rows_; ++r) {
    for (int64_t k = indptr_[r]; k < indptr_[r + 1]; ++k) {
      out.push_back({r, indices_[k], values_[k]});
    }
  }
  return out;
}

CsrMatrix CsrMatrix::with_values(std::vector<double> values) const {
  if (values.size() != values_.size()) {
    throw DataError("with_values: size mismatch");
  }
  CsrMatrix m = *this;
  m.values_ = std::move(values);
  return m;
}

bool CsrMatrix::same_structure(const CsrMatrix& other) const {
  return rows_ == other.rows_ && cols_ == other.cols_ &&
         indptr_ == other.indptr_ && indices_ == other.indices_;
}

Eigen::MatrixXd CsrMatrix::multiply(const Eigen::MatrixXd& dense) const {
  if (dense.rows() != cols_) throw DataError("multiply: shape mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows_, dense.cols());
  for (Index r = 0; r < rows_; ++r) {
    for (int64_t k = indptr_[r]; k < indptr_[r + 1]; ++k) {
      out.row(r) += values_[k] * dense.row(indices_[k]);
    }
  }
  return out;
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows_, cols_);
  for (Index r = 0; r < rows_; ++r) {
    for (int64_t k = indptr_[r]; k < indptr_[r + 1]; ++k) {
      out(r, indices_[k]) = values_[k];
    }
  }
  return out;
}

}  // namespace drgame
