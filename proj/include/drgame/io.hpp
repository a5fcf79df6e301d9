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
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "drgame/sparse.hpp"

namespace drgame::io {

namespace fs = std::filesystem;

// Writes to `<path>.tmp` and renames over `path`.
void write_file_atomic(const fs::path& path, std::string_view contents);
std::string read_file(const fs::path& path);

uint64_t fnv1a64(std::string_view bytes);
std::string hex64(uint64_t value);
// Hex FNV-1a of a file's bytes.
std::string hash_file(const fs::path& path);

// Shortest representation that parses back to the same double.
std::string format_double(double value);

// Splits one CSV line; fields may be double-quoted with "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

// Sparse matrix as "# {json header}" followed by "row,col,value" lines.
// The header carries rows, cols, nnz, name and source_hash.
void write_matrix_csv(const fs::path& path, const CsrMatrix& m,
                      const std::string& name,
                      const std::string& source_hash = "");
struct MatrixCsv {
  CsrMatrix matrix;
  nlohmann::json header;
};
MatrixCsv read_matrix_csv(const fs::path& path);

// Dense table as little-endian float32, row-major, plus `<path>.json`
// sidecar with shape and free-form metadata.
void write_dense_f32(const fs::path& path, const Eigen::MatrixXd& m,
                     nlohmann::json meta);
Eigen::MatrixXd read_dense_f32(const fs::path& path);

void write_dense_csv(const fs::path& path, const Eigen::MatrixXd& m);

}  // namespace drgame::io
