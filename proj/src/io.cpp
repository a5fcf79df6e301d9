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

#include "drgame/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "drgame/error.hpp"

namespace drgame::io {

static_assert(std::endian::native == std::endian::little,
              "binary tables assume a little-endian host");

void write_file_atomic(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

std::string hash_file(const fs::path& path) {
  return hex64(fnv1a64(read_file(path)));
}

std::string format_double(double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw DataError("cannot format double");
  return std::string(buf, end);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

void write_matrix_csv(const fs::path& path, const CsrMatrix& m,
                      const std::string& name, const std::string& source_hash) {
  nlohmann::json header = {{"name", name},
                           {"rows", m.rows()},
                           {"cols", m.cols()},
                           {"nnz", m.nnz()},
                           {"source_hash", source_hash}};
  std::string out = "# " + header.dump() + "\nrow,col,value\n";
  for (Index r = 0; r < m.rows(); ++r) {
    auto cols = m.row_indices(r);
    auto vals = m.row_values(r);
    for (size_t k = 0; k < cols.size(); ++k) {
      out += std::to_string(r);
      out += ',';
      out += std::to_string(cols[k]);
      out += ',';
      out += format_double(vals[k]);
      out += '\n';
    }
  }
  write_file_atomic(path, out);
}

MatrixCsv read_matrix_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw DataError(path.string() + ": missing matrix header");
  }
  MatrixCsv result;
  try {
    result.header = nlohmann::json::parse(line.substr(2));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ":1: bad header: " + e.what());
  }
  std::getline(in, line);  // column names
  std::vector<Triplet> triplets;
  int64_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 3) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected row,col,value");
    }
    try {
      triplets.push_back(
          {static_cast<Index>(std::stol(f[0])),
           static_cast<Index>(std::stol(f[1])), std::stod(f[2])});
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": unparsable number");
    }
  }
  result.matrix = CsrMatrix::from_triplets(result.header.at("rows").get<Index>(),
                                           result.header.at("cols").get<Index>(),
                                           std::move(triplets));
  return result;
}

void write_dense_f32(const fs::path& path, const Eigen::MatrixXd& m,
                     nlohmann::json meta) {
  std::string bytes(static_cast<size_t>(m.size()) * sizeof(float), '\0');
  size_t offset = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const float v = static_cast<float>(m(r, c));
      std::memcpy(bytes.data() + offset, &v, sizeof(float));
      offset += sizeof(float);
    }
  }
  meta["rows"] = m.rows();
  meta["cols"] = m.cols();
  meta["dtype"] = "float32-le";
  fs::path sidecar = path;
  sidecar += ".json";
  write_file_atomic(path, bytes);
  write_file_atomic(sidecar, meta.dump(2) + "\n");
}

Eigen::MatrixXd read_dense_f32(const fs::path& path) {
  fs::path sidecar = path;
  sidecar += ".json";
  const auto meta = nlohmann::json::parse(read_file(sidecar));
  const auto rows = meta.at("rows").get<Eigen::Index>();
  const auto cols = meta.at("cols").get<Eigen::Index>();
  const std::string bytes = read_file(path);
  if (bytes.size() != static_cast<size_t>(rows * cols) * sizeof(float)) {
    throw DataError(path.string() + ": size does not match sidecar shape");
  }
  Eigen::MatrixXd m(rows, cols);
  size_t offset = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      float v;
      std::memcpy(&v, bytes.data() + offset, sizeof(float));
      offset += sizeof(float);
      m(r, c) = v;
    }
  }
  return m;
}

void write_dense_csv(const fs::path& path, const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

}  // namespace drgame::io
