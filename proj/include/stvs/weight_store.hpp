// Copyright (c) 2026 The STVS Authors. All Rights Reserved.
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

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <type_traits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "stvs/tensor.hpp"

namespace stvs {

class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Named parameter tensors, iterated in name order.
class WeightStore {
 public:
  using Map = std::map<std::string, Tensor>;

  void insert(const std::string& name, Tensor t) {
    if (name.empty()) throw std::invalid_argument("weight name must be non-empty");
    if (name.size() > 0xFFFF) throw std::invalid_argument("weight name too long: " + name);
    if (!all_finite(t)) throw std::invalid_argument("weight '" + name + "' has non-finite values");
    if (!tensors_.emplace(name, std::move(t)).second) {
      throw std::invalid_argument("duplicate weight name '" + name + "'");
    }
  }

  void set(const std::string& name, Tensor t) {
    if (!contains(name)) throw std::out_of_range("no weight named '" + name + "'");
    tensors_.at(name) = std::move(t);
  }

  const Tensor& get(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw std::out_of_range("missing weight '" + name + "'");
    return it->second;
  }

  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  std::size_t size() const noexcept { return tensors_.size(); }
  bool empty() const noexcept { return tensors_.empty(); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(tensors_.size());
    for (const auto& [k, v] : tensors_) out.push_back(k);
    return out;
  }

  Map::const_iterator begin() const { return tensors_.begin(); }
  Map::const_iterator end() const { return tensors_.end(); }

  bool operator==(const WeightStore& o) const { return tensors_ == o.tensors_; }

 private:
  Map tensors_;
};

// Binary layout (little-endian):
//   "STVS" | u32 version (=1) | u32 tensor_count
//   per tensor: u16 name_len | name bytes | u8 rank | u32 dims[rank] | f32 values
inline constexpr char kWeightMagic[4] = {'S', 'T', 'V', 'S'};
inline constexpr std::uint32_t kWeightVersion = 1;

namespace detail {

class ByteWriter {
 public:
  template <typename U>
  void put(U v) {
    static_assert(std::is_unsigned_v<U>);
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void put_f32(float f) { put(std::bit_cast<std::uint32_t>(f)); }
  void put_raw(const char* p, std::size_t n) { bytes.insert(bytes.end(), p, p + n); }

  std::vector<char> bytes;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<char>& bytes) : bytes_(bytes) {}

  template <typename U>
  U get(const char* what) {
    need(sizeof(U), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }
  float get_f32(const char* what) { return std::bit_cast<float>(get<std::uint32_t>(what)); }
  std::string get_str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string("truncated weight file while reading ") + what, pos_);
    }
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<char> serialize_weights(const WeightStore& store) {
  detail::ByteWriter w;
  w.put_raw(kWeightMagic, 4);
  w.put(kWeightVersion);
  w.put(static_cast<std::uint32_t>(store.size()));
  for (const auto& [name, t] : store) {
    w.put(static_cast<std::uint16_t>(name.size()));
    w.put_raw(name.data(), name.size());
    if (t.rank() > 255) throw std::invalid_argument("tensor rank exceeds 255: " + name);
    w.put(static_cast<std::uint8_t>(t.rank()));
    for (auto d : t.dims()) w.put(static_cast<std::uint32_t>(d));
    for (float v : t.data()) w.put_f32(v);
  }
  return std::move(w.bytes);
}

inline WeightStore deserialize_weights(const std::vector<char>& bytes) {
  detail::ByteReader r(bytes);
  const auto magic = r.get_str(4, "magic");
  if (std::memcmp(magic.data(), kWeightMagic, 4) != 0) throw FormatError("bad magic", 0);
  const auto version = r.get<std::uint32_t>("version");
  if (version != kWeightVersion) {
    throw FormatError("unsupported version " + std::to_string(version), 4);
  }
  const auto count = r.get<std::uint32_t>("tensor count");
  WeightStore store;
  for (std::uint32_t n = 0; n < count; ++n) {
    const auto entry_at = r.pos();
    const auto name_len = r.get<std::uint16_t>("name length");
    if (name_len == 0) throw FormatError("empty tensor name", entry_at);
    const auto name = r.get_str(name_len, "name");
    const auto rank_at = r.pos();
    const auto rank = r.get<std::uint8_t>("rank");
    if (rank == 0) throw FormatError("tensor '" + name + "' has rank 0", rank_at);
    Dims dims;
    std::uint64_t count_values = 1;
    for (std::uint8_t a = 0; a < rank; ++a) {
      const auto dim_at = r.pos();
      const auto d = r.get<std::uint32_t>("dims");
      if (d == 0) throw FormatError("tensor '" + name + "' has a zero dim", dim_at);
      dims.push_back(d);
      count_values *= d;
      if (count_values > r.remaining() / 4 + 1) {
        throw FormatError("tensor '" + name + "' is larger than the remaining file", dim_at);
      }
    }
    r.need(count_values * 4, "tensor values");
    std::vector<float> data(count_values);
    for (auto& v : data) {
      v = r.get_f32("tensor values");
      if (!std::isfinite(v)) {
        throw FormatError("tensor '" + name + "' has a non-finite value", r.pos() - 4);
      }
    }
    if (store.contains(name)) throw FormatError("duplicate tensor '" + name + "'", entry_at);
    store.insert(name, Tensor(std::move(dims), std::move(data)));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after last tensor", r.pos());
  return store;
}

inline void save_weights(const WeightStore& store, const std::filesystem::path& path) {
  const auto bytes = serialize_weights(store);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline std::vector<char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline WeightStore load_weights(const std::filesystem::path& path) {
  return deserialize_weights(read_file_bytes(path));
}

}  // namespace stvs
