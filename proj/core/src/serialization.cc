// Copyright 2026 The EvoPose Authors.
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

#include "evopose/serialization.h"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "evopose/error.h"

namespace evopose {
namespace {

void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  uint64_t Uint(int width, const char* what) {
    Need(width, what);
    uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += width;
    return v;
  }

  std::string_view Take(size_t n, const char* what) {
    Need(n, what);
    std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Need(size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw IoError(std::string("weights container truncated while reading ") + what);
    }
  }

  std::string_view bytes_;
  size_t pos_ = 0;
};

}  // namespace

std::string EncodeWeights(const std::vector<NamedTensor>& entries) {
  std::string out(kWeightsMagic, 4);
  PutU32(out, kWeightsVersion);
  PutU32(out, static_cast<uint32_t>(entries.size()));
  for (const auto& [name, t] : entries) {
    PutU32(out, static_cast<uint32_t>(name.size()));
    out += name;
    out.push_back(static_cast<char>(kDtypeFloat64));
    PutU32(out, static_cast<uint32_t>(t.rank()));
    for (int64_t d : t.shape()) PutU64(out, static_cast<uint64_t>(d));
    for (double v : t.data()) PutU64(out, std::bit_cast<uint64_t>(v));
  }
  return out;
}

std::vector<NamedTensor> DecodeWeights(std::string_view bytes) {
  Reader r(bytes);
  if (r.Take(4, "magic") != std::string_view(kWeightsMagic, 4)) {
    throw IoError("not an EVOW weights container (bad magic)");
  }
  const auto version = r.Uint(4, "version");
  if (version != kWeightsVersion) {
    throw IoError("unsupported EVOW version " + std::to_string(version));
  }
  const auto count = r.Uint(4, "entry count");
  std::vector<NamedTensor> entries;
  entries.reserve(count);
  for (uint64_t e = 0; e < count; ++e) {
    const auto name_len = r.Uint(4, "name length");
    std::string name(r.Take(name_len, "name"));
    const auto dtype = r.Uint(1, "dtype");
    if (dtype != kDtypeFloat64) {
      throw IoError("entry '" + name + "' has unsupported dtype " + std::to_string(dtype));
    }
    const auto rank = r.Uint(4, "rank");
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<int64_t>(r.Uint(8, "dims"));
    std::vector<double> data(NumElements(shape));
    for (auto& v : data) v = std::bit_cast<double>(r.Uint(8, "data"));
    entries.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  if (!r.done()) throw IoError("trailing bytes after EVOW entries");
  return entries;
}

std::string ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFileAtomic(const std::string& path, std::string_view bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

void WriteWeightsFile(const std::string& path, const std::vector<NamedTensor>& entries) {
  WriteFileAtomic(path, EncodeWeights(entries));
}

std::vector<NamedTensor> ReadWeightsFile(const std::string& path) {
  try {
    return DecodeWeights(ReadFileBytes(path));
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

}  // namespace evopose
