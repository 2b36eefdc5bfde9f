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

#include "evopose/run_store.h"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "evopose/error.h"
#include "evopose/hashing.h"
#include "evopose/serialization.h"
#include "evopose/version.h"

namespace evopose {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string Join(const std::string& dir, const std::string& rel) {
  return (fs::path(dir) / rel).string();
}

std::string Quote(const std::string& s) { return "\"" + s + "\""; }

// Splits one CSV line; fields may be double-quoted (no embedded quotes).
std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

class Writer {
 public:
  explicit Writer(std::string dir) : dir_(std::move(dir)) {}
  void Put(const std::string& rel, const std::string& bytes) {
    const std::string path = Join(dir_, rel);
    fs::create_directories(fs::path(path).parent_path());
    WriteFileAtomic(path, bytes);
    files_[rel] = Sha256Hex(bytes);
  }
  std::map<std::string, std::string>& files() { return files_; }

 private:
  std::string dir_;
  std::map<std::string, std::string> files_;
};

std::string FileStem(int64_t generation, int64_t index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "gen_%04lld/net_%03lld", static_cast<long long>(generation),
                static_cast<long long>(index));
  return buf;
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double ParseDouble(const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw IoError("malformed number '" + s + "'");
  }
  return v;
}

std::string WeightsPath(int64_t generation, int64_t index) {
  return FileStem(generation, index) + ".evow";
}

std::string HistoryCsv(const std::vector<FitnessRecord>& history) {
  std::ostringstream os;
  os << "generation,index,genotype,parent,params,loss,fitness,diverged\n";
  for (const auto& r : history) {
    os << r.generation << ',' << r.index << ',' << Quote(r.key) << ',' << Quote(r.parent_key)
       << ',' << r.params << ',' << FormatDouble(r.loss) << ',' << FormatDouble(r.fitness) << ','
       << (r.diverged ? 1 : 0) << '\n';
  }
  return os.str();
}

std::vector<FitnessRecord> ParseHistoryCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<FitnessRecord> out;
  if (!std::getline(in, line) ||
      line != "generation,index,genotype,parent,params,loss,fitness,diverged") {
    throw IoError("history.csv: unexpected header");
  }
  int64_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const auto f = SplitCsv(line);
    if (f.size() != 8) throw IoError("history.csv: row " + std::to_string(row) + " is malformed");
    FitnessRecord r;
    try {
      r.generation = std::stoll(f[0]);
      r.index = std::stoll(f[1]);
      r.key = f[2];
      r.parent_key = f[3];
      r.params = std::stoll(f[4]);
      r.loss = ParseDouble(f[5]);
      r.fitness = ParseDouble(f[6]);
      r.diverged = f[7] == "1";
    } catch (const std::logic_error&) {
      throw IoError("history.csv: row " + std::to_string(row) + " is malformed");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string TimingsCsv(const std::vector<FitnessRecord>& history) {
  std::ostringstream os;
  os << "generation,index,genotype,seconds\n";
  for (const auto& r : history) {
    os << r.generation << ',' << r.index << ',' << Quote(r.key) << ',' << FormatDouble(r.seconds)
       << '\n';
  }
  return os.str();
}

std::string PoolCsv(const std::vector<std::vector<FitnessRecord>>& pool_history) {
  std::ostringstream os;
  os << "generation,rank,genotype,params,loss,fitness\n";
  for (size_t g = 0; g < pool_history.size(); ++g) {
    for (size_t rank = 0; rank < pool_history[g].size(); ++rank) {
      const auto& r = pool_history[g][rank];
      os << g << ',' << rank << ',' << Quote(r.key) << ',' << r.params << ','
         << FormatDouble(r.loss) << ',' << FormatDouble(r.fitness) << '\n';
    }
  }
  return os.str();
}

bool HasManifest(const std::string& run_dir) { return fs::exists(Join(run_dir, kManifestFile)); }

Manifest ReadManifest(const std::string& run_dir) {
  const std::string path = Join(run_dir, kManifestFile);
  Manifest m;
  try {
    const json j = json::parse(ReadFileBytes(path));
    m.version = j.at("version");
    m.tool_version = j.at("tool_version");
    m.config_json = j.at("config").dump(2);
    m.config_hash = j.at("config_hash");
    m.generation = j.at("generation");
    m.completed = j.at("completed");
    m.files = j.at("files").get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  return m;
}

Manifest VerifyRunDir(const std::string& run_dir) {
  Manifest m = ReadManifest(run_dir);
  if (m.version != kRunFormatVersion) {
    throw IoError(Join(run_dir, kManifestFile) + ": run format version " +
                  std::to_string(m.version) + " is not supported (expected " +
                  std::to_string(kRunFormatVersion) + ")");
  }
  for (const auto& [rel, hash] : m.files) {
    const std::string path = Join(run_dir, rel);
    if (!fs::exists(path)) throw IoError(path + ": missing file listed in the manifest");
    if (Sha256File(path) != hash) throw IoError(path + ": content hash does not match the manifest");
  }
  return m;
}

void WriteCheckpoint(const std::string& run_dir, const RunConfig& config,
                     const EvolutionState& state, bool completed) {
  Writer w(run_dir);
  if (HasManifest(run_dir)) w.files() = ReadManifest(run_dir).files;
  for (const auto& c : state.latest) {
    const std::string stem = FileStem(c.record.generation, c.record.index);
    if (c.weights) w.Put(stem + ".evow", EncodeWeights(*c.weights));
    w.Put(stem + ".arch.txt", c.arch_text);
    if (!c.transfer_csv.empty()) w.Put(stem + ".transfer.csv", c.transfer_csv);
  }
  w.Put("history.csv", HistoryCsv(state.history));
  w.Put("timings.csv", TimingsCsv(state.history));
  w.Put("pool.csv", PoolCsv(state.pool_history));
  w.Put("cache.txt", state.cache.Serialize());

  json st;
  st["version"] = kRunFormatVersion;
  st["generation"] = state.generation;
  std::ostringstream rng;
  rng << state.rng;
  st["rng"] = rng.str();
  st["pool"] = json::array();
  for (const auto& c : state.pool) {
    st["pool"].push_back({{"generation", c.record.generation}, {"index", c.record.index}});
  }
  w.Put("state.json", st.dump(2) + "\n");

  json m;
  m["version"] = kRunFormatVersion;
  m["tool_version"] = kVersion;
  m["config"] = json::parse(RunConfigToJson(config));
  m["config_hash"] = ConfigHash(config);
  m["generation"] = state.generation;
  m["completed"] = completed;
  m["files"] = w.files();
  WriteFileAtomic(Join(run_dir, kManifestFile), m.dump(2) + "\n");
}

EvolutionState LoadCheckpoint(const std::string& run_dir, const RunConfig& config) {
  const Manifest m = VerifyRunDir(run_dir);
  if (m.config_hash != ConfigHash(config)) {
    throw ConfigError(run_dir + " was created with a different config (hash " + m.config_hash +
                      "); use a new run_dir or the original config");
  }
  EvolutionState s;
  const std::string state_path = Join(run_dir, "state.json");
  json st;
  try {
    st = json::parse(ReadFileBytes(state_path));
    s.generation = st.at("generation");
    std::istringstream rng(st.at("rng").get<std::string>());
    rng >> s.rng;
    if (!rng) throw IoError(state_path + ": malformed RNG state");
  } catch (const json::exception& e) {
    throw IoError(state_path + ": " + e.what());
  }
  s.history = ParseHistoryCsv(ReadFileBytes(Join(run_dir, "history.csv")));
  {
    std::istringstream in(ReadFileBytes(Join(run_dir, "timings.csv")));
    std::string line;
    std::getline(in, line);
    for (auto& r : s.history) {
      if (!std::getline(in, line)) throw IoError(Join(run_dir, "timings.csv") + ": too few rows");
      r.seconds = ParseDouble(SplitCsv(line).back());
    }
  }
  s.cache = GenotypeCache::Load(Join(run_dir, "cache.txt"));

  auto find = [&](int64_t generation, int64_t index) -> const FitnessRecord& {
    for (const auto& r : s.history) {
      if (r.generation == generation && r.index == index) return r;
    }
    throw IoError(state_path + ": pool member " + std::to_string(generation) + "/" +
                  std::to_string(index) + " is not in history.csv");
  };
  for (const auto& p : st.at("pool")) {
    Candidate c;
    c.record = find(p.at("generation"), p.at("index"));
    c.genotype = ParseGenotype(c.record.key);
    c.weights = std::make_shared<const std::vector<NamedTensor>>(
        ReadWeightsFile(Join(run_dir, WeightsPath(c.record.generation, c.record.index))));
    s.pool.push_back(std::move(c));
  }
  {
    std::istringstream in(ReadFileBytes(Join(run_dir, "pool.csv")));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const auto f = SplitCsv(line);
      if (f.size() != 6) throw IoError(Join(run_dir, "pool.csv") + ": malformed row");
      const size_t g = std::stoul(f[0]);
      if (s.pool_history.size() <= g) s.pool_history.resize(g + 1);
      FitnessRecord r;
      r.generation = -1;
      r.key = f[2];
      r.params = std::stoll(f[3]);
      r.loss = ParseDouble(f[4]);
      r.fitness = ParseDouble(f[5]);
      for (const auto& h : s.history) {
        if (h.key == r.key) r = h;
      }
      s.pool_history[g].push_back(r);
    }
  }
  return s;
}

}  // namespace evopose
