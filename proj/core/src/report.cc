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

#include "evopose/report.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "evopose/config.h"
#include "evopose/error.h"
#include "evopose/run_store.h"
#include "evopose/serialization.h"

namespace evopose {

std::vector<BestFitnessPoint> BestFitnessCurve(const std::string& pool_csv) {
  std::istringstream in(pool_csv);
  std::string line;
  std::getline(in, line);
  std::vector<BestFitnessPoint> out;
  while (std::getline(in, line)) {
    const auto first = line.find(',');
    const auto second = line.find(',', first + 1);
    if (first == std::string::npos || second == std::string::npos) {
      throw IoError("pool.csv: malformed row '" + line + "'");
    }
    if (line.substr(first + 1, second - first - 1) != "0") continue;
    out.push_back({std::stoll(line.substr(0, first)), ParseDouble(line.substr(line.rfind(',') + 1))});
  }
  return out;
}

std::string ScatterSvg(const std::vector<FitnessRecord>& history, int width, int height) {
  const double margin = 56.0;
  double min_p = 1e300, max_p = 0, min_l = 1e300, max_l = -1e300;
  for (const auto& r : history) {
    min_p = std::min(min_p, static_cast<double>(r.params));
    max_p = std::max(max_p, static_cast<double>(r.params));
    if (std::isfinite(r.loss)) {
      min_l = std::min(min_l, r.loss);
      max_l = std::max(max_l, r.loss);
    }
  }
  if (min_l > max_l) min_l = max_l = 0.0;
  const double lx0 = std::log10(std::max(1.0, min_p)), lx1 = std::log10(std::max(1.0, max_p));
  const double span_x = lx1 > lx0 ? lx1 - lx0 : 1.0, span_y = max_l > min_l ? max_l - min_l : 1.0;
  const double pw = width - 2 * margin, ph = height - 2 * margin;
  auto px = [&](int64_t p) {
    const double t = lx1 > lx0 ? (std::log10(static_cast<double>(p)) - lx0) / span_x : 0.5;
    return margin + t * pw;
  };
  auto py = [&](double l) {
    const double t = max_l > min_l ? (l - min_l) / span_y : 0.5;
    return height - margin - t * ph;
  };
  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
     << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
     << height - margin << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"" << height - 14
     << "\" text-anchor=\"middle\" font-size=\"12\">parameters (log scale, " << min_p << " to "
     << max_p << ")</text>\n";
  os << "<text x=\"14\" y=\"" << height / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 "
     << height / 2 << ")\" text-anchor=\"middle\">validation loss (" << min_l << " to " << max_l
     << ")</text>\n";
  for (const auto& r : history) {
    const double x = px(r.params);
    if (std::isfinite(r.loss)) {
      os << "<circle class=\"point\" cx=\"" << x << "\" cy=\"" << py(r.loss)
         << "\" r=\"3\" fill=\"" << (r.generation == 0 ? "crimson" : "steelblue")
         << "\" fill-opacity=\"0.7\"><title>" << r.key << "</title></circle>\n";
    } else {
      os << "<path class=\"point diverged\" d=\"M" << x - 3 << ' ' << margin - 3 << " l6 6 m0 -6 l-6 6\" "
         << "stroke=\"gray\"><title>" << r.key << " (diverged)</title></path>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

ReportResult WriteReport(const std::string& run_dir) {
  namespace fs = std::filesystem;
  if (!HasManifest(run_dir)) throw IoError(run_dir + ": no manifest.json; not a run directory");
  const Manifest m = VerifyRunDir(run_dir);
  const RunConfig config = ParseRunConfig(m.config_json);
  if (ConfigHash(config) != m.config_hash) {
    throw IoError(run_dir + ": manifest config hash does not match its config echo");
  }
  const auto history = ParseHistoryCsv(ReadFileBytes((fs::path(run_dir) / "history.csv").string()));
  if (history.empty()) throw IoError(run_dir + ": history.csv has no records");
  const auto curve = BestFitnessCurve(ReadFileBytes((fs::path(run_dir) / "pool.csv").string()));
  std::ostringstream csv;
  csv << "generation,best_fitness\n";
  for (const auto& p : curve) csv << p.generation << ',' << FormatDouble(p.fitness) << '\n';
  ReportResult r;
  r.best_fitness_csv_path = (fs::path(run_dir) / "best_fitness.csv").string();
  r.scatter_svg_path = (fs::path(run_dir) / "scatter.svg").string();
  WriteFileAtomic(r.best_fitness_csv_path, csv.str());
  WriteFileAtomic(r.scatter_svg_path,
                  ScatterSvg(history, config.report.svg_width, config.report.svg_height));
  r.points = history.size();
  r.generations = curve.size();
  return r;
}

}  // namespace evopose
