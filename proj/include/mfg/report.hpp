// Copyright 2026 The mfglab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

// ScenarioReport: a statistics table, declared checks with their thresholds,
// provenance (config hash and seed), and auxiliary CSV / SVG artifacts.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mfg/csv.hpp"
#include "mfg/errors.hpp"

namespace mfg {

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return s;
}

// A statistic compared with a closed interval. Descriptive checks are
// reported but never fail the run.
struct Check {
  std::string name;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double std_error = 0.0;
  bool asserted = true;
  std::string note;

  bool passed() const { return value >= lo && value <= hi; }
};

struct ScenarioReport {
  std::string scenario;
  std::string config_json;  // resolved config, canonical form
  std::string hash_basis;   // hashed instead of config_json when set
  std::uint64_t seed = 0;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<Check> checks;
  std::vector<std::string> notes;
  std::map<std::string, std::string> files;  // extra artifacts by file name

  std::string config_hash() const {
    return hex64(fnv1a(hash_basis.empty() ? config_json : hash_basis));
  }

  bool passed() const {
    for (const auto& c : checks) {
      if (c.asserted && !c.passed()) return false;
    }
    return true;
  }

  const Check& check(std::string_view name) const {
    for (const auto& c : checks) {
      if (c.name == name) return c;
    }
    throw InvalidArgument("ScenarioReport: no check named '" + std::string(name) + "'");
  }

  Check& add_check(std::string name, double value, double lo, double hi, double std_error = 0.0,
                   bool asserted = true) {
    checks.push_back({std::move(name), value, lo, hi, std_error, asserted, {}});
    return checks.back();
  }

  void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }

  std::string table_csv() const {
    std::ostringstream os;
    csv::Writer w(os);
    w.row(columns);
    for (const auto& r : rows) w.row(r);
    return os.str();
  }

  std::string checks_csv() const {
    std::ostringstream os;
    csv::Writer w(os);
    w.row({"check", "value", "lo", "hi", "std_error", "asserted", "passed"});
    for (const auto& c : checks) {
      w.row({c.name, csv::number(c.value), csv::number(c.lo), csv::number(c.hi),
             csv::number(c.std_error), c.asserted ? "1" : "0", c.passed() ? "1" : "0"});
    }
    return os.str();
  }

  std::string summary() const {
    std::ostringstream os;
    os << "scenario: " << scenario << "\n";
    os << "config hash: " << config_hash() << "\n";
    os << "seed: " << seed << "\n";
    for (const auto& c : checks) {
      os << (c.asserted ? (c.passed() ? "PASS " : "FAIL ") : "INFO ") << c.name << ": "
         << csv::number(c.value);
      if (c.std_error > 0.0) os << " (se " << csv::number(c.std_error) << ")";
      os << " in [" << csv::number(c.lo) << ", " << csv::number(c.hi) << "]";
      if (!c.note.empty()) os << "; " << c.note;
      os << "\n";
    }
    for (const auto& n : notes) os << "note: " << n << "\n";
    os << "result: " << (passed() ? "pass" : "fail") << "\n";
    return os.str();
  }

  // report.csv, checks.csv, summary.txt, config.json and the extra files.
  void write(const std::filesystem::path& dir) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
    auto put = [&](const std::string& name, const std::string& content) {
      std::ofstream os = csv::open((dir / name).string());
      os << content;
      if (!os) throw Error("failed writing '" + (dir / name).string() + "'");
    };
    put("report.csv", table_csv());
    put("checks.csv", checks_csv());
    put("summary.txt", summary());
    put("config.json", config_json + "\n");
    for (const auto& [name, content] : files) put(name, content);
  }
};

}  // namespace mfg
