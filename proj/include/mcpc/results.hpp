#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "mcpc/image.hpp"

namespace mcpc {

/// One CSV row of experiment output. Accuracy and CI are printed with six
/// decimals so identical runs produce byte-identical files.
struct ResultRow {
  std::string experiment_id;
  std::string condition;
  std::size_t n = 0;
  double accuracy = 0.0;
  double ci95 = 0.0;
  std::uint64_t seed = 0;
  std::string config_hash;
};

inline std::string csv_header() {
  return "experiment_id,condition,n,accuracy,ci95,seed,config_hash";
}

inline std::string format_csv_row(const ResultRow& r) {
  char num[64];
  std::string line = r.experiment_id + "," + r.condition + "," + std::to_string(r.n);
  std::snprintf(num, sizeof num, ",%.6f,%.6f,", r.accuracy, r.ci95);
  line += num;
  line += std::to_string(r.seed) + "," + r.config_hash;
  return line;
}

inline void write_csv(const std::filesystem::path& path, std::span<const ResultRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << csv_header() << '\n';
  for (const ResultRow& r : rows) out << format_csv_row(r) << '\n';
}

inline std::string csv_to_string(std::span<const ResultRow> rows) {
  std::string s = csv_header() + "\n";
  for (const ResultRow& r : rows) s += format_csv_row(r) + "\n";
  return s;
}

}  // namespace mcpc
