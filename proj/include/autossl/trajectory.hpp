#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "autossl/error.hpp"

namespace autossl {

// One row of a search or training trajectory. Missing values are NaN.
struct TrajectoryRow {
  std::int64_t iter = 0;
  std::vector<double> lambda;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double pseudo_homophily = std::numeric_limits<double>::quiet_NaN();
  double nmi = std::numeric_limits<double>::quiet_NaN();
  double acc = std::numeric_limits<double>::quiet_NaN();
  double ms = 0.0;
};

inline std::string format_real(double x) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// trajectory.csv writer: header iter,lambda_<task>...,objective,pseudo_homophily,nmi,acc,ms.
// Rows are flushed as they are written.
class TrajectoryWriter {
 public:
  TrajectoryWriter(const std::filesystem::path& path, const std::vector<std::string>& task_names)
      : out_(path), width_(task_names.size()) {
    if (!out_) throw IngestionError("cannot write '" + path.string() + "'");
    out_ << header(task_names) << '\n';
    out_.flush();
  }

  static std::string header(const std::vector<std::string>& task_names) {
    std::string h = "iter";
    for (const auto& t : task_names) h += ",lambda_" + t;
    h += ",objective,pseudo_homophily,nmi,acc,ms";
    return h;
  }

  void write(const TrajectoryRow& row) {
    if (row.lambda.size() != width_) throw DimensionError("trajectory row has wrong number of weights");
    out_ << row.iter;
    for (double l : row.lambda) out_ << ',' << format_real(l);
    out_ << ',' << format_real(row.objective) << ',' << format_real(row.pseudo_homophily) << ','
         << format_real(row.nmi) << ',' << format_real(row.acc) << ',' << format_real(std::round(row.ms * 1000.0) / 1000.0)
         << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
  std::size_t width_;
};

}  // namespace autossl
