#include "pshlab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace pshlab::report {

namespace {

std::string num17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("report: cannot open " + path.string());
  return out;
}

}  // namespace

bool Expectation::pass() const {
  if (provenance.empty()) return false;
  if (!std::isfinite(measured) || !std::isfinite(expected)) return false;
  return std::fabs(measured - expected) <= tolerance;
}

bool ExperimentReport::verdict() const {
  for (const auto& row : rows)
    if (!row.pass()) return false;
  return true;
}

std::filesystem::path ExperimentReport::write_csv(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  const std::filesystem::path path = dir / (name + ".csv");
  auto out = open_out(path);
  out << "label,measured,expected,tolerance,provenance,pass\n";
  for (const auto& row : rows) {
    out << row.label << ',' << num17(row.measured) << ',' << num17(row.expected) << ','
        << num17(row.tolerance) << ',' << row.provenance << ',' << (row.pass() ? 1 : 0) << '\n';
  }
  return path;
}

std::filesystem::path write_summary(const std::filesystem::path& dir,
                                    std::span<const ExperimentReport> reports) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path path = dir / "summary.csv";
  auto out = open_out(path);
  out << "experiment,rows,failures,verdict\n";
  for (const auto& rep : reports) {
    std::size_t failures = 0;
    for (const auto& row : rep.rows)
      if (!row.pass()) ++failures;
    out << rep.name << ',' << rep.rows.size() << ',' << failures << ','
        << (rep.verdict() ? "pass" : "fail") << '\n';
  }
  return path;
}

}  // namespace pshlab::report
