#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

// Pass/fail bookkeeping for the named experiments.  Each run produces a
// table of expectations -- a measured value, the value it should take, a
// tolerance, and a note saying how the expected value was obtained
// (closed-form, quadrature, exact-symmetry, formula, bound, or table for
// purely informational rows).  A report passes when every row is within
// tolerance and every row carries a provenance note; an unlabelled row
// fails the verdict by construction.
namespace pshlab::report {

struct Expectation {
  std::string label;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string provenance;

  bool pass() const;
};

struct ExperimentReport {
  std::string name;
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<Expectation> rows;

  bool verdict() const;

  // Writes <name>.csv into dir (created if missing): a header line and one
  // line per row, numbers rendered with %.17g so identical runs produce
  // byte-identical files.  Returns the file path.
  std::filesystem::path write_csv(const std::filesystem::path& dir) const;
};

// summary.csv over a batch of reports: name, row count, failure count,
// verdict.  Returns the file path.
std::filesystem::path write_summary(const std::filesystem::path& dir,
                                    std::span<const ExperimentReport> reports);

}  // namespace pshlab::report
