#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace hotwall {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool checks_passed = false;
  double seconds = 0.0;
  double budget_seconds = 0.0;
  std::string summary;               // one-line key numbers
  std::vector<std::string> details;  // per-item diagnostics

  bool passed() const { return checks_passed && seconds < budget_seconds; }
};

struct AcceptanceOptions {
  std::uint64_t seed = 20240601;
  std::vector<int> only;  // empty means all criteria
};

/// Runs one criterion (1..10).
CriterionResult run_criterion(int id, const AcceptanceOptions& options);

/// Runs the selected criteria, calling `on_result` after each one.
std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& options,
    const std::function<void(const CriterionResult&)>& on_result = {});

/// "[PASS] 1 title: summary (1.23 s / 10 s)".
std::string format_line(const CriterionResult& r);

}  // namespace hotwall
