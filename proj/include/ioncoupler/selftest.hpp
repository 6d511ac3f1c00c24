#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ioncoupler/constants.hpp"
#include "ioncoupler/exec.hpp"

namespace ioncoupler {

// quick: fast subset. standard: every criterion at reduced shot counts.
// full: the acceptance sizes.
enum class SelftestLevel { quick, standard, full };

struct SelftestOptions {
  SelftestLevel level = SelftestLevel::standard;
  PhysicalConstants constants = kCodata2018;  // swappable for negative controls
  Exec exec = Exec::parallel;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;
  double seconds = 0.0;
};

inline constexpr int kCriterionCount = 9;

CriterionResult run_criterion(int id, const SelftestOptions& options);

// Runs criteria in order, reporting each as it finishes.
std::vector<CriterionResult> run_selftest(
    const SelftestOptions& options,
    const std::function<void(const CriterionResult&)>& on_result = {});

std::string format_result_line(const CriterionResult& r);

}  // namespace ioncoupler
