// Reference-configuration acceptance battery (p = 3, l = 11), shared between
// the standalone `acceptance` binary and `halo_cli verify-all`.  One row per
// criterion; FAIL is reserved for certified violations, never precision gaps.
#pragma once

#include <string>
#include <vector>

namespace halo {

struct CriterionResult {
  std::string name;
  std::string verdict;  // PASS, FAIL, INCONCLUSIVE, SKIPPED
  std::string detail;
  double seconds = 0.0;
};

// `extended` enables the long touching-point row; without it that row is
// SKIPPED.  Expensive artifacts (domain, U_p window, series) are built once
// and shared across rows.
std::vector<CriterionResult> run_acceptance(bool extended);

std::string acceptance_table(const std::vector<CriterionResult>& rows);
// true when no row is FAIL (INCONCLUSIVE and SKIPPED rows do not fail the run)
bool acceptance_ok(const std::vector<CriterionResult>& rows);

}  // namespace halo
