#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "msmpolicy/bounds.hpp"

namespace msmpolicy {

struct CheckResult {
  std::string suite;
  std::string name;
  double deviation = 0.0;  // measured; compared against tolerance
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct SelfCheckOptions {
  /// Convention handed to the closed-form bound. kFlipped must make the
  /// closed-form-vs-LP suite fail.
  SignConvention convention = SignConvention::kStandard;
};

/// Suites, each comparing a closed form with an independent computation:
///   closed_form_vs_lp      closed-form bound vs the sorting LP on 2000-atom laws
///   lp_feasibility         LP weights meet the box and balance constraints; nesting in lambda
///   unconfounded_reduction lambda = 1 collapses bounds and scores to AIPW
///   moment_identity        exact expectation of psi_W, psi_Delta on a finite law
///   orthogonality          second-order bias of the scores under nuisance perturbation
std::vector<CheckResult> run_selfcheck(const SelfCheckOptions& options = {});

nlohmann::json selfcheck_to_json(const std::vector<CheckResult>& results);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace msmpolicy
