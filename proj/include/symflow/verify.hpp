#pragma once

// The library's end-to-end verification checks: exact-value and property
// checks that pin the geometry against its closed-form references.  Shared by
// the acceptance test binary and the CLI verify-all command.

#include <string>
#include <vector>

namespace symflow {

struct CheckResult {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

struct VerifyOptions {
  unsigned seed = 20250808;
  bool quick = false;  // shrink the semi-flat refinement sweep (N in {16,32})
};

std::vector<CheckResult> run_acceptance_checks(const VerifyOptions& opts = {});

}  // namespace symflow
