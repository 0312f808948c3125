#pragma once

#include <string>
#include <vector>

namespace ltomo {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Full invariant suite, one named result per check, in a fixed order.
// corrupt_mub injects a deliberate defect into one basis row so failure
// reporting can be exercised end to end; the corrupted check then fails
// while every other check still runs.
std::vector<CheckResult> run_verification(bool corrupt_mub = false);

}  // namespace ltomo
