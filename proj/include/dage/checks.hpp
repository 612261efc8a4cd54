#pragma once

#include <functional>
#include <string>
#include <vector>

namespace dage {

struct CheckResult {
  bool pass = false;
  std::string detail;
};

// A named, self-contained verification. `criterion` groups checks for the
// acceptance gate (1..8); `heavy` marks the long-running end-to-end ones,
// which the `check` command skips unless filtered for explicitly.
struct Check {
  std::string name;
  int criterion = 0;
  bool heavy = false;
  std::function<CheckResult()> fn;
};

// Full registry. When golden_dir is non-empty, file-based golden comparisons
// are included alongside the embedded constants.
std::vector<Check> all_checks(const std::string& golden_dir = "");

// Values that are frozen into this file and tests/golden/golden.json after an
// oracle run (the acceptance binary's --write-golden mode recomputes them).
struct GoldenValues {
  std::string office_manifest_digest;
  double benchmark_ncm_mean = 0.0;   // fractions in [0,1]
  double benchmark_dage_mean = 0.0;
  double benchmark_margin_points = 0.0;  // percentage points
};

GoldenValues compute_goldens();

// The committed expectations the checks compare against.
const GoldenValues& golden_values();

}  // namespace dage
