#pragma once
#include <string>
#include <vector>

// The acceptance checks: solver-vs-oracle gaps, a long feasibility run, the
// queue bound, the V tradeoff, benchmark dominance, decide timing, and the
// property suites. Shared by the acceptance test binary and `wpmec verify`.

namespace wpmec {

enum class VerifyLevel { kQuick, kFull };
VerifyLevel parse_verify_level(const std::string& name);

struct CheckResult {
  int criterion = 0;  // 1..7
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Runs the checks. Quick: reduced oracle comparisons plus a 5000-slot
/// feasibility run. Full: every criterion at its stated tolerance.
/// Results come back sorted by criterion number.
std::vector<CheckResult> run_verification(VerifyLevel level, int jobs = 0);

/// Prints one pass/fail line per check; returns 0 iff all passed.
int report_checks(const std::vector<CheckResult>& checks);

}  // namespace wpmec
