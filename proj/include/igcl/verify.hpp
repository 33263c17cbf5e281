#pragma once

#include <string>
#include <vector>

namespace igcl {

struct CheckResult {
    std::string name;
    bool passed = false;
    double margin = 0.0;  // distance to the pass boundary, positive = pass
    std::string detail;
};

struct VerifyOptions {
    bool quick = false;  // 20 batches and M = 1e4 for the dominance check
    std::uint64_t seed = 12345;
};

// Self-contained property suite over the contrastive bound and the layers:
// dominance over Monte-Carlo, algebraic rewrite exactness, sigma -> 0
// collapse, temperature limit, finite-difference gradient checks for every
// loss and layer, and the sample-count complexity fit.
std::vector<CheckResult> run_verification(const VerifyOptions& opts);

bool all_passed(const std::vector<CheckResult>& results);

// JSON report with one entry per check plus the frozen end-to-end accuracy
// thresholds used by the acceptance gate
void write_verify_report(const std::vector<CheckResult>& results, const std::string& path);

}  // namespace igcl
