#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace poselift {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerifyOptions {
    bool full = false;          // whole-model gradient checks for all four variants
    bool corrupt_swish = false; // fault-injection fixture: breaks the swish backward
};

/// Gradient checks (per layer and whole models, 5 fixed seeds each,
/// central differences eps 1e-5, tolerance 1e-4), metric oracles, the
/// swish-to-relu limit, and the uniform-WMSE/MSE equivalence.
std::vector<CheckResult> run_verification(const VerifyOptions& opts);

} // namespace poselift
