#pragma once

#include "ecsim/scenario.hpp"

#include <string>
#include <vector>

namespace ecsim {

/// Outcome of one verification check.
struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// The canonical street-corner attack scenario, embedded at build time so
/// binaries can run it without locating the file on disk. Byte-for-byte the
/// shipped scenarios/street_corner.json.
const std::string& replication_scenario_json();

/// Parses the embedded scenario; throws std::runtime_error if it fails to
/// validate (which would mean a broken build).
Scenario replication_scenario();

/// The full verification suite. Simulation outputs and scratch files go
/// under `work_dir`; when `scenario_dir` is non-empty, every scenario file
/// in it is run as part of the conservation corpus. Returns one result per
/// check, in a fixed order.
std::vector<CheckResult> run_acceptance(const std::string& work_dir,
                                        const std::string& scenario_dir);

/// Runs the canonical scenario once, writes ledger and report files under
/// `out_dir`, and checks the qualitative outcomes the model is expected to
/// show (injection schedule, autonomous lockup, detection timing, merchant
/// population alarm).
std::vector<CheckResult> run_replication(const std::string& out_dir);

} // namespace ecsim
