#pragma once

#include "ecsim/scenario.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ecsim {

/// One problem found in a scenario file. `path` is a JSON pointer-ish
/// location ("/segments/consumers/0/purchase/lambda"); syntax errors use the
/// pseudo-path "(syntax)" and carry a line number in the message.
struct ValidationError {
    std::string path;
    std::string message;
};

struct LoadResult {
    std::optional<Scenario> scenario;
    std::vector<ValidationError> errors;
    bool ok() const { return scenario.has_value() && errors.empty(); }
};

/// Parse and validate a scenario document. Validation does not stop at the
/// first problem: every error in the file is reported in one pass.
LoadResult load_scenario_json(const std::string& text);
LoadResult load_scenario_file(const std::string& path);

std::string format_errors(const std::vector<ValidationError>& errors);

/// SHA-256 of the canonical form (sorted keys, compact separators) of a JSON
/// document; the scenario identity recorded in ledger headers.
std::string scenario_digest_of_text(const std::string& json_text);

} // namespace ecsim
