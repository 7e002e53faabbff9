#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "krondim/dimension.hpp"

namespace krondim::cli {

using json = nlohmann::ordered_json;

enum ExitCode : int { kPass = 0, kVerdictFail = 1, kInputError = 2, kResourceError = 3 };

/// Parses one factor description of a model document:
///   {"space": [2,2,2], "interactions": "k:1" | [[], [1], ...], "convention": "01" | "pm1"}
///   {"raw": [[1, 1], [0, "1/2"]]}
///   {"identity": k}        (hidden only)
///   {"hadamard": [2, 3]}   (hidden only)
FactorSpec parse_factor(const json& j, bool hidden);

/// {"visible": {...}, "hidden": {...}}; a missing hidden factor means |Y| = 1.
KroneckerModelSpec parse_model(const json& doc);

/// Reads a model document from a file path, "-" for stdin, or inline JSON
/// text starting with '{'.
json load_document(const std::string& source);

/// Runs one command line (without the program name). Reports go to `out`,
/// diagnostics to `err`; the return value is the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace krondim::cli
