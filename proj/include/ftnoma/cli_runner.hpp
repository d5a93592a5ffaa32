#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ftnoma/cli_config.hpp"

namespace ftnoma {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSidecarSchemaVersion = 1;

/// CSV body plus the bookkeeping that goes into the sidecar.
struct Dataset {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> row_labels;  // optional leading text column
    std::string label_column;
    int condition_warnings = 0;
    int resampled_trials = 0;
    nlohmann::json notes = nlohmann::json::object();
};

/// Decimal point '.', 12 significant digits.
std::string format_number(double v);
std::string to_csv(const Dataset& d);

/// Runs the configured experiment; no I/O.
Dataset compute(const ExperimentConfig& cfg);

struct RunOutcome {
    std::filesystem::path csv;
    std::filesystem::path sidecar;
    Dataset data;
};

/// compute() then write <dir>/<name>.csv and <dir>/<name>.json atomically.
/// Nothing is left on disk if any step fails.
RunOutcome run(const ExperimentConfig& cfg);

/// Command-line entry: returns the process exit status (0 ok, 2 bad
/// configuration or arguments, 3 numerical failure, 4 I/O failure).
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace ftnoma
