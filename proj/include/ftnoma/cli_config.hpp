#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ftnoma {

/// Configuration problem; `path` names the offending field (e.g. "pulse.beta").
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

enum class Experiment { spectrum, rate_exact, rate_bounds, tradeoff, rate_region, ergodic, ccdf };

const char* experiment_name(Experiment e);

struct ExperimentConfig {
    Experiment experiment = Experiment::rate_exact;
    std::uint64_t seed = 1;
    int threads = 1;
    int quad_points = 8192;
    std::string output_dir = ".";
    std::string output_name;  // defaults to the experiment name

    // pulse / ftn
    double beta = 0.3;
    double period = 1.0;
    double zeta = 0.95;

    // scenario: fixed-profile instantaneous experiments
    std::vector<double> gains{0.5, 0.4, 0.1};
    int n_symbols = 100;
    double max_delay = 2.0;  // seconds
    std::vector<double> snr_db;
    int draws = 200;
    int user = 0;
    std::string sinr_gain_form = "pointwise";
    bool include_delay_overhead = false;

    // cell: ergodic / ccdf
    double d0 = 50.0;
    std::vector<double> d1{75.0};
    double alpha = 3.76;
    std::vector<int> n_users{16};
    double noise_psd_dbm = -80.0;
    std::vector<double> snr_sum_db{20.0};
    int trials = 2000;

    // spectrum
    int spectrum_points = 1001;

    // tradeoff
    std::vector<double> tradeoff_zeta;

    // rate-region
    std::vector<double> region_gains{1.0, 1.0};
    std::vector<double> region_snr_db{10.0, 10.0};

    // ccdf
    int ccdf_points = 101;
};

/// Strict parse: unknown keys and out-of-range values are rejected with the
/// offending path; omitted fields take the simulation defaults.
ExperimentConfig parse_config(std::string_view text);

/// Range checks shared by the parser and command-line overrides.
void validate(const ExperimentConfig& cfg);

/// Fully resolved configuration, suitable for the sidecar.
nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace ftnoma
