#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "ftnoma/pulse_spectra.hpp"

namespace ftnoma {

using Rng = std::mt19937_64;

/// Independent stream for one trial, derived from (master seed, trial index)
/// so results do not depend on execution order.
Rng trial_rng(std::uint64_t master_seed, std::uint64_t trial);

/// P(W) = 10^((dBm - 30) / 10).
double dbm_to_watts(double dbm);
double db_to_linear(double db);

struct CellConfig {
    double d0 = 50.0;               // inner radius (m)
    double d1 = 75.0;               // outer radius (m)
    double alpha = 3.76;            // path-loss exponent
    int n_users = 16;
    double noise_psd_dbm = -80.0;   // N0
    double snr_sum_db = 20.0;
    double max_delay = 2.0;         // seconds

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
    double noise_psd() const { return dbm_to_watts(noise_psd_dbm); }
};

struct TrialDraw {
    std::vector<double> distances;
    std::vector<std::complex<double>> channels;
    std::vector<double> delays;
    std::uint64_t rng_stream_id = 0;
    int resampled = 0;  // degenerate channel sets redrawn
};

/// Area-uniform radius on [D0, D1]: density 2d / (D1^2 - D0^2).
std::vector<double> sample_positions(const CellConfig& cell, int count, Rng& rng);
/// Circularly symmetric complex Gaussian with variance 1/(1 + d^alpha).
std::complex<double> sample_channel(double distance, double alpha, Rng& rng);
std::vector<double> sample_delays(int count, double max_delay, Rng& rng);

/// E[1/(1 + d^alpha)] over the annulus, by quadrature.
double avg_channel_gain(const CellConfig& cell, int points = 4097);

struct PowerCalibration {
    double avg_gain = 0.0;
    double p_max = 0.0;     // watts
    double per_user = 0.0;  // P_max / K
};

/// SNR_sum = P_max * avg_gain / N0, with equal split across users.
PowerCalibration calibrate_power(const CellConfig& cell);

/// Positions, channels and delays for one trial of the cell.
TrialDraw draw_trial(const CellConfig& cell, std::uint64_t master_seed, std::uint64_t trial);

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 = hardware
/// concurrency). Each index runs exactly once; callers store results by index.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

struct SampleStats {
    double mean = 0.0;
    double std_error = 0.0;
};
SampleStats sample_stats(std::span<const double> x);

// ---------------------------------------------------------------------------
// Instantaneous experiments: fixed |h|^2 profile, random delays, SNR grid
// defined as sum_k |h_k|^2 P_k / N0 with N0 = 1 and equal powers.

struct InstantaneousConfig {
    std::vector<double> gains{0.5, 0.4, 0.1};  // |h_k|^2, decoding order
    double beta = 0.3;
    double period = 1.0;
    double zeta = 0.95;
    int n_symbols = 100;
    std::vector<double> snr_db{0, 5, 10, 15, 20, 25, 30};
    int draws = 200;
    double max_delay = 2.0;
    bool with_bounds = true;
    int quad_points = kDefaultQuadPoints;
    int threads = 1;
    std::uint64_t seed = 1;
};

struct InstantaneousResult {
    std::vector<double> snr_db;
    // [user][snr], bits/s/Hz
    std::vector<std::vector<double>> user_mean;
    std::vector<std::vector<double>> user_std_error;
    std::vector<std::vector<double>> lower;
    std::vector<std::vector<double>> upper;
    // [snr]
    std::vector<double> sum_mean;
    std::vector<double> sum_std_error;
    std::vector<double> zero_delay_sum;   // same zeta, all delays zero
    std::vector<double> synchronous_sum;  // zeta = 1, all delays zero
    std::vector<double> lower_sum;
    std::vector<double> upper_sum;
    /// Standard error of the per-draw difference (delayed - zero delay).
    std::vector<double> zero_delay_diff_std_error;
    /// Per-draw rates, index [(draw * n_snr + snr) * n_users + user].
    std::vector<double> samples;
    int condition_warnings = 0;

    double sample(int draw, int snr, int user) const;
};

InstantaneousResult instantaneous_experiment(const InstantaneousConfig& cfg);

/// Per-user transmit power for a total received SNR with N0 = 1.
double profile_power(std::span<const double> gains, double snr_linear);

// ---------------------------------------------------------------------------
// Ergodic experiments over random cells.

struct ErgodicConfig {
    CellConfig cell;
    double beta = 0.3;
    double period = 1.0;
    double zeta = 0.75;
    int n_symbols = 100;
    int trials = 2000;
    int quad_points = kDefaultQuadPoints;
    int threads = 1;
    std::uint64_t seed = 1;
};

enum class Scheme { noma, anoma, aftn_noma };
inline constexpr Scheme kAllSchemes[] = {Scheme::noma, Scheme::anoma, Scheme::aftn_noma};
const char* scheme_name(Scheme s);

struct SchemeSamples {
    std::vector<double> sum;                     // [trial]
    std::vector<std::vector<double>> per_user;   // [trial][rank], rank 0 = strongest
};

struct ErgodicResult {
    PowerCalibration power;
    SchemeSamples noma;
    SchemeSamples anoma;
    SchemeSamples aftn;
    int resampled = 0;
    int condition_warnings = 0;

    const SchemeSamples& scheme(Scheme s) const;
};

ErgodicResult ergodic_experiment(const ErgodicConfig& cfg);

/// Fraction of samples strictly above each grid point.
std::vector<double> ccdf(std::span<const double> samples, std::span<const double> grid);

// ---------------------------------------------------------------------------
// Two-user rate regions.

struct RegionConfig {
    double gain1 = 1.0;   // |h_1|^2
    double gain2 = 1.0;   // |h_2|^2
    double snr1_db = 10;  // |h_1|^2 P / N0
    double snr2_db = 10;  // |h_2|^2 P / N0
    double beta = 0.3;
    double period = 1.0;
    double zeta = 0.75;
    int n_symbols = 100;
    int draws = 200;
    double max_delay = 2.0;
    int quad_points = kDefaultQuadPoints;
    int threads = 1;
    std::uint64_t seed = 1;
};

struct RatePoint {
    double r1 = 0.0;
    double r2 = 0.0;
};

/// Polyline (0, R2 alone) -> corner decoding user 1 first -> corner decoding
/// user 2 first -> (R1 alone, 0).
struct RateRegion {
    Scheme scheme = Scheme::noma;
    std::vector<RatePoint> polyline;
    double corner_std_error = 0.0;  // largest standard error among corner rates
};

std::vector<RateRegion> rate_region_two_user(const RegionConfig& cfg);

/// Distance from the origin to the region boundary along angle theta in
/// [0, pi/2].
double region_radius(const RateRegion& region, double theta);

// ---------------------------------------------------------------------------
// SINR / DoF trade-off.

struct TradeoffRow {
    double zeta = 1.0;
    double sinr_gain = 1.0;
    double dof_gain = 1.0;
};

struct TradeoffConfig {
    double beta = 0.5;
    double period = 1.0;
    std::vector<double> zeta{1.0, 0.9, 0.8, 2.0 / 3.0};
    std::vector<double> gains{0.5, 0.4, 0.1};
    double snr_db = 20.0;
    int user = 0;
    bool ratio_of_integrals = false;
    int quad_points = kDefaultQuadPoints;
};

std::vector<TradeoffRow> tradeoff_sweep(const TradeoffConfig& cfg);

}  // namespace ftnoma
