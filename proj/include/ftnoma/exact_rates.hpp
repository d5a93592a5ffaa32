#pragma once

#include <complex>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ftnoma/mui_toeplitz.hpp"
#include "ftnoma/pulse_spectra.hpp"

namespace ftnoma {

/// Raised when a covariance cannot be factorised even after eigenvalue flooring.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct UserLink {
    std::complex<double> h{1.0, 0.0};
    double delay = 0.0;          // seconds, >= 0
    double symbol_energy = 1.0;  // E_s[k]

    double gain() const { return std::norm(h); }
    /// P_k = E_s[k] / (zeta T).
    double power(const FtnConfig& z, const PulseParams& p) const {
        return symbol_energy / z.symbol_period(p);
    }
};

/// Stable sort by descending |h|^2.
std::vector<UserLink> sic_sort(std::vector<UserLink> users);

/// `sic` sorts users by channel gain; `as_given` keeps the caller's decoding
/// order (used to trace both corners of a two-user rate region).
enum class DecodeOrder { sic, as_given };

class Scenario {
public:
    Scenario(std::vector<UserLink> users, int n_symbols, double noise_psd, FtnConfig ftn,
             PulseParams pulse, DecodeOrder order = DecodeOrder::sic);

    const std::vector<UserLink>& users() const { return users_; }
    std::size_t n_users() const { return users_.size(); }
    int n_symbols() const { return n_symbols_; }
    double noise_psd() const { return noise_psd_; }
    const FtnConfig& ftn() const { return ftn_; }
    const PulseParams& pulse() const { return pulse_; }

    /// Same users and powers with every delay set to zero.
    Scenario synchronous() const;
    /// Same users at another compression factor, keeping symbol energies.
    Scenario with_ftn(FtnConfig ftn) const;

private:
    std::vector<UserLink> users_;
    int n_symbols_;
    double noise_psd_;
    FtnConfig ftn_;
    PulseParams pulse_;
};

struct RateReport {
    std::vector<double> per_user_bits_per_use;  // I_k / N
    std::vector<double> per_user_normalized;    // bits/s/Hz
    double sum_normalized = 0.0;
    int condition_warnings = 0;
};

struct RateOptions {
    int quad_points = kDefaultQuadPoints;
    double eigen_floor = kEigenFloor;
};

struct LogDet {
    double value = 0.0;
    int floored = 0;  // eigenvalues raised to the relative floor
};

/// Natural-log determinant of a symmetric positive (semi)definite matrix via
/// symmetric eigendecomposition; eigenvalues below relative_floor * lambda_max
/// are clamped and counted.
LogDet logdet_spd(const Eigen::MatrixXd& m, double relative_floor = kEigenFloor);

/// Exact finite-block SIC mutual information for every user sharing one
/// compression factor, pulse and block length.
///
/// Each user's covariance is projected onto the range of its own matched-filter
/// Gram matrix G~_{k,k} = U diag(lambda) U^T before taking determinants:
///
///   M_k = N0 I + sum_{l>k} a_l B_l B_l^T,   B_l = diag(lambda)^{-1/2} U^T G~_{l,k}
///   I_k = 1/2 [logdet(M_k + a_k diag(lambda)) - logdet(M_k)] / ln 2
///
/// which equals the difference of logdet(Sigma_k) and logdet(Sigma_{k+1})
/// whenever G~_{k,k} is non-singular (det(diag(lambda)) cancels). Directions
/// with lambda below the eigen floor are dropped and reported as warnings.
class SicRateEngine {
public:
    /// Per-user weights a_l = |h_l|^2 E_s[l] in decoding order, and N0.
    struct Profile {
        std::vector<double> weights;
        double noise_psd = 1.0;
    };

    struct Result {
        std::vector<std::vector<double>> mi_bits;  // [profile][user]
        int condition_warnings = 0;
    };

    SicRateEngine(const FtnConfig& z, std::shared_ptr<const CorrelationSource> corr, int n_symbols,
                  double eigen_floor = kEigenFloor);

    /// `delays` are in decoding order (seconds).
    Result evaluate(std::span<const double> delays, std::span<const Profile> profiles) const;

    int n_symbols() const { return n_symbols_; }
    int retained_dimensions() const { return static_cast<int>(lambda_.size()); }
    int dropped_dimensions() const { return n_symbols_ - retained_dimensions(); }
    const FtnConfig& ftn() const { return ftn_; }
    const PulseParams& pulse() const { return corr_->pulse(); }

private:
    FtnConfig ftn_;
    std::shared_ptr<const CorrelationSource> corr_;
    int n_symbols_;
    Eigen::MatrixXd basis_;     // U restricted to retained eigenvectors, N x r
    Eigen::VectorXd lambda_;    // retained eigenvalues
    Eigen::VectorXd inv_sqrt_;  // lambda^{-1/2}
};

/// Profile of a scenario for the engine (weights in decoding order).
SicRateEngine::Profile scenario_profile(const Scenario& s);
std::vector<double> scenario_delays(const Scenario& s);

/// I(y_k; x_k | x_1..x_{k-1}) over the whole block, in bits (0-based k).
double conditional_mi(const Scenario& s, std::size_t k, const RateOptions& opts = {});

/// Same quantity evaluated literally as logdet(Sigma_k) - logdet(Sigma_{k+1})
/// on the unprojected covariances. Only reliable when G~_{k,k} is well
/// conditioned; kept as an independent cross-check.
double conditional_mi_direct(const Scenario& s, std::size_t k, const RateOptions& opts = {});

/// Rate in bits/s/Hz: per-use rate times symbol rate over bandwidth 2W, with
/// the factor 2 that undoes the half-log real-signal convention.
double normalize_rate(double mi_bits, const Scenario& s);

double normalized_rate(const Scenario& s, std::size_t k, const RateOptions& opts = {});
double sum_rate(const Scenario& s, const RateOptions& opts = {});
RateReport evaluate_rates(const Scenario& s, const RateOptions& opts = {});

}  // namespace ftnoma
