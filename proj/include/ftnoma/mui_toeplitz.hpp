#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "ftnoma/pulse_spectra.hpp"

namespace ftnoma {

/// MUI Gram matrix G~_{l,k}: entry (i, j) holds g~[j - i, delta_tau].
/// Stored as its first row and first column.
class ToeplitzMatrix {
public:
    ToeplitzMatrix(std::vector<double> first_row, std::vector<double> first_col, double delta_tau);

    int size() const { return static_cast<int>(first_row_.size()); }
    double delta_tau() const { return delta_tau_; }
    const std::vector<double>& first_row() const { return first_row_; }
    const std::vector<double>& first_col() const { return first_col_; }

    /// Coefficient g~[d, delta_tau] for d in [-(n-1), n-1].
    double coefficient(int d) const { return d >= 0 ? first_row_[d] : first_col_[-d]; }
    double operator()(int i, int j) const { return coefficient(j - i); }

    bool is_symmetric(double tol = 0.0) const;
    Eigen::MatrixXd dense() const;

private:
    std::vector<double> first_row_;
    std::vector<double> first_col_;
    double delta_tau_;
};

ToeplitzMatrix mui_matrix(double delta_tau, const FtnConfig& z, const CorrelationSource& corr, int n);
ToeplitzMatrix mui_matrix(double delta_tau, const FtnConfig& z, const PulseParams& p, int n,
                          int quad_points = kDefaultQuadPoints);

/// Toeplitz coefficients t[n] = sum_m g~[m] g~[m - n] of G~ G~^T, n = -M..M.
struct ProductCoeffs {
    std::vector<double> coeffs;
    int truncation = 0;
    double tail_magnitude = 0.0;  // max |g~[+-M]|
    bool tail_within_tolerance = true;

    double at(int n) const { return coeffs.at(static_cast<std::size_t>(n + truncation)); }
};

inline constexpr int kDefaultProductTruncation = 200;
inline constexpr double kProductTailTolerance = 1e-6;

ProductCoeffs gram_product_coeffs(double delta_tau, const FtnConfig& z, const PulseParams& p,
                                  int m_max = kDefaultProductTruncation,
                                  int quad_points = kDefaultQuadPoints);

/// DTFT of {g~[n, delta_tau]} at frequency f (Hz) via the closed alias sum.
/// Throws std::domain_error outside [-1/(2 zeta T), 1/(2 zeta T)].
std::complex<double> dtft_g(double f, double delta_tau, const FtnConfig& z, const PulseParams& p);

/// DTFT of the product coefficients {t[n]}; equals |dtft_g|^2.
double dtft_t(double f, double delta_tau, const FtnConfig& z, const PulseParams& p);

struct PositiveDefiniteReport {
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    double floor = 0.0;  // relative floor times max eigenvalue
    bool positive = false;
};

inline constexpr double kEigenFloor = 1e-12;

PositiveDefiniteReport check_positive_definite(const ToeplitzMatrix& m,
                                               double relative_floor = kEigenFloor);

/// Pulse autocorrelation sampled on a fine lag grid and interpolated with a
/// 10-point Lagrange stencil. Lags beyond the table fall back to the exact
/// quadrature kernel.
class CorrelationTable final : public CorrelationSource {
public:
    CorrelationTable(const PulseParams& p, double max_lag, int quad_points = kDefaultQuadPoints,
                     int samples_per_period = 64);

    double at(double t) const override;
    void progression(double t0, double step, std::span<double> out) const override;
    const PulseParams& pulse() const override { return kernel_.pulse(); }
    double max_lag() const { return max_lag_; }

private:
    CorrelationKernel kernel_;
    double step_;
    double max_lag_;
    std::vector<double> samples_;  // samples_[j] = rho(j * step_)
};

}  // namespace ftnoma
