#include "ftnoma/mui_toeplitz.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ftnoma {

ToeplitzMatrix::ToeplitzMatrix(std::vector<double> first_row, std::vector<double> first_col,
                               double delta_tau)
    : first_row_(std::move(first_row)), first_col_(std::move(first_col)), delta_tau_(delta_tau) {
    if (first_row_.empty() || first_row_.size() != first_col_.size()) {
        throw std::invalid_argument("Toeplitz first row and column must be non-empty and equal length");
    }
    if (first_row_[0] != first_col_[0]) {
        throw std::invalid_argument("Toeplitz first row and column disagree on the diagonal");
    }
}

bool ToeplitzMatrix::is_symmetric(double tol) const {
    for (std::size_t i = 0; i < first_row_.size(); ++i) {
        if (std::abs(first_row_[i] - first_col_[i]) > tol) {
            return false;
        }
    }
    return true;
}

Eigen::MatrixXd ToeplitzMatrix::dense() const {
    const int n = size();
    Eigen::MatrixXd m(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            m(i, j) = coefficient(j - i);
        }
    }
    return m;
}

ToeplitzMatrix mui_matrix(double delta_tau, const FtnConfig& z, const CorrelationSource& corr, int n) {
    if (n < 1) {
        throw std::invalid_argument("MUI matrix dimension must be >= 1");
    }
    const double ts = z.symbol_period(corr.pulse());
    std::vector<double> coeff(2 * static_cast<std::size_t>(n) - 1);
    corr.progression(-(n - 1) * ts + delta_tau, ts, coeff);
    std::vector<double> row(n), col(n);
    for (int d = 0; d < n; ++d) {
        row[d] = coeff[static_cast<std::size_t>(d + n - 1)];
        col[d] = coeff[static_cast<std::size_t>(n - 1 - d)];
    }
    // Both vectors share the diagonal sample.
    col[0] = row[0];
    return ToeplitzMatrix(std::move(row), std::move(col), delta_tau);
}

ToeplitzMatrix mui_matrix(double delta_tau, const FtnConfig& z, const PulseParams& p, int n,
                          int quad_points) {
    const CorrelationKernel kernel(p, quad_points);
    return mui_matrix(delta_tau, z, kernel, n);
}

ProductCoeffs gram_product_coeffs(double delta_tau, const FtnConfig& z, const PulseParams& p,
                                  int m_max, int quad_points) {
    if (m_max < 1) {
        throw std::invalid_argument("product-coefficient truncation must be >= 1");
    }
    const CorrelationKernel kernel(p, quad_points);
    const double ts = z.symbol_period(p);
    // g[m] for m in [-2M, 2M]; index m + 2M.
    const int span = 2 * m_max;
    std::vector<double> g(2 * static_cast<std::size_t>(span) + 1);
    kernel.progression(-span * ts + delta_tau, ts, g);
    auto gm = [&](int m) { return g[static_cast<std::size_t>(m + span)]; };

    ProductCoeffs out;
    out.truncation = m_max;
    out.coeffs.assign(2 * static_cast<std::size_t>(m_max) + 1, 0.0);
    for (int n = -m_max; n <= m_max; ++n) {
        double sum = 0.0;
        for (int m = -m_max; m <= m_max; ++m) {
            sum += gm(m) * gm(m - n);
        }
        out.coeffs[static_cast<std::size_t>(n + m_max)] = sum;
    }
    out.tail_magnitude = std::max(std::abs(gm(m_max)), std::abs(gm(-m_max)));
    out.tail_within_tolerance = out.tail_magnitude < kProductTailTolerance;
    return out;
}

std::complex<double> dtft_g(double f, double delta_tau, const FtnConfig& z, const PulseParams& p) {
    const double edge = z.band_edge(p);
    if (std::abs(f) > edge * (1.0 + 1e-12)) {
        throw std::domain_error("DTFT frequency " + std::to_string(f) +
                                " Hz lies outside the symbol-rate band");
    }
    const AliasRange r = alias_range(z, p);
    const double rate = z.symbol_rate(p);
    std::complex<double> sum{0.0, 0.0};
    for (int k = r.first; k <= r.last; ++k) {
        const double fk = f - k * rate;
        const double s = rrc_spectrum(fk, p);
        if (s != 0.0) {
            sum += s * std::polar(1.0, 2.0 * std::numbers::pi * fk * delta_tau);
        }
    }
    return sum / z.symbol_period(p);
}

double dtft_t(double f, double delta_tau, const FtnConfig& z, const PulseParams& p) {
    return std::norm(dtft_g(f, delta_tau, z, p));
}

PositiveDefiniteReport check_positive_definite(const ToeplitzMatrix& m, double relative_floor) {
    const double scale = std::abs(m.coefficient(0)) + 1.0;
    if (!m.is_symmetric(1e-12 * scale)) {
        throw std::invalid_argument("positive-definiteness check needs a symmetric (self-Gram) matrix");
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.dense(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigendecomposition failed in positive-definiteness check");
    }
    PositiveDefiniteReport report;
    report.min_eigenvalue = solver.eigenvalues().minCoeff();
    report.max_eigenvalue = solver.eigenvalues().maxCoeff();
    report.floor = relative_floor * report.max_eigenvalue;
    report.positive = report.min_eigenvalue > report.floor;
    return report;
}

namespace {

constexpr int kStencil = 10;

// 1 / prod_{m != i} (i - m) for equispaced nodes 0..kStencil-1.
std::array<double, kStencil> lagrange_denominators() {
    std::array<double, kStencil> d{};
    for (int i = 0; i < kStencil; ++i) {
        double prod = 1.0;
        for (int m = 0; m < kStencil; ++m) {
            if (m != i) {
                prod *= static_cast<double>(i - m);
            }
        }
        d[static_cast<std::size_t>(i)] = 1.0 / prod;
    }
    return d;
}

}  // namespace

CorrelationTable::CorrelationTable(const PulseParams& p, double max_lag, int quad_points,
                                   int samples_per_period)
    : kernel_(p, quad_points),
      step_(p.period() / samples_per_period),
      max_lag_(std::abs(max_lag)) {
    if (samples_per_period < 8) {
        throw std::invalid_argument("correlation table needs at least 8 samples per period");
    }
    const auto count = static_cast<std::size_t>(std::ceil(max_lag_ / step_)) + kStencil + 1;
    samples_.resize(count);
    kernel_.progression(0.0, step_, samples_);
}

double CorrelationTable::at(double t) const {
    const double a = std::abs(t);
    if (a > max_lag_) {
        return kernel_.at(a);
    }
    static const std::array<double, kStencil> denom = lagrange_denominators();
    const double u = a / step_;
    const auto base = static_cast<long>(std::floor(u)) - (kStencil / 2 - 1);
    const double x = u - static_cast<double>(base);  // lies in [4, 5)
    std::array<double, kStencil> diff{};
    for (int m = 0; m < kStencil; ++m) {
        diff[static_cast<std::size_t>(m)] = x - m;
    }
    double value = 0.0;
    for (int i = 0; i < kStencil; ++i) {
        double num = denom[static_cast<std::size_t>(i)];
        for (int m = 0; m < kStencil; ++m) {
            if (m != i) {
                num *= diff[static_cast<std::size_t>(m)];
            }
        }
        // The autocorrelation is even, so negative indices mirror.
        const long j = std::labs(base + i);
        value += num * samples_[static_cast<std::size_t>(j)];
    }
    return value;
}

void CorrelationTable::progression(double t0, double step, std::span<double> out) const {
    for (std::size_t n = 0; n < out.size(); ++n) {
        out[n] = at(t0 + static_cast<double>(n) * step);
    }
}

}  // namespace ftnoma
