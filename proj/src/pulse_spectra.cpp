#include "ftnoma/pulse_spectra.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ftnoma {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) {
    if (x == 0.0) {
        return 1.0;
    }
    return std::sin(kPi * x) / (kPi * x);
}

double raised_cosine_autocorr(double x, double beta) {
    return sinc(x) * std::cos(kPi * beta * x) / (1.0 - 4.0 * beta * beta * x * x);
}

}  // namespace

PulseParams::PulseParams(double beta, double period) : beta_(beta), period_(period) {
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw std::invalid_argument("roll-off beta must lie in [0, 1], got " + std::to_string(beta));
    }
    if (!(period > 0.0) || !std::isfinite(period)) {
        throw std::invalid_argument("symbol period T must be positive and finite");
    }
}

FtnConfig::FtnConfig(double zeta) : zeta_(zeta) {
    if (!(zeta > 0.0 && zeta <= 1.0)) {
        throw std::invalid_argument("compression factor zeta must lie in (0, 1], got " +
                                    std::to_string(zeta));
    }
}

bool FtnConfig::aliasing_free(const PulseParams& p) const {
    return p.beta() == 0.0 || zeta_ * (1.0 + p.beta()) <= 1.0 + 1e-12;
}

double rrc_spectrum(double f, const PulseParams& p) {
    const double a = std::abs(f);
    const double t = p.period();
    const double w = p.bandwidth();
    if (p.beta() == 0.0) {
        return a <= w ? t : 0.0;
    }
    const double flat_edge = (1.0 - p.beta()) / (2.0 * t);
    if (a < flat_edge) {
        return t;
    }
    if (a <= w) {
        const double c = std::cos(kPi * t / (2.0 * p.beta()) * (a - flat_edge));
        return t * c * c;
    }
    return 0.0;
}

double rrc_autocorr_oracle(double dt, const PulseParams& p) {
    const double x = dt / p.period();
    const double beta = p.beta();
    if (beta > 0.0) {
        // Removable singularity at |dt| = T / (2 beta).
        const double singular = 1.0 / (2.0 * beta);
        constexpr double offset = 1e-6;
        if (std::abs(std::abs(x) - singular) < offset) {
            const double s = x < 0.0 ? -singular : singular;
            return 0.5 * (raised_cosine_autocorr(s - offset, beta) +
                          raised_cosine_autocorr(s + offset, beta));
        }
    }
    return raised_cosine_autocorr(x, beta);
}

AliasRange alias_range(const FtnConfig& z, const PulseParams& p) {
    // Alias k reaches the band iff |k| / (zeta T) - 1 / (2 zeta T) < W.
    const double reach = z.zeta() * (1.0 + p.beta()) / 2.0 + 0.5;
    const int k = static_cast<int>(std::ceil(reach - 1e-12)) - 1;
    return {-k, k};
}

double folded_spectrum(double f, const FtnConfig& z, const PulseParams& p) {
    if (std::abs(f) > z.band_edge(p)) {
        return 0.0;
    }
    const AliasRange r = alias_range(z, p);
    const double rate = z.symbol_rate(p);
    double sum = 0.0;
    for (int k = r.first; k <= r.last; ++k) {
        sum += rrc_spectrum(f - k * rate, p);
    }
    return sum;
}

double twisted_folded_spectrum(double f, const FtnConfig& z, const PulseParams& p) {
    if (std::abs(f) > z.band_edge(p)) {
        return 0.0;
    }
    const AliasRange r = alias_range(z, p);
    const double rate = z.symbol_rate(p);
    double value = rrc_spectrum(f, p);
    for (int k = r.first; k <= r.last; ++k) {
        if (k != 0) {
            value -= rrc_spectrum(f - k * rate, p);
        }
    }
    return value;
}

double interference_reducing_spectrum(double f, const FtnConfig& z, const PulseParams& p) {
    const double folded = folded_spectrum(f, z, p);
    if (folded <= 0.0) {
        return 0.0;
    }
    return twisted_folded_spectrum(f, z, p) / folded;
}

CorrelationKernel::CorrelationKernel(const PulseParams& p, int quad_points)
    : pulse_(p), quad_points_(quad_points) {
    if (quad_points < 3) {
        throw std::invalid_argument("quadrature needs at least 3 points");
    }
    const double w = p.bandwidth();
    const int n = quad_points;
    const double h = 2.0 * w / (n - 1);
    for (int i = 0; i < n; ++i) {
        // Node index m = 2i - (n - 1) is symmetric, so f_i == -f_{n-1-i} exactly.
        const int m = 2 * i - (n - 1);
        if (m < 0) {
            continue;
        }
        const double f = w * static_cast<double>(m) / (n - 1);
        double weight = (i == n - 1) ? 0.5 * h : h;
        if (m > 0) {
            weight *= 2.0;
        }
        const double s = rrc_spectrum(f, p);
        if (s == 0.0) {
            continue;
        }
        freqs_.push_back(f);
        weights_.push_back(weight * s);
    }
}

double CorrelationKernel::at(double t) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < freqs_.size(); ++i) {
        sum += weights_[i] * std::cos(2.0 * kPi * freqs_[i] * t);
    }
    return sum;
}

void CorrelationKernel::progression(double t0, double step, std::span<double> out) const {
    const std::size_t nodes = freqs_.size();
    std::vector<double> zr(nodes), zi(nodes), rr(nodes), ri(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double d = 2.0 * kPi * freqs_[i] * step;
        rr[i] = std::cos(d);
        ri[i] = std::sin(d);
    }
    // Phasors advance by complex multiplication and are re-seeded exactly
    // every kReseed steps to bound the accumulated rounding drift.
    constexpr std::size_t kReseed = 128;
    for (std::size_t n = 0; n < out.size(); ++n) {
        if (n % kReseed == 0) {
            const double t = t0 + static_cast<double>(n) * step;
            for (std::size_t i = 0; i < nodes; ++i) {
                const double th = 2.0 * kPi * freqs_[i] * t;
                zr[i] = std::cos(th);
                zi[i] = std::sin(th);
            }
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes; ++i) {
            sum += weights_[i] * zr[i];
            const double nr = zr[i] * rr[i] - zi[i] * ri[i];
            const double ni = zr[i] * ri[i] + zi[i] * rr[i];
            zr[i] = nr;
            zi[i] = ni;
        }
        out[n] = sum;
    }
}

double cross_corr(int dk, double dtau, const FtnConfig& z, const PulseParams& p, int quad_points) {
    const CorrelationKernel kernel(p, quad_points);
    return kernel.at(dk * z.symbol_period(p) + dtau);
}

SpectralGrid sample_spectrum(SpectrumKind kind, const FtnConfig& z, const PulseParams& p,
                             int points) {
    if (points < 2) {
        throw std::invalid_argument("spectral grid needs at least 2 points");
    }
    SpectralGrid grid;
    grid.frequencies.resize(points);
    grid.values.resize(points);
    const double edge = z.band_edge(p);
    for (int i = 0; i < points; ++i) {
        const int m = 2 * i - (points - 1);
        const double f = edge * static_cast<double>(m) / (points - 1);
        grid.frequencies[i] = f;
        switch (kind) {
            case SpectrumKind::pulse:
                grid.values[i] = rrc_spectrum(f, p);
                break;
            case SpectrumKind::folded:
                grid.values[i] = folded_spectrum(f, z, p);
                break;
            case SpectrumKind::twisted_folded:
                grid.values[i] = twisted_folded_spectrum(f, z, p);
                break;
            case SpectrumKind::interference_reducing:
                grid.values[i] = interference_reducing_spectrum(f, z, p);
                break;
        }
    }
    return grid;
}

}  // namespace ftnoma
