#pragma once

#include <span>
#include <vector>

namespace ftnoma {

inline constexpr int kDefaultQuadPoints = 8192;

/// Root-raised-cosine pulse: roll-off beta in [0, 1], Nyquist period T > 0.
/// The baseband bandwidth W = (1 + beta) / (2T) is derived, never stored
/// independently.
class PulseParams {
public:
    explicit PulseParams(double beta, double period = 1.0);

    double beta() const { return beta_; }
    double period() const { return period_; }
    double bandwidth() const { return (1.0 + beta_) / (2.0 * period_); }

private:
    double beta_;
    double period_;
};

/// Time-domain compression factor zeta in (0, 1]; zeta == 1 is Nyquist
/// signalling.
class FtnConfig {
public:
    explicit FtnConfig(double zeta);

    double zeta() const { return zeta_; }
    double symbol_period(const PulseParams& p) const { return zeta_ * p.period(); }
    double symbol_rate(const PulseParams& p) const { return 1.0 / symbol_period(p); }
    /// Upper edge of the symbol-rate band [-1/(2 zeta T), 1/(2 zeta T)].
    double band_edge(const PulseParams& p) const { return 0.5 / symbol_period(p); }
    bool aliasing_free(const PulseParams& p) const;

private:
    double zeta_;
};

/// Inclusive range of alias indices that can be non-zero on the band.
struct AliasRange {
    int first = 0;
    int last = 0;
};

/// |H_p(f)|^2 of the RRC pulse.
double rrc_spectrum(double f, const PulseParams& p);

/// Closed-form raised-cosine autocorrelation, used to validate cross_corr.
double rrc_autocorr_oracle(double dt, const PulseParams& p);

AliasRange alias_range(const FtnConfig& z, const PulseParams& p);

double folded_spectrum(double f, const FtnConfig& z, const PulseParams& p);
double twisted_folded_spectrum(double f, const FtnConfig& z, const PulseParams& p);
double interference_reducing_spectrum(double f, const FtnConfig& z, const PulseParams& p);

/// Correlation between two pulses separated by dk symbols and dtau seconds,
/// computed from the spectral form by trapezoid quadrature over [-W, W].
double cross_corr(int dk, double dtau, const FtnConfig& z, const PulseParams& p,
                  int quad_points = kDefaultQuadPoints);

/// Something that can evaluate pulse autocorrelations along an arithmetic
/// progression of lags t0, t0 + step, ... (one value per output slot).
class CorrelationSource {
public:
    virtual ~CorrelationSource() = default;
    virtual double at(double t) const = 0;
    virtual void progression(double t0, double step, std::span<double> out) const = 0;
    virtual const PulseParams& pulse() const = 0;
};

/// Trapezoid quadrature of the spectral correlation integral. Spectrum
/// samples and weights are cached at construction; the even symmetry of the
/// spectrum folds the grid onto f >= 0.
class CorrelationKernel final : public CorrelationSource {
public:
    CorrelationKernel(const PulseParams& p, int quad_points = kDefaultQuadPoints);

    double at(double t) const override;
    void progression(double t0, double step, std::span<double> out) const override;
    const PulseParams& pulse() const override { return pulse_; }
    int quad_points() const { return quad_points_; }

private:
    PulseParams pulse_;
    int quad_points_;
    std::vector<double> freqs_;
    std::vector<double> weights_;  // quadrature weight times spectrum value
};

enum class SpectrumKind { pulse, folded, twisted_folded, interference_reducing };

/// Samples of one spectrum over the symbol-rate band.
struct SpectralGrid {
    std::vector<double> frequencies;
    std::vector<double> values;
};

SpectralGrid sample_spectrum(SpectrumKind kind, const FtnConfig& z, const PulseParams& p,
                             int points);

}  // namespace ftnoma
