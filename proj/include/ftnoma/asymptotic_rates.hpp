#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ftnoma/exact_rates.hpp"
#include "ftnoma/pulse_spectra.hpp"

namespace ftnoma {

struct BoundPair {
    double lower = 0.0;  // bits/s/Hz
    double upper = 0.0;  // bits/s/Hz
    bool merged = false;  // no spectral aliasing: the two bounds coincide
};

enum class SinrGainForm { pointwise, ratio_of_integrals };

/// Composite trapezoid over [a, b] on `points` uniform nodes. With `even`
/// set, the integrand is only sampled on the non-negative half of a
/// symmetric interval.
double trapezoid(const std::function<double(double)>& integrand, double a, double b, int points,
                 bool even = false);

/// Trapezoid integral over the symbol-rate band [-1/(2 zeta T), 1/(2 zeta T)].
/// Throws std::domain_error naming the frequency if the integrand is NaN.
double band_integral(const std::function<double(double)>& integrand, const FtnConfig& z,
                     const PulseParams& p, int points = kDefaultQuadPoints, bool even = false);

/// Received powers |h_l|^2 P_l in decoding order, the per-user view the
/// closed-form bounds are written in.
struct LinkPowers {
    std::vector<double> received;
    double noise_psd = 1.0;

    static LinkPowers from(const Scenario& s);
    double interference_after(std::size_t k) const;
};

double rate_lower_bound(const Scenario& s, std::size_t k, int points = kDefaultQuadPoints);
double rate_upper_bound(const Scenario& s, std::size_t k, int points = kDefaultQuadPoints);
BoundPair rate_bounds(const Scenario& s, std::size_t k, int points = kDefaultQuadPoints);

/// Nyquist-rate (zeta == 1) bounds: closed-form lower bound and quadrature
/// upper bound. Throws std::invalid_argument for zeta != 1.
BoundPair anoma_bounds(const Scenario& s, std::size_t k, int points = kDefaultQuadPoints);

/// Rate once the symbol rate removes all aliasing (zeta <= 1/(1+beta)).
double merged_rate(const Scenario& s, std::size_t k, int points = kDefaultQuadPoints);
double merged_rate(const LinkPowers& lp, std::size_t k, const PulseParams& p,
                   int points = kDefaultQuadPoints);

/// Synchronous Nyquist-rate NOMA rate, the zeta == 1 lower bound in closed form.
double synchronous_noma_rate(const LinkPowers& lp, std::size_t k, const PulseParams& p);

double sinr_gain(const Scenario& s, std::size_t k, SinrGainForm form = SinrGainForm::pointwise,
                 int points = kDefaultQuadPoints);
double dof_gain(const FtnConfig& z, const PulseParams& p);

/// Scale every user's symbol energy so that sum_k |h_k|^2 P_k / N0 == snr.
Scenario rescale_total_snr(const Scenario& s, double snr_linear);

/// merged_rate / synchronous_noma_rate for user k along an SNR list (dB),
/// using the template's gains, relative powers and N0.
std::vector<double> high_snr_ratio(const PulseParams& p, const Scenario& tmpl,
                                   std::span<const double> snr_db, std::size_t k,
                                   int points = kDefaultQuadPoints);

}  // namespace ftnoma
