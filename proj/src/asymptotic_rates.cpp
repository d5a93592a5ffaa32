#include "ftnoma/asymptotic_rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ftnoma {

double trapezoid(const std::function<double(double)>& integrand, double a, double b, int points,
                 bool even) {
    if (points < 2) {
        throw std::invalid_argument("trapezoid rule needs at least 2 points");
    }
    if (even && a != -b) {
        throw std::invalid_argument("even-symmetric trapezoid needs a symmetric interval");
    }
    const int n = points;
    const double h = (b - a) / (n - 1);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    auto eval = [&](double x) {
        const double v = integrand(x);
        if (std::isnan(v)) {
            std::ostringstream msg;
            msg << "integrand is NaN at f = " << x;
            throw std::domain_error(msg.str());
        }
        return v;
    };
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        // Symmetric node index keeps mirrored nodes exactly opposite.
        const int m = 2 * i - (n - 1);
        if (even && m < 0) {
            continue;
        }
        const double x = mid + half * static_cast<double>(m) / (n - 1);
        double w = (i == 0 || i == n - 1) ? 0.5 * h : h;
        if (even && m > 0) {
            w *= 2.0;
        }
        sum += w * eval(x);
    }
    return sum;
}

double band_integral(const std::function<double(double)>& integrand, const FtnConfig& z,
                     const PulseParams& p, int points, bool even) {
    const double edge = z.band_edge(p);
    return trapezoid(integrand, -edge, edge, points, even);
}

LinkPowers LinkPowers::from(const Scenario& s) {
    LinkPowers lp;
    lp.noise_psd = s.noise_psd();
    for (const UserLink& u : s.users()) {
        lp.received.push_back(u.gain() * u.power(s.ftn(), s.pulse()));
    }
    return lp;
}

double LinkPowers::interference_after(std::size_t k) const {
    double sum = 0.0;
    for (std::size_t l = k + 1; l < received.size(); ++l) {
        sum += received[l];
    }
    return sum;
}

namespace {

// Beyond W every spectrum involved is zero, so integrating only up to
// min(band edge, W) keeps the beta = 0 step at the interval end.
double support_edge(const FtnConfig& z, const PulseParams& p) {
    return std::min(z.band_edge(p), p.bandwidth());
}

void check_user(const Scenario& s, std::size_t k) {
    if (k >= s.n_users()) {
        throw std::out_of_range("user index " + std::to_string(k) + " out of range");
    }
}

// Shared integrand of both Theorem-style bounds: the interference spectrum is
// the folded spectrum (lower) or |H_tfo|^2 rho(f) (upper).
double bound_integral(const Scenario& s, std::size_t k, bool upper, int points) {
    check_user(s, k);
    const LinkPowers lp = LinkPowers::from(s);
    const double signal = lp.received[k];
    const double interference = lp.interference_after(k);
    const double n0 = lp.noise_psd;
    const FtnConfig& z = s.ftn();
    const PulseParams& p = s.pulse();
    auto integrand = [&](double f) {
        const double fo = folded_spectrum(f, z, p);
        if (fo <= 0.0) {
            return 0.0;
        }
        double interf_spec = fo;
        if (upper) {
            const double tfo = twisted_folded_spectrum(f, z, p);
            interf_spec = tfo * tfo / fo;
        }
        return std::log2(1.0 + signal * fo / (n0 + interference * interf_spec));
    };
    const double e = support_edge(z, p);
    return trapezoid(integrand, -e, e, points, true) / (2.0 * p.bandwidth());
}

}  // namespace

double rate_lower_bound(const Scenario& s, std::size_t k, int points) {
    return bound_integral(s, k, false, points);
}

double rate_upper_bound(const Scenario& s, std::size_t k, int points) {
    return bound_integral(s, k, true, points);
}

BoundPair rate_bounds(const Scenario& s, std::size_t k, int points) {
    BoundPair b;
    b.lower = rate_lower_bound(s, k, points);
    b.upper = rate_upper_bound(s, k, points);
    b.merged = s.ftn().aliasing_free(s.pulse());
    return b;
}

double synchronous_noma_rate(const LinkPowers& lp, std::size_t k, const PulseParams& p) {
    const double t = p.period();
    const double sinr = lp.received.at(k) * t / (lp.noise_psd + lp.interference_after(k) * t);
    return std::log2(1.0 + sinr) / (2.0 * p.bandwidth() * t);
}

BoundPair anoma_bounds(const Scenario& s, std::size_t k, int points) {
    check_user(s, k);
    if (s.ftn().zeta() != 1.0) {
        throw std::invalid_argument("Nyquist-rate bounds need zeta == 1");
    }
    const LinkPowers lp = LinkPowers::from(s);
    const PulseParams& p = s.pulse();
    const double t = p.period();
    const double signal = lp.received[k];
    const double interference = lp.interference_after(k);
    BoundPair b;
    b.lower = synchronous_noma_rate(lp, k, p);
    auto integrand = [&](double f) {
        const double tfo = twisted_folded_spectrum(f, s.ftn(), p);
        // The folded spectrum is flat (== T) at the Nyquist rate.
        return std::log2(1.0 + signal * t / (lp.noise_psd + interference * tfo * tfo / t));
    };
    b.upper = band_integral(integrand, s.ftn(), p, points, true) / (2.0 * p.bandwidth());
    b.merged = p.beta() == 0.0;
    return b;
}

double merged_rate(const LinkPowers& lp, std::size_t k, const PulseParams& p, int points) {
    const double signal = lp.received.at(k);
    const double interference = lp.interference_after(k);
    const double w = p.bandwidth();
    auto integrand = [&](double f) {
        const double h2 = rrc_spectrum(f, p);
        return std::log2(1.0 + signal * h2 / (lp.noise_psd + interference * h2));
    };
    return trapezoid(integrand, -w, w, points, true) / (2.0 * w);
}

double merged_rate(const Scenario& s, std::size_t k, int points) {
    check_user(s, k);
    if (!s.ftn().aliasing_free(s.pulse())) {
        throw std::invalid_argument("merged rate needs zeta <= 1/(1+beta)");
    }
    return merged_rate(LinkPowers::from(s), k, s.pulse(), points);
}

double sinr_gain(const Scenario& s, std::size_t k, SinrGainForm form, int points) {
    check_user(s, k);
    const LinkPowers lp = LinkPowers::from(s);
    const double n0 = lp.noise_psd;
    const double interference = lp.interference_after(k);
    const FtnConfig& z = s.ftn();
    const PulseParams& p = s.pulse();
    if (form == SinrGainForm::pointwise) {
        auto integrand = [&](double f) {
            const double fo = folded_spectrum(f, z, p);
            if (fo <= 0.0) {
                return 1.0;
            }
            const double tfo = twisted_folded_spectrum(f, z, p);
            return (n0 * fo + interference * fo * fo) / (n0 * fo + interference * tfo * tfo);
        };
        const double e = support_edge(z, p);
        const double outside = 2.0 * (z.band_edge(p) - e);
        return z.symbol_period(p) * (trapezoid(integrand, -e, e, points, true) + outside);
    }
    const double signal = lp.received[k];
    auto async_sinr = [&](double f) {
        const double fo = folded_spectrum(f, z, p);
        if (fo <= 0.0) {
            return 0.0;
        }
        const double tfo = twisted_folded_spectrum(f, z, p);
        return signal * fo / (n0 + interference * tfo * tfo / fo);
    };
    auto sync_sinr = [&](double f) {
        const double fo = folded_spectrum(f, z, p);
        return signal * fo / (n0 + interference * fo);
    };
    const double e = support_edge(z, p);
    const double den = trapezoid(sync_sinr, -e, e, points, true);
    if (den <= 0.0) {
        return 1.0;
    }
    return trapezoid(async_sinr, -e, e, points, true) / den;
}

double dof_gain(const FtnConfig& z, const PulseParams& p) {
    return p.period() * std::min(z.symbol_rate(p), 2.0 * p.bandwidth());
}

Scenario rescale_total_snr(const Scenario& s, double snr_linear) {
    const LinkPowers lp = LinkPowers::from(s);
    double total = 0.0;
    for (double r : lp.received) {
        total += r;
    }
    if (!(total > 0.0)) {
        throw std::invalid_argument("cannot rescale a scenario with zero received power");
    }
    const double factor = snr_linear * s.noise_psd() / total;
    std::vector<UserLink> users = s.users();
    for (UserLink& u : users) {
        u.symbol_energy *= factor;
    }
    return Scenario(std::move(users), s.n_symbols(), s.noise_psd(), s.ftn(), s.pulse(),
                    DecodeOrder::as_given);
}

std::vector<double> high_snr_ratio(const PulseParams& p, const Scenario& tmpl,
                                   std::span<const double> snr_db, std::size_t k, int points) {
    check_user(tmpl, k);
    std::vector<double> out;
    out.reserve(snr_db.size());
    double previous = -std::numeric_limits<double>::infinity();
    for (double db : snr_db) {
        if (!(db > previous)) {
            throw std::invalid_argument("SNR list must be strictly increasing");
        }
        previous = db;
        const Scenario s = rescale_total_snr(tmpl, std::pow(10.0, db / 10.0));
        LinkPowers lp = LinkPowers::from(s);
        out.push_back(merged_rate(lp, k, p, points) / synchronous_noma_rate(lp, k, p));
    }
    return out;
}

}  // namespace ftnoma
