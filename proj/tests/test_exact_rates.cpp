#include "doctest.h"

#include <cmath>
#include <complex>
#include <memory>
#include <random>

#include "ftnoma/asymptotic_rates.hpp"
#include "ftnoma/exact_rates.hpp"
#include "ftnoma/mui_toeplitz.hpp"

using namespace ftnoma;

namespace {

UserLink link(double gain, double delay, double energy) {
    return {std::complex<double>(std::sqrt(gain), 0.0), delay, energy};
}

// Plain Cholesky, written out so it shares nothing with the library.
double cholesky_logdet(const Eigen::MatrixXd& a) {
    const auto n = a.rows();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    double ld = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        double s = a(j, j);
        for (Eigen::Index k = 0; k < j; ++k) {
            s -= l(j, k) * l(j, k);
        }
        l(j, j) = std::sqrt(s);
        ld += 2.0 * std::log(l(j, j));
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double t = a(i, j);
            for (Eigen::Index k = 0; k < j; ++k) {
                t -= l(i, k) * l(j, k);
            }
            l(i, j) = t / l(j, j);
        }
    }
    return ld;
}

}  // namespace

TEST_CASE("sic_sort is a stable descending sort") {
    auto sorted = sic_sort({link(0.5, 0, 1), link(0.4, 0, 1), link(0.1, 0, 1)});
    CHECK(sorted[0].gain() == doctest::Approx(0.5));
    CHECK(sorted[2].gain() == doctest::Approx(0.1));
    sorted = sic_sort({link(0.1, 0, 1), link(0.4, 0, 1), link(0.5, 0, 1)});
    CHECK(sorted[0].gain() == doctest::Approx(0.5));
    CHECK(sorted[1].gain() == doctest::Approx(0.4));
    sorted = sic_sort({link(0.3, 1.0, 1), link(0.3, 2.0, 1), link(0.3, 3.0, 1)});
    CHECK(sorted[0].delay == 1.0);
    CHECK(sorted[1].delay == 2.0);
    CHECK(sorted[2].delay == 3.0);
}

TEST_CASE("scenario validation") {
    const PulseParams p(0.3);
    CHECK_THROWS_AS(Scenario({}, 10, 1.0, FtnConfig(1.0), p), std::invalid_argument);
    CHECK_THROWS_AS(Scenario({link(1, 0, 1)}, 0, 1.0, FtnConfig(1.0), p), std::invalid_argument);
    CHECK_THROWS_AS(Scenario({link(1, 0, 1)}, 10, 0.0, FtnConfig(1.0), p), std::invalid_argument);
    CHECK_THROWS_AS(Scenario({link(1, -1, 1)}, 10, 1.0, FtnConfig(1.0), p), std::invalid_argument);
}

TEST_CASE("scalar channel") {
    const Scenario s({link(0.7, 0.4, 3.0)}, 1, 2.0, FtnConfig(1.0), PulseParams(0.3));
    CHECK(conditional_mi(s, 0) == doctest::Approx(0.5 * std::log2(1.0 + 0.7 * 3.0 / 2.0)));
}

TEST_CASE("single user at Nyquist rate") {
    const Scenario s({link(1.0, 0.0, 10.0)}, 100, 1.0, FtnConfig(1.0), PulseParams(0.3));
    const double per_use = conditional_mi(s, 0) / 100.0;
    CHECK(per_use == doctest::Approx(0.5 * std::log2(11.0)).epsilon(0.01));
    CHECK(normalized_rate(s, 0) == doctest::Approx(std::log2(11.0) / 1.3).epsilon(1e-9));
    CHECK(sum_rate(s) == doctest::Approx(normalized_rate(s, 0)));
}

TEST_CASE("sinc pulse at Nyquist rate needs no bandwidth correction") {
    const Scenario s({link(1.0, 0.0, 3.0)}, 200, 1.0, FtnConfig(1.0), PulseParams(0.0));
    CHECK(normalized_rate(s, 0) == doctest::Approx(std::log2(4.0)).epsilon(1e-9));
}

TEST_CASE("two synchronous users match the closed-form corner") {
    const PulseParams p(0.3);
    const Scenario s({link(1.0, 0.0, 10.0), link(1.0, 0.0, 10.0)}, 100, 1.0, FtnConfig(1.0), p,
                     DecodeOrder::as_given);
    const RateReport r = evaluate_rates(s);
    CHECK(r.per_user_normalized[0] == doctest::Approx(0.7177).epsilon(1e-4));
    CHECK(r.per_user_normalized[1] == doctest::Approx(2.6611).epsilon(1e-4));
    const double closed = (std::log2(1.0 + 10.0 / 11.0) + std::log2(11.0)) / 1.3;
    CHECK(r.sum_normalized == doctest::Approx(closed).epsilon(1e-9));
}

TEST_CASE("rate is the same below the aliasing threshold") {
    const PulseParams p(0.3);
    const double z1 = 1.0 / 1.3;
    const double z2 = 1.0 / 2.6;
    // Same power P = E_s / (zeta T).
    const Scenario a({link(1.0, 0.0, 10.0 * z1)}, 100, 1.0, FtnConfig(z1), p);
    const Scenario b({link(1.0, 0.0, 10.0 * z2)}, 100, 1.0, FtnConfig(z2), p);
    CHECK(normalized_rate(a, 0) == doctest::Approx(normalized_rate(b, 0)).epsilon(0.01));
}

TEST_CASE("logdet_spd") {
    CHECK(logdet_spd(Eigen::MatrixXd::Identity(5, 5)).value == doctest::Approx(0.0));
    Eigen::MatrixXd d = Eigen::MatrixXd::Identity(2, 2) * 2.0;
    CHECK(logdet_spd(d).value == doctest::Approx(2.0 * std::log(2.0)));
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::MatrixXd a(30, 30);
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            a.data()[i] = n(rng);
        }
        const Eigen::MatrixXd spd = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(30, 30);
        const LogDet ld = logdet_spd(spd);
        CHECK(ld.floored == 0);
        CHECK(std::abs(ld.value - cholesky_logdet(spd)) < 1e-9);
    }
    Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(3, 3);
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(logdet_spd(asym), std::invalid_argument);
}

TEST_CASE("projected and literal determinant routes agree on well conditioned Grams") {
    const PulseParams p(0.3);
    for (double zeta : {1.0, 0.9}) {
        const Scenario s({link(0.5, 0.3, 20.0), link(0.4, 1.1, 20.0), link(0.1, 0.0, 20.0)}, 40,
                         1.0, FtnConfig(zeta), p, DecodeOrder::as_given);
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(conditional_mi(s, k) == doctest::Approx(conditional_mi_direct(s, k)).epsilon(1e-8));
        }
    }
}

TEST_CASE("chain rule with a shared matched-filter bank") {
    const PulseParams p(0.3);
    const FtnConfig z(0.8);
    const int n = 20;
    const Scenario s({link(0.6, 0.5, 5.0), link(0.3, 0.5, 5.0)}, n, 1.0, z, p,
                     DecodeOrder::as_given);
    const Eigen::MatrixXd g = mui_matrix(0.0, z, p, n).dense();
    Eigen::MatrixXd sigma = g;
    for (const UserLink& u : s.users()) {
        sigma += u.gain() * u.symbol_energy * g * g.transpose();
    }
    const double joint = 0.5 * (cholesky_logdet(sigma) - cholesky_logdet(g)) / std::log(2.0);
    CHECK(conditional_mi(s, 0) + conditional_mi(s, 1) == doctest::Approx(joint).epsilon(1e-9));
}

TEST_CASE("rate grows with symbol energy") {
    const PulseParams p(0.3);
    double prev = 0.0;
    for (double e : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const Scenario s({link(0.5, 0.7, e), link(0.4, 0.2, 1.0)}, 60, 1.0, FtnConfig(0.9), p,
                         DecodeOrder::as_given);
        const double r = normalized_rate(s, 0);
        CHECK(r > prev);
        prev = r;
    }
}

TEST_CASE("finite-N rates stay between the asymptotic bounds") {
    const PulseParams p(0.3);
    const FtnConfig z(0.95);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int draw = 0; draw < 4; ++draw) {
        const double power = 100.0;  // 20 dB total, gains sum to 1
        const Scenario s({link(0.5, u(rng), power * 0.95), link(0.4, u(rng), power * 0.95),
                          link(0.1, u(rng), power * 0.95)},
                         100, 1.0, z, p, DecodeOrder::as_given);
        const RateReport r = evaluate_rates(s);
        for (std::size_t k = 0; k < 3; ++k) {
            const BoundPair b = rate_bounds(s, k);
            CHECK(r.per_user_normalized[k] >= b.lower - 0.05);
            CHECK(r.per_user_normalized[k] <= b.upper + 0.05);
        }
    }
}

TEST_CASE("synchronous users converge to the closed form") {
    const PulseParams p(0.3);
    const FtnConfig z(0.95);
    // All delays equal: finite-N rate approaches the zeta-band lower bound.
    double prev = 1e300;
    for (int n : {25, 50, 100, 200}) {
        const Scenario s({link(0.5, 0.6, 95.0), link(0.4, 0.6, 95.0), link(0.1, 0.6, 95.0)}, n,
                         1.0, z, p, DecodeOrder::as_given);
        const double err = std::abs(sum_rate(s) - (rate_lower_bound(s, 0) + rate_lower_bound(s, 1) +
                                                   rate_lower_bound(s, 2)));
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 0.02);
}

TEST_CASE("delay sensitivity at beta = 0 shrinks with the block length") {
    const PulseParams p(0.0);
    double prev = 1e300;
    for (int n : {25, 50, 100}) {
        const Scenario a({link(0.6, 0.0, 30.0), link(0.4, 0.0, 30.0)}, n, 1.0, FtnConfig(1.0), p,
                         DecodeOrder::as_given);
        const Scenario b({link(0.6, 0.0, 30.0), link(0.4, 1.5, 30.0)}, n, 1.0, FtnConfig(1.0), p,
                         DecodeOrder::as_given);
        const double gap = std::abs(sum_rate(a) - sum_rate(b));
        CHECK(gap < prev);
        prev = gap;
    }
}

TEST_CASE("engine results do not depend on the correlation source") {
    const PulseParams p(0.3);
    const FtnConfig z(0.8);
    auto kernel = std::make_shared<const CorrelationKernel>(p);
    auto table = std::make_shared<const CorrelationTable>(p, 60.0);
    const SicRateEngine a(z, kernel, 50);
    const SicRateEngine b(z, table, 50);
    const std::vector<double> delays{0.0, 0.7, 1.9};
    const std::vector<SicRateEngine::Profile> prof{{{4.0, 3.0, 1.0}, 1.0}, {{40.0, 30.0, 10.0}, 1.0}};
    const auto ra = a.evaluate(delays, prof);
    const auto rb = b.evaluate(delays, prof);
    for (std::size_t s = 0; s < 2; ++s) {
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(ra.mi_bits[s][k] == doctest::Approx(rb.mi_bits[s][k]).epsilon(1e-9));
        }
    }
    CHECK_THROWS_AS(a.evaluate(delays, std::vector<SicRateEngine::Profile>{{{1.0}, 1.0}}),
                    std::invalid_argument);
}

TEST_CASE("dropped Gram dimensions are reported") {
    const PulseParams p(0.3);
    const Scenario s({link(1.0, 0.0, 1.0)}, 100, 1.0, FtnConfig(0.5), p);
    const RateReport r = evaluate_rates(s);
    CHECK(r.condition_warnings > 0);
    CHECK(std::isfinite(r.sum_normalized));
}
