#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ftnoma/scenario_mc.hpp"

using namespace ftnoma;

namespace {

// Kolmogorov-Smirnov distance between samples and a CDF.
template <class Cdf>
double ks_statistic(std::vector<double> x, Cdf cdf) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
    }
    return d;
}

}  // namespace

TEST_CASE("area-uniform positions") {
    CellConfig cell;
    cell.d0 = 50.0;
    cell.d1 = 75.0;
    Rng rng = trial_rng(1, 0);
    const std::vector<double> d = sample_positions(cell, 1000000, rng);
    double mean = 0.0;
    for (double x : d) {
        mean += x;
    }
    mean /= static_cast<double>(d.size());
    const double a = cell.d0;
    const double b = cell.d1;
    const double expect = 2.0 * (b * b * b - a * a * a) / (3.0 * (b * b - a * a));
    CHECK(mean == doctest::Approx(expect).epsilon(0.005));
    const double ks = ks_statistic(d, [&](double x) { return (x * x - a * a) / (b * b - a * a); });
    CHECK(ks < 0.01);

    cell.d1 = cell.d0 + 1e-9;
    Rng rng2 = trial_rng(1, 1);
    for (double x : sample_positions(cell, 100, rng2)) {
        CHECK(x == doctest::Approx(cell.d1).epsilon(1e-9));
    }
}

TEST_CASE("Rayleigh channel draws") {
    Rng rng = trial_rng(2, 0);
    const double var = 1.0 / (1.0 + std::pow(100.0, 3.76));
    std::vector<double> g(1000000);
    double mean = 0.0;
    for (double& x : g) {
        x = std::norm(sample_channel(100.0, 3.76, rng));
        mean += x;
    }
    mean /= static_cast<double>(g.size());
    CHECK(mean == doctest::Approx(var).epsilon(0.01));
    CHECK(ks_statistic(g, [&](double x) { return 1.0 - std::exp(-x / var); }) < 0.01);
    CHECK(std::norm(sample_channel(1e12, 3.76, rng)) < 1e-40);
    CHECK_THROWS_AS(sample_channel(0.0, 3.76, rng), std::invalid_argument);
}

TEST_CASE("average channel gain") {
    CellConfig cell;
    const double avg = avg_channel_gain(cell);
    Rng rng = trial_rng(3, 0);
    const int n = 10000000;
    double mc = 0.0;
    const std::vector<double> d = sample_positions(cell, n, rng);
    for (double x : d) {
        mc += std::norm(sample_channel(x, cell.alpha, rng));
    }
    mc /= n;
    CHECK(avg == doctest::Approx(mc).epsilon(0.005));

    CellConfig thin = cell;
    thin.d1 = thin.d0 + 1e-6;
    CHECK(avg_channel_gain(thin) == doctest::Approx(1.0 / (1.0 + std::pow(thin.d1, 3.76))).epsilon(1e-6));
    CellConfig steep = cell;
    steep.alpha = 40.0;
    CHECK(avg_channel_gain(steep) < 1e-60);
}

TEST_CASE("power calibration") {
    CellConfig cell;
    const PowerCalibration c = calibrate_power(cell);
    CHECK(c.p_max * c.avg_gain / cell.noise_psd() == doctest::Approx(100.0));
    CHECK(c.per_user == doctest::Approx(c.p_max / 16.0));
    CellConfig twice = cell;
    twice.n_users = 32;
    CHECK(calibrate_power(twice).per_user == doctest::Approx(c.per_user / 2.0));
    double prev = 0.0;
    for (double d1 : {75.0, 100.0, 200.0, 300.0, 400.0, 500.0}) {
        CellConfig cc = cell;
        cc.d1 = d1;
        const double p = calibrate_power(cc).p_max;
        CHECK(p > prev);
        prev = p;
    }
    CHECK(dbm_to_watts(-80.0) == doctest::Approx(1e-11));
    CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0));
    CellConfig bad = cell;
    bad.d1 = 40.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cell;
    bad.alpha = 2.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("trial draws are reproducible and in range") {
    CellConfig cell;
    cell.n_users = 8;
    const TrialDraw a = draw_trial(cell, 42, 7);
    const TrialDraw b = draw_trial(cell, 42, 7);
    const TrialDraw c = draw_trial(cell, 42, 8);
    CHECK(a.channels == b.channels);
    CHECK(a.delays == b.delays);
    CHECK(a.channels != c.channels);
    for (double d : a.delays) {
        CHECK(d >= 0.0);
        CHECK(d <= cell.max_delay);
    }
    for (double d : a.distances) {
        CHECK(d >= cell.d0);
        CHECK(d <= cell.d1);
    }
}

TEST_CASE("ccdf") {
    const std::vector<double> same(10, 2.0);
    const std::vector<double> g{1.999, 2.0, 2.5};
    const auto c = ccdf(same, g);
    CHECK(c[0] == 1.0);
    CHECK(c[1] == 0.0);
    CHECK(c[2] == 0.0);
    const std::vector<double> s{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> g2{-10.0, 1.5, 3.0, 10.0};
    const auto c2 = ccdf(s, g2);
    CHECK(c2[0] == 1.0);
    CHECK(c2[1] == 0.75);
    CHECK(c2[2] == 0.25);
    CHECK(c2[3] == 0.0);
    CHECK_THROWS_AS(ccdf(std::vector<double>{}, g), std::invalid_argument);
}

TEST_CASE("ergodic experiment is deterministic and thread independent") {
    ErgodicConfig cfg;
    cfg.cell.n_users = 4;
    cfg.n_symbols = 30;
    cfg.trials = 6;
    cfg.seed = 99;
    cfg.quad_points = 2048;
    cfg.threads = 1;
    const ErgodicResult a = ergodic_experiment(cfg);
    const ErgodicResult b = ergodic_experiment(cfg);
    cfg.threads = 3;
    const ErgodicResult c = ergodic_experiment(cfg);
    CHECK(a.aftn.sum == b.aftn.sum);
    CHECK(a.aftn.sum == c.aftn.sum);
    CHECK(a.anoma.per_user == c.anoma.per_user);
    CHECK(a.noma.sum == c.noma.sum);
    for (const auto& u : a.noma.per_user) {
        REQUIRE(u.size() == 4);
    }
    cfg.trials = 1;
    cfg.threads = 1;
    const ErgodicResult one = ergodic_experiment(cfg);
    CHECK(one.aftn.sum.front() == a.aftn.sum.front());
}

TEST_CASE("two-user region corners and nesting") {
    RegionConfig cfg;
    cfg.draws = 40;
    cfg.n_symbols = 100;
    cfg.seed = 5;
    const auto regions = rate_region_two_user(cfg);
    REQUIRE(regions.size() == 3);
    const RateRegion& noma = regions[0];
    CHECK(noma.scheme == Scheme::noma);
    CHECK(noma.polyline[1].r1 == doctest::Approx(0.7177).epsilon(1e-4));
    CHECK(noma.polyline[1].r2 == doctest::Approx(2.6611).epsilon(1e-4));
    CHECK(noma.polyline[2].r1 == doctest::Approx(2.6611).epsilon(1e-4));
    CHECK(noma.polyline[2].r2 == doctest::Approx(0.7177).epsilon(1e-4));
    for (int i = 0; i <= 20; ++i) {
        const double th = 0.5 * 3.141592653589793 * i / 20.0;
        const double rn = region_radius(regions[0], th);
        const double ra = region_radius(regions[1], th);
        const double rf = region_radius(regions[2], th);
        CHECK(rn <= ra + 2.0 * regions[1].corner_std_error + 1e-9);
        CHECK(ra < rf);
    }
}

TEST_CASE("region radius of a square") {
    RateRegion sq;
    sq.polyline = {{0.0, 1.0}, {1.0, 1.0}, {1.0, 0.0}};
    CHECK(region_radius(sq, 0.0) == doctest::Approx(1.0));
    CHECK(region_radius(sq, 0.25 * 3.141592653589793) == doctest::Approx(std::sqrt(2.0)));
    CHECK(region_radius(sq, 0.5 * 3.141592653589793) == doctest::Approx(1.0));
}

TEST_CASE("trade-off sweep") {
    TradeoffConfig cfg;
    const auto rows = tradeoff_sweep(cfg);
    REQUIRE(rows.size() == 4);
    CHECK(rows.front().dof_gain == doctest::Approx(1.0));
    CHECK(rows.back().sinr_gain == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rows.back().dof_gain == doctest::Approx(1.5));
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].sinr_gain <= rows[i - 1].sinr_gain);
        CHECK(rows[i].dof_gain >= rows[i - 1].dof_gain);
        CHECK(rows.front().sinr_gain >= rows[i].sinr_gain);
    }
    TradeoffConfig flat;
    flat.beta = 0.0;
    flat.zeta = {1.0};
    const auto f = tradeoff_sweep(flat);
    CHECK(f[0].sinr_gain == doctest::Approx(1.0));
    CHECK(f[0].dof_gain == doctest::Approx(1.0));
    TradeoffConfig bad;
    bad.zeta = {0.5};
    CHECK_THROWS_AS(tradeoff_sweep(bad), std::invalid_argument);
}

TEST_CASE("instantaneous experiment bookkeeping") {
    InstantaneousConfig cfg;
    cfg.n_symbols = 40;
    cfg.draws = 5;
    cfg.snr_db = {0.0, 10.0};
    cfg.quad_points = 2048;
    const InstantaneousResult r = instantaneous_experiment(cfg);
    REQUIRE(r.sum_mean.size() == 2);
    for (std::size_t s = 0; s < 2; ++s) {
        double sum = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            sum += r.user_mean[k][s];
            CHECK(r.lower[k][s] <= r.upper[k][s]);
        }
        CHECK(sum == doctest::Approx(r.sum_mean[s]));
    }
    cfg.threads = 2;
    const InstantaneousResult r2 = instantaneous_experiment(cfg);
    CHECK(r.samples == r2.samples);
    CHECK(profile_power(std::vector<double>{0.5, 0.5}, 10.0) == doctest::Approx(10.0));
}
