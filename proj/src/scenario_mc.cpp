#include "ftnoma/scenario_mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include "ftnoma/asymptotic_rates.hpp"
#include "ftnoma/exact_rates.hpp"
#include "ftnoma/mui_toeplitz.hpp"

namespace ftnoma {

Rng trial_rng(std::uint64_t master_seed, std::uint64_t trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                      static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
    return Rng(seq);
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

void CellConfig::validate() const {
    if (!(d0 > 0.0)) {
        throw std::invalid_argument("cell.d0 must be > 0");
    }
    if (!(d1 > d0)) {
        throw std::invalid_argument("cell.d1 must exceed cell.d0");
    }
    if (!(alpha > 2.0)) {
        throw std::invalid_argument("cell.alpha must be > 2");
    }
    if (n_users < 1) {
        throw std::invalid_argument("cell.n_users must be >= 1");
    }
    if (!(max_delay >= 0.0)) {
        throw std::invalid_argument("cell.max_delay must be >= 0");
    }
    if (!std::isfinite(noise_psd_dbm) || !std::isfinite(snr_sum_db)) {
        throw std::invalid_argument("cell noise and SNR must be finite");
    }
}

std::vector<double> sample_positions(const CellConfig& cell, int count, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double a = cell.d0 * cell.d0;
    const double b = cell.d1 * cell.d1;
    std::vector<double> d(static_cast<std::size_t>(count));
    for (double& x : d) {
        x = std::sqrt(a + u(rng) * (b - a));
    }
    return d;
}

std::complex<double> sample_channel(double distance, double alpha, Rng& rng) {
    if (!(distance > 0.0)) {
        throw std::invalid_argument("channel distance must be > 0");
    }
    const double var = 1.0 / (1.0 + std::pow(distance, alpha));
    std::normal_distribution<double> n(0.0, std::sqrt(0.5 * var));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

std::vector<double> sample_delays(int count, double max_delay, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, max_delay);
    std::vector<double> d(static_cast<std::size_t>(count));
    for (double& x : d) {
        x = max_delay > 0.0 ? u(rng) : 0.0;
    }
    return d;
}

double avg_channel_gain(const CellConfig& cell, int points) {
    cell.validate();
    const double area = cell.d1 * cell.d1 - cell.d0 * cell.d0;
    auto integrand = [&](double d) { return 2.0 * d / area / (1.0 + std::pow(d, cell.alpha)); };
    return trapezoid(integrand, cell.d0, cell.d1, points);
}

PowerCalibration calibrate_power(const CellConfig& cell) {
    PowerCalibration c;
    c.avg_gain = avg_channel_gain(cell);
    c.p_max = db_to_linear(cell.snr_sum_db) * cell.noise_psd() / c.avg_gain;
    c.per_user = c.p_max / cell.n_users;
    return c;
}

TrialDraw draw_trial(const CellConfig& cell, std::uint64_t master_seed, std::uint64_t trial) {
    Rng rng = trial_rng(master_seed, trial);
    TrialDraw t;
    t.rng_stream_id = trial;
    t.distances = sample_positions(cell, cell.n_users, rng);
    for (;;) {
        t.channels.clear();
        bool degenerate = true;
        for (double d : t.distances) {
            t.channels.push_back(sample_channel(d, cell.alpha, rng));
            if (std::norm(t.channels.back()) >= 1e-300) {
                degenerate = false;
            }
        }
        if (!degenerate) {
            break;
        }
        ++t.resampled;
    }
    t.delays = sample_delays(cell.n_users, cell.max_delay, rng);
    return t;
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    int workers = threads;
    if (workers <= 0) {
        workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) {
                return;
            }
            try {
                body(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    for (std::thread& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

SampleStats sample_stats(std::span<const double> x) {
    SampleStats s;
    if (x.empty()) {
        return s;
    }
    const double n = static_cast<double>(x.size());
    s.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    if (x.size() > 1) {
        double ss = 0.0;
        for (double v : x) {
            ss += (v - s.mean) * (v - s.mean);
        }
        s.std_error = std::sqrt(ss / (n - 1.0) / n);
    }
    return s;
}

namespace {

// Lags reach (N - 1) T plus the largest delay difference; a couple of
// periods of margin keep the interpolation stencil inside the table.
std::shared_ptr<const CorrelationSource> make_table(const PulseParams& p, int n, double max_delay,
                                                    int quad_points) {
    const double lag = (n - 1) * p.period() + max_delay + 2.0 * p.period();
    return std::make_shared<const CorrelationTable>(p, lag, quad_points);
}

double normalizer(const FtnConfig& z, const PulseParams& p, int n) {
    return 1.0 / (n * z.symbol_period(p) * p.bandwidth());
}

void check_draws(int draws, const char* name) {
    if (draws < 1) {
        throw std::invalid_argument(std::string(name) + " must be >= 1");
    }
}

}  // namespace

double profile_power(std::span<const double> gains, double snr_linear) {
    const double total = std::accumulate(gains.begin(), gains.end(), 0.0);
    if (!(total > 0.0)) {
        throw std::invalid_argument("channel gain profile must have positive total");
    }
    return snr_linear / total;
}

double InstantaneousResult::sample(int draw, int snr, int user) const {
    const auto n_snr = static_cast<int>(snr_db.size());
    const auto n_users = static_cast<int>(user_mean.size());
    return samples.at(static_cast<std::size_t>((draw * n_snr + snr) * n_users + user));
}

InstantaneousResult instantaneous_experiment(const InstantaneousConfig& cfg) {
    check_draws(cfg.draws, "draws");
    if (cfg.gains.empty() || cfg.snr_db.empty()) {
        throw std::invalid_argument("instantaneous experiment needs gains and an SNR grid");
    }
    const PulseParams p(cfg.beta, cfg.period);
    const FtnConfig z(cfg.zeta);
    const FtnConfig nyquist(1.0);
    const int n = cfg.n_symbols;
    const auto k_users = cfg.gains.size();
    const auto n_snr = cfg.snr_db.size();

    const auto table = make_table(p, n, cfg.max_delay, cfg.quad_points);
    const SicRateEngine engine(z, table, n);
    const SicRateEngine sync_engine(nyquist, table, n);

    std::vector<SicRateEngine::Profile> profiles(n_snr);
    std::vector<SicRateEngine::Profile> sync_profiles(n_snr);
    for (std::size_t s = 0; s < n_snr; ++s) {
        const double power = profile_power(cfg.gains, db_to_linear(cfg.snr_db[s]));
        profiles[s].noise_psd = 1.0;
        sync_profiles[s].noise_psd = 1.0;
        for (double g : cfg.gains) {
            profiles[s].weights.push_back(g * power * z.symbol_period(p));
            sync_profiles[s].weights.push_back(g * power * nyquist.symbol_period(p));
        }
    }

    InstantaneousResult res;
    res.snr_db = cfg.snr_db;
    const double scale = normalizer(z, p, n);
    const std::vector<double> zeros(k_users, 0.0);
    const SicRateEngine::Result zero = engine.evaluate(zeros, profiles);
    const SicRateEngine::Result sync = sync_engine.evaluate(zeros, sync_profiles);
    res.condition_warnings += zero.condition_warnings + sync.condition_warnings;
    for (std::size_t s = 0; s < n_snr; ++s) {
        double zsum = 0.0;
        double ssum = 0.0;
        for (std::size_t k = 0; k < k_users; ++k) {
            zsum += zero.mi_bits[s][k] * scale;
            ssum += sync.mi_bits[s][k] * normalizer(nyquist, p, n);
        }
        res.zero_delay_sum.push_back(zsum);
        res.synchronous_sum.push_back(ssum);
    }

    res.samples.assign(static_cast<std::size_t>(cfg.draws) * n_snr * k_users, 0.0);
    std::vector<int> warnings(static_cast<std::size_t>(cfg.draws), 0);
    parallel_for(cfg.draws, cfg.threads, [&](int d) {
        Rng rng = trial_rng(cfg.seed, static_cast<std::uint64_t>(d));
        const std::vector<double> delays =
            sample_delays(static_cast<int>(k_users), cfg.max_delay, rng);
        const SicRateEngine::Result r = engine.evaluate(delays, profiles);
        warnings[static_cast<std::size_t>(d)] = r.condition_warnings;
        for (std::size_t s = 0; s < n_snr; ++s) {
            for (std::size_t k = 0; k < k_users; ++k) {
                res.samples[(static_cast<std::size_t>(d) * n_snr + s) * k_users + k] =
                    r.mi_bits[s][k] * scale;
            }
        }
    });
    for (int w : warnings) {
        res.condition_warnings += w;
    }

    res.user_mean.assign(k_users, std::vector<double>(n_snr, 0.0));
    res.user_std_error = res.user_mean;
    std::vector<double> column(static_cast<std::size_t>(cfg.draws));
    std::vector<double> sums(static_cast<std::size_t>(cfg.draws));
    for (std::size_t s = 0; s < n_snr; ++s) {
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t k = 0; k < k_users; ++k) {
            for (int d = 0; d < cfg.draws; ++d) {
                const double v = res.sample(d, static_cast<int>(s), static_cast<int>(k));
                column[static_cast<std::size_t>(d)] = v;
                sums[static_cast<std::size_t>(d)] += v;
            }
            const SampleStats st = sample_stats(column);
            res.user_mean[k][s] = st.mean;
            res.user_std_error[k][s] = st.std_error;
        }
        const SampleStats st = sample_stats(sums);
        res.sum_mean.push_back(st.mean);
        res.sum_std_error.push_back(st.std_error);
        for (double& v : sums) {
            v -= res.zero_delay_sum[s];
        }
        res.zero_delay_diff_std_error.push_back(sample_stats(sums).std_error);
    }

    if (cfg.with_bounds) {
        res.lower.assign(k_users, std::vector<double>(n_snr, 0.0));
        res.upper = res.lower;
        for (std::size_t s = 0; s < n_snr; ++s) {
            const double power = profile_power(cfg.gains, db_to_linear(cfg.snr_db[s]));
            std::vector<UserLink> users;
            for (double g : cfg.gains) {
                users.push_back({std::complex<double>(std::sqrt(g), 0.0), 0.0,
                                 power * z.symbol_period(p)});
            }
            const Scenario sc(users, n, 1.0, z, p, DecodeOrder::as_given);
            double lo = 0.0;
            double up = 0.0;
            for (std::size_t k = 0; k < k_users; ++k) {
                const BoundPair b = rate_bounds(sc, k, cfg.quad_points);
                res.lower[k][s] = b.lower;
                res.upper[k][s] = b.upper;
                lo += b.lower;
                up += b.upper;
            }
            res.lower_sum.push_back(lo);
            res.upper_sum.push_back(up);
        }
    }
    return res;
}

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::noma:
            return "noma";
        case Scheme::anoma:
            return "anoma";
        case Scheme::aftn_noma:
            return "aftn_noma";
    }
    return "unknown";
}

const SchemeSamples& ErgodicResult::scheme(Scheme s) const {
    switch (s) {
        case Scheme::noma:
            return noma;
        case Scheme::anoma:
            return anoma;
        case Scheme::aftn_noma:
            return aftn;
    }
    throw std::invalid_argument("unknown scheme");
}

ErgodicResult ergodic_experiment(const ErgodicConfig& cfg) {
    cfg.cell.validate();
    check_draws(cfg.trials, "trials");
    const PulseParams p(cfg.beta, cfg.period);
    const FtnConfig z(cfg.zeta);
    const FtnConfig nyquist(1.0);
    const int n = cfg.n_symbols;
    const int k_users = cfg.cell.n_users;

    ErgodicResult res;
    res.power = calibrate_power(cfg.cell);
    const double n0 = cfg.cell.noise_psd();

    const auto table = make_table(p, n, cfg.cell.max_delay, cfg.quad_points);
    const SicRateEngine ftn_engine(z, table, n);
    const SicRateEngine nyq_engine(nyquist, table, n);
    const double ftn_scale = normalizer(z, p, n);
    const double nyq_scale = normalizer(nyquist, p, n);

    for (SchemeSamples* s : {&res.noma, &res.anoma, &res.aftn}) {
        s->sum.assign(static_cast<std::size_t>(cfg.trials), 0.0);
        s->per_user.assign(static_cast<std::size_t>(cfg.trials), {});
    }
    std::vector<int> warnings(static_cast<std::size_t>(cfg.trials), 0);
    std::vector<int> resampled(static_cast<std::size_t>(cfg.trials), 0);

    parallel_for(cfg.trials, cfg.threads, [&](int t) {
        const auto ti = static_cast<std::size_t>(t);
        const TrialDraw draw = draw_trial(cfg.cell, cfg.seed, ti);
        resampled[ti] = draw.resampled;
        // SIC order: strongest first, delays travel with their users.
        std::vector<int> order(static_cast<std::size_t>(k_users));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return std::norm(draw.channels[static_cast<std::size_t>(a)]) >
                   std::norm(draw.channels[static_cast<std::size_t>(b)]);
        });
        SicRateEngine::Profile ftn_prof;
        SicRateEngine::Profile nyq_prof;
        ftn_prof.noise_psd = n0;
        nyq_prof.noise_psd = n0;
        std::vector<double> delays;
        for (int idx : order) {
            const double g = std::norm(draw.channels[static_cast<std::size_t>(idx)]);
            ftn_prof.weights.push_back(g * res.power.per_user * z.symbol_period(p));
            nyq_prof.weights.push_back(g * res.power.per_user * nyquist.symbol_period(p));
            delays.push_back(draw.delays[static_cast<std::size_t>(idx)]);
        }
        const std::vector<double> zeros(static_cast<std::size_t>(k_users), 0.0);
        const SicRateEngine::Result r_noma = nyq_engine.evaluate(zeros, std::span(&nyq_prof, 1));
        const SicRateEngine::Result r_anoma = nyq_engine.evaluate(delays, std::span(&nyq_prof, 1));
        const SicRateEngine::Result r_aftn = ftn_engine.evaluate(delays, std::span(&ftn_prof, 1));
        warnings[ti] = r_noma.condition_warnings + r_anoma.condition_warnings +
                       r_aftn.condition_warnings;
        auto store = [&](SchemeSamples& s, const SicRateEngine::Result& r, double scale) {
            std::vector<double> rates;
            double sum = 0.0;
            for (double mi : r.mi_bits[0]) {
                rates.push_back(mi * scale);
                sum += mi * scale;
            }
            s.sum[ti] = sum;
            s.per_user[ti] = std::move(rates);
        };
        store(res.noma, r_noma, nyq_scale);
        store(res.anoma, r_anoma, nyq_scale);
        store(res.aftn, r_aftn, ftn_scale);
    });
    for (std::size_t t = 0; t < warnings.size(); ++t) {
        res.condition_warnings += warnings[t];
        res.resampled += resampled[t];
    }
    return res;
}

std::vector<double> ccdf(std::span<const double> samples, std::span<const double> grid) {
    if (samples.empty()) {
        throw std::invalid_argument("CCDF needs at least one sample");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> out;
    out.reserve(grid.size());
    for (double x : grid) {
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x);
        out.push_back(static_cast<double>(above) / static_cast<double>(sorted.size()));
    }
    return out;
}

std::vector<RateRegion> rate_region_two_user(const RegionConfig& cfg) {
    check_draws(cfg.draws, "draws");
    if (!(cfg.gain1 > 0.0) || !(cfg.gain2 > 0.0)) {
        throw std::invalid_argument("rate region needs positive channel gains");
    }
    const PulseParams p(cfg.beta, cfg.period);
    const FtnConfig z(cfg.zeta);
    const FtnConfig nyquist(1.0);
    const int n = cfg.n_symbols;
    const auto table = make_table(p, n, cfg.max_delay, cfg.quad_points);
    const SicRateEngine ftn_engine(z, table, n);
    const SicRateEngine nyq_engine(nyquist, table, n);
    const double snr1 = db_to_linear(cfg.snr1_db);
    const double snr2 = db_to_linear(cfg.snr2_db);

    // Weight |h_k|^2 E_s = (|h_k|^2 P_k / N0) zeta T with N0 = 1.
    auto profiles = [&](const FtnConfig& zz) {
        const double ts = zz.symbol_period(p);
        std::vector<SicRateEngine::Profile> pr(2);
        pr[0] = {{snr1 * ts, snr2 * ts}, 1.0};  // user 1 decoded first
        pr[1] = {{snr2 * ts, snr1 * ts}, 1.0};  // user 2 decoded first
        return pr;
    };
    const auto ftn_prof = profiles(z);
    const auto nyq_prof = profiles(nyquist);

    struct Corners {
        double r1_first = 0, r2_clean = 0, r2_first = 0, r1_clean = 0;
    };
    auto corners = [&](const SicRateEngine& e, const std::vector<SicRateEngine::Profile>& prof,
                       double d1, double d2) {
        const double scale = normalizer(e.ftn(), p, n);
        const double fwd[2] = {d1, d2};
        const double rev[2] = {d2, d1};
        const auto a = e.evaluate(fwd, std::span(&prof[0], 1));
        const auto b = e.evaluate(rev, std::span(&prof[1], 1));
        return Corners{a.mi_bits[0][0] * scale, a.mi_bits[0][1] * scale, b.mi_bits[0][0] * scale,
                       b.mi_bits[0][1] * scale};
    };

    const std::size_t draws = static_cast<std::size_t>(cfg.draws);
    std::vector<Corners> anoma(draws);
    std::vector<Corners> aftn(draws);
    parallel_for(cfg.draws, cfg.threads, [&](int d) {
        Rng rng = trial_rng(cfg.seed, static_cast<std::uint64_t>(d));
        const std::vector<double> delays = sample_delays(2, cfg.max_delay, rng);
        anoma[static_cast<std::size_t>(d)] = corners(nyq_engine, nyq_prof, delays[0], delays[1]);
        aftn[static_cast<std::size_t>(d)] = corners(ftn_engine, ftn_prof, delays[0], delays[1]);
    });
    const Corners noma = corners(nyq_engine, nyq_prof, 0.0, 0.0);

    auto region = [&](Scheme s, const std::vector<Corners>& c) {
        std::vector<double> cols[4];
        for (const Corners& x : c) {
            cols[0].push_back(x.r1_first);
            cols[1].push_back(x.r2_clean);
            cols[2].push_back(x.r2_first);
            cols[3].push_back(x.r1_clean);
        }
        double m[4];
        double se = 0.0;
        for (int i = 0; i < 4; ++i) {
            const SampleStats st = sample_stats(cols[i]);
            m[i] = st.mean;
            se = std::max(se, st.std_error);
        }
        RateRegion r;
        r.scheme = s;
        r.corner_std_error = se;
        r.polyline = {{0.0, m[1]}, {m[0], m[1]}, {m[3], m[2]}, {m[3], 0.0}};
        return r;
    };
    std::vector<RateRegion> out;
    out.push_back(region(Scheme::noma, {noma}));
    out.push_back(region(Scheme::anoma, anoma));
    out.push_back(region(Scheme::aftn_noma, aftn));
    return out;
}

double region_radius(const RateRegion& region, double theta) {
    const double dx = std::cos(theta);
    const double dy = std::sin(theta);
    double best = 0.0;
    const auto& pts = region.polyline;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double ex = pts[i + 1].r1 - pts[i].r1;
        const double ey = pts[i + 1].r2 - pts[i].r2;
        // Solve t (dx, dy) = P_i + s (ex, ey).
        const double det = dx * (-ey) - dy * (-ex);
        if (std::abs(det) < 1e-300) {
            continue;
        }
        const double t = (pts[i].r1 * (-ey) - pts[i].r2 * (-ex)) / det;
        const double s = (dx * pts[i].r2 - dy * pts[i].r1) / det;
        if (s >= -1e-12 && s <= 1.0 + 1e-12 && t > best) {
            best = t;
        }
    }
    return best;
}

std::vector<TradeoffRow> tradeoff_sweep(const TradeoffConfig& cfg) {
    const PulseParams p(cfg.beta, cfg.period);
    const double lo = 1.0 / (1.0 + cfg.beta);
    if (cfg.user < 0 || static_cast<std::size_t>(cfg.user) >= cfg.gains.size()) {
        throw std::invalid_argument("tradeoff user index out of range");
    }
    const double power = profile_power(cfg.gains, db_to_linear(cfg.snr_db));
    std::vector<TradeoffRow> rows;
    for (double zeta : cfg.zeta) {
        if (zeta < lo - 1e-12 || zeta > 1.0) {
            throw std::invalid_argument("tradeoff zeta " + std::to_string(zeta) +
                                        " lies outside [1/(1+beta), 1]");
        }
        const FtnConfig z(zeta);
        std::vector<UserLink> users;
        for (double g : cfg.gains) {
            users.push_back({std::complex<double>(std::sqrt(g), 0.0), 0.0,
                             power * z.symbol_period(p)});
        }
        const Scenario sc(users, 1, 1.0, z, p, DecodeOrder::as_given);
        TradeoffRow row;
        row.zeta = zeta;
        row.sinr_gain = sinr_gain(sc, static_cast<std::size_t>(cfg.user),
                                  cfg.ratio_of_integrals ? SinrGainForm::ratio_of_integrals
                                                         : SinrGainForm::pointwise,
                                  cfg.quad_points);
        row.dof_gain = dof_gain(z, p);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace ftnoma
