#include "ftnoma/cli_runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <system_error>

#include "CLI11.hpp"
#include "ftnoma/asymptotic_rates.hpp"
#include "ftnoma/exact_rates.hpp"
#include "ftnoma/pulse_spectra.hpp"
#include "ftnoma/scenario_mc.hpp"

namespace ftnoma {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string to_csv(const Dataset& d) {
    std::ostringstream os;
    bool first = true;
    if (!d.label_column.empty()) {
        os << d.label_column;
        first = false;
    }
    for (const std::string& h : d.header) {
        os << (first ? "" : ",") << h;
        first = false;
    }
    os << '\n';
    for (std::size_t r = 0; r < d.rows.size(); ++r) {
        first = true;
        if (!d.label_column.empty()) {
            os << d.row_labels.at(r);
            first = false;
        }
        for (double v : d.rows[r]) {
            os << (first ? "" : ",") << format_number(v);
            first = false;
        }
        os << '\n';
    }
    return os.str();
}

namespace {

std::string user_col(std::size_t k, const char* what) {
    return "user" + std::to_string(k + 1) + "_" + what;
}

Dataset spectrum_data(const ExperimentConfig& c) {
    const PulseParams p(c.beta, c.period);
    const FtnConfig z(c.zeta);
    Dataset d;
    d.header = {"f", "pulse", "folded", "twisted_folded", "interference_reducing"};
    const SpectralGrid pulse = sample_spectrum(SpectrumKind::pulse, z, p, c.spectrum_points);
    const SpectralGrid fo = sample_spectrum(SpectrumKind::folded, z, p, c.spectrum_points);
    const SpectralGrid tfo = sample_spectrum(SpectrumKind::twisted_folded, z, p, c.spectrum_points);
    const SpectralGrid rho =
        sample_spectrum(SpectrumKind::interference_reducing, z, p, c.spectrum_points);
    for (std::size_t i = 0; i < pulse.frequencies.size(); ++i) {
        d.rows.push_back({pulse.frequencies[i], pulse.values[i], fo.values[i], tfo.values[i],
                          rho.values[i]});
    }
    return d;
}

InstantaneousConfig instantaneous_from(const ExperimentConfig& c) {
    InstantaneousConfig ic;
    ic.gains = c.gains;
    ic.beta = c.beta;
    ic.period = c.period;
    ic.zeta = c.zeta;
    ic.n_symbols = c.n_symbols;
    ic.snr_db = c.snr_db;
    ic.draws = c.draws;
    ic.max_delay = c.max_delay;
    ic.quad_points = c.quad_points;
    ic.threads = c.threads;
    ic.seed = c.seed;
    return ic;
}

// N zeta T / (N zeta T + tau_max) when the delay overhead is charged.
double overhead_factor(const ExperimentConfig& c, double zeta) {
    if (!c.include_delay_overhead) {
        return 1.0;
    }
    const double frame = c.n_symbols * zeta * c.period;
    return frame / (frame + c.max_delay);
}

Dataset rate_exact_data(const ExperimentConfig& c) {
    const InstantaneousResult r = instantaneous_experiment(instantaneous_from(c));
    const double f = overhead_factor(c, c.zeta);
    Dataset d;
    d.header.push_back("snr_db");
    for (std::size_t k = 0; k < c.gains.size(); ++k) {
        d.header.push_back(user_col(k, "mean"));
        d.header.push_back(user_col(k, "se"));
        d.header.push_back(user_col(k, "lower"));
        d.header.push_back(user_col(k, "upper"));
    }
    for (const char* h : {"sum_mean", "sum_se", "sum_lower", "sum_upper", "zero_delay_sum",
                          "synchronous_sum"}) {
        d.header.push_back(h);
    }
    for (std::size_t s = 0; s < r.snr_db.size(); ++s) {
        std::vector<double> row{r.snr_db[s]};
        for (std::size_t k = 0; k < c.gains.size(); ++k) {
            row.push_back(f * r.user_mean[k][s]);
            row.push_back(f * r.user_std_error[k][s]);
            row.push_back(r.lower[k][s]);
            row.push_back(r.upper[k][s]);
        }
        row.push_back(f * r.sum_mean[s]);
        row.push_back(f * r.sum_std_error[s]);
        row.push_back(r.lower_sum[s]);
        row.push_back(r.upper_sum[s]);
        row.push_back(r.zero_delay_sum[s]);
        row.push_back(r.synchronous_sum[s]);
        d.rows.push_back(std::move(row));
    }
    d.condition_warnings = r.condition_warnings;
    d.notes["snr_convention"] = "sum_k |h_k|^2 P_k / N0 with N0 = 1, equal powers";
    d.notes["delay_overhead_factor"] = f;
    return d;
}

Dataset rate_bounds_data(const ExperimentConfig& c) {
    const PulseParams p(c.beta, c.period);
    const FtnConfig z(c.zeta);
    Dataset d;
    d.header.push_back("snr_db");
    for (std::size_t k = 0; k < c.gains.size(); ++k) {
        d.header.push_back(user_col(k, "lower"));
        d.header.push_back(user_col(k, "upper"));
    }
    d.header.insert(d.header.end(), {"sum_lower", "sum_upper", "synchronous_sum", "merged"});
    for (double snr : c.snr_db) {
        const double power = profile_power(c.gains, db_to_linear(snr));
        std::vector<UserLink> users;
        for (double g : c.gains) {
            users.push_back({std::complex<double>(std::sqrt(g), 0.0), 0.0,
                             power * z.symbol_period(p)});
        }
        const Scenario sc(users, c.n_symbols, 1.0, z, p, DecodeOrder::as_given);
        const LinkPowers lp = LinkPowers::from(sc);
        std::vector<double> row{snr};
        double lo = 0.0;
        double up = 0.0;
        double sync = 0.0;
        bool merged = false;
        for (std::size_t k = 0; k < c.gains.size(); ++k) {
            const BoundPair b = rate_bounds(sc, k, c.quad_points);
            row.push_back(b.lower);
            row.push_back(b.upper);
            lo += b.lower;
            up += b.upper;
            sync += synchronous_noma_rate(lp, k, p);
            merged = b.merged;
        }
        row.insert(row.end(), {lo, up, sync, merged ? 1.0 : 0.0});
        d.rows.push_back(std::move(row));
    }
    d.notes["snr_convention"] = "sum_k |h_k|^2 P_k / N0 with N0 = 1, equal powers";
    return d;
}

Dataset tradeoff_data(const ExperimentConfig& c) {
    TradeoffConfig tc;
    tc.beta = c.beta;
    tc.period = c.period;
    tc.zeta = c.tradeoff_zeta;
    tc.gains = c.gains;
    tc.snr_db = c.snr_db.front();
    tc.user = c.user;
    tc.ratio_of_integrals = c.sinr_gain_form == "ratio_of_integrals";
    tc.quad_points = c.quad_points;
    Dataset d;
    d.header = {"zeta", "sinr_gain", "dof_gain"};
    for (const TradeoffRow& r : tradeoff_sweep(tc)) {
        d.rows.push_back({r.zeta, r.sinr_gain, r.dof_gain});
    }
    d.notes["snr_db"] = tc.snr_db;
    d.notes["user"] = tc.user;
    return d;
}

Dataset rate_region_data(const ExperimentConfig& c) {
    RegionConfig rc;
    rc.gain1 = c.region_gains[0];
    rc.gain2 = c.region_gains[1];
    rc.snr1_db = c.region_snr_db[0];
    rc.snr2_db = c.region_snr_db[1];
    rc.beta = c.beta;
    rc.period = c.period;
    rc.zeta = c.zeta;
    rc.n_symbols = c.n_symbols;
    rc.draws = c.draws;
    rc.max_delay = c.max_delay;
    rc.quad_points = c.quad_points;
    rc.threads = c.threads;
    rc.seed = c.seed;
    Dataset d;
    d.label_column = "scheme";
    d.header = {"point", "r1", "r2", "corner_se"};
    for (const RateRegion& reg : rate_region_two_user(rc)) {
        const double f = reg.scheme == Scheme::noma ? 1.0
                         : overhead_factor(c, reg.scheme == Scheme::anoma ? 1.0 : c.zeta);
        for (std::size_t i = 0; i < reg.polyline.size(); ++i) {
            d.row_labels.push_back(scheme_name(reg.scheme));
            d.rows.push_back({static_cast<double>(i), f * reg.polyline[i].r1,
                              f * reg.polyline[i].r2, reg.corner_std_error});
        }
    }
    return d;
}

ErgodicConfig ergodic_from(const ExperimentConfig& c, int k, double snr, double d1) {
    ErgodicConfig ec;
    ec.cell.d0 = c.d0;
    ec.cell.d1 = d1;
    ec.cell.alpha = c.alpha;
    ec.cell.n_users = k;
    ec.cell.noise_psd_dbm = c.noise_psd_dbm;
    ec.cell.snr_sum_db = snr;
    ec.cell.max_delay = c.max_delay;
    ec.beta = c.beta;
    ec.period = c.period;
    ec.zeta = c.zeta;
    ec.n_symbols = c.n_symbols;
    ec.trials = c.trials;
    ec.quad_points = c.quad_points;
    ec.threads = c.threads;
    ec.seed = c.seed;
    return ec;
}

Dataset ergodic_data(const ExperimentConfig& c) {
    Dataset d;
    d.header = {"n_users", "snr_sum_db", "d1", "p_max_w"};
    for (Scheme s : kAllSchemes) {
        d.header.push_back(std::string(scheme_name(s)) + "_mean");
        d.header.push_back(std::string(scheme_name(s)) + "_se");
    }
    for (int k : c.n_users) {
        for (double snr : c.snr_sum_db) {
            for (double d1 : c.d1) {
                const ErgodicResult r = ergodic_experiment(ergodic_from(c, k, snr, d1));
                std::vector<double> row{static_cast<double>(k), snr, d1, r.power.p_max};
                for (Scheme s : kAllSchemes) {
                    const double f = s == Scheme::noma ? 1.0
                                     : overhead_factor(c, s == Scheme::anoma ? 1.0 : c.zeta);
                    const SampleStats st = sample_stats(r.scheme(s).sum);
                    row.push_back(f * st.mean);
                    row.push_back(f * st.std_error);
                }
                d.rows.push_back(std::move(row));
                d.condition_warnings += r.condition_warnings;
                d.resampled_trials += r.resampled;
            }
        }
    }
    d.notes["snr_convention"] = "SNR_sum = P_max * mean|h|^2 / N0, P = P_max / K";
    return d;
}

Dataset ccdf_data(const ExperimentConfig& c) {
    const int k = c.n_users.front();
    const ErgodicResult r =
        ergodic_experiment(ergodic_from(c, k, c.snr_sum_db.front(), c.d1.front()));
    const std::vector<std::pair<const char*, int>> ranks{
        {"strongest", 0}, {"moderate", k / 2}, {"weakest", k - 1}};
    std::vector<std::vector<double>> columns;
    Dataset d;
    d.header = {"rate"};
    double top = 0.0;
    for (const auto& [name, rank] : ranks) {
        for (Scheme s : kAllSchemes) {
            std::vector<double> col;
            for (const auto& per_user : r.scheme(s).per_user) {
                col.push_back(per_user.at(static_cast<std::size_t>(rank)));
            }
            top = std::max(top, *std::max_element(col.begin(), col.end()));
            columns.push_back(std::move(col));
            d.header.push_back(std::string(scheme_name(s)) + "_" + name);
        }
    }
    std::vector<double> grid;
    for (int i = 0; i < c.ccdf_points; ++i) {
        grid.push_back(top * i / (c.ccdf_points - 1));
    }
    std::vector<std::vector<double>> curves;
    for (const auto& col : columns) {
        curves.push_back(ccdf(col, grid));
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<double> row{grid[i]};
        for (const auto& cv : curves) {
            row.push_back(cv[i]);
        }
        d.rows.push_back(std::move(row));
    }
    d.condition_warnings = r.condition_warnings;
    d.resampled_trials = r.resampled;
    d.notes["ranks"] = {{"strongest", 0}, {"moderate", k / 2}, {"weakest", k - 1}};
    return d;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw fs::filesystem_error("cannot open for writing", path,
                                   std::make_error_code(std::errc::io_error));
    }
    os << text;
    os.close();
    if (!os) {
        throw fs::filesystem_error("write failed", path, std::make_error_code(std::errc::io_error));
    }
}

}  // namespace

Dataset compute(const ExperimentConfig& cfg) {
    validate(cfg);
    switch (cfg.experiment) {
        case Experiment::spectrum:
            return spectrum_data(cfg);
        case Experiment::rate_exact:
            return rate_exact_data(cfg);
        case Experiment::rate_bounds:
            return rate_bounds_data(cfg);
        case Experiment::tradeoff:
            return tradeoff_data(cfg);
        case Experiment::rate_region:
            return rate_region_data(cfg);
        case Experiment::ergodic:
            return ergodic_data(cfg);
        case Experiment::ccdf:
            return ccdf_data(cfg);
    }
    throw std::invalid_argument("unknown experiment");
}

RunOutcome run(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    RunOutcome out;
    out.data = compute(cfg);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json side;
    side["schema_version"] = kSidecarSchemaVersion;
    side["version"] = kVersion;
    side["experiment"] = experiment_name(cfg.experiment);
    side["seed"] = cfg.seed;
    side["config"] = to_json(cfg);
    json cols = json::array();
    if (!out.data.label_column.empty()) {
        cols.push_back(out.data.label_column);
    }
    for (const std::string& h : out.data.header) {
        cols.push_back(h);
    }
    side["columns"] = cols;
    side["rows"] = out.data.rows.size();
    side["condition_warnings"] = out.data.condition_warnings;
    side["resampled_trials"] = out.data.resampled_trials;
    side["units"] = {{"rates", "bits/s/Hz"}, {"dbm_to_watts", "P(W) = 10^((dBm - 30) / 10)"}};
    side["notes"] = out.data.notes;
    side["wall_time_seconds"] = wall;

    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    out.csv = dir / (cfg.output_name + ".csv");
    out.sidecar = dir / (cfg.output_name + ".json");
    const fs::path csv_tmp = dir / ("." + cfg.output_name + ".csv.tmp");
    const fs::path json_tmp = dir / ("." + cfg.output_name + ".json.tmp");
    std::error_code ignore;
    try {
        write_file(csv_tmp, to_csv(out.data));
        write_file(json_tmp, side.dump(2) + "\n");
        fs::rename(csv_tmp, out.csv);
        fs::rename(json_tmp, out.sidecar);
    } catch (...) {
        fs::remove(csv_tmp, ignore);
        fs::remove(json_tmp, ignore);
        fs::remove(out.csv, ignore);
        throw;
    }
    return out;
}

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Asynchronous FTN-NOMA rate experiments"};
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    int quad_points = 0;
    int threads = 0;
    app.add_option("--config", config_path, "JSON experiment configuration")->required();
    auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config)");
    auto* out_opt = app.add_option("--out", out_dir, "output directory");
    auto* quad_opt = app.add_option("--quad-points", quad_points, "spectral quadrature nodes");
    auto* threads_opt = app.add_option("--threads", threads, "worker threads, 0 = auto");
    app.set_version_flag("--version", kVersion);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        std::ifstream is(config_path, std::ios::binary);
        if (!is) {
            err << "error: cannot read config file '" << config_path << "'\n";
            return 2;
        }
        std::stringstream buf;
        buf << is.rdbuf();
        ExperimentConfig cfg = parse_config(buf.str());
        if (*seed_opt) {
            cfg.seed = seed;
        }
        if (*out_opt) {
            cfg.output_dir = out_dir;
        }
        if (*quad_opt) {
            cfg.quad_points = quad_points;
        }
        if (*threads_opt) {
            cfg.threads = threads;
        }
        validate(cfg);
        const RunOutcome r = run(cfg);
        out << r.csv.string() << '\n' << r.sidecar.string() << '\n';
        if (r.data.condition_warnings > 0) {
            err << "note: " << r.data.condition_warnings << " condition warnings\n";
        }
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "invalid argument: " << e.what() << '\n';
        return 2;
    } catch (const fs::filesystem_error& e) {
        err << "I/O error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace ftnoma
