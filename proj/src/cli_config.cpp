#include "ftnoma/cli_config.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace ftnoma {

using nlohmann::json;

const char* experiment_name(Experiment e) {
    switch (e) {
        case Experiment::spectrum:
            return "spectrum";
        case Experiment::rate_exact:
            return "rate-exact";
        case Experiment::rate_bounds:
            return "rate-bounds";
        case Experiment::tradeoff:
            return "tradeoff";
        case Experiment::rate_region:
            return "rate-region";
        case Experiment::ergodic:
            return "ergodic";
        case Experiment::ccdf:
            return "ccdf";
    }
    return "unknown";
}

namespace {

Experiment experiment_from(const std::string& name) {
    for (Experiment e : {Experiment::spectrum, Experiment::rate_exact, Experiment::rate_bounds,
                         Experiment::tradeoff, Experiment::rate_region, Experiment::ergodic,
                         Experiment::ccdf}) {
        if (name == experiment_name(e)) {
            return e;
        }
    }
    throw ConfigError("experiment", "unknown experiment '" + name + "'");
}

std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

// Walks one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class Section {
public:
    Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) {
            throw ConfigError(path_.empty() ? "<root>" : path_, "expected a JSON object");
        }
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return node_.contains(key);
    }

    std::string at(const std::string& key) const { return join(path_, key); }

    double number(const std::string& key, double fallback) {
        if (!has(key)) {
            return fallback;
        }
        const json& v = node_.at(key);
        if (!v.is_number()) {
            throw ConfigError(at(key), "expected a number");
        }
        return v.get<double>();
    }

    std::int64_t integer(const std::string& key, std::int64_t fallback) {
        if (!has(key)) {
            return fallback;
        }
        const json& v = node_.at(key);
        if (!v.is_number_integer()) {
            throw ConfigError(at(key), "expected an integer");
        }
        return v.get<std::int64_t>();
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) {
            return fallback;
        }
        const json& v = node_.at(key);
        if (!v.is_number_unsigned()) {
            throw ConfigError(at(key), "expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) {
            return fallback;
        }
        const json& v = node_.at(key);
        if (!v.is_boolean()) {
            throw ConfigError(at(key), "expected true or false");
        }
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        if (!has(key)) {
            return fallback;
        }
        const json& v = node_.at(key);
        if (!v.is_string()) {
            throw ConfigError(at(key), "expected a string");
        }
        return v.get<std::string>();
    }

    /// Accepts a single number or an array of numbers.
    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) {
        if (!has(key)) {
            return fallback;
        }
        const json& v = node_.at(key);
        if (v.is_number()) {
            return {v.get<double>()};
        }
        if (!v.is_array() || v.empty()) {
            throw ConfigError(at(key), "expected a number or a non-empty array of numbers");
        }
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) {
                throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a number");
            }
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    std::vector<int> integers(const std::string& key, const std::vector<int>& fallback) {
        if (!has(key)) {
            return fallback;
        }
        const json& v = node_.at(key);
        if (v.is_number_integer()) {
            return {v.get<int>()};
        }
        if (!v.is_array() || v.empty()) {
            throw ConfigError(at(key), "expected an integer or a non-empty array of integers");
        }
        std::vector<int> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number_integer()) {
                throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected an integer");
            }
            out.push_back(v[i].get<int>());
        }
        return out;
    }

    Section child(const std::string& key) {
        seen_.insert(key);
        static const json empty = json::object();
        return Section(node_.contains(key) ? node_.at(key) : empty, at(key));
    }

    void reject_unknown() const {
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            if (!seen_.count(it.key())) {
                throw ConfigError(at(it.key()), "unknown key");
            }
        }
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<double> default_snr_grid() {
    std::vector<double> g;
    for (int db = 0; db <= 30; ++db) {
        g.push_back(db);
    }
    return g;
}

void require(bool ok, const std::string& path, const std::string& what) {
    if (!ok) {
        throw ConfigError(path, what);
    }
}

bool finite_all(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            return false;
        }
    }
    return true;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
    }
    Section root(doc, "");
    ExperimentConfig c;
    c.experiment = experiment_from(root.string("experiment", "rate-exact"));
    c.seed = root.unsigned_integer("seed", c.seed);
    c.threads = static_cast<int>(root.integer("threads", c.threads));
    c.quad_points = static_cast<int>(root.integer("quad_points", c.quad_points));

    // Experiment-dependent defaults, resolved here so the sidecar shows them.
    const bool fig5 = c.experiment == Experiment::tradeoff;
    const bool fig4 = c.experiment == Experiment::rate_exact ||
                      c.experiment == Experiment::rate_bounds ||
                      c.experiment == Experiment::spectrum;
    c.beta = fig5 ? 0.5 : 0.3;
    c.zeta = fig4 ? 0.95 : 0.75;

    {
        Section out = root.child("output");
        c.output_dir = out.string("dir", c.output_dir);
        c.output_name = out.string("name", experiment_name(c.experiment));
        out.reject_unknown();
    }
    {
        Section pulse = root.child("pulse");
        c.beta = pulse.number("beta", c.beta);
        c.period = pulse.number("period", c.period);
        pulse.reject_unknown();
    }
    require(c.beta >= 0.0 && c.beta <= 1.0, "pulse.beta", "must lie in [0, 1]");
    require(c.period > 0.0 && std::isfinite(c.period), "pulse.period", "must be > 0");
    {
        Section ftn = root.child("ftn");
        c.zeta = ftn.number("zeta", c.zeta);
        ftn.reject_unknown();
    }
    {
        Section sc = root.child("scenario");
        c.gains = sc.numbers("gains", c.gains);
        c.n_symbols = static_cast<int>(sc.integer("n_symbols", c.n_symbols));
        c.max_delay = sc.number("max_delay", 2.0 * c.period);
        c.snr_db = sc.numbers("snr_db", default_snr_grid());
        c.draws = static_cast<int>(sc.integer("draws", c.draws));
        c.user = static_cast<int>(sc.integer("user", c.user));
        c.sinr_gain_form = sc.string("sinr_gain_form", c.sinr_gain_form);
        c.include_delay_overhead = sc.boolean("include_delay_overhead", c.include_delay_overhead);
        sc.reject_unknown();
    }
    {
        Section cell = root.child("cell");
        c.d0 = cell.number("d0", c.d0);
        c.d1 = cell.numbers("d1", c.d1);
        c.alpha = cell.number("alpha", c.alpha);
        c.n_users = cell.integers("n_users", c.n_users);
        c.noise_psd_dbm = cell.number("noise_psd_dbm", c.noise_psd_dbm);
        c.snr_sum_db = cell.numbers("snr_sum_db", c.snr_sum_db);
        c.trials = static_cast<int>(cell.integer("trials", c.trials));
        cell.reject_unknown();
    }
    {
        Section sp = root.child("spectrum");
        c.spectrum_points = static_cast<int>(sp.integer("points", c.spectrum_points));
        sp.reject_unknown();
    }
    {
        Section tr = root.child("tradeoff");
        const double lo = 1.0 / (1.0 + c.beta);
        std::vector<double> grid{1.0, 0.9, 0.8, lo};
        if (c.beta != 0.5) {
            grid = {1.0, 0.5 * (1.0 + lo), lo};
        }
        c.tradeoff_zeta = tr.numbers("zeta", grid);
        tr.reject_unknown();
    }
    {
        Section rg = root.child("region");
        c.region_gains = rg.numbers("gains", c.region_gains);
        c.region_snr_db = rg.numbers("snr_db", c.region_snr_db);
        rg.reject_unknown();
    }
    {
        Section cc = root.child("ccdf");
        c.ccdf_points = static_cast<int>(cc.integer("points", c.ccdf_points));
        cc.reject_unknown();
    }
    root.reject_unknown();
    validate(c);
    return c;
}

void validate(const ExperimentConfig& c) {
    require(c.threads >= 0, "threads", "must be >= 0");
    require(c.quad_points >= 16, "quad_points", "must be >= 16");
    require(!c.output_name.empty(), "output.name", "must not be empty");
    require(c.output_name.find('/') == std::string::npos, "output.name",
            "must be a plain file stem");
    require(c.beta >= 0.0 && c.beta <= 1.0, "pulse.beta", "must lie in [0, 1]");
    require(c.period > 0.0 && std::isfinite(c.period), "pulse.period", "must be > 0");
    require(c.zeta > 0.0 && c.zeta <= 1.0, "ftn.zeta", "must lie in (0, 1]");
    require(!c.gains.empty() && finite_all(c.gains), "scenario.gains", "must be finite");
    for (std::size_t i = 0; i < c.gains.size(); ++i) {
        require(c.gains[i] > 0.0, "scenario.gains[" + std::to_string(i) + "]", "must be > 0");
    }
    require(c.n_symbols >= 1 && c.n_symbols <= 4096, "scenario.n_symbols",
            "must lie in [1, 4096]");
    require(c.max_delay >= 0.0 && std::isfinite(c.max_delay), "scenario.max_delay",
            "must be >= 0");
    require(finite_all(c.snr_db), "scenario.snr_db", "must be finite");
    require(c.draws >= 1, "scenario.draws", "must be >= 1");
    require(c.user >= 0 && static_cast<std::size_t>(c.user) < c.gains.size(), "scenario.user",
            "must index a user in scenario.gains");
    require(c.sinr_gain_form == "pointwise" || c.sinr_gain_form == "ratio_of_integrals",
            "scenario.sinr_gain_form", "must be 'pointwise' or 'ratio_of_integrals'");
    require(c.d0 > 0.0, "cell.d0", "must be > 0");
    for (std::size_t i = 0; i < c.d1.size(); ++i) {
        require(c.d1[i] > c.d0, "cell.d1[" + std::to_string(i) + "]", "must exceed cell.d0");
    }
    require(c.alpha > 2.0 && std::isfinite(c.alpha), "cell.alpha", "must be > 2");
    for (std::size_t i = 0; i < c.n_users.size(); ++i) {
        require(c.n_users[i] >= 1, "cell.n_users[" + std::to_string(i) + "]", "must be >= 1");
    }
    require(std::isfinite(c.noise_psd_dbm), "cell.noise_psd_dbm", "must be finite");
    require(finite_all(c.snr_sum_db), "cell.snr_sum_db", "must be finite");
    require(c.trials >= 1, "cell.trials", "must be >= 1");
    require(c.spectrum_points >= 2, "spectrum.points", "must be >= 2");
    const double lo = 1.0 / (1.0 + c.beta);
    for (std::size_t i = 0; i < c.tradeoff_zeta.size(); ++i) {
        require(c.tradeoff_zeta[i] >= lo - 1e-12 && c.tradeoff_zeta[i] <= 1.0,
                "tradeoff.zeta[" + std::to_string(i) + "]", "must lie in [1/(1+beta), 1]");
    }
    require(c.region_gains.size() == 2, "region.gains", "needs exactly two entries");
    require(c.region_gains[0] > 0.0 && c.region_gains[1] > 0.0, "region.gains",
            "entries must be > 0");
    require(c.region_snr_db.size() == 2 && finite_all(c.region_snr_db), "region.snr_db",
            "needs exactly two finite entries");
    require(c.ccdf_points >= 2, "ccdf.points", "must be >= 2");
}

nlohmann::json to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = experiment_name(c.experiment);
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["quad_points"] = c.quad_points;
    j["output"] = {{"dir", c.output_dir}, {"name", c.output_name}};
    j["pulse"] = {{"beta", c.beta}, {"period", c.period}};
    j["ftn"] = {{"zeta", c.zeta}};
    j["scenario"] = {{"gains", c.gains},
                     {"n_symbols", c.n_symbols},
                     {"max_delay", c.max_delay},
                     {"snr_db", c.snr_db},
                     {"draws", c.draws},
                     {"user", c.user},
                     {"sinr_gain_form", c.sinr_gain_form},
                     {"include_delay_overhead", c.include_delay_overhead}};
    j["cell"] = {{"d0", c.d0},
                 {"d1", c.d1},
                 {"alpha", c.alpha},
                 {"n_users", c.n_users},
                 {"noise_psd_dbm", c.noise_psd_dbm},
                 {"snr_sum_db", c.snr_sum_db},
                 {"trials", c.trials}};
    j["spectrum"] = {{"points", c.spectrum_points}};
    j["tradeoff"] = {{"zeta", c.tradeoff_zeta}};
    j["region"] = {{"gains", c.region_gains}, {"snr_db", c.region_snr_db}};
    j["ccdf"] = {{"points", c.ccdf_points}};
    return j;
}

}  // namespace ftnoma
