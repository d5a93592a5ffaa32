#include "ftnoma/exact_rates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ftnoma {

namespace {

constexpr double kLn2 = std::numbers::ln2;

bool all_equal(std::span<const double> v) {
    return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

double max_asymmetry(const Eigen::MatrixXd& m) {
    return (m - m.transpose()).cwiseAbs().maxCoeff();
}

// logdet of an SPD matrix bounded below by N0 I. Cholesky first; the
// eigen-floored route only runs if the factorisation breaks down.
double logdet_bounded(const Eigen::MatrixXd& m, int& warnings) {
    const Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) {
        const auto diag = llt.matrixLLT().diagonal();
        if ((diag.array() > 0.0).all()) {
            return 2.0 * diag.array().log().sum();
        }
    }
    ++warnings;
    return logdet_spd(m).value;
}

}  // namespace

std::vector<UserLink> sic_sort(std::vector<UserLink> users) {
    std::stable_sort(users.begin(), users.end(),
                     [](const UserLink& a, const UserLink& b) { return a.gain() > b.gain(); });
    return users;
}

Scenario::Scenario(std::vector<UserLink> users, int n_symbols, double noise_psd, FtnConfig ftn,
                   PulseParams pulse, DecodeOrder order)
    : users_(std::move(users)), n_symbols_(n_symbols), noise_psd_(noise_psd), ftn_(ftn), pulse_(pulse) {
    if (users_.empty()) {
        throw std::invalid_argument("scenario needs at least one user");
    }
    if (n_symbols_ < 1) {
        throw std::invalid_argument("block length N must be >= 1");
    }
    if (!(noise_psd_ > 0.0) || !std::isfinite(noise_psd_)) {
        throw std::invalid_argument("noise PSD N0 must be positive and finite");
    }
    for (const UserLink& u : users_) {
        if (!(u.delay >= 0.0) || !std::isfinite(u.delay)) {
            throw std::invalid_argument("link delays must be finite and non-negative");
        }
        if (!(u.symbol_energy >= 0.0) || !std::isfinite(u.symbol_energy)) {
            throw std::invalid_argument("symbol energies must be finite and non-negative");
        }
    }
    if (order == DecodeOrder::sic) {
        users_ = sic_sort(std::move(users_));
    }
}

Scenario Scenario::synchronous() const {
    std::vector<UserLink> users = users_;
    for (UserLink& u : users) {
        u.delay = 0.0;
    }
    return Scenario(std::move(users), n_symbols_, noise_psd_, ftn_, pulse_, DecodeOrder::as_given);
}

Scenario Scenario::with_ftn(FtnConfig ftn) const {
    return Scenario(users_, n_symbols_, noise_psd_, ftn, pulse_, DecodeOrder::as_given);
}

LogDet logdet_spd(const Eigen::MatrixXd& m, double relative_floor) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw std::invalid_argument("logdet_spd needs a non-empty square matrix");
    }
    const double scale = m.cwiseAbs().maxCoeff();
    if (max_asymmetry(m) > 1e-10 * std::max(scale, 1e-300)) {
        throw std::invalid_argument("logdet_spd needs a symmetric matrix");
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("symmetric eigendecomposition failed in logdet_spd");
    }
    const Eigen::VectorXd& ev = solver.eigenvalues();
    const double lmax = ev.maxCoeff();
    if (!(lmax > 0.0)) {
        std::ostringstream msg;
        msg << "matrix is not positive definite: largest eigenvalue " << lmax;
        throw NumericalError(msg.str());
    }
    const double floor = relative_floor * lmax;
    LogDet out;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        double v = ev(i);
        if (v < floor) {
            v = floor;
            ++out.floored;
        }
        out.value += std::log(v);
    }
    return out;
}

SicRateEngine::SicRateEngine(const FtnConfig& z, std::shared_ptr<const CorrelationSource> corr,
                             int n_symbols, double eigen_floor)
    : ftn_(z), corr_(std::move(corr)), n_symbols_(n_symbols) {
    if (!corr_) {
        throw std::invalid_argument("rate engine needs a correlation source");
    }
    if (n_symbols < 1) {
        throw std::invalid_argument("block length N must be >= 1");
    }
    const ToeplitzMatrix gram = mui_matrix(0.0, ftn_, *corr_, n_symbols_);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram.dense());
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition of the self-Gram matrix failed");
    }
    const Eigen::VectorXd& ev = solver.eigenvalues();
    const double floor = eigen_floor * ev.maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > floor) {
            keep.push_back(i);
        }
    }
    if (keep.empty()) {
        throw NumericalError("self-Gram matrix has no eigenvalue above the floor");
    }
    const auto r = static_cast<Eigen::Index>(keep.size());
    basis_.resize(n_symbols_, r);
    lambda_.resize(r);
    for (Eigen::Index c = 0; c < r; ++c) {
        basis_.col(c) = solver.eigenvectors().col(keep[static_cast<std::size_t>(c)]);
        lambda_(c) = ev(keep[static_cast<std::size_t>(c)]);
    }
    inv_sqrt_ = lambda_.array().rsqrt();
}

SicRateEngine::Result SicRateEngine::evaluate(std::span<const double> delays,
                                              std::span<const Profile> profiles) const {
    const std::size_t k_users = delays.size();
    for (const Profile& pr : profiles) {
        if (pr.weights.size() != k_users) {
            throw std::invalid_argument("profile weight count does not match the number of users");
        }
        if (!(pr.noise_psd > 0.0)) {
            throw std::invalid_argument("profile noise PSD must be positive");
        }
    }
    Result out;
    out.mi_bits.assign(profiles.size(), std::vector<double>(k_users, 0.0));
    const int dropped = dropped_dimensions();
    const Eigen::Index r = lambda_.size();

    if (all_equal(delays)) {
        // Every G~_{l,k} equals G~_{k,k}, so all projected covariances are diagonal.
        for (std::size_t s = 0; s < profiles.size(); ++s) {
            const Profile& pr = profiles[s];
            double tail = 0.0;  // sum of weights of users decoded after k
            for (std::size_t k = k_users; k-- > 0;) {
                double nats = 0.0;
                for (Eigen::Index i = 0; i < r; ++i) {
                    nats += std::log1p(pr.weights[k] * lambda_(i) /
                                       (pr.noise_psd + tail * lambda_(i)));
                }
                out.mi_bits[s][k] = 0.5 * nats / kLn2;
                tail += pr.weights[k];
            }
        }
        if (dropped > 0) {
            out.condition_warnings += static_cast<int>(k_users);
        }
        return out;
    }

    const int n = n_symbols_;
    const Eigen::MatrixXd projector = inv_sqrt_.asDiagonal() * basis_.transpose();  // r x N
    std::vector<Eigen::MatrixXd> excl(profiles.size());
    Eigen::MatrixXd b(r, n);
    Eigen::MatrixXd c(r, r);
    for (std::size_t k = 0; k < k_users; ++k) {
        for (std::size_t s = 0; s < profiles.size(); ++s) {
            excl[s] = Eigen::MatrixXd::Identity(r, r) * profiles[s].noise_psd;
        }
        for (std::size_t l = k + 1; l < k_users; ++l) {
            const double dtau = delays[l] - delays[k];
            if (dtau == 0.0) {
                c = lambda_.asDiagonal();
            } else {
                const Eigen::MatrixXd g = mui_matrix(dtau, ftn_, *corr_, n).dense();
                b.noalias() = projector * g;
                c.setZero();
                c.selfadjointView<Eigen::Lower>().rankUpdate(b);
                c.triangularView<Eigen::StrictlyUpper>() = c.transpose();
            }
            for (std::size_t s = 0; s < profiles.size(); ++s) {
                excl[s].noalias() += profiles[s].weights[l] * c;
            }
        }
        for (std::size_t s = 0; s < profiles.size(); ++s) {
            Eigen::MatrixXd incl = excl[s];
            incl.diagonal() += profiles[s].weights[k] * lambda_;
            int warnings = 0;
            const double ld_incl = logdet_bounded(incl, warnings);
            const double ld_excl = logdet_bounded(excl[s], warnings);
            out.condition_warnings += warnings;
            out.mi_bits[s][k] = std::max(0.0, 0.5 * (ld_incl - ld_excl) / kLn2);
        }
        if (dropped > 0) {
            ++out.condition_warnings;
        }
    }
    return out;
}

SicRateEngine::Profile scenario_profile(const Scenario& s) {
    SicRateEngine::Profile pr;
    pr.noise_psd = s.noise_psd();
    pr.weights.reserve(s.n_users());
    for (const UserLink& u : s.users()) {
        pr.weights.push_back(u.gain() * u.symbol_energy);
    }
    return pr;
}

std::vector<double> scenario_delays(const Scenario& s) {
    std::vector<double> d;
    d.reserve(s.n_users());
    for (const UserLink& u : s.users()) {
        d.push_back(u.delay);
    }
    return d;
}

namespace {

SicRateEngine::Result run_engine(const Scenario& s, const RateOptions& opts) {
    auto kernel = std::make_shared<const CorrelationKernel>(s.pulse(), opts.quad_points);
    const SicRateEngine engine(s.ftn(), kernel, s.n_symbols(), opts.eigen_floor);
    const std::vector<double> delays = scenario_delays(s);
    const SicRateEngine::Profile profile = scenario_profile(s);
    return engine.evaluate(delays, std::span(&profile, 1));
}

void check_user(const Scenario& s, std::size_t k) {
    if (k >= s.n_users()) {
        throw std::out_of_range("user index " + std::to_string(k) + " out of range");
    }
}

}  // namespace

double conditional_mi(const Scenario& s, std::size_t k, const RateOptions& opts) {
    check_user(s, k);
    return run_engine(s, opts).mi_bits[0][k];
}

double conditional_mi_direct(const Scenario& s, std::size_t k, const RateOptions& opts) {
    check_user(s, k);
    const CorrelationKernel kernel(s.pulse(), opts.quad_points);
    const int n = s.n_symbols();
    const auto& users = s.users();
    const Eigen::MatrixXd gkk = mui_matrix(0.0, s.ftn(), kernel, n).dense();
    Eigen::MatrixXd sigma_next = s.noise_psd() * gkk;
    for (std::size_t l = k + 1; l < users.size(); ++l) {
        const Eigen::MatrixXd g =
            mui_matrix(users[l].delay - users[k].delay, s.ftn(), kernel, n).dense();
        sigma_next.noalias() += users[l].gain() * users[l].symbol_energy * g * g.transpose();
    }
    Eigen::MatrixXd sigma = sigma_next;
    sigma.noalias() += users[k].gain() * users[k].symbol_energy * gkk * gkk.transpose();
    // Symmetrise away the rounding in the products before the symmetric solver.
    sigma = 0.5 * (sigma + sigma.transpose()).eval();
    sigma_next = 0.5 * (sigma_next + sigma_next.transpose()).eval();
    const LogDet a = logdet_spd(sigma, opts.eigen_floor);
    const LogDet b = logdet_spd(sigma_next, opts.eigen_floor);
    return std::max(0.0, 0.5 * (a.value - b.value) / kLn2);
}

double normalize_rate(double mi_bits, const Scenario& s) {
    return mi_bits / (s.n_symbols() * s.ftn().symbol_period(s.pulse()) * s.pulse().bandwidth());
}

double normalized_rate(const Scenario& s, std::size_t k, const RateOptions& opts) {
    return normalize_rate(conditional_mi(s, k, opts), s);
}

RateReport evaluate_rates(const Scenario& s, const RateOptions& opts) {
    const SicRateEngine::Result res = run_engine(s, opts);
    RateReport report;
    report.condition_warnings = res.condition_warnings;
    for (double mi : res.mi_bits[0]) {
        report.per_user_bits_per_use.push_back(mi / s.n_symbols());
        const double norm = normalize_rate(mi, s);
        report.per_user_normalized.push_back(norm);
        report.sum_normalized += norm;
    }
    return report;
}

double sum_rate(const Scenario& s, const RateOptions& opts) {
    return evaluate_rates(s, opts).sum_normalized;
}

}  // namespace ftnoma
