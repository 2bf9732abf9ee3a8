#include "modfoot/modcma.hpp"

#include "modfoot/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace modfoot::cma {

namespace {

constexpr std::uint64_t kRunTag = 0xC3A0'0001ULL;
constexpr std::uint64_t kSamplerTag = 0xC3A0'0002ULL;
constexpr double kSigmaMin = 1e-12;
constexpr double kSigmaMax = 1e6;
constexpr double kInitLower = -4.0;
constexpr double kInitUpper = 4.0;

long eigen_update_gap(const CmaState& s) {
    const double gap = 1.0 / (10.0 * s.dim() * (s.rates.c_1 + s.rates.c_mu));
    return std::max(1L, static_cast<long>(std::ceil(gap)));
}

// Refreshes B, D and C^-1/2. Returns false when C cannot be made positive definite.
bool decompose(CmaState& s) {
    const int d = s.dim();
    s.C = 0.5 * (s.C + s.C.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.C);
    if (eig.info() != Eigen::Success) return false;
    if (eig.eigenvalues().minCoeff() <= 0.0) {
        s.C.diagonal().array() += 1e-14 * s.C.trace() / d;
        eig.compute(s.C);
        if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) return false;
    }
    s.B = eig.eigenvectors();
    s.D = eig.eigenvalues().cwiseSqrt();
    s.inv_sqrt_C = s.B * s.D.cwiseInverse().asDiagonal() * s.B.transpose();
    s.last_eigen_update = s.generation;
    return s.B.allFinite() && s.D.allFinite();
}

Eigen::VectorXd uniform_mean(int dim, Rng& rng) {
    Eigen::VectorXd m(dim);
    for (int i = 0; i < dim; ++i) m[i] = rng.uniform(kInitLower, kInitUpper);
    return m;
}

}  // namespace

std::string to_string(Mirrored v) {
    switch (v) {
    case Mirrored::off: return "off";
    case Mirrored::mirrored: return "mirrored";
    case Mirrored::pairwise: return "pairwise";
    }
    return "?";
}

std::string to_string(WeightsOption v) { return v == WeightsOption::equal ? "equal" : "default"; }

std::string to_string(LocalRestart v) {
    switch (v) {
    case LocalRestart::off: return "off";
    case LocalRestart::ipop: return "IPOP";
    case LocalRestart::bipop: return "BIPOP";
    }
    return "?";
}

const std::vector<ModularConfig>& presets() {
    using qmc::SequenceKind;
    static const std::vector<ModularConfig> table = {
        {"Default", false, Mirrored::off, SequenceKind::gaussian, WeightsOption::standard, LocalRestart::off},
        {"Elitism", true, Mirrored::off, SequenceKind::gaussian, WeightsOption::standard, LocalRestart::off},
        {"Mirrored sampling", false, Mirrored::mirrored, SequenceKind::gaussian, WeightsOption::standard,
         LocalRestart::off},
        {"Local restart", false, Mirrored::off, SequenceKind::gaussian, WeightsOption::standard, LocalRestart::ipop},
        {"Best on average", false, Mirrored::mirrored, SequenceKind::sobol, WeightsOption::standard,
         LocalRestart::bipop},
        {"Worst on average", false, Mirrored::pairwise, SequenceKind::halton, WeightsOption::equal,
         LocalRestart::off},
    };
    return table;
}

const ModularConfig& preset(std::string_view name) {
    for (const auto& c : presets())
        if (c.name == name) return c;
    throw InvalidArgument("unknown configuration preset '" + std::string(name) + "'");
}

Eigen::VectorXd recombination_weights(int mu, int lambda, WeightsOption option) {
    if (mu < 1 || mu > lambda)
        throw InvalidArgument("recombination_weights: need 1 <= mu <= lambda, got mu=" + std::to_string(mu) +
                              " lambda=" + std::to_string(lambda));
    Eigen::VectorXd w(mu);
    if (option == WeightsOption::equal) {
        w.setConstant(1.0 / mu);
        return w;
    }
    for (int i = 0; i < mu; ++i) w[i] = std::log(mu + 0.5) - std::log(i + 1.0);
    return w / w.sum();
}

LearningRates learning_rates(int dim, const Eigen::VectorXd& weights) {
    const double d = dim;
    LearningRates r;
    r.mueff = 1.0 / weights.squaredNorm();
    r.c_sigma = (r.mueff + 2.0) / (d + r.mueff + 5.0);
    r.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((r.mueff - 1.0) / (d + 1.0)) - 1.0) + r.c_sigma;
    r.c_c = (4.0 + r.mueff / d) / (d + 4.0 + 2.0 * r.mueff / d);
    r.c_1 = 2.0 / ((d + 1.3) * (d + 1.3) + r.mueff);
    r.c_mu = std::min(1.0 - r.c_1, 2.0 * (r.mueff - 2.0 + 1.0 / r.mueff) / ((d + 2.0) * (d + 2.0) + r.mueff));
    r.chi_n = std::sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d));
    return r;
}

int default_lambda(int dim) { return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dim)))); }

CmaState initial_state(const Eigen::VectorXd& mean, double sigma, int lambda, WeightsOption option) {
    const int d = static_cast<int>(mean.size());
    if (lambda < 2) throw InvalidArgument("population size must be >= 2");
    CmaState s;
    s.mean = mean;
    s.sigma = sigma;
    s.C = Eigen::MatrixXd::Identity(d, d);
    s.B = Eigen::MatrixXd::Identity(d, d);
    s.D = Eigen::VectorXd::Ones(d);
    s.inv_sqrt_C = Eigen::MatrixXd::Identity(d, d);
    s.p_sigma = Eigen::VectorXd::Zero(d);
    s.p_c = Eigen::VectorXd::Zero(d);
    s.lambda = lambda;
    s.mu = std::max(1, lambda / 2);
    s.weights = recombination_weights(s.mu, lambda, option);
    s.rates = learning_rates(d, s.weights);
    return s;
}

std::vector<Candidate> sample_candidates(const CmaState& state, const ModularConfig& config,
                                         qmc::PointStream& stream) {
    std::vector<Candidate> out;
    out.reserve(state.lambda);
    const Eigen::MatrixXd BD = state.B * state.D.asDiagonal();
    auto make = [&](Eigen::VectorXd y, int pair) {
        Candidate c;
        c.x = state.mean + state.sigma * (BD * y);
        c.deviate = std::move(y);
        c.pair = pair;
        out.push_back(std::move(c));
    };
    if (config.mirrored == Mirrored::off) {
        for (int k = 0; k < state.lambda; ++k) make(stream.next_gaussian(), -1);
        return out;
    }
    int pair = 0;
    while (static_cast<int>(out.size()) < state.lambda) {
        Eigen::VectorXd y = stream.next_gaussian();
        if (static_cast<int>(out.size()) + 1 == state.lambda) {
            make(std::move(y), -1);
            break;
        }
        Eigen::VectorXd neg = -y;
        make(std::move(y), pair);
        make(std::move(neg), pair);
        ++pair;
    }
    return out;
}

std::vector<Candidate> select_parents(const std::vector<Candidate>& ranked,
                                      const std::vector<Candidate>& previous_parents,
                                      const ModularConfig& config, int mu) {
    std::vector<Candidate> pool;
    pool.reserve(ranked.size() + previous_parents.size());
    if (config.mirrored == Mirrored::pairwise) {
        std::vector<int> seen;
        for (const auto& c : ranked) {
            if (c.pair >= 0) {
                if (std::find(seen.begin(), seen.end(), c.pair) != seen.end()) continue;
                seen.push_back(c.pair);
            }
            pool.push_back(c);
        }
    } else {
        pool = ranked;
    }
    if (config.elitist) {
        pool.insert(pool.end(), previous_parents.begin(), previous_parents.end());
        // Offspring precede old parents on ties.
        std::stable_sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) { return a.f < b.f; });
    }
    if (static_cast<int>(pool.size()) > mu) pool.resize(mu);
    return pool;
}

std::optional<CmaState> cma_update(const CmaState& state, const std::vector<Candidate>& parents) {
    CmaState s = state;
    const int d = s.dim();
    const auto& r = s.rates;
    const int n = std::min<int>(static_cast<int>(parents.size()), static_cast<int>(s.weights.size()));
    if (n < 1) return std::nullopt;
    Eigen::VectorXd w = s.weights.head(n);
    w /= w.sum();

    Eigen::MatrixXd Y(d, n);
    for (int i = 0; i < n; ++i) Y.col(i) = (parents[i].x - s.mean) / s.sigma;
    const Eigen::VectorXd yw = Y * w;

    s.mean = s.mean + s.sigma * yw;
    s.p_sigma = (1.0 - r.c_sigma) * s.p_sigma + std::sqrt(r.c_sigma * (2.0 - r.c_sigma) * r.mueff) * (s.inv_sqrt_C * yw);
    const double ps_norm = s.p_sigma.norm();
    const double denom = std::sqrt(1.0 - std::pow(1.0 - r.c_sigma, 2.0 * (s.generation + 1)));
    const bool hsig = ps_norm / denom < (1.4 + 2.0 / (d + 1.0)) * r.chi_n;
    s.p_c = (1.0 - r.c_c) * s.p_c;
    if (hsig) s.p_c += std::sqrt(r.c_c * (2.0 - r.c_c) * r.mueff) * yw;

    const double delta = hsig ? 0.0 : r.c_c * (2.0 - r.c_c);
    const Eigen::MatrixXd rank_mu = Y * w.asDiagonal() * Y.transpose();
    s.C = (1.0 - r.c_1 - r.c_mu) * s.C + r.c_1 * (s.p_c * s.p_c.transpose() + delta * s.C) + r.c_mu * rank_mu;
    s.C = 0.5 * (s.C + s.C.transpose());
    s.sigma *= std::exp((r.c_sigma / r.d_sigma) * (ps_norm / r.chi_n - 1.0));
    ++s.generation;

    if (!s.mean.allFinite() || !s.C.allFinite() || !std::isfinite(s.sigma)) return std::nullopt;
    if (s.sigma < kSigmaMin || s.sigma > kSigmaMax) return std::nullopt;
    if (s.generation - s.last_eigen_update >= eigen_update_gap(s)) {
        if (!decompose(s)) return std::nullopt;
    }
    return s;
}

RestartPolicy::RestartPolicy(LocalRestart kind, int dim, int lambda_default, double sigma0)
    : kind_(kind), dim_(dim), lambda_default_(lambda_default), sigma0_(sigma0), lambda_large_(lambda_default) {}

int RestartPolicy::stagnation_window(int dim, int lambda) {
    return 10 + static_cast<int>(std::ceil(30.0 * dim / lambda));
}

bool RestartPolicy::stagnated(const std::vector<double>& history, int dim, int lambda) {
    const auto w = static_cast<std::size_t>(stagnation_window(dim, lambda));
    if (history.size() < w) return false;
    const auto [lo, hi] = std::minmax_element(history.end() - static_cast<std::ptrdiff_t>(w), history.end());
    return *hi - *lo < 1e-12;
}

bool RestartPolicy::ill_conditioned(const CmaState& state) {
    const double dmax = state.D.maxCoeff();
    const double dmin = state.D.minCoeff();
    if (dmin <= 0.0) return true;
    const double cond = (dmax / dmin) * (dmax / dmin);
    return cond > 1e14 || state.sigma * dmax < 1e-12;
}

void RestartPolicy::charge(long evals) {
    if (regime_ == Regime::large) budget_large_ += evals;
    if (regime_ == Regime::small) budget_small_ += evals;
}

RestartDecision RestartPolicy::decide(const std::vector<double>& history, const CmaState& state,
                                      bool numerical_failure, long /*budget_left*/, Rng& rng) {
    if (kind_ == LocalRestart::off) return {};
    const bool trigger = numerical_failure || stagnated(history, dim_, state.lambda) || ill_conditioned(state);
    if (!trigger) return {};
    ++restarts_;
    RestartDecision out;
    out.restart = true;
    if (kind_ == LocalRestart::ipop) {
        out.lambda = lambda_default_ << restarts_;
        out.sigma = sigma0_;
        return out;
    }
    // BIPOP: run whichever regime has consumed less budget so far (large on ties).
    if (budget_large_ <= budget_small_) {
        ++large_runs_;
        lambda_large_ = lambda_default_ << large_runs_;
        regime_ = Regime::large;
        out.lambda = lambda_large_;
        out.sigma = sigma0_;
    } else {
        const double u = rng.uniform();
        const double ratio = 0.5 * lambda_large_ / static_cast<double>(lambda_default_);
        out.lambda = std::max(2, static_cast<int>(std::floor(lambda_default_ * std::pow(ratio, u * u))));
        out.sigma = sigma0_ * std::pow(10.0, -2.0 * u);
        regime_ = Regime::small;
    }
    return out;
}

ModularCmaes::ModularCmaes(Objective objective, int dim, const ModularConfig& config, long budget,
                           std::uint64_t stream_key)
    : objective_(std::move(objective)),
      config_(config),
      budget_(budget),
      rng_(stream_key),
      stream_(qmc::SequenceSpec{config.base_sampler, dim, combine_keys({kSamplerTag, stream_key}),
                                config.base_sampler == qmc::SequenceKind::sobol}),
      policy_(config.local_restart, dim, default_lambda(dim), sigma0_),
      best_f_(std::numeric_limits<double>::infinity()) {
    if (dim < 1) throw InvalidArgument("dimension must be >= 1");
    if (budget < default_lambda(dim)) throw InvalidArgument("budget must be at least one population");
    state_ = initial_state(uniform_mean(dim, rng_), sigma0_, default_lambda(dim), config_.weights_option);
}

void ModularCmaes::restart(int lambda, double sigma) {
    state_ = initial_state(uniform_mean(state_.dim(), rng_), sigma, lambda, config_.weights_option);
    history_.clear();
    parents_.clear();
}

bool ModularCmaes::step() {
    if (finished_) return false;
    candidates_ = sample_candidates(state_, config_, stream_);
    std::size_t evaluated = 0;
    for (auto& c : candidates_) {
        if (evals_ >= budget_) break;
        c.f = objective_(c.x);
        ++evals_;
        ++evaluated;
        if (c.f < best_f_) best_f_ = c.f;
        if (keep_trace_) trace_.push_back(best_f_);
    }
    policy_.charge(static_cast<long>(evaluated));
    if (evaluated < candidates_.size()) {
        candidates_.resize(evaluated);
        finished_ = true;
        return false;
    }

    std::vector<Candidate> ranked = candidates_;
    std::stable_sort(ranked.begin(), ranked.end(), [](const Candidate& a, const Candidate& b) { return a.f < b.f; });
    parents_ = select_parents(ranked, config_.elitist ? parents_ : std::vector<Candidate>{}, config_, state_.mu);
    history_.push_back(ranked.front().f);

    auto next = cma_update(state_, parents_);
    const bool failure = !next.has_value();
    if (next) state_ = std::move(*next);
    if (failure && config_.local_restart == LocalRestart::off) {
        finished_ = true;
        return false;
    }
    const auto decision = policy_.decide(history_, state_, failure, budget_ - evals_, rng_);
    if (decision.restart) restart(decision.lambda, decision.sigma);
    if (evals_ >= budget_) finished_ = true;
    return !finished_;
}

RunResult run(const bbob::ProblemInstance& instance, const ModularConfig& config, long budget, std::uint64_t seed) {
    const auto key = combine_keys({kRunTag, seed, static_cast<std::uint64_t>(instance.fid()),
                                   static_cast<std::uint64_t>(instance.iid()),
                                   static_cast<std::uint64_t>(instance.dim())});
    ModularCmaes es([&instance](const Eigen::VectorXd& x) { return bbob::evaluate(instance, x); }, instance.dim(),
                    config, budget, key);
    while (es.step()) {
    }
    RunResult r;
    r.config_name = config.name;
    r.fid = instance.fid();
    r.iid = instance.iid();
    r.dim = instance.dim();
    r.seed = seed;
    r.best_f = es.best_f();
    r.precision = std::max(0.0, es.best_f() - instance.f_opt());
    r.evals_used = es.evals();
    r.restarts = es.restarts();
    return r;
}

}  // namespace modfoot::cma
