#pragma once

#include "modfoot/bbob.hpp"
#include "modfoot/quasirandom.hpp"
#include "modfoot/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace modfoot::cma {

enum class Mirrored { off, mirrored, pairwise };
enum class WeightsOption { standard, equal };
enum class LocalRestart { off, ipop, bipop };

std::string to_string(Mirrored v);
std::string to_string(WeightsOption v);
std::string to_string(LocalRestart v);

/// One variant of the modular CMA-ES: five independent module switches.
struct ModularConfig {
    std::string name;
    bool elitist = false;
    Mirrored mirrored = Mirrored::off;
    qmc::SequenceKind base_sampler = qmc::SequenceKind::gaussian;
    WeightsOption weights_option = WeightsOption::standard;
    LocalRestart local_restart = LocalRestart::off;
};

/// The six studied variants, in table order: Default, Elitism, Mirrored
/// sampling, Local restart, Best on average, Worst on average.
const std::vector<ModularConfig>& presets();
/// Throws InvalidArgument for unknown names.
const ModularConfig& preset(std::string_view name);

struct RunResult {
    std::string config_name;
    int fid = 0;
    int iid = 0;
    int dim = 0;
    std::uint64_t seed = 0;
    double best_f = 0.0;
    double precision = 0.0;  // best_f - f_opt, clamped at 0
    long evals_used = 0;
    int restarts = 0;
};

/// Learning rates of the standard tutorial parameterisation.
struct LearningRates {
    double mueff = 0.0;
    double c_sigma = 0.0;
    double d_sigma = 0.0;
    double c_c = 0.0;
    double c_1 = 0.0;
    double c_mu = 0.0;
    double chi_n = 0.0;
};

struct CmaState {
    Eigen::VectorXd mean;
    double sigma = 1.0;
    Eigen::MatrixXd C;
    Eigen::MatrixXd B;   // eigenvectors of C (columns)
    Eigen::VectorXd D;   // square roots of the eigenvalues of C
    Eigen::MatrixXd inv_sqrt_C;
    Eigen::VectorXd p_sigma;
    Eigen::VectorXd p_c;
    long generation = 0;
    long last_eigen_update = 0;
    int lambda = 0;
    int mu = 0;
    Eigen::VectorXd weights;
    LearningRates rates;

    int dim() const { return static_cast<int>(mean.size()); }
};

struct Candidate {
    Eigen::VectorXd x;
    Eigen::VectorXd deviate;  // raw N(0, I) draw before scaling by sigma B D
    double f = 0.0;
    int pair = -1;            // mirrored pair id, -1 when unpaired
};

/// Positive recombination weights summing to 1. Throws InvalidArgument unless 1 <= mu <= lambda.
Eigen::VectorXd recombination_weights(int mu, int lambda, WeightsOption option);

LearningRates learning_rates(int dim, const Eigen::VectorXd& weights);

int default_lambda(int dim);

CmaState initial_state(const Eigen::VectorXd& mean, double sigma, int lambda, WeightsOption option);

/// Draws lambda candidates x = m + sigma B D y. With mirroring the deviates
/// come in exact antipodal pairs; an odd lambda ends with one unpaired draw.
std::vector<Candidate> sample_candidates(const CmaState& state, const ModularConfig& config,
                                         qmc::PointStream& stream);

/// `ranked` must be sorted by ascending fitness. Pairwise mirroring only lets
/// the better member of each pair through; elitism pools the previous parents.
std::vector<Candidate> select_parents(const std::vector<Candidate>& ranked,
                                      const std::vector<Candidate>& previous_parents,
                                      const ModularConfig& config, int mu);

/// One generation of mean, evolution-path, covariance and step-size updates.
/// Returns nullopt (restart signal) on a non-finite state, sigma outside
/// [1e-12, 1e6], or a covariance that stays indefinite after repair.
std::optional<CmaState> cma_update(const CmaState& state, const std::vector<Candidate>& parents);

struct RestartDecision {
    bool restart = false;
    int lambda = 0;
    double sigma = 0.0;
};

/// Local restart bookkeeping for IPOP and BIPOP. `history` holds the best
/// fitness of each generation since the last (re)start.
class RestartPolicy {
public:
    RestartPolicy(LocalRestart kind, int dim, int lambda_default, double sigma0);

    static int stagnation_window(int dim, int lambda);
    static bool stagnated(const std::vector<double>& history, int dim, int lambda);
    static bool ill_conditioned(const CmaState& state);

    /// Attributes evaluations to the currently running regime.
    void charge(long evals);
    RestartDecision decide(const std::vector<double>& history, const CmaState& state, bool numerical_failure,
                           long budget_left, Rng& rng);

    int restarts() const { return restarts_; }
    long budget_large() const { return budget_large_; }
    long budget_small() const { return budget_small_; }

private:
    enum class Regime { initial, large, small };

    LocalRestart kind_;
    int dim_;
    int lambda_default_;
    double sigma0_;
    int restarts_ = 0;
    int large_runs_ = 0;
    int lambda_large_;
    long budget_large_ = 0;
    long budget_small_ = 0;
    Regime regime_ = Regime::initial;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Generation-stepped optimizer. run() below drives it to the budget; tests
/// step it manually to inspect module mechanics.
class ModularCmaes {
public:
    ModularCmaes(Objective objective, int dim, const ModularConfig& config, long budget, std::uint64_t stream_key);

    /// Runs one generation. Returns false once the budget is spent or the run
    /// stopped on a numerical failure without a restart module.
    bool step();

    const CmaState& state() const { return state_; }
    const std::vector<Candidate>& last_candidates() const { return candidates_; }
    const std::vector<Candidate>& parents() const { return parents_; }
    double best_f() const { return best_f_; }
    long evals() const { return evals_; }
    int restarts() const { return policy_.restarts(); }
    bool finished() const { return finished_; }
    /// Best-so-far value after each evaluation.
    const std::vector<double>& trace() const { return trace_; }
    void keep_trace(bool on) { keep_trace_ = on; }

private:
    void restart(int lambda, double sigma);

    Objective objective_;
    ModularConfig config_;
    long budget_;
    double sigma0_ = 2.0;
    Rng rng_;
    qmc::PointStream stream_;
    RestartPolicy policy_;
    CmaState state_;
    std::vector<Candidate> candidates_;
    std::vector<Candidate> parents_;
    std::vector<double> history_;
    std::vector<double> trace_;
    bool keep_trace_ = false;
    double best_f_;
    long evals_ = 0;
    bool finished_ = false;
};

/// Fixed-budget run on a BBOB instance. Budget defaults to 1500 * dim.
/// The random stream is keyed by (seed, fid, iid, dim) and not by the config
/// name, so configs with identical modules reproduce identical runs.
RunResult run(const bbob::ProblemInstance& instance, const ModularConfig& config, long budget,
              std::uint64_t seed);

inline long default_budget(int dim) { return 1500L * dim; }

}  // namespace modfoot::cma
