#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "superstate/planning.hpp"
#include "superstate/superstate.hpp"

namespace superstate {

/// Linear features over (superstate, action) pairs. one_hot is implicit (an
/// orthonormal basis of dimension |B|*|A|); random_projection stores explicit
/// fixed-seed vectors rescaled so the largest norm is 1.
struct FeatureMap {
    enum class Kind { one_hot, random_projection };
    Kind kind = Kind::one_hot;
    int dim = 0;
    int n_superstates = 0;
    int n_actions = 0;
    std::vector<double> values;  // [B][a][dim], empty for one_hot

    double dot(int b, int a, std::span<const double> theta) const {
        if (kind == Kind::one_hot) return theta[static_cast<std::size_t>(b) * n_actions + a];
        const double* phi = &values[(static_cast<std::size_t>(b) * n_actions + a) * dim];
        double acc = 0.0;
        for (int k = 0; k < dim; ++k) acc += phi[k] * theta[k];
        return acc;
    }
    void axpy(int b, int a, double coef, std::vector<double>& theta) const {
        if (kind == Kind::one_hot) {
            theta[static_cast<std::size_t>(b) * n_actions + a] += coef;
            return;
        }
        const double* phi = &values[(static_cast<std::size_t>(b) * n_actions + a) * dim];
        for (int k = 0; k < dim; ++k) theta[k] += coef * phi[k];
    }
    std::vector<double> vec(int b, int a) const;
};

FeatureMap make_features(const SuperstateMdp& smdp, FeatureMap::Kind kind, int dim = 0,
                         std::uint64_t seed = 0);
FeatureMap make_features(const SuperstateIndex& index, FeatureMap::Kind kind, int dim = 0,
                         std::uint64_t seed = 0);

/// Euclidean projection onto the radius-R ball.
std::vector<double> project_ball(std::vector<double> theta, double radius);

struct TdConfig {
    long tau = 10000;
    long l_prime = -1;       // -1: warmup from the mixing estimate, capped at tau/10
    double step_size = 0.0;  // <= 0: 1/sqrt(tau)
    double radius = 0.0;     // <= 0: r_bar/(1-gamma) * sqrt(dim)
    std::uint64_t seed = 1;
    bool random_init = false;  // theta starts at 0 unless set; then uniform in the ball
    bool track_visits = true;  // per-pair visit counters; costly on very large feature spaces
};

struct TdDiagnostics {
    long updates = 0;
    double step_size_used = 0.0;
    double radius_used = 0.0;
    long l_prime_used = 0;
    double mean_reward = 0.0;
    double max_step_norm = 0.0;   // max ||theta_{t+1} - theta_t|| over updates
    double max_theta_norm = 0.0;  // max ||theta_t|| at full steps
    std::vector<long> visit_count;  // per (B, a), counted at update time
};

struct TdResult {
    std::vector<double> theta;
    TdDiagnostics diag;
};

/// Per-step hook: (t, reward, theta_norm). Used by the CLI to stream CSV.
using StepHook = std::function<void(long, double, double)>;

/// Writes the action distribution of superstate b into row[0..n_actions).
/// Lets large policies exist only at the visited states.
using PolicyProvider = std::function<void(int b, double* row)>;

/// Temporal-difference evaluation of a fixed superstate policy, sampling the
/// true POMDP: act by policy(G(H_t)), update theta toward the one-step
/// bootstrapped target for t >= l_prime, project onto the radius ball.
/// Deterministic given config.seed.
TdResult td_train(const PomdpModel& model, const SuperstateIndex& index,
                  std::span<const double> policy, const FeatureMap& features, const TdConfig& config,
                  const StepHook& on_step = nullptr);

TdResult td_train(const PomdpModel& model, const SuperstateIndex& index, const PolicyProvider& policy,
                  const FeatureMap& features, const TdConfig& config, const StepHook& on_step = nullptr,
                  const std::vector<double>* theta_init = nullptr);

struct PolitexConfig {
    int policy_updates = 10;  // M
    TdConfig td;
    double eta = 0.0;          // <= 0: sqrt(8 log |A| / M)
    double explore_mix = 0.05;  // uniform mixing floor; delta = explore_mix/|A|
    std::uint64_t seed = 1;
    bool keep_policies = true;  // materialize per-iteration policies and Q-bars
    // Carry each episode's final parameters into the next episode's
    // initialization instead of restarting from scratch. Sparse-reward
    // absorbing tasks need this to move value backwards across episodes.
    bool warm_start_theta = false;
    // Feature-space size above which the carried one-hot run switches to the
    // lazily aggregated episode loop. Exposed so tests can force that path.
    long big_model_threshold = 200000;
};

struct PolitexEpisode {
    int iteration = 0;
    long steps = 0;         // cumulative environment steps after this episode
    double mean_reward = 0.0;
    double theta_norm = 0.0;
    double rho_prime = 0.0;  // mixing estimate behind the warmup choice (when computed)
    long l_prime = 0;
};

struct PolitexResult {
    std::vector<std::vector<double>> policies;  // per iteration, [B][a]; empty if !keep_policies
    std::vector<std::vector<double>> q_bars;    // per iteration, [B][a]; empty if !keep_policies
    std::vector<double> theta_sum;              // sum of per-episode parameter vectors
    std::vector<PolitexEpisode> episodes;
    double eta_used = 0.0;
};

/// Exponential-weights policy optimization: policy i is the explore-mixed
/// softmax of eta times the sum of all previous episodes' Q estimates; each
/// episode runs td_train on a fresh trajectory. Deterministic given seed.
PolitexResult politex_train(const PomdpModel& model, const SuperstateIndex& index,
                            const FeatureMap& features, const PolitexConfig& config,
                            const SuperstateMdp* smdp_for_warmup = nullptr);

struct RegretRecord {
    int iteration = 0;
    double v_star_oracle = 0.0;
    double v_policy = 0.0;
    double per_iter_gap = 0.0;
    double cumulative = 0.0;
};

/// Per-iteration regret records: the depth-limited optimal value at the
/// initial belief against each policy's exact superstate value at the empty
/// superstate, accumulated with weight (tau + l') per iteration.
std::vector<RegretRecord> empirical_regret(const PomdpModel& model, const SuperstateMdp& smdp,
                                           const std::vector<std::vector<double>>& policies,
                                           long tau, long l_prime, int oracle_depth);

/// Explore-mixed softmax rows from eta * q_sum, with max-subtraction for
/// overflow safety. q_sum is [B][a].
std::vector<double> mixed_softmax_policy(std::span<const double> q_sum, int n_superstates, int n_actions,
                                         double eta, double explore_mix);

}  // namespace superstate
