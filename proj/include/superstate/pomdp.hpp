#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "superstate/rng.hpp"

namespace superstate {

/// One (action, observation) element of a history. Histories start with an
/// action, so step t pairs the action taken at t-1 with the observation that
/// followed it.
struct AoPair {
    int action = 0;
    int obs = 0;

    friend bool operator==(const AoPair&, const AoPair&) = default;
    friend auto operator<=>(const AoPair&, const AoPair&) = default;
};

struct History {
    std::vector<AoPair> steps;

    friend bool operator==(const History&, const History&) = default;
};

/// Posterior over hidden states. Valid instances are nonnegative and sum to 1
/// within 1e-9.
struct BeliefState {
    std::vector<double> probs;

    friend bool operator==(const BeliefState&, const BeliefState&) = default;
};

/// One simulator transition. hidden_state is the state the action was taken
/// in (logging only); next_state continues the trajectory.
struct TrajectoryStep {
    int hidden_state = 0;
    int action = 0;
    double reward = 0.0;
    int observation = 0;
    int next_state = 0;
};

/// Raised when a filtering step conditions on an observation of probability 0.
class ZeroProbabilityObservation : public std::runtime_error {
public:
    explicit ZeroProbabilityObservation(int action, int obs, int step_index = -1);
    int action;
    int obs;
    int step_index;  // position in the history, -1 for single-step updates
};

/// Tabular POMDP. Tensors are row-major: transition is [a][s][s'],
/// obs_kernel is [s][y], reward is [s][a].
struct PomdpModel {
    int n_states = 0;
    int n_actions = 0;
    int n_obs = 0;
    double gamma = 0.0;
    std::vector<double> transition;
    std::vector<double> obs_kernel;
    std::vector<double> reward;
    std::vector<double> init_dist;
    double r_bar = 0.0;  // max_{s,a} |r(s,a)|, maintained by finalize()

    std::vector<std::string> state_labels;
    std::vector<std::string> action_labels;
    std::vector<std::string> obs_labels;

    double trans(int a, int s, int s2) const {
        return transition[(static_cast<std::size_t>(a) * n_states + s) * n_states + s2];
    }
    double& trans(int a, int s, int s2) {
        return transition[(static_cast<std::size_t>(a) * n_states + s) * n_states + s2];
    }
    double obs(int s, int y) const { return obs_kernel[static_cast<std::size_t>(s) * n_obs + y]; }
    double& obs(int s, int y) { return obs_kernel[static_cast<std::size_t>(s) * n_obs + y]; }
    double rew(int s, int a) const { return reward[static_cast<std::size_t>(s) * n_actions + a]; }
    double& rew(int s, int a) { return reward[static_cast<std::size_t>(s) * n_actions + a]; }

    void allocate();   // sizes tensors from the dimension fields, zero-filled
    void finalize();   // recomputes r_bar

    BeliefState initial_belief() const { return BeliefState{init_dist}; }
};

/// Row-sum / range tolerance used by validation and the model loader.
inline constexpr double kRowSumTol = 1e-9;

/// Returns human-readable descriptions of every violated model invariant;
/// empty on success. Rows are reported by index, never repaired.
std::vector<std::string> validate(const PomdpModel& model);

/// Single Bayes filter step: posterior after taking action a and observing y.
/// If sigma_out is non-null it receives the normalizer, which equals
/// obs_likelihood(model, belief, a)[y].
BeliefState belief_update(const PomdpModel& model, const BeliefState& belief, int a, int y,
                          double* sigma_out = nullptr);

/// Folds belief_update over the history starting from the initial distribution.
/// The empty history returns the initial distribution.
BeliefState belief_of_history(const PomdpModel& model, const History& history);

/// belief_of_history from an arbitrary prior instead of the initial
/// distribution.
BeliefState belief_of_history_from(const PomdpModel& model, const BeliefState& prior,
                                   const History& history);

/// Probability of each next observation given the current belief and action a.
std::vector<double> obs_likelihood(const PomdpModel& model, const BeliefState& belief, int a);

/// Belief-weighted immediate reward: sum_s belief(s) r(s, a).
double expected_reward(const PomdpModel& model, const BeliefState& belief, int a);

/// Samples one environment transition. The reward is r(state, a); the
/// observation is drawn from the arrival state's observation row.
TrajectoryStep step_simulator(const PomdpModel& model, int state, int a, SplitMix64& rng);

/// Total variation distance between two distributions (half L1).
double total_variation(std::span<const double> p, std::span<const double> q);

}  // namespace superstate
