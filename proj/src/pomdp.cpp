#include "superstate/pomdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace superstate {

ZeroProbabilityObservation::ZeroProbabilityObservation(int action_, int obs_, int step_index_)
    : std::runtime_error("observation y" + std::to_string(obs_) + " has probability 0 after action a" +
                         std::to_string(action_) +
                         (step_index_ >= 0 ? " at history step " + std::to_string(step_index_) : "")),
      action(action_),
      obs(obs_),
      step_index(step_index_) {}

void PomdpModel::allocate() {
    transition.assign(static_cast<std::size_t>(n_actions) * n_states * n_states, 0.0);
    obs_kernel.assign(static_cast<std::size_t>(n_states) * n_obs, 0.0);
    reward.assign(static_cast<std::size_t>(n_states) * n_actions, 0.0);
    init_dist.assign(n_states, 0.0);
}

void PomdpModel::finalize() {
    r_bar = 0.0;
    for (double r : reward) r_bar = std::max(r_bar, std::abs(r));
}

namespace {

bool check_prob_row(std::span<const double> row, std::string* why) {
    double sum = 0.0;
    for (double p : row) {
        if (p < 0.0) {
            if (why) *why = "has a negative entry";
            return false;
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTol) {
        if (why) {
            std::ostringstream os;
            os << "sums to " << sum;
            *why = os.str();
        }
        return false;
    }
    return true;
}

}  // namespace

std::vector<std::string> validate(const PomdpModel& m) {
    std::vector<std::string> report;
    if (m.n_states <= 0 || m.n_actions <= 0 || m.n_obs <= 0) {
        report.push_back("dimensions must be positive");
        return report;
    }
    if (m.transition.size() != static_cast<std::size_t>(m.n_actions) * m.n_states * m.n_states)
        report.push_back("transition tensor has wrong size");
    if (m.obs_kernel.size() != static_cast<std::size_t>(m.n_states) * m.n_obs)
        report.push_back("observation kernel has wrong size");
    if (m.reward.size() != static_cast<std::size_t>(m.n_states) * m.n_actions)
        report.push_back("reward matrix has wrong size");
    if (m.init_dist.size() != static_cast<std::size_t>(m.n_states))
        report.push_back("init_dist has wrong size");
    if (!report.empty()) return report;

    std::string why;
    for (int a = 0; a < m.n_actions; ++a) {
        for (int s = 0; s < m.n_states; ++s) {
            std::span<const double> row(&m.transition[(static_cast<std::size_t>(a) * m.n_states + s) * m.n_states],
                                        static_cast<std::size_t>(m.n_states));
            if (!check_prob_row(row, &why)) {
                report.push_back("transition row (s=" + std::to_string(s) + ", a=" + std::to_string(a) + ") " + why);
            }
        }
    }
    for (int s = 0; s < m.n_states; ++s) {
        std::span<const double> row(&m.obs_kernel[static_cast<std::size_t>(s) * m.n_obs],
                                    static_cast<std::size_t>(m.n_obs));
        if (!check_prob_row(row, &why)) {
            report.push_back("observation row (s=" + std::to_string(s) + ") " + why);
        }
    }
    if (!check_prob_row(m.init_dist, &why)) {
        report.push_back("init_dist " + why);
    }
    if (!(m.gamma >= 0.0 && m.gamma < 1.0)) {
        report.push_back("gamma is " + std::to_string(m.gamma) + ", must lie in [0, 1)");
    }
    double max_abs_r = 0.0;
    for (double r : m.reward) max_abs_r = std::max(max_abs_r, std::abs(r));
    if (max_abs_r > m.r_bar + 1e-12) {
        report.push_back("r_bar is smaller than max |r(s,a)|");
    }
    return report;
}

BeliefState belief_update(const PomdpModel& m, const BeliefState& belief, int a, int y, double* sigma_out) {
    BeliefState out;
    out.probs.assign(m.n_states, 0.0);
    double sigma = 0.0;
    for (int s2 = 0; s2 < m.n_states; ++s2) {
        double pred = 0.0;
        for (int s = 0; s < m.n_states; ++s) pred += belief.probs[s] * m.trans(a, s, s2);
        const double v = pred * m.obs(s2, y);
        out.probs[s2] = v;
        sigma += v;
    }
    if (sigma_out) *sigma_out = sigma;
    if (sigma <= 0.0) throw ZeroProbabilityObservation(a, y);
    for (double& p : out.probs) p /= sigma;
    return out;
}

BeliefState belief_of_history_from(const PomdpModel& m, const BeliefState& prior, const History& history) {
    BeliefState b = prior;
    for (std::size_t i = 0; i < history.steps.size(); ++i) {
        const auto& step = history.steps[i];
        try {
            b = belief_update(m, b, step.action, step.obs);
        } catch (const ZeroProbabilityObservation&) {
            throw ZeroProbabilityObservation(step.action, step.obs, static_cast<int>(i));
        }
    }
    return b;
}

BeliefState belief_of_history(const PomdpModel& m, const History& history) {
    return belief_of_history_from(m, m.initial_belief(), history);
}

std::vector<double> obs_likelihood(const PomdpModel& m, const BeliefState& belief, int a) {
    std::vector<double> pred(m.n_states, 0.0);
    for (int s = 0; s < m.n_states; ++s) {
        const double bs = belief.probs[s];
        if (bs == 0.0) continue;
        for (int s2 = 0; s2 < m.n_states; ++s2) pred[s2] += bs * m.trans(a, s, s2);
    }
    std::vector<double> sigma(m.n_obs, 0.0);
    for (int s2 = 0; s2 < m.n_states; ++s2) {
        const double q = pred[s2];
        if (q == 0.0) continue;
        for (int y = 0; y < m.n_obs; ++y) sigma[y] += q * m.obs(s2, y);
    }
    return sigma;
}

double expected_reward(const PomdpModel& m, const BeliefState& belief, int a) {
    double r = 0.0;
    for (int s = 0; s < m.n_states; ++s) r += belief.probs[s] * m.rew(s, a);
    return r;
}

TrajectoryStep step_simulator(const PomdpModel& m, int state, int a, SplitMix64& rng) {
    TrajectoryStep step;
    step.hidden_state = state;
    step.action = a;
    step.reward = m.rew(state, a);
    std::span<const double> trow(&m.transition[(static_cast<std::size_t>(a) * m.n_states + state) * m.n_states],
                                 static_cast<std::size_t>(m.n_states));
    const int s2 = sample_categorical(trow, rng);
    std::span<const double> orow(&m.obs_kernel[static_cast<std::size_t>(s2) * m.n_obs],
                                 static_cast<std::size_t>(m.n_obs));
    step.observation = sample_categorical(orow, rng);
    step.next_state = s2;
    return step;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
    return 0.5 * acc;
}

}  // namespace superstate
