#include "superstate/envs.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace superstate {
namespace envs {

PomdpModel customer_retail(double gamma) {
    PomdpModel m;
    m.n_states = 4;
    m.n_actions = 2;
    m.n_obs = 4;
    m.gamma = gamma;
    m.allocate();

    const double p0[4][4] = {{0.4, 0.4, 0.1, 0.1},
                             {0.3, 0.3, 0.2, 0.2},
                             {0.2, 0.3, 0.3, 0.2},
                             {0.1, 0.2, 0.4, 0.3}};
    const double p1[4][4] = {{0.4, 0.3, 0.2, 0.1},
                             {0.2, 0.4, 0.2, 0.2},
                             {0.1, 0.3, 0.4, 0.2},
                             {0.1, 0.2, 0.3, 0.4}};
    const double phi[4][4] = {{0.8, 0.2, 0.0, 0.0},
                              {0.3, 0.5, 0.2, 0.0},
                              {0.1, 0.3, 0.4, 0.2},
                              {0.0, 0.1, 0.3, 0.6}};
    for (int s = 0; s < 4; ++s) {
        for (int s2 = 0; s2 < 4; ++s2) {
            m.trans(0, s, s2) = p0[s][s2];
            m.trans(1, s, s2) = p1[s][s2];
        }
        for (int y = 0; y < 4; ++y) m.obs(s, y) = phi[s][y];
        m.init_dist[s] = 0.25;
    }
    m.rew(3, 0) = 1.0;
    m.rew(3, 1) = 1.0;

    m.state_labels = {"uninterested", "browsing", "considering", "purchasing"};
    m.action_labels = {"generic_homepage", "recommend_trending"};
    m.obs_labels = {"no_clicks", "viewed_product", "added_to_cart", "purchased"};
    m.finalize();
    return m;
}

PomdpModel tmaze(int corridor_len, double reward_r, double gamma, int arm_cap) {
    if (corridor_len < 1) throw std::invalid_argument("tmaze: corridor_len must be >= 1");
    if (arm_cap < 1) throw std::invalid_argument("tmaze: arm_cap must be >= 1");

    // State layout, per direction d in {0,1}:
    //   corridor cells 0..corridor_len (cell corridor_len is the junction),
    //   then arm r cells 1..arm_cap and arm q cells 1..arm_cap.
    const int per_dir = (corridor_len + 1) + 2 * arm_cap;
    PomdpModel m;
    m.n_states = 2 * per_dir;
    m.n_actions = 2;  // step towards direction 1 / direction 2 (both advance the corridor)
    // observations: start cell, two direction signals (emitted at corridor cell 1),
    // corridor positions 2..corridor_len, arm r positions, arm q positions
    const int n_corridor_obs = corridor_len >= 2 ? corridor_len - 1 : 0;
    m.n_obs = 1 + 2 + n_corridor_obs + 2 * arm_cap;
    m.gamma = gamma;
    m.allocate();

    auto corridor_state = [&](int d, int i) { return d * per_dir + i; };
    auto arm_state = [&](int d, int arm, int i) {  // arm 0 = r, arm 1 = q; i in 1..arm_cap
        return d * per_dir + (corridor_len + 1) + arm * arm_cap + (i - 1);
    };
    const int obs_start = 0;
    auto obs_signal = [&](int d) { return 1 + d; };
    auto obs_corridor = [&](int i) { return 3 + (i - 2); };  // i in 2..corridor_len
    auto obs_arm = [&](int arm, int i) { return 3 + n_corridor_obs + arm * arm_cap + (i - 1); };

    for (int d = 0; d < 2; ++d) {
        // corridor movement: both actions advance; the junction branches
        for (int i = 0; i < corridor_len; ++i) {
            for (int a = 0; a < 2; ++a) m.trans(a, corridor_state(d, i), corridor_state(d, i + 1)) = 1.0;
        }
        for (int a = 0; a < 2; ++a) m.trans(a, corridor_state(d, corridor_len), arm_state(d, a, 1)) = 1.0;
        for (int arm = 0; arm < 2; ++arm) {
            for (int i = 1; i <= arm_cap; ++i) {
                const int next = i < arm_cap ? arm_state(d, arm, i + 1) : arm_state(d, arm, arm_cap);
                for (int a = 0; a < 2; ++a) m.trans(a, arm_state(d, arm, i), next) = 1.0;
            }
        }

        // observations
        m.obs(corridor_state(d, 0), obs_start) = 1.0;
        if (corridor_len >= 1) m.obs(corridor_state(d, 1), obs_signal(d)) = 1.0;
        for (int i = 2; i <= corridor_len; ++i) m.obs(corridor_state(d, i), obs_corridor(i)) = 1.0;
        for (int arm = 0; arm < 2; ++arm)
            for (int i = 1; i <= arm_cap; ++i) m.obs(arm_state(d, arm, i), obs_arm(arm, i)) = 1.0;

        // reward: every cell of the correct arm pays reward_r for any action
        for (int i = 1; i <= arm_cap; ++i)
            for (int a = 0; a < 2; ++a) m.rew(arm_state(d, d, i), a) = reward_r;

        m.init_dist[corridor_state(d, 0)] = 0.5;
    }

    m.state_labels.assign(m.n_states, "");
    for (int d = 0; d < 2; ++d) {
        const std::string dn = "_d" + std::to_string(d + 1);
        for (int i = 0; i <= corridor_len; ++i) m.state_labels[corridor_state(d, i)] = "s" + std::to_string(i) + dn;
        for (int arm = 0; arm < 2; ++arm)
            for (int i = 1; i <= arm_cap; ++i)
                m.state_labels[arm_state(d, arm, i)] = std::string(arm == 0 ? "r" : "q") + std::to_string(i) + dn;
    }
    m.obs_labels.assign(m.n_obs, "");
    m.obs_labels[obs_start] = "start";
    m.obs_labels[obs_signal(0)] = "signal_d1";
    m.obs_labels[obs_signal(1)] = "signal_d2";
    for (int i = 2; i <= corridor_len; ++i) m.obs_labels[obs_corridor(i)] = "corridor" + std::to_string(i);
    for (int arm = 0; arm < 2; ++arm)
        for (int i = 1; i <= arm_cap; ++i)
            m.obs_labels[obs_arm(arm, i)] = std::string(arm == 0 ? "arm_r" : "arm_q") + std::to_string(i);
    m.action_labels = {"towards_dir1", "towards_dir2"};
    m.finalize();
    return m;
}

GridSpec lake_4x4(double noise_p) {
    GridSpec spec;
    spec.width = 4;
    spec.height = 4;
    spec.holes = {{1, 1}, {1, 3}, {2, 3}, {3, 0}};
    spec.goal = {3, 3};
    spec.noise_p = noise_p;
    return spec;
}

PomdpModel noisy_gridworld(const GridSpec& spec, double gamma) {
    const int n = spec.width * spec.height;
    if (n <= 1) throw std::invalid_argument("gridworld: needs at least 2 cells");
    if (spec.noise_p < 0.0 || spec.noise_p > 1.0) throw std::invalid_argument("gridworld: noise_p out of [0,1]");
    auto cell_id = [&](const Cell& c) {
        if (c.row < 0 || c.row >= spec.height || c.col < 0 || c.col >= spec.width)
            throw std::invalid_argument("gridworld: cell out of range");
        return c.row * spec.width + c.col;
    };
    const int goal = cell_id(spec.goal);
    std::vector<bool> absorbing(n, false);
    absorbing[goal] = true;
    for (const auto& h : spec.holes) {
        const int id = cell_id(h);
        if (id == goal) throw std::invalid_argument("gridworld: goal coincides with a hole");
        absorbing[id] = true;
    }

    PomdpModel m;
    m.n_states = n;
    m.n_actions = 4;  // 0=left, 1=down, 2=right, 3=up
    m.n_obs = n;
    m.gamma = gamma;
    m.allocate();

    auto move = [&](int s, int a) {
        if (absorbing[s]) return s;
        int r = s / spec.width, c = s % spec.width;
        switch (a) {
            case 0: c = std::max(0, c - 1); break;
            case 1: r = std::min(spec.height - 1, r + 1); break;
            case 2: c = std::min(spec.width - 1, c + 1); break;
            default: r = std::max(0, r - 1); break;
        }
        return r * spec.width + c;
    };

    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < 4; ++a) {
            const int s2 = move(s, a);
            m.trans(a, s, s2) = 1.0;
            if (s2 == goal) m.rew(s, a) = 1.0;
        }
        for (int y = 0; y < n; ++y) {
            m.obs(s, y) = (y == s) ? 1.0 - spec.noise_p : spec.noise_p / (n - 1);
        }
    }
    m.init_dist[0] = 1.0;  // fixed start at (0,0), matching the lake layout
    m.finalize();
    return m;
}

PomdpModel two_state_toy(double gamma) {
    PomdpModel m;
    m.n_states = 2;
    m.n_actions = 2;
    m.n_obs = 2;
    m.gamma = gamma;
    m.allocate();
    // action 0: stay with 0.8; action 1: switch with 0.8
    m.trans(0, 0, 0) = 0.8; m.trans(0, 0, 1) = 0.2;
    m.trans(0, 1, 0) = 0.2; m.trans(0, 1, 1) = 0.8;
    m.trans(1, 0, 0) = 0.2; m.trans(1, 0, 1) = 0.8;
    m.trans(1, 1, 0) = 0.8; m.trans(1, 1, 1) = 0.2;
    m.obs(0, 0) = 0.85; m.obs(0, 1) = 0.15;
    m.obs(1, 0) = 0.15; m.obs(1, 1) = 0.85;
    m.rew(0, 0) = 1.0;
    m.rew(1, 1) = 1.0;
    m.init_dist = {0.5, 0.5};
    m.finalize();
    return m;
}

}  // namespace envs
}  // namespace superstate
