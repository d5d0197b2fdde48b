#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "superstate/envs.hpp"
#include "superstate/planning.hpp"
#include "superstate/superstate.hpp"

using namespace superstate;

namespace {

PomdpModel fully_observed_mdp() {
    // 3 states, 2 actions, identity observations, mixed stochastic moves
    PomdpModel m;
    m.n_states = 3;
    m.n_actions = 2;
    m.n_obs = 3;
    m.gamma = 0.9;
    m.allocate();
    const double p0[3][3] = {{0.6, 0.3, 0.1}, {0.2, 0.5, 0.3}, {0.3, 0.3, 0.4}};
    const double p1[3][3] = {{0.1, 0.8, 0.1}, {0.4, 0.2, 0.4}, {0.25, 0.5, 0.25}};
    for (int s = 0; s < 3; ++s) {
        for (int s2 = 0; s2 < 3; ++s2) {
            m.trans(0, s, s2) = p0[s][s2];
            m.trans(1, s, s2) = p1[s][s2];
        }
        m.obs(s, s) = 1.0;
        m.rew(s, 0) = 0.2 * s;
        m.rew(s, 1) = 1.0 - 0.3 * s;
        m.init_dist[s] = 1.0 / 3.0;
    }
    m.finalize();
    return m;
}

// plain MDP value iteration, written independently of the library solver
std::vector<double> mdp_value_iteration(const PomdpModel& m, double tol) {
    std::vector<double> v(m.n_states, 0.0);
    for (;;) {
        double diff = 0.0;
        std::vector<double> nv(m.n_states);
        for (int s = 0; s < m.n_states; ++s) {
            double best = -1e100;
            for (int a = 0; a < m.n_actions; ++a) {
                double q = m.rew(s, a);
                for (int s2 = 0; s2 < m.n_states; ++s2) q += m.gamma * m.trans(a, s, s2) * v[s2];
                best = std::max(best, q);
            }
            nv[s] = best;
            diff = std::max(diff, std::abs(nv[s] - v[s]));
        }
        v = nv;
        if (diff < tol) return v;
    }
}

}  // namespace

TEST_CASE("group keeps the last l pairs in order") {
    const History h{{{0, 1}, {1, 2}, {2, 3}}};
    const Superstate b = group(h, 2);
    REQUIRE(b.steps.size() == 2);
    CHECK(b.steps[0] == AoPair{1, 2});
    CHECK(b.steps[1] == AoPair{2, 3});

    CHECK(group(h, 5).steps == h.steps);

    // idempotence: re-grouping the truncated history changes nothing
    const Superstate again = group(History{b.steps}, 2);
    CHECK(again == b);
}

TEST_CASE("truncation commutes with extension") {
    SplitMix64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        History h;
        const int len = static_cast<int>(rng.next_below(7));
        for (int i = 0; i < len; ++i)
            h.steps.push_back({static_cast<int>(rng.next_below(3)), static_cast<int>(rng.next_below(4))});
        const int l = 1 + static_cast<int>(rng.next_below(4));
        const int a = static_cast<int>(rng.next_below(3));
        const int y = static_cast<int>(rng.next_below(4));

        History extended = h;
        extended.steps.push_back({a, y});
        const Superstate direct = group(extended, l);
        const Superstate via_group = extend(group(h, l), a, y, l);
        CHECK(direct == via_group);
    }
}

TEST_CASE("enumeration of a single-chain model") {
    PomdpModel m;
    m.n_states = 1;
    m.n_actions = 1;
    m.n_obs = 1;
    m.gamma = 0.5;
    m.allocate();
    m.trans(0, 0, 0) = 1.0;
    m.obs(0, 0) = 1.0;
    m.init_dist = {1.0};
    m.finalize();
    const auto states = enumerate_reachable(m, 3);
    CHECK(states.size() == 4);  // lengths 0..3
}

TEST_CASE("enumeration respects the count bound and one-step likelihoods") {
    const PomdpModel m = envs::customer_retail();
    const auto l1 = enumerate_reachable(m, 1);
    // direct check: which (a, y) pairs have positive one-step probability
    int positive = 0;
    for (int a = 0; a < 2; ++a) {
        const auto sig = obs_likelihood(m, m.initial_belief(), a);
        for (int y = 0; y < 4; ++y)
            if (sig[y] > 0.0) ++positive;
    }
    CHECK(static_cast<int>(l1.size()) == 1 + positive);

    for (int l = 1; l <= 3; ++l) {
        double cap = 0.0;
        for (int k = 0; k <= l; ++k) cap += std::pow(8.0, k);
        CHECK(static_cast<double>(enumerate_reachable(m, l).size()) <= cap);
    }
}

TEST_CASE("enumeration order is deterministic: layers then lexicographic") {
    const auto states = enumerate_reachable(envs::two_state_toy(), 2);
    REQUIRE(states.size() == 21);
    CHECK(states[0].steps.empty());
    for (std::size_t i = 1; i + 1 < states.size(); ++i) {
        const bool same_layer = states[i].steps.size() == states[i + 1].steps.size();
        if (same_layer) {
            CHECK(states[i] < states[i + 1]);
        } else {
            CHECK(states[i].steps.size() < states[i + 1].steps.size());
        }
    }
}

TEST_CASE("built rows are stochastic and target only one-step extensions") {
    const SuperstateMdp smdp = build(envs::customer_retail(), 2);
    for (int a = 0; a < smdp.n_actions; ++a) {
        for (int b = 0; b < smdp.num_states(); ++b) {
            double sum = 0.0;
            for (int b2 = 0; b2 < smdp.num_states(); ++b2) {
                const double p = smdp.trans(a, b, b2);
                CHECK(p >= 0.0);
                sum += p;
                if (p > 0.0) {
                    bool is_extension = false;
                    for (int y = 0; y < smdp.n_obs && !is_extension; ++y)
                        is_extension = extend(smdp.states[b], a, y, smdp.l) == smdp.states[b2];
                    CHECK(is_extension);
                }
            }
            CHECK(std::abs(sum - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("transition rows equal grouped observation likelihoods") {
    const PomdpModel m = envs::customer_retail();
    const SuperstateMdp smdp = build(m, 1);
    for (int b = 0; b < smdp.num_states(); ++b) {
        for (int a = 0; a < 2; ++a) {
            const auto sig = obs_likelihood(m, smdp.rep_belief[b], a);
            std::vector<double> row(smdp.num_states(), 0.0);
            for (int y = 0; y < 4; ++y) {
                if (sig[y] <= 0.0) continue;
                row[smdp.find(extend(smdp.states[b], a, y, 1))] += sig[y];
            }
            for (int b2 = 0; b2 < smdp.num_states(); ++b2)
                CHECK(std::abs(row[b2] - smdp.trans(a, b, b2)) <= 1e-12);
        }
    }
}

TEST_CASE("rewards and beliefs follow the defining sums") {
    const PomdpModel m = envs::customer_retail();
    const SuperstateMdp smdp = build(m, 1);
    for (int b = 0; b < smdp.num_states(); ++b) {
        // the stored belief is the truncated history filtered from pi0
        const BeliefState ref = belief_of_history(m, History{smdp.states[b].steps});
        for (int s = 0; s < 4; ++s) CHECK(smdp.rep_belief[b].probs[s] == doctest::Approx(ref.probs[s]));
        for (int a = 0; a < 2; ++a) {
            double r = 0.0;
            for (int s = 0; s < 4; ++s) r += smdp.rep_belief[b].probs[s] * m.rew(s, a);
            CHECK(smdp.rew(b, a) == doctest::Approx(r).epsilon(1e-15));
            CHECK(std::abs(smdp.rew(b, a)) <= m.r_bar + 1e-15);
        }
    }
}

TEST_CASE("constant rewards survive the construction") {
    PomdpModel m = envs::two_state_toy();
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a) m.rew(s, a) = 0.4;
    m.finalize();
    const SuperstateMdp smdp = build(m, 2);
    for (int b = 0; b < smdp.num_states(); ++b)
        for (int a = 0; a < 2; ++a) CHECK(smdp.rew(b, a) == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("fully observed model at l=1 reproduces the underlying MDP") {
    const PomdpModel m = fully_observed_mdp();
    const SuperstateMdp smdp = build(m, 1);
    // length-1 superstates (a, y) behave as state y: rewards and transitions
    for (int b = 0; b < smdp.num_states(); ++b) {
        if (smdp.states[b].steps.empty()) continue;
        const int s = smdp.states[b].steps[0].obs;
        for (int a = 0; a < 2; ++a) {
            CHECK(smdp.rew(b, a) == doctest::Approx(m.rew(s, a)).epsilon(1e-12));
            for (int b2 = 0; b2 < smdp.num_states(); ++b2) {
                if (smdp.states[b2].steps.empty()) continue;
                if (smdp.states[b2].steps[0].action != a) continue;
                const int s2 = smdp.states[b2].steps[0].obs;
                CHECK(smdp.trans(a, b, b2) == doctest::Approx(m.trans(a, s, s2)).epsilon(1e-12));
            }
        }
    }
    // and the optimal values agree state-by-state
    const auto mdp_v = mdp_value_iteration(m, 1e-12);
    const ValueTable table = value_iteration(smdp, 1e-12, 100000);
    for (int b = 0; b < smdp.num_states(); ++b) {
        if (smdp.states[b].steps.empty()) continue;
        const int s = smdp.states[b].steps[0].obs;
        CHECK(std::abs(table.values[b] - mdp_v[s]) <= 1e-6);
    }
}

TEST_CASE("t-maze superstates that drop the signal keep half-half beliefs") {
    const PomdpModel m = envs::tmaze(4, 1.0, 0.9, 6);
    const SuperstateMdp smdp = build(m, 2);
    // windows holding only corridor observations cannot identify the direction
    int found = 0;
    for (int b = 0; b < smdp.num_states(); ++b) {
        const auto& st = smdp.states[b];
        if (st.steps.size() != 2) continue;
        bool corridor_only = true;
        for (const auto& p : st.steps) corridor_only = corridor_only && p.obs >= 3;
        if (!corridor_only) continue;
        ++found;
        double mass[2] = {0.0, 0.0};
        for (int s = 0; s < m.n_states; ++s) mass[s < m.n_states / 2 ? 0 : 1] += smdp.rep_belief[b].probs[s];
        CHECK(mass[0] == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(mass[1] == doctest::Approx(0.5).epsilon(1e-9));
    }
    CHECK(found > 0);
}

TEST_CASE("superstate mixing coefficient extremes and cross-check") {
    const PomdpModel m = envs::customer_retail();
    const SuperstateMdp smdp = build(m, 1);
    const int n = smdp.num_states();
    std::vector<double> uniform(static_cast<std::size_t>(n) * 2, 0.5);
    const double rho = superstate_mixing(smdp, uniform);
    CHECK(rho > 0.0);
    CHECK(rho <= 1.0);
    // independent evaluation: build the chain and take the min row overlap
    std::vector<double> chain(static_cast<std::size_t>(n) * n, 0.0);
    for (int b = 0; b < n; ++b)
        for (int a = 0; a < 2; ++a)
            for (int b2 = 0; b2 < n; ++b2)
                chain[static_cast<std::size_t>(b) * n + b2] += 0.5 * smdp.trans(a, b, b2);
    double best = 1.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double ov = 0.0;
            for (int k = 0; k < n; ++k)
                ov += std::min(chain[static_cast<std::size_t>(i) * n + k],
                               chain[static_cast<std::size_t>(j) * n + k]);
            best = std::min(best, ov);
        }
    CHECK(rho == doctest::Approx(best).epsilon(1e-15));

    // a chain with identical rows mixes instantly; a permutation does not
    SuperstateMdp toy;
    toy.l = 1;
    toy.gamma = 0.9;
    toy.n_actions = 1;
    toy.n_obs = 2;
    toy.states = {Superstate{}, Superstate{{{0, 0}}}};
    toy.index.emplace(toy.states[0], 0);
    toy.index.emplace(toy.states[1], 1);
    toy.rep_belief = {BeliefState{{1.0}}, BeliefState{{1.0}}};
    toy.reward.assign(2, 0.0);
    toy.transition = {0.3, 0.7, 0.3, 0.7};
    std::vector<double> pol{1.0, 1.0};
    CHECK(superstate_mixing(toy, pol) == doctest::Approx(1.0));
    toy.transition = {0.0, 1.0, 1.0, 0.0};
    CHECK(superstate_mixing(toy, pol) == doctest::Approx(0.0));
}

TEST_CASE("smdp serialization round-trips") {
    const SuperstateMdp smdp = build(envs::two_state_toy(), 2);
    const std::string text = serialize_smdp(smdp);
    const SuperstateMdp back = parse_smdp(text);
    CHECK(back.num_states() == smdp.num_states());
    CHECK(back.transition == smdp.transition);
    CHECK(back.reward == smdp.reward);
    CHECK(back.l == smdp.l);
    for (int b = 0; b < smdp.num_states(); ++b) {
        CHECK(back.states[b] == smdp.states[b]);
        CHECK(back.rep_belief[b].probs == smdp.rep_belief[b].probs);
    }
    CHECK(serialize_smdp(back) == text);
}
