#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "superstate/envs.hpp"
#include "superstate/pomdp.hpp"

using namespace superstate;

namespace {

PomdpModel random_model(int ns, int na, int ny, std::uint64_t seed) {
    SplitMix64 rng(seed);
    PomdpModel m;
    m.n_states = ns;
    m.n_actions = na;
    m.n_obs = ny;
    m.gamma = 0.9;
    m.allocate();
    for (int a = 0; a < na; ++a)
        for (int s = 0; s < ns; ++s) {
            auto row = dirichlet_uniform(ns, rng);
            for (int s2 = 0; s2 < ns; ++s2) m.trans(a, s, s2) = row[s2];
        }
    for (int s = 0; s < ns; ++s) {
        auto row = dirichlet_uniform(ny, rng);
        for (int y = 0; y < ny; ++y) m.obs(s, y) = row[y];
    }
    for (int s = 0; s < ns; ++s)
        for (int a = 0; a < na; ++a) m.rew(s, a) = 2.0 * rng.next_double() - 1.0;
    auto init = dirichlet_uniform(ns, rng);
    m.init_dist = init;
    m.finalize();
    return m;
}

PomdpModel fully_observed_chain() {
    // deterministic 3-state cycle with identity observations
    PomdpModel m;
    m.n_states = 3;
    m.n_actions = 1;
    m.n_obs = 3;
    m.gamma = 0.5;
    m.allocate();
    for (int s = 0; s < 3; ++s) {
        m.trans(0, s, (s + 1) % 3) = 1.0;
        m.obs(s, s) = 1.0;
        m.rew(s, 0) = s;
    }
    m.init_dist = {1.0, 0.0, 0.0};
    m.finalize();
    return m;
}

}  // namespace

TEST_CASE("validate accepts the bundled environments") {
    CHECK(validate(envs::customer_retail()).empty());
    CHECK(validate(envs::two_state_toy()).empty());
    CHECK(validate(envs::tmaze(4, 1.0, 0.9)).empty());
    CHECK(validate(envs::noisy_gridworld(envs::lake_4x4(0.3))).empty());
}

TEST_CASE("validate reports a broken transition row naming (s, a)") {
    PomdpModel m = envs::two_state_toy();
    m.trans(1, 0, 0) = 0.1;  // row (s=0, a=1) now sums to 0.9
    const auto report = validate(m);
    REQUIRE(report.size() == 1);
    CHECK(report[0].find("s=0") != std::string::npos);
    CHECK(report[0].find("a=1") != std::string::npos);
}

TEST_CASE("validate rejects gamma at the boundary") {
    PomdpModel m = envs::two_state_toy();
    m.gamma = 1.0;
    const auto report = validate(m);
    REQUIRE(report.size() == 1);
    CHECK(report[0].find("gamma") != std::string::npos);
}

TEST_CASE("belief update collapses under identity observations") {
    PomdpModel m = random_model(4, 2, 4, 11);
    for (int s = 0; s < 4; ++s)
        for (int y = 0; y < 4; ++y) m.obs(s, y) = s == y ? 1.0 : 0.0;
    BeliefState b{{0.25, 0.25, 0.25, 0.25}};
    const BeliefState out = belief_update(m, b, 1, 2);
    for (int s = 0; s < 4; ++s) CHECK(out.probs[s] == doctest::Approx(s == 2 ? 1.0 : 0.0));
}

TEST_CASE("belief update is a fixed point under full symmetry") {
    PomdpModel m;
    m.n_states = 3;
    m.n_actions = 1;
    m.n_obs = 2;
    m.gamma = 0.9;
    m.allocate();
    for (int s = 0; s < 3; ++s) {
        for (int s2 = 0; s2 < 3; ++s2) m.trans(0, s, s2) = 1.0 / 3.0;
        for (int y = 0; y < 2; ++y) m.obs(s, y) = 0.5;
        m.init_dist[s] = 1.0 / 3.0;
    }
    m.finalize();
    const BeliefState out = belief_update(m, m.initial_belief(), 0, 1);
    for (int s = 0; s < 3; ++s) CHECK(out.probs[s] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("belief update on the customer model matches the hand evaluation") {
    // uniform prior, action 0, observation 3: predicted state distribution is
    // (0.25, 0.30, 0.25, 0.20); multiplying by the y3 column (0, 0, 0.2, 0.6)
    // gives (0, 0, 0.05, 0.12) with normalizer 0.17.
    const PomdpModel m = envs::customer_retail();
    double sigma = 0.0;
    const BeliefState out = belief_update(m, m.initial_belief(), 0, 3, &sigma);
    CHECK(sigma == doctest::Approx(0.17).epsilon(1e-12));
    CHECK(out.probs[0] == doctest::Approx(0.0));
    CHECK(out.probs[1] == doctest::Approx(0.0));
    CHECK(out.probs[2] == doctest::Approx(5.0 / 17.0).epsilon(1e-12));
    CHECK(out.probs[3] == doctest::Approx(12.0 / 17.0).epsilon(1e-12));
}

TEST_CASE("belief update raises on zero-probability observations") {
    const PomdpModel m = fully_observed_chain();
    // from state 0 the chain moves to state 1, so observing 0 is impossible
    CHECK_THROWS_AS(belief_update(m, m.initial_belief(), 0, 0), ZeroProbabilityObservation);
}

TEST_CASE("normalizer equals the observation likelihood entry") {
    const PomdpModel m = random_model(5, 3, 4, 17);
    SplitMix64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        BeliefState b{dirichlet_uniform(5, rng)};
        const int a = static_cast<int>(rng.next_below(3));
        const auto sig = obs_likelihood(m, b, a);
        double total = 0.0;
        for (int y = 0; y < 4; ++y) {
            double sigma = 0.0;
            const BeliefState out = belief_update(m, b, a, y, &sigma);
            CHECK(std::abs(sigma - sig[y]) <= 1e-12);
            double sum = 0.0;
            for (double p : out.probs) {
                CHECK(p >= 0.0);
                sum += p;
            }
            CHECK(std::abs(sum - 1.0) <= 1e-9);
            total += sig[y];
        }
        CHECK(std::abs(total - 1.0) <= 1e-9);
    }
}

TEST_CASE("belief_of_history folds and composes over prefixes") {
    const PomdpModel m = envs::customer_retail();
    CHECK(belief_of_history(m, History{}) == m.initial_belief());

    const History h1{{{0, 3}}};
    CHECK(belief_of_history(m, h1) == belief_update(m, m.initial_belief(), 0, 3));

    SplitMix64 rng(23);
    History h;
    BeliefState chained = m.initial_belief();
    for (int t = 0; t < 6; ++t) {
        const int a = static_cast<int>(rng.next_below(2));
        const auto sig = obs_likelihood(m, chained, a);
        const int y = sample_categorical(sig, rng);
        h.steps.push_back({a, y});
        chained = belief_update(m, chained, a, y);
        const BeliefState folded = belief_of_history(m, h);
        for (int s = 0; s < 4; ++s) CHECK(folded.probs[s] == doctest::Approx(chained.probs[s]).epsilon(1e-12));
    }
}

TEST_CASE("belief_of_history reports the offending step index") {
    const PomdpModel m = fully_observed_chain();
    History h{{{0, 1}, {0, 0}}};  // second step observes the wrong state
    try {
        belief_of_history(m, h);
        FAIL("expected ZeroProbabilityObservation");
    } catch (const ZeroProbabilityObservation& e) {
        CHECK(e.step_index == 1);
    }
}

TEST_CASE("obs_likelihood special cases") {
    PomdpModel sym;
    sym.n_states = 2;
    sym.n_actions = 1;
    sym.n_obs = 3;
    sym.gamma = 0.9;
    sym.allocate();
    for (int s = 0; s < 2; ++s) {
        for (int s2 = 0; s2 < 2; ++s2) sym.trans(0, s, s2) = 0.5;
        for (int y = 0; y < 3; ++y) sym.obs(s, y) = 1.0 / 3.0;
        sym.init_dist[s] = 0.5;
    }
    sym.finalize();
    const auto uniform = obs_likelihood(sym, sym.initial_belief(), 0);
    for (double p : uniform) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    const PomdpModel chain = fully_observed_chain();
    const auto onehot = obs_likelihood(chain, BeliefState{{1.0, 0.0, 0.0}}, 0);
    CHECK(onehot[1] == doctest::Approx(1.0));

    const PomdpModel m = envs::customer_retail();
    const auto sig = obs_likelihood(m, m.initial_belief(), 1);
    CHECK(sig[0] == doctest::Approx(0.2775).epsilon(1e-12));
    CHECK(sig[1] == doctest::Approx(0.295).epsilon(1e-12));
    CHECK(sig[2] == doctest::Approx(0.2375).epsilon(1e-12));
    CHECK(sig[3] == doctest::Approx(0.19).epsilon(1e-12));
}

TEST_CASE("expected_reward basics") {
    const PomdpModel m = envs::customer_retail();
    CHECK(expected_reward(m, BeliefState{{0.0, 0.0, 0.0, 1.0}}, 0) == doctest::Approx(1.0));
    CHECK(expected_reward(m, m.initial_belief(), 1) == doctest::Approx(0.25));

    PomdpModel c = envs::two_state_toy();
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a) c.rew(s, a) = 0.7;
    c.finalize();
    SplitMix64 rng(3);
    BeliefState b{dirichlet_uniform(2, rng)};
    CHECK(expected_reward(c, b, 0) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("simulator is deterministic and seed-reproducible") {
    const PomdpModel chain = fully_observed_chain();
    SplitMix64 rng(9);
    const TrajectoryStep step = step_simulator(chain, 0, 0, rng);
    CHECK(step.next_state == 1);
    CHECK(step.observation == 1);
    CHECK(step.reward == doctest::Approx(0.0));

    const PomdpModel m = envs::customer_retail();
    SplitMix64 r1(123456), r2(123456);
    for (int t = 0; t < 200; ++t) {
        const TrajectoryStep s1 = step_simulator(m, t % 4, t % 2, r1);
        const TrajectoryStep s2 = step_simulator(m, t % 4, t % 2, r2);
        CHECK(s1.next_state == s2.next_state);
        CHECK(s1.observation == s2.observation);
        CHECK(s1.reward == s2.reward);
    }
}

TEST_CASE("simulator frequencies match the transition row within 3 sigma") {
    const PomdpModel m = envs::customer_retail();
    const int n = 100000;
    SplitMix64 rng(777);
    std::vector<int> counts(4, 0);
    for (int i = 0; i < n; ++i) {
        const TrajectoryStep step = step_simulator(m, 1, 0, rng);
        ++counts[step.next_state];
    }
    for (int s2 = 0; s2 < 4; ++s2) {
        const double p = m.trans(0, 1, s2);
        const double freq = static_cast<double>(counts[s2]) / n;
        const double sigma = std::sqrt(p * (1.0 - p) / n);
        CHECK(std::abs(freq - p) <= 3.0 * sigma);
    }
}
