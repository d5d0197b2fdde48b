#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "superstate/pomdp.hpp"

namespace superstate {

/// Truncated history: the last min(l, len) (action, observation) pairs.
/// Superstates shorter than l are warm-start prefixes and only ever arise
/// from histories of the same length.
struct Superstate {
    std::vector<AoPair> steps;

    friend bool operator==(const Superstate&, const Superstate&) = default;
    friend auto operator<=>(const Superstate&, const Superstate&) = default;
};

struct SuperstateHash {
    std::size_t operator()(const Superstate& b) const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (const auto& p : b.steps) {
            h = (h ^ static_cast<std::uint64_t>(p.action + 1)) * 0x100000001b3ull;
            h = (h ^ static_cast<std::uint64_t>(p.obs + 1)) * 0x100000001b3ull;
        }
        return static_cast<std::size_t>(h);
    }
};

/// Keeps the last l pairs of the history, order preserved.
Superstate group(const History& history, int l);

/// Appends (a, y) to a superstate and re-truncates to length l.
Superstate extend(const Superstate& b, int a, int y, int l);

/// Reachable superstates with their representative beliefs and lookup index.
/// Enumeration order is deterministic: BFS layer (length), then lexicographic.
/// Only superstates whose own history has positive probability from the
/// initial distribution are materialized.
struct SuperstateIndex {
    int l = 0;
    int n_actions = 0;
    int n_obs = 0;
    std::vector<Superstate> states;
    std::vector<BeliefState> rep_belief;
    std::unordered_map<Superstate, int, SuperstateHash> index;

    int num_states() const { return static_cast<int>(states.size()); }
    int find(const Superstate& b) const {
        auto it = index.find(b);
        return it == index.end() ? -1 : it->second;
    }
};

SuperstateIndex enumerate_reachable_index(const PomdpModel& model, int l);
std::vector<Superstate> enumerate_reachable(const PomdpModel& model, int l);

/// Finite MDP over reachable superstates; transition is [a][B][B'] dense and
/// reward is [B][a]. rep_belief[B] is the belief of B filtered from the
/// initial distribution.
struct SuperstateMdp {
    int l = 0;
    double gamma = 0.0;
    double r_bar = 0.0;
    int n_actions = 0;
    int n_obs = 0;
    std::vector<Superstate> states;
    std::unordered_map<Superstate, int, SuperstateHash> index;
    std::vector<BeliefState> rep_belief;
    std::vector<double> transition;
    std::vector<double> reward;

    int num_states() const { return static_cast<int>(states.size()); }
    double trans(int a, int b, int b2) const {
        return transition[(static_cast<std::size_t>(a) * num_states() + b) * num_states() + b2];
    }
    double& trans(int a, int b, int b2) {
        return transition[(static_cast<std::size_t>(a) * num_states() + b) * num_states() + b2];
    }
    double rew(int b, int a) const { return reward[static_cast<std::size_t>(b) * n_actions + a]; }
    double& rew(int b, int a) { return reward[static_cast<std::size_t>(b) * n_actions + a]; }
    int find(const Superstate& b) const {
        auto it = index.find(b);
        return it == index.end() ? -1 : it->second;
    }
};

SuperstateMdp build(const PomdpModel& model, int l);

/// Dobrushin coefficient rho' of the policy-induced chain
/// M(B'|B) = sum_a policy(a|B) P(B'|B,a). policy is [B][a] row-major.
double superstate_mixing(const SuperstateMdp& smdp, std::span<const double> policy);

/// Serialization of the superstate MDP in the model file notation plus a
/// `superstates` label table; round-trips through parse_smdp.
std::string serialize_smdp(const SuperstateMdp& smdp);
SuperstateMdp parse_smdp(const std::string& text, const std::string& source = "<string>");
SuperstateMdp load_smdp(const std::string& path);
void save_smdp(const SuperstateMdp& smdp, const std::string& path);

}  // namespace superstate
