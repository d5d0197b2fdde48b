#pragma once

#include <vector>

#include "superstate/pomdp.hpp"

namespace superstate {
namespace envs {

/// Customer engagement model: 4 states (uninterested..purchasing), 2 actions
/// (generic homepage / trending recommendations), 4 click-level observations.
/// Rewards are artifact-defined: 1 in the purchasing state, 0 elsewhere.
PomdpModel customer_retail(double gamma = 0.9);

/// T-maze with a corridor of `corridor_len` cells (the last one is the
/// junction) and two arms capped at `arm_cap` cells, absorbing at the cap.
/// The direction coin lives in the initial distribution: the start cell is
/// split into two hidden variants and the observation emitted from corridor
/// position 1 reveals the correct direction; all later observations reveal
/// position only. All transition rows are one-hot.
PomdpModel tmaze(int corridor_len, double reward_r, double gamma, int arm_cap = 10);

struct Cell {
    int row = 0;
    int col = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
};

struct GridSpec {
    int width = 4;
    int height = 4;
    std::vector<Cell> holes;
    Cell goal;
    double noise_p = 0.0;
    bool slippery = false;  // fixed false; moves are deterministic
};

/// Standard 4x4 lake layout: start at (0,0), holes at (1,1) (1,3) (2,3) (3,0),
/// goal at (3,3).
GridSpec lake_4x4(double noise_p);

/// Deterministic gridworld with a noisy position sensor: the true cell is
/// observed with probability 1-p, otherwise one of the n-1 wrong cells
/// uniformly. Holes and the goal are absorbing; r(s,a) = 1 exactly when the
/// move lands on the goal (so the absorbing goal keeps paying 1).
PomdpModel noisy_gridworld(const GridSpec& spec, double gamma = 0.95);

/// Two-state, two-action, two-observation toy with canonical fixed values:
/// action 0 keeps the state with probability 0.8, action 1 switches with
/// probability 0.8, observations are 85% accurate, and r(s,a) = 1 iff a == s.
PomdpModel two_state_toy(double gamma = 0.9);

}  // namespace envs
}  // namespace superstate
