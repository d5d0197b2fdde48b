#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "superstate/pomdp.hpp"

namespace superstate {

class InvalidStochasticMatrix : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DegenerateModel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dobrushin sufficient-condition report. product = (1-delta_p)(1-delta_phi);
/// the condition holds (stable) when product < 1, and 1 - product serves as an
/// analytic contraction surrogate rho.
struct StabilityReport {
    double delta_p = 0.0;
    double delta_phi = 0.0;
    double product = 0.0;
    bool stable = false;
    double rho_dobrushin = 0.0;
};

/// Empirical one-step filter contraction estimate over sampled belief pairs.
/// rho_hat = 1 - max_ratio; contractive is false when max_ratio reaches 1
/// (within 1e-9), i.e. no uniform one-step contraction was observed.
struct ContractionEstimate {
    double rho_hat = 0.0;
    double max_ratio = 0.0;
    BeliefState worst_a;
    BeliefState worst_b;
    int worst_action = -1;
    int worst_obs = -1;
    int n_pairs = 0;
    bool contractive = false;
};

/// Minimum pairwise row overlap of a row-stochastic matrix (n_rows x n_cols,
/// row-major). Throws InvalidStochasticMatrix if some row is not a
/// probability vector.
double dobrushin(std::span<const double> matrix, int n_rows, int n_cols);

/// min over actions a of dobrushin(P(.|.,a)).
double transition_dobrushin(const PomdpModel& model);

StabilityReport stability_check(const PomdpModel& model);

/// Maximizes TV(K_{a,y} pi, K_{a,y} pi') / TV(pi, pi') over n_pairs
/// Dirichlet-uniform belief pairs plus all simplex-vertex pairs and every
/// (a, y) where both updates are defined. Pair i is generated from a
/// sub-stream derived from (seed, i), so enlarging n_pairs extends the sample
/// without changing earlier pairs.
ContractionEstimate estimate_rho(const PomdpModel& model, int n_pairs, std::uint64_t seed);

/// Maximum observed TV distance between beliefs of distinct positive-
/// probability histories that share the same length-l suffix (hence the same
/// superstate). Prefix lengths are sampled in [0, max_prefix_len]; pairs whose
/// forced suffix has zero probability are resampled. Returns 0 when no valid
/// pair is found, and also when max_total_len < l makes pairs impossible.
double lemma1_gap(const PomdpModel& model, int l, int n_samples, std::uint64_t seed,
                  int max_prefix_len = 8, int max_total_len = -1);

}  // namespace superstate
