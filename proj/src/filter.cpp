#include "superstate/filter.hpp"

#include <algorithm>
#include <cmath>

namespace superstate {

double dobrushin(std::span<const double> matrix, int n_rows, int n_cols) {
    if (n_rows <= 0 || n_cols <= 0 || matrix.size() != static_cast<std::size_t>(n_rows) * n_cols)
        throw InvalidStochasticMatrix("dobrushin: matrix size does not match dimensions");
    for (int i = 0; i < n_rows; ++i) {
        double sum = 0.0;
        for (int k = 0; k < n_cols; ++k) {
            const double p = matrix[static_cast<std::size_t>(i) * n_cols + k];
            if (p < 0.0) throw InvalidStochasticMatrix("dobrushin: row " + std::to_string(i) + " has a negative entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTol)
            throw InvalidStochasticMatrix("dobrushin: row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
    if (n_rows == 1) return 1.0;
    double best = 1.0;
    for (int i = 0; i < n_rows; ++i) {
        for (int j = i + 1; j < n_rows; ++j) {
            double overlap = 0.0;
            for (int k = 0; k < n_cols; ++k) {
                overlap += std::min(matrix[static_cast<std::size_t>(i) * n_cols + k],
                                    matrix[static_cast<std::size_t>(j) * n_cols + k]);
            }
            best = std::min(best, overlap);
        }
    }
    return best;
}

double transition_dobrushin(const PomdpModel& m) {
    double best = 1.0;
    const std::size_t page = static_cast<std::size_t>(m.n_states) * m.n_states;
    for (int a = 0; a < m.n_actions; ++a) {
        std::span<const double> slice(&m.transition[a * page], page);
        best = std::min(best, dobrushin(slice, m.n_states, m.n_states));
    }
    return best;
}

StabilityReport stability_check(const PomdpModel& m) {
    StabilityReport rep;
    rep.delta_p = transition_dobrushin(m);
    rep.delta_phi = dobrushin(m.obs_kernel, m.n_states, m.n_obs);
    rep.product = (1.0 - rep.delta_p) * (1.0 - rep.delta_phi);
    rep.stable = rep.product < 1.0;
    rep.rho_dobrushin = 1.0 - rep.product;
    return rep;
}

namespace {

// Belief pair i of the sampling schedule: all vertex pairs first, then
// Dirichlet draws from the sub-stream derived from (seed, i).
void make_pair(const PomdpModel& m, int i, std::uint64_t seed, BeliefState& a, BeliefState& b) {
    const int n = m.n_states;
    const int n_vertex_pairs = n * (n - 1) / 2;
    if (i < n_vertex_pairs) {
        int k = i;
        for (int x = 0; x < n; ++x) {
            for (int y = x + 1; y < n; ++y, --k) {
                if (k == 0) {
                    a.probs.assign(n, 0.0);
                    b.probs.assign(n, 0.0);
                    a.probs[x] = 1.0;
                    b.probs[y] = 1.0;
                    return;
                }
            }
        }
    }
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    a.probs = dirichlet_uniform(n, rng);
    b.probs = dirichlet_uniform(n, rng);
}

}  // namespace

ContractionEstimate estimate_rho(const PomdpModel& m, int n_pairs, std::uint64_t seed) {
    if (n_pairs < 1) throw std::invalid_argument("estimate_rho: n_pairs must be >= 1");
    ContractionEstimate est;
    est.n_pairs = n_pairs + m.n_states * (m.n_states - 1) / 2;
    est.max_ratio = -1.0;
    BeliefState pa, pb;
    for (int i = 0; i < est.n_pairs; ++i) {
        make_pair(m, i, seed, pa, pb);
        const double tv = total_variation(pa.probs, pb.probs);
        if (tv < 1e-12) continue;
        for (int a = 0; a < m.n_actions; ++a) {
            const auto sig_a = obs_likelihood(m, pa, a);
            const auto sig_b = obs_likelihood(m, pb, a);
            for (int y = 0; y < m.n_obs; ++y) {
                if (sig_a[y] <= 0.0 || sig_b[y] <= 0.0) continue;
                const BeliefState ua = belief_update(m, pa, a, y);
                const BeliefState ub = belief_update(m, pb, a, y);
                const double ratio = total_variation(ua.probs, ub.probs) / tv;
                if (ratio > est.max_ratio) {
                    est.max_ratio = ratio;
                    est.worst_a = pa;
                    est.worst_b = pb;
                    est.worst_action = a;
                    est.worst_obs = y;
                }
            }
        }
    }
    if (est.max_ratio < 0.0) throw DegenerateModel("estimate_rho: no (a, y) admits a well-defined update");
    est.rho_hat = 1.0 - est.max_ratio;
    est.contractive = est.max_ratio < 1.0 - 1e-9;
    return est;
}

double lemma1_gap(const PomdpModel& m, int l, int n_samples, std::uint64_t seed, int max_prefix_len,
                  int max_total_len) {
    if (l < 1) throw std::invalid_argument("lemma1_gap: l must be >= 1");
    if (max_total_len >= 0 && max_total_len < l) return 0.0;  // histories shorter than l equal their superstate
    const int prefix_cap = max_total_len >= 0 ? std::min(max_prefix_len, max_total_len - l) : max_prefix_len;

    double gap = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));

        // Random positive-probability prefixes realized by simulation, so the
        // scheme also works on models with sparse observation support.
        auto simulate_prefix = [&](int len) {
            History h;
            int s = sample_categorical(m.init_dist, rng);
            for (int t = 0; t < len; ++t) {
                const int a = static_cast<int>(rng.next_below(m.n_actions));
                const TrajectoryStep step = step_simulator(m, s, a, rng);
                h.steps.push_back({a, step.observation});
                s = step.next_state;
            }
            return h;
        };
        const int len1 = static_cast<int>(rng.next_below(prefix_cap + 1));
        const int len2 = static_cast<int>(rng.next_below(prefix_cap + 1));
        History h1 = simulate_prefix(len1);
        History h2 = simulate_prefix(len2);
        if (h1 == h2) continue;

        BeliefState b1, b2;
        try {
            b1 = belief_of_history(m, h1);
            b2 = belief_of_history(m, h2);
        } catch (const ZeroProbabilityObservation&) {
            continue;  // cannot happen for simulated prefixes, kept as a guard
        }

        // Common suffix: follow random actions from belief b1 and force the
        // observed outcome onto the second branch; skip if impossible there.
        bool ok = true;
        for (int t = 0; t < l && ok; ++t) {
            const int a = static_cast<int>(rng.next_below(m.n_actions));
            const auto sig1 = obs_likelihood(m, b1, a);
            const int y = sample_categorical(sig1, rng);
            if (y < 0) {
                ok = false;
                break;
            }
            const auto sig2 = obs_likelihood(m, b2, a);
            if (sig2[y] <= 0.0) {
                ok = false;
                break;
            }
            b1 = belief_update(m, b1, a, y);
            b2 = belief_update(m, b2, a, y);
        }
        if (!ok) continue;
        gap = std::max(gap, total_variation(b1.probs, b2.probs));
    }
    return gap;
}

}  // namespace superstate
