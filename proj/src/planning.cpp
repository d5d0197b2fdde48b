#include "superstate/planning.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <unordered_map>

#include "simplex_lp.hpp"
#include "superstate/bounds.hpp"

namespace superstate {

ValueTable value_iteration(const SuperstateMdp& smdp, double tol, int max_iter) {
    if (tol <= 0.0) throw std::invalid_argument("value_iteration: tol must be > 0");
    const int n = smdp.num_states();
    const int na = smdp.n_actions;
    std::vector<double> v(n, 0.0), v_next(n, 0.0);
    double residual = 0.0;
    int it = 0;
    for (; it < max_iter; ++it) {
        residual = 0.0;
        for (int b = 0; b < n; ++b) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < na; ++a) {
                double q = smdp.rew(b, a);
                double acc = 0.0;
                const double* row = &smdp.transition[(static_cast<std::size_t>(a) * n + b) * n];
                for (int b2 = 0; b2 < n; ++b2) acc += row[b2] * v[b2];
                q += smdp.gamma * acc;
                best = std::max(best, q);
            }
            v_next[b] = best;
            residual = std::max(residual, std::abs(v_next[b] - v[b]));
        }
        std::swap(v, v_next);
        if (residual <= tol) break;
    }
    if (residual > tol) throw NotConverged("value_iteration: residual " + std::to_string(residual) +
                                           " above tol after " + std::to_string(max_iter) + " sweeps",
                                           residual);

    ValueTable table;
    table.iterations = it + 1;
    table.q_values.assign(static_cast<std::size_t>(n) * na, 0.0);
    table.values.assign(n, 0.0);
    table.greedy.assign(n, 0);
    table.residual = 0.0;
    for (int b = 0; b < n; ++b) {
        double best = -std::numeric_limits<double>::infinity();
        int best_a = 0;
        for (int a = 0; a < na; ++a) {
            double q = smdp.rew(b, a);
            double acc = 0.0;
            const double* row = &smdp.transition[(static_cast<std::size_t>(a) * n + b) * n];
            for (int b2 = 0; b2 < n; ++b2) acc += row[b2] * v[b2];
            q += smdp.gamma * acc;
            table.q_values[static_cast<std::size_t>(b) * na + a] = q;
            if (q > best) {
                best = q;
                best_a = a;
            }
        }
        table.values[b] = best;
        table.greedy[b] = best_a;
        table.residual = std::max(table.residual, std::abs(best - v[b]));
    }
    return table;
}

PolicyValues policy_evaluation(const SuperstateMdp& smdp, std::span<const double> policy, EvalMethod method,
                               double tol) {
    const int n = smdp.num_states();
    const int na = smdp.n_actions;
    if (policy.size() != static_cast<std::size_t>(n) * na)
        throw std::invalid_argument("policy_evaluation: policy has wrong size");
    for (int b = 0; b < n; ++b) {
        double sum = 0.0;
        for (int a = 0; a < na; ++a) {
            const double p = policy[static_cast<std::size_t>(b) * na + a];
            if (p < 0.0) throw std::invalid_argument("policy_evaluation: negative policy entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTol)
            throw std::invalid_argument("policy_evaluation: policy row " + std::to_string(b) + " is not stochastic");
    }

    PolicyValues out;
    const std::size_t dim = static_cast<std::size_t>(n) * na;
    out.q.assign(dim, 0.0);

    if (method == EvalMethod::exact_linear_solve) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(dim, dim);
        Eigen::VectorXd rhs(dim);
        for (int b = 0; b < n; ++b) {
            for (int a = 0; a < na; ++a) {
                const std::size_t k = static_cast<std::size_t>(b) * na + a;
                rhs(k) = smdp.rew(b, a);
                const double* row = &smdp.transition[(static_cast<std::size_t>(a) * n + b) * n];
                for (int b2 = 0; b2 < n; ++b2) {
                    if (row[b2] == 0.0) continue;
                    for (int a2 = 0; a2 < na; ++a2) {
                        const double w = policy[static_cast<std::size_t>(b2) * na + a2];
                        if (w == 0.0) continue;
                        A(k, static_cast<std::size_t>(b2) * na + a2) -= smdp.gamma * row[b2] * w;
                    }
                }
            }
        }
        Eigen::VectorXd q = A.partialPivLu().solve(rhs);
        for (std::size_t k = 0; k < dim; ++k) out.q[k] = q(k);
        out.iterations = 0;
    } else {
        std::vector<double> q(dim, 0.0), q_next(dim, 0.0), v(n, 0.0);
        const int max_iter = 1000000;
        int it = 0;
        for (; it < max_iter; ++it) {
            for (int b2 = 0; b2 < n; ++b2) {
                double acc = 0.0;
                for (int a2 = 0; a2 < na; ++a2)
                    acc += policy[static_cast<std::size_t>(b2) * na + a2] * q[static_cast<std::size_t>(b2) * na + a2];
                v[b2] = acc;
            }
            double diff = 0.0;
            for (int b = 0; b < n; ++b) {
                for (int a = 0; a < na; ++a) {
                    double acc = 0.0;
                    const double* row = &smdp.transition[(static_cast<std::size_t>(a) * n + b) * n];
                    for (int b2 = 0; b2 < n; ++b2) acc += row[b2] * v[b2];
                    const std::size_t k = static_cast<std::size_t>(b) * na + a;
                    q_next[k] = smdp.rew(b, a) + smdp.gamma * acc;
                    diff = std::max(diff, std::abs(q_next[k] - q[k]));
                }
            }
            std::swap(q, q_next);
            if (diff <= tol) break;
        }
        out.q = std::move(q);
        out.iterations = it + 1;
    }

    out.v.assign(n, 0.0);
    for (int b = 0; b < n; ++b) {
        double acc = 0.0;
        for (int a = 0; a < na; ++a) acc += policy[static_cast<std::size_t>(b) * na + a] * out.q[static_cast<std::size_t>(b) * na + a];
        out.v[b] = acc;
    }
    return out;
}

// ---------------------------------------------------------------------------
// depth-limited oracle
// ---------------------------------------------------------------------------

namespace detail {

namespace {

struct BeliefKey {
    std::vector<double> probs;
    int depth;
    friend bool operator==(const BeliefKey&, const BeliefKey&) = default;
};

struct BeliefKeyHash {
    std::size_t operator()(const BeliefKey& k) const {
        std::uint64_t h = 0xcbf29ce484222325ull ^ static_cast<std::uint64_t>(k.depth);
        for (double p : k.probs) {
            std::uint64_t bits;
            std::memcpy(&bits, &p, sizeof bits);
            h = (h ^ bits) * 0x100000001b3ull;
        }
        return static_cast<std::size_t>(h);
    }
};

class BudgetExceeded {};

class MemoExpectimax {
public:
    MemoExpectimax(const PomdpModel& m, long node_budget) : m_(m), budget_(node_budget) {}

    double eval(const BeliefState& belief, int depth) {
        if (depth == 0) return 0.0;
        if (--budget_ < 0) throw BudgetExceeded{};
        BeliefKey key{belief.probs, depth};
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        double best = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < m_.n_actions; ++a) {
            double val = expected_reward(m_, belief, a);
            const auto sig = obs_likelihood(m_, belief, a);
            double acc = 0.0;
            for (int y = 0; y < m_.n_obs; ++y) {
                if (sig[y] <= 0.0) continue;
                acc += sig[y] * eval(belief_update(m_, belief, a, y), depth - 1);
            }
            val += m_.gamma * acc;
            best = std::max(best, val);
        }
        memo_.emplace(std::move(key), best);
        return best;
    }

private:
    const PomdpModel& m_;
    long budget_;
    std::unordered_map<BeliefKey, double, BeliefKeyHash> memo_;
};

using Vec = std::vector<double>;

// Drops vectors whose advantage over the kept set is <= tol everywhere on the
// simplex; keeping extra vectors is always sound, so LP hiccups keep.
std::vector<Vec> prune_vectors(std::vector<Vec> g, double tol = 1e-10) {
    // pointwise-domination prefilter
    std::vector<bool> keep_mask(g.size(), true);
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (i == j) continue;
            bool all_ge = true, any_gt = false;
            for (std::size_t k = 0; k < g[i].size(); ++k) {
                if (g[j][k] < g[i][k] - 1e-13) {
                    all_ge = false;
                    break;
                }
                if (g[j][k] > g[i][k] + 1e-13) any_gt = true;
            }
            if (all_ge && (any_gt || j < i)) {  // ties keep the lowest index
                keep_mask[i] = false;
                break;
            }
        }
    }
    std::vector<Vec> filtered;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (keep_mask[i]) filtered.push_back(std::move(g[i]));

    std::vector<Vec> kept;
    for (auto& cand : filtered) {
        if (kept.empty()) {
            kept.push_back(std::move(cand));
            continue;
        }
        const int n = static_cast<int>(cand.size());
        std::vector<double> d(kept.size() * n);
        for (std::size_t i = 0; i < kept.size(); ++i)
            for (int k = 0; k < n; ++k) d[i * n + k] = cand[k] - kept[i][k];
        const GameResult game = max_min_over_simplex(d, static_cast<int>(kept.size()), n);
        if (!game.ok || game.value > tol) kept.push_back(std::move(cand));
    }
    return kept;
}

std::vector<Vec> cross_sum(const std::vector<Vec>& a, const std::vector<Vec>& b) {
    std::vector<Vec> out;
    out.reserve(a.size() * b.size());
    for (const auto& u : a) {
        for (const auto& v : b) {
            Vec w(u.size());
            for (std::size_t k = 0; k < u.size(); ++k) w[k] = u[k] + v[k];
            out.push_back(std::move(w));
        }
    }
    return out;
}

}  // namespace

double expectimax_value(const PomdpModel& m, const BeliefState& belief, int depth) {
    MemoExpectimax tree(m, std::numeric_limits<long>::max());
    return tree.eval(belief, depth);
}

// Exact finite-horizon DP over value vectors: the depth-d value function is
// piecewise linear and convex, V_d(pi) = max over the set of <vec, pi>, with
// the set built by per-observation backups and cross-sums, pruned exactly.
class AlphaDp {
public:
    AlphaDp(const PomdpModel& m, int depth) {
        const int ns = m.n_states;
        std::vector<Vec> g{Vec(ns, 0.0)};
        // back-projection matrices (M_ay' alpha)(s) = sum_s' P(s'|s,a) Phi(y|s') alpha(s')
        for (int step = 0; step < depth; ++step) {
            std::vector<Vec> next;
            for (int a = 0; a < m.n_actions; ++a) {
                Vec r_a(ns);
                for (int s = 0; s < ns; ++s) r_a[s] = m.rew(s, a);
                std::vector<Vec> acc{std::move(r_a)};
                for (int y = 0; y < m.n_obs; ++y) {
                    std::vector<Vec> part;
                    part.reserve(g.size());
                    for (const auto& alpha : g) {
                        Vec back(ns, 0.0);
                        for (int s = 0; s < ns; ++s) {
                            double sum = 0.0;
                            for (int s2 = 0; s2 < ns; ++s2) sum += m.trans(a, s, s2) * m.obs(s2, y) * alpha[s2];
                            back[s] = m.gamma * sum;
                        }
                        part.push_back(std::move(back));
                    }
                    acc = prune_vectors(cross_sum(acc, prune_vectors(std::move(part))));
                }
                next.insert(next.end(), acc.begin(), acc.end());
            }
            g = prune_vectors(std::move(next));
            if (g.size() > 200000) throw std::runtime_error("alpha_dp: vector set exploded");
        }
        set_ = std::move(g);
    }

    double eval(const BeliefState& belief) const {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& alpha : set_) {
            double v = 0.0;
            for (std::size_t s = 0; s < alpha.size(); ++s) v += alpha[s] * belief.probs[s];
            best = std::max(best, v);
        }
        return best;
    }

    std::size_t set_size() const { return set_.size(); }

private:
    std::vector<Vec> set_;
};

double alpha_dp_value(const PomdpModel& m, const BeliefState& belief, int depth) {
    if (depth == 0) return 0.0;
    return AlphaDp(m, depth).eval(belief);
}

// Shared evaluation strategy: memoized recursion while the tree stays small,
// exact vector DP once the node budget overflows. Both routes compute the
// same depth-limited optimum.
class DepthOracle {
public:
    DepthOracle(const PomdpModel& m, int depth) : m_(m), depth_(depth) {}

    double eval(const BeliefState& belief) {
        if (depth_ == 0) return 0.0;
        if (!dp_) {
            MemoExpectimax tree(m_, 4000000);
            try {
                return tree.eval(belief, depth_);
            } catch (const BudgetExceeded&) {
                dp_ = std::make_unique<AlphaDp>(m_, depth_);
            }
        }
        return dp_->eval(belief);
    }

private:
    const PomdpModel& m_;
    int depth_;
    std::unique_ptr<AlphaDp> dp_;
};

}  // namespace detail

OracleValue belief_tree_value(const PomdpModel& m, const BeliefState& belief, int depth) {
    if (depth < 0) throw std::invalid_argument("belief_tree_value: depth must be >= 0");
    OracleValue out;
    out.depth = depth;
    out.truncation_bound = std::pow(m.gamma, depth) * m.r_bar / (1.0 - m.gamma);
    detail::DepthOracle oracle(m, depth);
    out.value = oracle.eval(belief);
    return out;
}

int default_oracle_depth(const PomdpModel& m, double slack_fraction) {
    if (m.r_bar == 0.0 || m.gamma == 0.0) return 1;
    int d = 0;
    double bound = m.r_bar / (1.0 - m.gamma);
    const double target = slack_fraction * m.r_bar;
    while (bound > target && d < 10000) {
        bound *= m.gamma;
        ++d;
    }
    return d;
}

std::vector<Theorem2Record> theorem2_gap(const PomdpModel& m, const SuperstateMdp& smdp,
                                         const std::vector<History>& histories, int depth, double rho) {
    const ValueTable table = value_iteration(smdp, 1e-10, 200000);
    detail::DepthOracle oracle(m, depth);
    const double truncation = std::pow(m.gamma, depth) * m.r_bar / (1.0 - m.gamma);

    bounds::BoundInputs in;
    in.r_bar = m.r_bar;
    in.gamma = m.gamma;
    in.rho = rho;
    in.l = smdp.l;

    std::vector<Theorem2Record> records;
    records.reserve(histories.size());
    for (const auto& h : histories) {
        Theorem2Record rec;
        rec.history = h;
        const BeliefState belief = belief_of_history(m, h);
        rec.oracle_value = oracle.eval(belief);
        const int b = smdp.find(group(h, smdp.l));
        if (b < 0) throw std::invalid_argument("theorem2_gap: history maps to an unmaterialized superstate");
        rec.smdp_value = table.values[b];
        rec.gap = std::abs(rec.oracle_value - rec.smdp_value);
        rec.xi_bound = bounds::xi_smdp_pomdp(in);
        rec.truncation_bound = truncation;
        rec.slack = rec.xi_bound + rec.truncation_bound - rec.gap;
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace superstate
