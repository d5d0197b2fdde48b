#pragma once

#include <vector>

#include "superstate/superstate.hpp"

namespace superstate {

class NotConverged : public std::runtime_error {
public:
    NotConverged(const std::string& what, double residual_) : std::runtime_error(what), residual(residual_) {}
    double residual;
};

/// Optimal values for a superstate MDP. greedy ties resolve to the lowest
/// action index; residual is the final sup-norm Bellman residual.
struct ValueTable {
    std::vector<double> values;    // per superstate
    std::vector<double> q_values;  // [B][a]
    std::vector<int> greedy;       // per superstate
    double residual = 0.0;
    int iterations = 0;

    double q(int b, int a, int n_actions) const { return q_values[static_cast<std::size_t>(b) * n_actions + a]; }
};

/// Value iteration to sup-norm Bellman residual <= tol. Throws NotConverged
/// (carrying the residual) if max_iter sweeps do not suffice.
ValueTable value_iteration(const SuperstateMdp& smdp, double tol = 1e-10, int max_iter = 100000);

struct PolicyValues {
    std::vector<double> q;  // [B][a]
    std::vector<double> v;  // per superstate
    int iterations = 0;     // 0 for the exact solve
};

enum class EvalMethod { exact_linear_solve, iterative };

/// Fixed-point Q and V of a stochastic policy (rows [B][a]). The exact method
/// solves the linear system; the iterative method applies the Bellman policy
/// operator until the sup-norm step is <= tol.
PolicyValues policy_evaluation(const SuperstateMdp& smdp, std::span<const double> policy,
                               EvalMethod method = EvalMethod::exact_linear_solve, double tol = 1e-12);

/// Depth-limited optimal value of a belief: V_0 = 0,
/// V_d(pi) = max_a [ r(pi,a) + gamma * sum_y sigma(pi,y,a) V_{d-1}(pi') ].
struct OracleValue {
    double value = 0.0;
    double truncation_bound = 0.0;  // gamma^depth * r_bar / (1 - gamma)
    int depth = 0;
};

/// Evaluates V_depth exactly. Zero-probability observation branches are
/// skipped. Shallow trees are evaluated by memoized recursion; deeper ones by
/// exact finite-horizon dynamic programming over value vectors, which yields
/// the same number without enumerating the tree.
OracleValue belief_tree_value(const PomdpModel& model, const BeliefState& belief, int depth);

/// Smallest depth d with gamma^d * r_bar/(1-gamma) <= slack_fraction * r_bar.
int default_oracle_depth(const PomdpModel& model, double slack_fraction = 0.05);

struct Theorem2Record {
    History history;
    double oracle_value = 0.0;      // depth-limited V* at the history's belief
    double smdp_value = 0.0;        // optimal superstate value at G(history)
    double gap = 0.0;               // |oracle_value - smdp_value|
    double xi_bound = 0.0;          // evaluated at the caller-supplied rho
    double truncation_bound = 0.0;
    double slack = 0.0;             // xi_bound + truncation_bound - gap
};

/// Measures |V*(pi(H)) - V~(G(H))| for each history against the closed-form
/// bound evaluated at the caller-supplied rho.
std::vector<Theorem2Record> theorem2_gap(const PomdpModel& model, const SuperstateMdp& smdp,
                                         const std::vector<History>& histories, int depth, double rho);

namespace detail {
/// Exposed for tests: the two oracle strategies must agree.
double expectimax_value(const PomdpModel& model, const BeliefState& belief, int depth);
double alpha_dp_value(const PomdpModel& model, const BeliefState& belief, int depth);
}  // namespace detail

}  // namespace superstate
