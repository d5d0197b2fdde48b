#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace superstate {
namespace bounds {

class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NotSimplex : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Shared parameter block for the closed-form bound evaluators. Evaluators
/// check only the fields they use.
struct BoundInputs {
    double r_bar = 1.0;       // >= 0
    double gamma = 0.9;       // in [0, 1)
    double rho = 0.5;         // in (0, 1]
    double rho_prime = 0.5;   // in (0, 1]
    int l = 1;                // >= 0
    long tau = 10000;         // >= 1
    double radius = 1.0;      // parameter ball radius R > 0
    double xi_fa = 0.0;       // function-approximation floor, >= 0
    int n_actions = 2;
    int n_obs = 2;
    int policy_updates = 1;   // M >= 1
};

/// Right-hand side of the algebraic product-difference inequality:
///   ||a-c||_1/2 * max(||b||_inf, ||d||_inf) + ||b-d||_inf
///     - ||a-c||_1/4 * ||b-d||_inf.
/// a and c must lie on the simplex; all entries nonnegative.
double lemma2_rhs(std::span<const double> a, std::span<const double> b, std::span<const double> c,
                  std::span<const double> d);

/// Nonnegative transport plan moving the surplus of v1 over v2 onto the
/// deficit, built greedily in index order. total equals TV(v1, v2) and the
/// row/column marginals equal the positive/negative parts of v1 - v2.
struct CouplingPlan {
    int n = 0;
    std::vector<double> alpha;  // [i][j] dense, zero off the surplus x deficit support
    double total = 0.0;

    double at(int i, int j) const { return alpha[static_cast<std::size_t>(i) * n + j]; }
};

CouplingPlan greedy_coupling(std::span<const double> v1, std::span<const double> v2);

/// Optimal-value gap bound between the POMDP and its superstate MDP:
///   2 r (1-rho)^l / (1-gamma)
///     + 2 r gamma (1-rho)^l / ((1-gamma) ((1-gamma) + gamma (1-rho)^l)).
double xi_smdp_pomdp(const BoundInputs& in);

/// The same bound re-expressed through the superstate count N, with
/// kappa = log(1/(1-rho)) / log(|Y||A|).
double corollary1_bound(double r_bar, double gamma, double rho, double n_superstates, int n_obs,
                        int n_actions);

/// Finite-time TD error bound. The warmup exponent and the log ratio are
/// evaluated in their positive form log(tau) / (2 log(1/(1-rho'))); the
/// initial parameter distance is taken at its worst case 2R.
double xi_td_error(const BoundInputs& in);

/// Positive-form warmup length log(tau) / (2 log(1/(1-rho_prime))).
double warmup_length(long tau, double rho_prime);

struct RegretBoundTerms {
    double xi_fa = 0.0;
    double xi_ha = 0.0;
    double order_term = 0.0;  // T^(3/4) log T, reported without a constant
};

/// Regret decomposition: xi_FA = 2 mean(per_iter_fa); xi_HA per the regret
/// bound display; order_term uses T = M (tau + l').
RegretBoundTerms regret_bound_terms(const BoundInputs& in, std::span<const double> per_iter_fa);

struct AisBounds {
    double original = 0.0;
    double improved = 0.0;
};

/// Approximate-information-state value bounds:
///   original  eps/(1-gamma) + 2 gamma delta r / (1-gamma)^2
///   improved  eps/(1-gamma+delta/4) + gamma delta r / ((1-gamma)(1-gamma+delta/2)).
AisBounds ais_bounds(double epsilon, double delta, double r_bar, double gamma);

}  // namespace bounds
}  // namespace superstate
