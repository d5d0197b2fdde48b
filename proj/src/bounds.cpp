#include "superstate/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace superstate {
namespace bounds {

namespace {

constexpr double kSimplexTol = 1e-9;

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

void check_simplex(std::span<const double> v, const char* name) {
    double sum = 0.0;
    for (double x : v) {
        if (x < 0.0) throw NotSimplex(std::string(name) + " has a negative entry");
        sum += x;
    }
    if (std::abs(sum - 1.0) > kSimplexTol) throw NotSimplex(std::string(name) + " does not sum to 1");
}

double linf(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

void check_common(const BoundInputs& in) {
    require(in.r_bar >= 0.0, "r_bar must be >= 0");
    require(in.gamma >= 0.0 && in.gamma < 1.0, "gamma must lie in [0, 1)");
    require(in.rho > 0.0 && in.rho <= 1.0, "rho must lie in (0, 1]");
    require(in.l >= 0, "l must be >= 0");
}

}  // namespace

double lemma2_rhs(std::span<const double> a, std::span<const double> b, std::span<const double> c,
                  std::span<const double> d) {
    if (a.size() != b.size() || a.size() != c.size() || a.size() != d.size())
        throw DimensionMismatch("lemma2_rhs: vectors must share one dimension");
    check_simplex(a, "a");
    check_simplex(c, "c");
    for (double x : b)
        if (x < 0.0) throw std::invalid_argument("lemma2_rhs: b has a negative entry");
    for (double x : d)
        if (x < 0.0) throw std::invalid_argument("lemma2_rhs: d has a negative entry");

    double l1 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) l1 += std::abs(a[i] - c[i]);
    std::vector<double> bd(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) bd[i] = b[i] - d[i];
    const double binf = linf(b), dinf = linf(d), bdinf = linf(bd);
    return 0.5 * l1 * std::max(binf, dinf) + bdinf - 0.25 * l1 * bdinf;
}

CouplingPlan greedy_coupling(std::span<const double> v1, std::span<const double> v2) {
    if (v1.size() != v2.size()) throw DimensionMismatch("greedy_coupling: dimension mismatch");
    check_simplex(v1, "v1");
    check_simplex(v2, "v2");
    const int n = static_cast<int>(v1.size());
    CouplingPlan plan;
    plan.n = n;
    plan.alpha.assign(static_cast<std::size_t>(n) * n, 0.0);

    std::vector<double> delta(n);
    for (int i = 0; i < n; ++i) delta[i] = v1[i] - v2[i];
    for (int i = 0; i < n; ++i) {
        if (delta[i] <= 0.0) continue;
        for (int j = 0; j < n && delta[i] > 0.0; ++j) {
            if (delta[j] >= 0.0) continue;
            const double move = std::min(delta[i], -delta[j]);
            plan.alpha[static_cast<std::size_t>(i) * n + j] = move;
            delta[i] -= move;
            delta[j] += move;
            plan.total += move;
        }
    }
    return plan;
}

double xi_smdp_pomdp(const BoundInputs& in) {
    check_common(in);
    const double decay = std::pow(1.0 - in.rho, in.l);
    const double g = in.gamma;
    const double first = 2.0 * in.r_bar * decay / (1.0 - g);
    const double second = 2.0 * in.r_bar * g * decay / ((1.0 - g) * ((1.0 - g) + g * decay));
    return first + second;
}

double corollary1_bound(double r_bar, double gamma, double rho, double n_superstates, int n_obs,
                        int n_actions) {
    require(r_bar >= 0.0, "r_bar must be >= 0");
    require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
    require(rho > 0.0 && rho < 1.0, "rho must lie in (0, 1) for the N-form bound");
    require(n_superstates >= 1.0, "N must be >= 1");
    require(n_obs >= 1 && n_actions >= 1 && n_obs * n_actions >= 2, "|Y||A| must be >= 2");
    const double kappa = std::log(1.0 / (1.0 - rho)) / std::log(static_cast<double>(n_obs) * n_actions);
    const double n_pow = std::pow(n_superstates, -kappa);
    const double lead = n_pow / (1.0 - rho);
    const double g = gamma;
    return 2.0 * r_bar * lead / (1.0 - g) +
           4.0 * r_bar * g * lead / ((1.0 - g) * (2.0 * (1.0 - g) + g * n_pow));
}

double warmup_length(long tau, double rho_prime) {
    require(tau >= 1, "tau must be >= 1");
    require(rho_prime > 0.0 && rho_prime <= 1.0, "rho' must lie in (0, 1]");
    if (rho_prime >= 1.0) return 0.0;  // mixing is immediate
    return std::log(static_cast<double>(tau)) / (2.0 * std::log(1.0 / (1.0 - rho_prime)));
}

double xi_td_error(const BoundInputs& in) {
    check_common(in);
    require(in.rho_prime > 0.0 && in.rho_prime <= 1.0, "rho' must lie in (0, 1]");
    require(in.radius > 0.0, "R must be > 0");
    require(in.xi_fa >= 0.0, "xi_fa must be >= 0");
    require(static_cast<double>(in.tau) > 4.0 * (1.0 - in.gamma) * (1.0 - in.gamma),
            "tau must exceed 4 (1-gamma)^2");

    const double g = in.gamma;
    const double r = in.r_bar;
    const double R = in.radius;
    const double sqrt_tau = std::sqrt(static_cast<double>(in.tau));
    const double contraction = 1.0 - 2.0 * (1.0 - g) / sqrt_tau;
    require(contraction > 0.0 && contraction < 1.0, "tau too small for the stated stepsize");
    const double decay_tau = std::pow(contraction, static_cast<double>(in.tau));
    const double theta_init_dist = 2.0 * R;  // worst case inside the radius-R ball

    const double c2 = 2.0 * r + 12.0 * R;
    const double decay_l = std::pow(1.0 - in.rho, in.l);
    const double mix_poly = R * r + R * R * (1.0 + (1.0 - in.rho) * g);

    double warm_term;
    double log_term;
    if (in.rho_prime >= 1.0) {
        warm_term = 0.0;  // (1-rho')^{l'} with rho' = 1: instant mixing
        log_term = 0.0;
    } else {
        const double lw = warmup_length(in.tau, in.rho_prime);
        warm_term = std::pow(1.0 - in.rho_prime, lw) * mix_poly;
        // the display's log ratio, in positive form: log tau / log(1/(1-rho'))
        log_term = c2 * (r + 2.0 * R) * std::log(static_cast<double>(in.tau)) /
                   (sqrt_tau * std::log(1.0 / (1.0 - in.rho_prime)));
    }

    const double bracket = (1.0 - decay_tau) / (1.0 - g);
    const double inner = (r + 2.0 * R) * (r + 2.0 * R) / (2.0 * sqrt_tau) + log_term + warm_term +
                         2.0 * R * r * decay_l + (2.0 / in.rho_prime) * decay_l * mix_poly;
    return in.xi_fa + decay_tau * theta_init_dist + bracket * inner;
}

RegretBoundTerms regret_bound_terms(const BoundInputs& in, std::span<const double> per_iter_fa) {
    check_common(in);
    require(in.rho_prime > 0.0 && in.rho_prime <= 1.0, "rho' must lie in (0, 1]");
    require(in.radius > 0.0, "R must be > 0");
    require(in.policy_updates >= 1, "M must be >= 1");
    if (per_iter_fa.size() != static_cast<std::size_t>(in.policy_updates))
        throw DimensionMismatch("regret_bound_terms: per_iter_fa must have M entries");

    RegretBoundTerms out;
    double mean_fa = 0.0;
    for (double f : per_iter_fa) {
        require(f >= 0.0, "per-iteration FA errors must be >= 0");
        mean_fa += f;
    }
    mean_fa /= static_cast<double>(in.policy_updates);
    out.xi_fa = 2.0 * mean_fa;

    const double g = in.gamma;
    const double r = in.r_bar;
    const double R = in.radius;
    const double sqrt_tau = std::sqrt(static_cast<double>(in.tau));
    const double decay_tau = std::pow(1.0 - 2.0 * (1.0 - g) / sqrt_tau, static_cast<double>(in.tau));
    const double decay_l = std::pow(1.0 - in.rho, in.l);
    const double bracket = (1.0 - decay_tau) / (1.0 - g);
    const double mix_poly = R * r + R * R * (1.0 + (1.0 - in.rho) * g);
    out.xi_ha = decay_l * bracket * (4.0 * R * r + (4.0 / in.rho_prime) * mix_poly) +
                2.0 * r / (1.0 - g) +
                2.0 * r * g / ((1.0 - g) * (2.0 * (1.0 - g) + decay_l * g));

    const double horizon = static_cast<double>(in.policy_updates) *
                           (static_cast<double>(in.tau) + warmup_length(in.tau, in.rho_prime));
    out.order_term = std::pow(horizon, 0.75) * std::log(horizon);
    return out;
}

AisBounds ais_bounds(double epsilon, double delta, double r_bar, double gamma) {
    require(epsilon >= 0.0, "epsilon must be >= 0");
    require(delta >= 0.0, "delta must be >= 0");
    require(r_bar >= 0.0, "r_bar must be >= 0");
    require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
    AisBounds out;
    out.original = epsilon / (1.0 - gamma) + 2.0 * gamma * delta * r_bar / ((1.0 - gamma) * (1.0 - gamma));
    out.improved = epsilon / (1.0 - gamma + delta / 4.0) +
                   gamma * delta * r_bar / ((1.0 - gamma) * (1.0 - gamma + delta / 2.0));
    return out;
}

}  // namespace bounds
}  // namespace superstate
