#include "superstate/learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace superstate {

std::vector<double> FeatureMap::vec(int b, int a) const {
    if (kind == Kind::one_hot) {
        std::vector<double> phi(dim, 0.0);
        phi[static_cast<std::size_t>(b) * n_actions + a] = 1.0;
        return phi;
    }
    const double* p = &values[(static_cast<std::size_t>(b) * n_actions + a) * dim];
    return std::vector<double>(p, p + dim);
}

namespace {

FeatureMap make_features_impl(int n_superstates, int n_actions, FeatureMap::Kind kind, int dim,
                              std::uint64_t seed) {
    FeatureMap f;
    f.kind = kind;
    f.n_superstates = n_superstates;
    f.n_actions = n_actions;
    if (kind == FeatureMap::Kind::one_hot) {
        f.dim = n_superstates * n_actions;
        return f;
    }
    if (dim < 1) throw std::invalid_argument("make_features: random projection needs dim >= 1");
    f.dim = dim;
    const std::size_t rows = static_cast<std::size_t>(n_superstates) * n_actions;
    f.values.resize(rows * dim);
    SplitMix64 rng(derive_seed(seed, 0x8f3a));
    double max_norm = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        double norm2 = 0.0;
        for (int k = 0; k < dim; ++k) {
            const double v = gaussian(rng);
            f.values[r * dim + k] = v;
            norm2 += v * v;
        }
        max_norm = std::max(max_norm, std::sqrt(norm2));
    }
    if (max_norm > 0.0) {
        for (double& v : f.values) v /= max_norm;
    }
    return f;
}

double norm2(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

void check_policy(std::span<const double> policy, int n, int na, const char* who) {
    if (policy.size() != static_cast<std::size_t>(n) * na)
        throw std::invalid_argument(std::string(who) + ": policy has wrong size");
    for (int b = 0; b < n; ++b) {
        double sum = 0.0;
        for (int a = 0; a < na; ++a) {
            const double p = policy[static_cast<std::size_t>(b) * na + a];
            if (p < 0.0) throw std::invalid_argument(std::string(who) + ": negative policy entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTol)
            throw std::invalid_argument(std::string(who) + ": policy row " + std::to_string(b) +
                                        " is not stochastic");
    }
}

}  // namespace

// Specialized episode loop for one-hot features with carried parameters on
// large superstate spaces. Dense per-episode passes over the feature vector
// would dominate, so the cumulative Q sum behind the softmax is aged lazily:
// a coordinate untouched since episode j contributes (i - j) copies of its
// unchanged value, settled on first touch.
void politex_big_one_hot(const PomdpModel& model, const SuperstateIndex& index, const FeatureMap& features,
                         const PolitexConfig& config, PolitexResult& res);

FeatureMap make_features(const SuperstateMdp& smdp, FeatureMap::Kind kind, int dim, std::uint64_t seed) {
    return make_features_impl(smdp.num_states(), smdp.n_actions, kind, dim, seed);
}

FeatureMap make_features(const SuperstateIndex& index, FeatureMap::Kind kind, int dim, std::uint64_t seed) {
    return make_features_impl(index.num_states(), index.n_actions, kind, dim, seed);
}

std::vector<double> project_ball(std::vector<double> theta, double radius) {
    if (radius <= 0.0) throw std::invalid_argument("project_ball: radius must be > 0");
    const double n = norm2(theta);
    if (n > radius) {
        const double scale = radius / n;
        for (double& v : theta) v *= scale;
    }
    return theta;
}

TdResult td_train(const PomdpModel& model, const SuperstateIndex& index, std::span<const double> policy,
                  const FeatureMap& features, const TdConfig& config, const StepHook& on_step) {
    const int n = index.num_states();
    const int na = index.n_actions;
    check_policy(policy, n, na, "td_train");
    return td_train(
        model, index,
        PolicyProvider([policy, na](int b, double* row) {
            const double* src = &policy[static_cast<std::size_t>(b) * na];
            for (int a = 0; a < na; ++a) row[a] = src[a];
        }),
        features, config, on_step);
}

TdResult td_train(const PomdpModel& model, const SuperstateIndex& index, const PolicyProvider& policy,
                  const FeatureMap& features, const TdConfig& config, const StepHook& on_step,
                  const std::vector<double>* theta_init) {
    const int n = index.num_states();
    const int na = index.n_actions;
    if (features.n_superstates != n || features.n_actions != na)
        throw std::invalid_argument("td_train: feature map does not match the superstate index");
    if (config.tau < 1) throw std::invalid_argument("td_train: tau must be >= 1");
    if (theta_init && theta_init->size() != static_cast<std::size_t>(features.dim))
        throw std::invalid_argument("td_train: theta_init has wrong dimension");

    TdResult res;
    res.diag.step_size_used = config.step_size > 0.0 ? config.step_size
                                                     : 1.0 / std::sqrt(static_cast<double>(config.tau));
    res.diag.radius_used = config.radius > 0.0
                               ? config.radius
                               : model.r_bar / (1.0 - model.gamma) * std::sqrt(static_cast<double>(features.dim));
    if (res.diag.radius_used <= 0.0) res.diag.radius_used = 1.0;  // zero-reward models
    res.diag.l_prime_used = std::max<long>(0, config.l_prime);
    if (config.track_visits) res.diag.visit_count.assign(static_cast<std::size_t>(n) * na, 0);

    SplitMix64 rng(config.seed);
    if (theta_init) {
        res.theta = project_ball(*theta_init, res.diag.radius_used);
    } else {
        res.theta.assign(features.dim, 0.0);
    }
    if (!theta_init && config.random_init) {
        // uniform in the radius ball: gaussian direction, radius ~ R u^(1/d)
        double nrm = 0.0;
        for (double& v : res.theta) {
            v = gaussian(rng);
            nrm += v * v;
        }
        nrm = std::sqrt(nrm);
        const double r = res.diag.radius_used *
                         std::pow(rng.next_double(), 1.0 / static_cast<double>(features.dim));
        if (nrm > 0.0)
            for (double& v : res.theta) v *= r / nrm;
    }

    const double eps = res.diag.step_size_used;
    const double radius = res.diag.radius_used;
    const long total = config.tau + res.diag.l_prime_used;
    const bool one_hot = features.kind == FeatureMap::Kind::one_hot;

    // feature norms bound the per-update magnitude ||theta' - theta|| <= eps
    // |td_error| ||phi||; projection only shrinks the step further
    std::vector<double> phi_norm;
    if (!one_hot) {
        phi_norm.assign(static_cast<std::size_t>(n) * na, 0.0);
        for (int b = 0; b < n; ++b)
            for (int a = 0; a < na; ++a)
                phi_norm[static_cast<std::size_t>(b) * na + a] = norm2(features.vec(b, a));
    }

    int s = sample_categorical(model.init_dist, rng);
    Superstate b{};  // empty history
    int bi = 0;
    std::vector<double> row(na);
    auto policy_row = [&](int idx) {
        policy(idx, row.data());
        return std::span<const double>(row.data(), static_cast<std::size_t>(na));
    };
    int a = sample_categorical(policy_row(bi), rng);

    double reward_sum = 0.0;
    double theta_norm_sq = 0.0;
    for (double v : res.theta) theta_norm_sq += v * v;
    const double radius_sq = radius * radius;

    for (long t = 0; t < total; ++t) {
        const TrajectoryStep step = step_simulator(model, s, a, rng);
        reward_sum += step.reward;
        const Superstate b2 = extend(b, a, step.observation, index.l);
        const int bi2 = index.find(b2);
        if (bi2 < 0)
            throw std::logic_error("td_train: trajectory reached a superstate missing from the index");
        const int a2 = sample_categorical(policy_row(bi2), rng);

        if (t >= res.diag.l_prime_used) {
            const double q_next = features.dot(bi2, a2, res.theta);
            const double q_cur = features.dot(bi, a, res.theta);
            const double td_error = step.reward + model.gamma * q_next - q_cur;
            const double coef = eps * td_error;
            if (one_hot) {
                double& cell = res.theta[static_cast<std::size_t>(bi) * na + a];
                theta_norm_sq += (cell + coef) * (cell + coef) - cell * cell;
                cell += coef;
                res.diag.max_step_norm = std::max(res.diag.max_step_norm, std::abs(coef));
            } else {
                features.axpy(bi, a, coef, res.theta);
                theta_norm_sq = 0.0;
                for (double v : res.theta) theta_norm_sq += v * v;
                res.diag.max_step_norm =
                    std::max(res.diag.max_step_norm,
                             std::abs(coef) * phi_norm[static_cast<std::size_t>(bi) * na + a]);
            }
            if (theta_norm_sq > radius_sq) {
                const double scale = radius / std::sqrt(theta_norm_sq);
                for (double& v : res.theta) v *= scale;
                theta_norm_sq = radius_sq;
            }
            ++res.diag.updates;
            if (config.track_visits) ++res.diag.visit_count[static_cast<std::size_t>(bi) * na + a];
            res.diag.max_theta_norm = std::max(res.diag.max_theta_norm, std::sqrt(theta_norm_sq));
        }
        if (on_step) on_step(t, step.reward, std::sqrt(theta_norm_sq));

        s = step.next_state;
        b = b2;
        bi = bi2;
        a = a2;
    }
    res.diag.mean_reward = reward_sum / static_cast<double>(total);
    return res;
}

std::vector<double> mixed_softmax_policy(std::span<const double> q_sum, int n_superstates, int n_actions,
                                         double eta, double explore_mix) {
    std::vector<double> policy(static_cast<std::size_t>(n_superstates) * n_actions, 0.0);
    for (int b = 0; b < n_superstates; ++b) {
        const double* row = &q_sum[static_cast<std::size_t>(b) * n_actions];
        double zmax = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < n_actions; ++a) zmax = std::max(zmax, eta * row[a]);
        double total = 0.0;
        for (int a = 0; a < n_actions; ++a) {
            const double e = std::exp(eta * row[a] - zmax);
            policy[static_cast<std::size_t>(b) * n_actions + a] = e;
            total += e;
        }
        for (int a = 0; a < n_actions; ++a) {
            double& p = policy[static_cast<std::size_t>(b) * n_actions + a];
            p = (1.0 - explore_mix) * (p / total) + explore_mix / n_actions;
        }
    }
    return policy;
}

PolitexResult politex_train(const PomdpModel& model, const SuperstateIndex& index,
                            const FeatureMap& features, const PolitexConfig& config,
                            const SuperstateMdp* smdp_for_warmup) {
    const int n = index.num_states();
    const int na = index.n_actions;
    if (config.policy_updates < 1) throw std::invalid_argument("politex_train: M must be >= 1");
    if (config.explore_mix < 0.0 || config.explore_mix >= 1.0)
        throw std::invalid_argument("politex_train: explore_mix must lie in [0, 1)");

    PolitexResult res;
    res.eta_used = config.eta > 0.0
                       ? config.eta
                       : std::sqrt(8.0 * std::log(static_cast<double>(na)) / config.policy_updates);
    res.theta_sum.assign(features.dim, 0.0);

    const bool one_hot = features.kind == FeatureMap::Kind::one_hot;
    // running sum of per-episode Q estimates; for one-hot features theta_sum
    // already is that table, so the extra copy exists only for projections
    std::vector<double> q_sum;
    if (!one_hot) q_sum.assign(static_cast<std::size_t>(n) * na, 0.0);
    const double eta = res.eta_used;
    const double mix = config.explore_mix;
    const auto policy_provider = PolicyProvider([&](int b, double* out) {
        const double* src = one_hot ? &res.theta_sum[static_cast<std::size_t>(b) * na]
                                    : &q_sum[static_cast<std::size_t>(b) * na];
        double zmax = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < na; ++a) zmax = std::max(zmax, eta * src[a]);
        double total = 0.0;
        for (int a = 0; a < na; ++a) {
            out[a] = std::exp(eta * src[a] - zmax);
            total += out[a];
        }
        for (int a = 0; a < na; ++a) out[a] = (1.0 - mix) * (out[a] / total) + mix / na;
    });

    const bool big = static_cast<long>(n) * na > config.big_model_threshold;
    if (one_hot && config.warm_start_theta && big && !config.keep_policies && smdp_for_warmup == nullptr) {
        politex_big_one_hot(model, index, features, config, res);
        return res;
    }
    std::vector<double> theta_carry;
    long steps_done = 0;

    for (int i = 1; i <= config.policy_updates; ++i) {
        TdConfig td = config.td;
        td.seed = derive_seed(config.seed, static_cast<std::uint64_t>(i));
        td.track_visits = config.td.track_visits && !big;
        double rho_prime = 0.0;
        if (td.l_prime < 0) {
            // warmup from the mixing estimate when a superstate MDP is
            // available at this scale; otherwise no warmup
            if (smdp_for_warmup != nullptr) {
                std::vector<double> policy(static_cast<std::size_t>(n) * na);
                for (int b = 0; b < n; ++b) policy_provider(b, &policy[static_cast<std::size_t>(b) * na]);
                rho_prime = superstate_mixing(*smdp_for_warmup, policy);
                if (rho_prime >= 1.0) {
                    td.l_prime = 0;
                } else if (rho_prime <= 0.0) {
                    td.l_prime = config.td.tau / 10;
                } else {
                    td.l_prime = static_cast<long>(std::ceil(
                        std::log(static_cast<double>(td.tau)) / (2.0 * std::log(1.0 / (1.0 - rho_prime)))));
                    td.l_prime = std::clamp<long>(td.l_prime, 0, config.td.tau / 10);
                }
            } else {
                td.l_prime = 0;
            }
        }

        if (config.keep_policies) {
            std::vector<double> policy(static_cast<std::size_t>(n) * na);
            for (int b = 0; b < n; ++b) policy_provider(b, &policy[static_cast<std::size_t>(b) * na]);
            res.policies.push_back(std::move(policy));
        }

        TdResult td_res = td_train(model, index, policy_provider, features, td, nullptr,
                                   config.warm_start_theta && i > 1 ? &theta_carry : nullptr);
        if (config.warm_start_theta) theta_carry = td_res.theta;

        for (std::size_t k = 0; k < res.theta_sum.size(); ++k) res.theta_sum[k] += td_res.theta[k];
        if (!one_hot) {
            for (int b = 0; b < n; ++b)
                for (int a = 0; a < na; ++a)
                    q_sum[static_cast<std::size_t>(b) * na + a] += features.dot(b, a, td_res.theta);
        }

        steps_done += td.tau + td_res.diag.l_prime_used;
        PolitexEpisode ep;
        ep.iteration = i;
        ep.steps = steps_done;
        ep.mean_reward = td_res.diag.mean_reward;
        ep.theta_norm = td_res.diag.max_theta_norm;
        ep.rho_prime = rho_prime;
        ep.l_prime = td_res.diag.l_prime_used;
        res.episodes.push_back(ep);

        if (config.keep_policies) {
            std::vector<double> qbar(static_cast<std::size_t>(n) * na, 0.0);
            for (int b = 0; b < n; ++b)
                for (int a = 0; a < na; ++a)
                    qbar[static_cast<std::size_t>(b) * na + a] = features.dot(b, a, td_res.theta);
            res.q_bars.push_back(std::move(qbar));
        }
    }
    return res;
}

void politex_big_one_hot(const PomdpModel& model, const SuperstateIndex& index, const FeatureMap& features,
                         const PolitexConfig& config, PolitexResult& res) {
    const int n = index.num_states();
    const int na = index.n_actions;
    const std::size_t dim = static_cast<std::size_t>(features.dim);
    const double eta = res.eta_used;
    const double mix = config.explore_mix;
    const double gamma = model.gamma;

    std::vector<double> theta(dim, 0.0);
    std::vector<double> qsum(dim, 0.0);     // complete through episode age[k]
    std::vector<int> age(dim, 0);
    int episode = 1;

    auto settle = [&](std::size_t k) {
        // episodes age[k]+1 .. episode-1 all saw the unchanged theta[k]
        const int through = episode - 1;
        if (age[k] < through) {
            qsum[k] += static_cast<double>(through - age[k]) * theta[k];
            age[k] = through;
        }
    };

    const double eps = config.td.step_size > 0.0
                           ? config.td.step_size
                           : 1.0 / std::sqrt(static_cast<double>(config.td.tau));
    double radius = config.td.radius > 0.0
                        ? config.td.radius
                        : model.r_bar / (1.0 - model.gamma) * std::sqrt(static_cast<double>(dim));
    if (radius <= 0.0) radius = 1.0;
    const double radius_sq = radius * radius;
    const long l_prime = std::max<long>(0, config.td.l_prime);
    const long total = config.td.tau + l_prime;

    double theta_norm_sq = 0.0;
    std::vector<double> row(na);
    auto policy_row = [&](int b) {
        double zmax = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < na; ++a) {
            const std::size_t k = static_cast<std::size_t>(b) * na + a;
            settle(k);
            row[a] = eta * qsum[k];
            zmax = std::max(zmax, row[a]);
        }
        double totalw = 0.0;
        for (int a = 0; a < na; ++a) {
            row[a] = std::exp(row[a] - zmax);
            totalw += row[a];
        }
        for (int a = 0; a < na; ++a) row[a] = (1.0 - mix) * (row[a] / totalw) + mix / na;
        return std::span<const double>(row.data(), static_cast<std::size_t>(na));
    };

    long steps_done = 0;
    for (; episode <= config.policy_updates; ++episode) {
        SplitMix64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(episode)));
        int s = sample_categorical(model.init_dist, rng);
        Superstate b{};
        int bi = 0;
        int a = sample_categorical(policy_row(bi), rng);
        double reward_sum = 0.0;
        double max_theta_norm = std::sqrt(theta_norm_sq);

        for (long t = 0; t < total; ++t) {
            const TrajectoryStep step = step_simulator(model, s, a, rng);
            reward_sum += step.reward;
            const Superstate b2 = extend(b, a, step.observation, index.l);
            const int bi2 = index.find(b2);
            if (bi2 < 0) throw std::logic_error("politex: trajectory reached an unindexed superstate");
            const int a2 = sample_categorical(policy_row(bi2), rng);
            if (t >= l_prime) {
                const std::size_t k = static_cast<std::size_t>(bi) * na + a;
                const std::size_t k2 = static_cast<std::size_t>(bi2) * na + a2;
                const double td_error = step.reward + gamma * theta[k2] - theta[k];
                settle(k);  // uses the pre-update value
                const double updated = theta[k] + eps * td_error;
                theta_norm_sq += updated * updated - theta[k] * theta[k];
                theta[k] = updated;
                if (theta_norm_sq > radius_sq) {
                    // rare at the default radius: settle everything, rescale
                    for (std::size_t kk = 0; kk < dim; ++kk) settle(kk);
                    const double scale = radius / std::sqrt(theta_norm_sq);
                    for (double& v : theta) v *= scale;
                    theta_norm_sq = radius_sq;
                }
                max_theta_norm = std::max(max_theta_norm, std::sqrt(theta_norm_sq));
            }
            s = step.next_state;
            b = b2;
            bi = bi2;
            a = a2;
        }

        steps_done += total;
        PolitexEpisode ep;
        ep.iteration = episode;
        ep.steps = steps_done;
        ep.mean_reward = reward_sum / static_cast<double>(total);
        ep.theta_norm = max_theta_norm;
        ep.l_prime = l_prime;
        res.episodes.push_back(ep);
    }

    for (std::size_t k = 0; k < dim; ++k) settle(k);
    res.theta_sum = std::move(qsum);
}

std::vector<RegretRecord> empirical_regret(const PomdpModel& model, const SuperstateMdp& smdp,
                                           const std::vector<std::vector<double>>& policies, long tau,
                                           long l_prime, int oracle_depth) {
    const OracleValue v_star = belief_tree_value(model, model.initial_belief(), oracle_depth);
    const int empty_idx = smdp.find(Superstate{});
    if (empty_idx < 0) throw std::logic_error("empirical_regret: the empty superstate is missing");

    std::vector<RegretRecord> records;
    records.reserve(policies.size());
    double gap_sum = 0.0;
    for (std::size_t i = 0; i < policies.size(); ++i) {
        const PolicyValues pv = policy_evaluation(smdp, policies[i], EvalMethod::exact_linear_solve);
        RegretRecord rec;
        rec.iteration = static_cast<int>(i) + 1;
        rec.v_star_oracle = v_star.value;
        rec.v_policy = pv.v[empty_idx];
        rec.per_iter_gap = rec.v_star_oracle - rec.v_policy;
        gap_sum += rec.per_iter_gap;
        rec.cumulative = static_cast<double>(tau + l_prime) * gap_sum;
        records.push_back(rec);
    }
    return records;
}

}  // namespace superstate
