#include "superstate/capi.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "superstate/bounds.hpp"
#include "superstate/envs.hpp"
#include "superstate/filter.hpp"
#include "superstate/learning.hpp"
#include "superstate/model_io.hpp"
#include "superstate/planning.hpp"
#include "superstate/pomdp.hpp"
#include "superstate/superstate.hpp"

using namespace superstate;

struct ss_model {
    PomdpModel m;
};
struct ss_smdp {
    SuperstateMdp s;
};

namespace {

thread_local std::string g_last_error = "";

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn>
ss_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ZeroProbabilityObservation& e) {
        g_last_error = e.what();
        return SS_ERR_ZERO_PROB_OBS;
    } catch (const NotConverged& e) {
        g_last_error = e.what();
        return SS_ERR_NOT_CONVERGED;
    } catch (const ModelIoError& e) {
        g_last_error = e.what();
        return SS_ERR_PARSE;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        return SS_ERR_INVALID_ARGUMENT;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SS_ERR_INTERNAL;
    }
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string superstate_name(const Superstate& b) {
    if (b.steps.empty()) return "()";
    std::string s;
    for (const auto& p : b.steps) {
        if (!s.empty()) s += ';';
        s += 'a' + std::to_string(p.action) + 'y' + std::to_string(p.obs);
    }
    return s;
}

TdConfig to_td_config(const ss_td_params& p) {
    TdConfig c;
    c.tau = p.tau;
    c.l_prime = p.l_prime;
    c.step_size = p.step_size;
    c.radius = p.radius;
    c.seed = p.seed;
    return c;
}

PolitexConfig to_politex_config(const ss_politex_params& p) {
    PolitexConfig c;
    c.policy_updates = p.policy_updates;
    c.td.tau = p.tau;
    c.td.l_prime = p.l_prime;
    c.td.step_size = p.step_size;
    c.td.radius = p.radius;
    c.eta = p.eta;
    c.explore_mix = p.explore_mix;
    c.seed = p.seed;
    c.warm_start_theta = p.warm_start != 0;
    return c;
}

std::string politex_episode_csv(const PolitexResult& res) {
    std::string csv = "iter,step,reward,theta_norm\n";
    for (const auto& ep : res.episodes) {
        csv += std::to_string(ep.iteration) + ',' + std::to_string(ep.steps) + ',' +
               format_double(ep.mean_reward) + ',' + format_double(ep.theta_norm) + '\n';
    }
    return csv;
}

}  // namespace

extern "C" {

const char* ss_last_error(void) { return g_last_error.c_str(); }

void ss_string_free(char* s) { std::free(s); }

const char* ss_version(void) { return "0.1.0"; }

ss_status ss_model_load_file(const char* path, ss_model** out) {
    return guarded([&] {
        auto* h = new ss_model{load_model(path)};
        *out = h;
        return SS_OK;
    });
}

ss_status ss_model_from_text(const char* text, ss_model** out) {
    return guarded([&] {
        auto* h = new ss_model{parse_model(text)};
        *out = h;
        return SS_OK;
    });
}

ss_status ss_model_to_text(const ss_model* model, char** out) {
    return guarded([&] {
        *out = dup_string(serialize_model(model->m));
        return SS_OK;
    });
}

ss_status ss_model_save_file(const ss_model* model, const char* path) {
    return guarded([&] {
        save_model(model->m, path);
        return SS_OK;
    });
}

void ss_model_free(ss_model* model) { delete model; }

ss_status ss_model_validate(const ss_model* model, char** report, int* n_violations) {
    return guarded([&] {
        const auto lines = validate(model->m);
        std::string joined;
        for (const auto& l : lines) {
            joined += l;
            joined += '\n';
        }
        if (report) *report = dup_string(joined);
        if (n_violations) *n_violations = static_cast<int>(lines.size());
        return SS_OK;
    });
}

ss_status ss_model_hash(const ss_model* model, char** hex) {
    return guarded([&] {
        *hex = dup_string(model_content_hash(model->m));
        return SS_OK;
    });
}

ss_status ss_model_dims(const ss_model* model, int* n_states, int* n_actions, int* n_obs, double* gamma,
                        double* r_bar) {
    return guarded([&] {
        if (n_states) *n_states = model->m.n_states;
        if (n_actions) *n_actions = model->m.n_actions;
        if (n_obs) *n_obs = model->m.n_obs;
        if (gamma) *gamma = model->m.gamma;
        if (r_bar) *r_bar = model->m.r_bar;
        return SS_OK;
    });
}

ss_status ss_env_customer_retail(double gamma, ss_model** out) {
    return guarded([&] {
        *out = new ss_model{envs::customer_retail(gamma)};
        return SS_OK;
    });
}

ss_status ss_env_two_state_toy(double gamma, ss_model** out) {
    return guarded([&] {
        *out = new ss_model{envs::two_state_toy(gamma)};
        return SS_OK;
    });
}

ss_status ss_env_tmaze(int corridor_len, double reward, double gamma, int arm_cap, ss_model** out) {
    return guarded([&] {
        *out = new ss_model{envs::tmaze(corridor_len, reward, gamma, arm_cap)};
        return SS_OK;
    });
}

ss_status ss_env_noisy_gridworld(int width, int height, const int* holes, int n_holes, int goal_cell,
                                 double noise_p, double gamma, ss_model** out) {
    return guarded([&] {
        envs::GridSpec spec;
        spec.width = width;
        spec.height = height;
        spec.noise_p = noise_p;
        spec.goal = {goal_cell / width, goal_cell % width};
        for (int i = 0; i < n_holes; ++i) spec.holes.push_back({holes[i] / width, holes[i] % width});
        *out = new ss_model{envs::noisy_gridworld(spec, gamma)};
        return SS_OK;
    });
}

ss_status ss_stability_check(const ss_model* model, ss_stability_report* out) {
    return guarded([&] {
        const StabilityReport rep = stability_check(model->m);
        out->delta_p = rep.delta_p;
        out->delta_phi = rep.delta_phi;
        out->product = rep.product;
        out->stable = rep.stable ? 1 : 0;
        out->rho_dobrushin = rep.rho_dobrushin;
        return SS_OK;
    });
}

ss_status ss_estimate_rho(const ss_model* model, int n_pairs, uint64_t seed, ss_contraction_estimate* out) {
    return guarded([&] {
        const ContractionEstimate est = estimate_rho(model->m, n_pairs, seed);
        out->rho_hat = est.rho_hat;
        out->max_ratio = est.max_ratio;
        out->n_pairs = est.n_pairs;
        out->contractive = est.contractive ? 1 : 0;
        return SS_OK;
    });
}

ss_status ss_lemma1_gap(const ss_model* model, int l, int n_samples, uint64_t seed, double* max_gap) {
    return guarded([&] {
        *max_gap = lemma1_gap(model->m, l, n_samples, seed);
        return SS_OK;
    });
}

ss_status ss_smdp_build(const ss_model* model, int l, ss_smdp** out) {
    return guarded([&] {
        *out = new ss_smdp{build(model->m, l)};
        return SS_OK;
    });
}

ss_status ss_smdp_load_file(const char* path, ss_smdp** out) {
    return guarded([&] {
        *out = new ss_smdp{load_smdp(path)};
        return SS_OK;
    });
}

ss_status ss_smdp_to_text(const ss_smdp* smdp, char** out) {
    return guarded([&] {
        *out = dup_string(serialize_smdp(smdp->s));
        return SS_OK;
    });
}

ss_status ss_smdp_save_file(const ss_smdp* smdp, const char* path) {
    return guarded([&] {
        save_smdp(smdp->s, path);
        return SS_OK;
    });
}

void ss_smdp_free(ss_smdp* smdp) { delete smdp; }

ss_status ss_smdp_dims(const ss_smdp* smdp, int* n_superstates, int* n_actions, int* l, double* gamma) {
    return guarded([&] {
        if (n_superstates) *n_superstates = smdp->s.num_states();
        if (n_actions) *n_actions = smdp->s.n_actions;
        if (l) *l = smdp->s.l;
        if (gamma) *gamma = smdp->s.gamma;
        return SS_OK;
    });
}

ss_status ss_superstate_mixing(const ss_smdp* smdp, const double* policy, double* rho_prime) {
    return guarded([&] {
        const std::size_t len = static_cast<std::size_t>(smdp->s.num_states()) * smdp->s.n_actions;
        *rho_prime = superstate_mixing(smdp->s, std::span<const double>(policy, len));
        return SS_OK;
    });
}

ss_status ss_value_iteration_csv(const ss_smdp* smdp, double tol, int max_iter, char** csv) {
    return guarded([&] {
        const ValueTable table = value_iteration(smdp->s, tol, max_iter);
        std::string text = "superstate,action,q,value,greedy\n";
        for (int b = 0; b < smdp->s.num_states(); ++b) {
            for (int a = 0; a < smdp->s.n_actions; ++a) {
                text += superstate_name(smdp->s.states[b]) + ',' + std::to_string(a) + ',' +
                        format_double(table.q(b, a, smdp->s.n_actions)) + ',' + format_double(table.values[b]) +
                        ',' + std::to_string(table.greedy[b]) + '\n';
            }
        }
        *csv = dup_string(text);
        return SS_OK;
    });
}

ss_status ss_oracle_value(const ss_model* model, int depth, double* value, double* truncation_bound) {
    return guarded([&] {
        const OracleValue v = belief_tree_value(model->m, model->m.initial_belief(), depth);
        if (value) *value = v.value;
        if (truncation_bound) *truncation_bound = v.truncation_bound;
        return SS_OK;
    });
}

ss_status ss_default_oracle_depth(const ss_model* model, double slack_fraction, int* depth) {
    return guarded([&] {
        *depth = default_oracle_depth(model->m, slack_fraction);
        return SS_OK;
    });
}

ss_status ss_bounds_csv(const ss_bound_inputs* inputs, char** csv) {
    return guarded([&] {
        bounds::BoundInputs in;
        in.r_bar = inputs->r_bar;
        in.gamma = inputs->gamma;
        in.rho = inputs->rho;
        in.rho_prime = inputs->rho_prime;
        in.l = inputs->l;
        in.tau = inputs->tau;
        in.radius = inputs->radius;
        in.xi_fa = inputs->xi_fa;
        in.n_actions = inputs->n_actions;
        in.n_obs = inputs->n_obs;
        in.policy_updates = inputs->policy_updates;

        std::string text = "bound,value\n";
        text += "xi_smdp_pomdp," + format_double(bounds::xi_smdp_pomdp(in)) + '\n';
        if (inputs->n_superstates >= 1.0 && in.rho < 1.0) {
            text += "corollary1," +
                    format_double(bounds::corollary1_bound(in.r_bar, in.gamma, in.rho, inputs->n_superstates,
                                                           in.n_obs, in.n_actions)) +
                    '\n';
        }
        text += "xi_td_error," + format_double(bounds::xi_td_error(in)) + '\n';
        std::vector<double> fa(static_cast<std::size_t>(in.policy_updates), in.xi_fa);
        const auto reg = bounds::regret_bound_terms(in, fa);
        text += "xi_fa," + format_double(reg.xi_fa) + '\n';
        text += "xi_ha," + format_double(reg.xi_ha) + '\n';
        text += "order_term," + format_double(reg.order_term) + '\n';
        const auto ais = bounds::ais_bounds(inputs->epsilon, inputs->delta, in.r_bar, in.gamma);
        text += "ais_original," + format_double(ais.original) + '\n';
        text += "ais_improved," + format_double(ais.improved) + '\n';
        *csv = dup_string(text);
        return SS_OK;
    });
}

ss_status ss_td_run_csv(const ss_model* model, const ss_td_params* params, char** csv,
                        double* q_error_vs_exact, double* mean_reward) {
    return guarded([&] {
        const SuperstateIndex index = enumerate_reachable_index(model->m, params->l);
        const int n = index.num_states();
        const int na = index.n_actions;
        std::vector<double> policy(static_cast<std::size_t>(n) * na, 1.0 / na);
        const FeatureMap features = make_features(index, FeatureMap::Kind::one_hot);

        TdConfig cfg = to_td_config(*params);
        std::string text = "step,reward,theta_norm\n";
        TdResult res = td_train(model->m, index, policy, features, cfg,
                                [&](long t, double r, double norm) {
                                    text += std::to_string(t) + ',' + format_double(r) + ',' +
                                            format_double(norm) + '\n';
                                });
        if (csv) *csv = dup_string(text);
        if (mean_reward) *mean_reward = res.diag.mean_reward;
        if (q_error_vs_exact) {
            // exact comparison only at desk scale
            if (n <= 2000) {
                const SuperstateMdp smdp = build(model->m, params->l);
                const PolicyValues pv = policy_evaluation(smdp, policy, EvalMethod::exact_linear_solve);
                double err = 0.0;
                for (int b = 0; b < n; ++b) {
                    for (int a = 0; a < na; ++a) {
                        const std::size_t k = static_cast<std::size_t>(b) * na + a;
                        if (res.diag.visit_count[k] == 0) continue;
                        err = std::max(err, std::abs(features.dot(b, a, res.theta) - pv.q[k]));
                    }
                }
                *q_error_vs_exact = err;
            } else {
                *q_error_vs_exact = -1.0;
            }
        }
        return SS_OK;
    });
}

ss_status ss_politex_run_csv(const ss_model* model, const ss_politex_params* params, int oracle_depth,
                             char** episode_csv, char** regret_csv) {
    return guarded([&] {
        const SuperstateIndex index = enumerate_reachable_index(model->m, params->l);
        const FeatureMap features = make_features(index, FeatureMap::Kind::one_hot);
        PolitexConfig cfg = to_politex_config(*params);
        cfg.keep_policies = regret_csv != nullptr;

        std::unique_ptr<SuperstateMdp> smdp;
        if (regret_csv != nullptr || (cfg.td.l_prime < 0 && index.num_states() <= 2000)) {
            smdp = std::make_unique<SuperstateMdp>(build(model->m, params->l));
        }
        PolitexResult res = politex_train(model->m, index, features, cfg, smdp.get());
        if (episode_csv) *episode_csv = dup_string(politex_episode_csv(res));
        if (regret_csv) {
            const long lp = res.episodes.empty() ? 0 : res.episodes.back().l_prime;
            const auto records = empirical_regret(model->m, *smdp, res.policies, cfg.td.tau, lp, oracle_depth);
            std::string text = "i,v_star,v_policy,gap,cumulative\n";
            for (const auto& r : records) {
                text += std::to_string(r.iteration) + ',' + format_double(r.v_star_oracle) + ',' +
                        format_double(r.v_policy) + ',' + format_double(r.per_iter_gap) + ',' +
                        format_double(r.cumulative) + '\n';
            }
            *regret_csv = dup_string(text);
        }
        return SS_OK;
    });
}

namespace {

int sweep_thread_cap() {
    if (const char* env = std::getenv("SUPERSTATE_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

struct SweepJobResult {
    std::string rows;
    double final_moving_avg = 0.0;
};

}  // namespace

ss_status ss_sweep_csv(const int* l_values, int n_l, const double* noise_values, int n_noise,
                       const uint64_t* seeds, int n_seeds, const ss_politex_params* params, double gamma,
                       char** cell_csv, char** aggregate_csv) {
    return guarded([&] {
        if (n_l < 1 || n_noise < 1 || n_seeds < 1)
            throw std::invalid_argument("sweep: grids must be nonempty");
        constexpr int kWindow = 20;  // moving-average window, episodes

        struct Job {
            int li, pi, si;
        };
        std::vector<Job> jobs;
        for (int li = 0; li < n_l; ++li)
            for (int pi = 0; pi < n_noise; ++pi)
                for (int si = 0; si < n_seeds; ++si) jobs.push_back({li, pi, si});
        std::vector<SweepJobResult> results(jobs.size());

        auto run_job = [&](const Job& job, SweepJobResult& out) {
            const PomdpModel grid = envs::noisy_gridworld(envs::lake_4x4(noise_values[job.pi]), gamma);
            const SuperstateIndex index = enumerate_reachable_index(grid, l_values[job.li]);
            const FeatureMap features = make_features(index, FeatureMap::Kind::one_hot);
            PolitexConfig cfg = to_politex_config(*params);
            cfg.seed = seeds[job.si];
            cfg.keep_policies = false;
            if (cfg.td.l_prime < 0) cfg.td.l_prime = 0;  // mixing estimate is out of reach at this scale
            const PolitexResult res = politex_train(grid, index, features, cfg, nullptr);

            double window_sum = 0.0;
            double moving = 0.0;
            std::vector<double> rewards;
            rewards.reserve(res.episodes.size());
            for (std::size_t e = 0; e < res.episodes.size(); ++e) {
                const double r = res.episodes[e].mean_reward;
                rewards.push_back(r);
                window_sum += r;
                if (e >= kWindow) window_sum -= rewards[e - kWindow];
                moving = window_sum / std::min<std::size_t>(e + 1, kWindow);
                out.rows += std::to_string(l_values[job.li]) + ',' + format_double(noise_values[job.pi]) +
                            ',' + std::to_string(job.si) + ',' + std::to_string(static_cast<int>(e) + 1) +
                            ',' + format_double(r) + ',' + format_double(moving) + '\n';
            }
            out.final_moving_avg = moving;
        };

        const int n_threads = std::min<int>(sweep_thread_cap(), static_cast<int>(jobs.size()));
        if (n_threads <= 1) {
            for (std::size_t k = 0; k < jobs.size(); ++k) run_job(jobs[k], results[k]);
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> pool;
            pool.reserve(n_threads);
            for (int t = 0; t < n_threads; ++t) {
                pool.emplace_back([&] {
                    for (;;) {
                        const std::size_t k = next.fetch_add(1);
                        if (k >= jobs.size()) return;
                        run_job(jobs[k], results[k]);
                    }
                });
            }
            for (auto& th : pool) th.join();
        }

        std::string cells = "l,p,seed,episode,reward,moving_avg\n";
        std::string agg = "l,p,mean_final_reward\n";
        std::size_t k = 0;
        for (int li = 0; li < n_l; ++li) {
            for (int pi = 0; pi < n_noise; ++pi) {
                double final_sum = 0.0;
                for (int si = 0; si < n_seeds; ++si, ++k) {
                    cells += results[k].rows;
                    final_sum += results[k].final_moving_avg;
                }
                agg += std::to_string(l_values[li]) + ',' + format_double(noise_values[pi]) + ',' +
                       format_double(final_sum / n_seeds) + '\n';
            }
        }
        if (cell_csv) *cell_csv = dup_string(cells);
        if (aggregate_csv) *aggregate_csv = dup_string(agg);
        return SS_OK;
    });
}

}  // extern "C"
