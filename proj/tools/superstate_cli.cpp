// Command-line front end. Talks to the library exclusively through the C API
// in superstate/capi.h; every produced file starts with a run-manifest block
// so results can be reproduced byte-for-byte (timestamp line aside).

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "superstate/capi.h"

namespace {

std::string g_command_line;

std::string timestamp_utc() {
    char buf[32];
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct CString {
    char* ptr = nullptr;
    ~CString() { ss_string_free(ptr); }
    std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

struct ModelHandle {
    ss_model* ptr = nullptr;
    ~ModelHandle() { ss_model_free(ptr); }
};

struct SmdpHandle {
    ss_smdp* ptr = nullptr;
    ~SmdpHandle() { ss_smdp_free(ptr); }
};

[[noreturn]] void fail(const std::string& what) {
    std::cerr << "error: " << what << "\n";
    std::exit(1);
}

void check(ss_status st) {
    if (st != SS_OK) fail(ss_last_error());
}

std::string manifest(const std::vector<std::pair<std::string, std::string>>& fields) {
    std::string out = "# superstate run manifest\n";
    out += "# version: " + std::string(ss_version()) + "\n";
    out += "# command: " + g_command_line + "\n";
    for (const auto& [k, v] : fields) out += "# " + k + ": " + v + "\n";
    out += "# timestamp: " + timestamp_utc() + "\n";
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) fail(path + ": cannot open for writing");
    out << content;
    if (!out) fail(path + ": write failed");
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
    } else {
        write_file(path, content);
    }
}

ss_model* load_model_arg(const std::string& path) {
    ss_model* m = nullptr;
    check(ss_model_load_file(path.c_str(), &m));
    return m;
}

std::string model_hash(const ss_model* m) {
    CString hex;
    check(ss_model_hash(m, &hex.ptr));
    return hex.str();
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 0; i < argc; ++i) {
        if (i) g_command_line += ' ';
        g_command_line += argv[i];
    }

    CLI::App app{"superstate: finite-history approximation toolkit for tabular POMDPs"};
    app.require_subcommand(1);

    // ---- validate ----
    std::string model_path, out_path, smdp_path, agg_out_path, regret_out_path, env_name;
    auto* validate_cmd = app.add_subcommand("validate", "check a model file against its invariants");
    validate_cmd->add_option("--model", model_path, "model file")->required();

    // ---- stability ----
    bool as_csv = false;
    auto* stability_cmd = app.add_subcommand("stability", "Dobrushin coefficients and the stability product");
    stability_cmd->add_option("--model", model_path, "model file")->required();
    stability_cmd->add_flag("--csv", as_csv, "emit CSV instead of aligned text");
    stability_cmd->add_option("--out", out_path, "output file (default stdout)");

    // ---- build-smdp ----
    int l_value = 1;
    auto* build_cmd = app.add_subcommand("build-smdp", "construct the superstate MDP");
    build_cmd->add_option("--model", model_path, "model file")->required();
    build_cmd->add_option("--l", l_value, "history truncation length")->required();
    build_cmd->add_option("--out", out_path, "output file")->required();

    // ---- plan ----
    double tol = 1e-10;
    int max_iter = 200000;
    auto* plan_cmd = app.add_subcommand("plan", "value iteration on a superstate MDP");
    plan_cmd->add_option("--smdp", smdp_path, "superstate MDP file")->required();
    plan_cmd->add_option("--tol", tol, "Bellman residual tolerance");
    plan_cmd->add_option("--max-iter", max_iter, "sweep limit");
    plan_cmd->add_option("--out", out_path, "output file (default stdout)");

    // ---- oracle ----
    int depth = 0;
    auto* oracle_cmd = app.add_subcommand("oracle", "depth-limited optimal value at the initial belief");
    oracle_cmd->add_option("--model", model_path, "model file")->required();
    oracle_cmd->add_option("--depth", depth, "tree depth (0: automatic)");

    // ---- bounds ----
    ss_bound_inputs bi{1.0, 0.9, 0.5, 0.5, 1, 10000, 1.0, 0.0, 2, 2, 1, 0.0, 0.0, 0.0};
    auto* bounds_cmd = app.add_subcommand("bounds", "closed-form bound evaluators");
    bounds_cmd->add_option("--rbar", bi.r_bar, "reward bound");
    bounds_cmd->add_option("--gamma", bi.gamma, "discount");
    bounds_cmd->add_option("--rho", bi.rho, "filter contraction parameter");
    bounds_cmd->add_option("--rho-prime", bi.rho_prime, "superstate chain mixing parameter");
    bounds_cmd->add_option("--l", bi.l, "history truncation length");
    bounds_cmd->add_option("--tau", bi.tau, "TD iterations");
    bounds_cmd->add_option("--radius", bi.radius, "parameter ball radius");
    bounds_cmd->add_option("--xi-fa", bi.xi_fa, "function approximation floor");
    bounds_cmd->add_option("--n-actions", bi.n_actions, "action count");
    bounds_cmd->add_option("--n-obs", bi.n_obs, "observation count");
    bounds_cmd->add_option("--M", bi.policy_updates, "policy updates");
    bounds_cmd->add_option("--N", bi.n_superstates, "superstate count for the count-form bound");
    bounds_cmd->add_option("--epsilon", bi.epsilon, "information-state reward error");
    bounds_cmd->add_option("--delta", bi.delta, "information-state transition error");
    bounds_cmd->add_option("--out", out_path, "output file (default stdout)");

    // ---- td ----
    ss_td_params td{1, 10000, -1, 0.0, 0.0, 1};
    auto* td_cmd = app.add_subcommand("td", "temporal-difference evaluation of the uniform policy");
    td_cmd->add_option("--model", model_path, "model file")->required();
    td_cmd->add_option("--l", td.l, "history truncation length")->required();
    td_cmd->add_option("--tau", td.tau, "update count");
    td_cmd->add_option("--lprime", td.l_prime, "warmup steps (-1: automatic)");
    td_cmd->add_option("--step", td.step_size, "stepsize (<=0: 1/sqrt(tau))");
    td_cmd->add_option("--radius", td.radius, "projection radius (<=0: automatic)");
    td_cmd->add_option("--seed", td.seed, "seed");
    td_cmd->add_option("--out", out_path, "output file (default stdout)");

    // ---- politex / regret ----
    ss_politex_params px{1, 10, 5000, -1, 0.0, 0.0, 0.0, 0.05, 1};
    int oracle_depth = 0;
    auto add_politex_opts = [&](CLI::App* cmd) {
        cmd->add_option("--model", model_path, "model file")->required();
        cmd->add_option("--l", px.l, "history truncation length")->required();
        cmd->add_option("--M", px.policy_updates, "policy updates");
        cmd->add_option("--tau", px.tau, "TD updates per episode");
        cmd->add_option("--lprime", px.l_prime, "warmup steps (-1: automatic)");
        cmd->add_option("--step", px.step_size, "stepsize (<=0: 1/sqrt(tau))");
        cmd->add_option("--radius", px.radius, "projection radius (<=0: automatic)");
        cmd->add_option("--eta", px.eta, "exponential-weights rate (<=0: sqrt(8 log|A|/M))");
        cmd->add_option("--mix", px.explore_mix, "uniform exploration mix");
        cmd->add_option("--seed", px.seed, "seed");
        cmd->add_option("--depth", oracle_depth, "oracle depth for regret records (0: automatic)");
        cmd->add_option("--out", out_path, "output file (default stdout)");
    };
    auto* politex_cmd = app.add_subcommand("politex", "policy optimization with exponential weights");
    add_politex_opts(politex_cmd);
    politex_cmd->add_option("--regret-out", regret_out_path, "also write per-iteration regret records");
    auto* regret_cmd = app.add_subcommand("regret", "policy optimization, emitting regret records");
    add_politex_opts(regret_cmd);

    // ---- sweep ----
    std::vector<int> sweep_l{1, 3};
    std::vector<double> sweep_noise{0.3};
    int sweep_seeds = 10;
    double sweep_gamma = 0.95;
    auto* sweep_cmd = app.add_subcommand("sweep", "gridworld history-length / noise sweep");
    sweep_cmd->add_option("--l-values", sweep_l, "history lengths");
    sweep_cmd->add_option("--noise", sweep_noise, "observation noise levels");
    sweep_cmd->add_option("--seeds", sweep_seeds, "number of seeds");
    sweep_cmd->add_option("--gamma", sweep_gamma, "discount");
    sweep_cmd->add_option("--M", px.policy_updates, "policy updates per cell");
    sweep_cmd->add_option("--tau", px.tau, "TD updates per episode");
    sweep_cmd->add_option("--step", px.step_size, "stepsize (<=0: 1/sqrt(tau))");
    sweep_cmd->add_option("--mix", px.explore_mix, "uniform exploration mix");
    sweep_cmd->add_option("--eta", px.eta, "exponential-weights rate");
    sweep_cmd->add_option("--seed", px.seed, "base seed");
    sweep_cmd->add_option("--out", out_path, "per-episode output file")->required();
    sweep_cmd->add_option("--agg-out", agg_out_path, "aggregate output file");

    // ---- env ----
    int corridor = 4, arm_cap = 10;
    double env_reward = 1.0, env_gamma = -1.0, env_noise = 0.3;
    auto* env_cmd = app.add_subcommand("env", "write a built-in benchmark model");
    env_cmd->add_option("--name", env_name, "customer|tmaze|gridworld|toy2")->required();
    env_cmd->add_option("--corridor", corridor, "t-maze corridor length");
    env_cmd->add_option("--reward", env_reward, "t-maze arm reward");
    env_cmd->add_option("--arm-cap", arm_cap, "t-maze arm cap");
    env_cmd->add_option("--noise", env_noise, "gridworld observation noise");
    env_cmd->add_option("--gamma", env_gamma, "discount (<0: environment default)");
    env_cmd->add_option("--out", out_path, "output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::exit(app.exit(e));
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::exit(2);
    }

    if (validate_cmd->parsed()) {
        ss_model* raw = nullptr;
        const ss_status st = ss_model_load_file(model_path.c_str(), &raw);
        if (st != SS_OK) {
            std::cerr << ss_last_error() << "\n";
            return 1;
        }
        ModelHandle model{raw};
        CString report;
        int n = 0;
        check(ss_model_validate(model.ptr, &report.ptr, &n));
        if (n == 0) {
            std::cout << "ok: " << model_path << " (hash " << model_hash(model.ptr) << ")\n";
            return 0;
        }
        std::cout << report.str();
        return 1;
    }

    if (stability_cmd->parsed()) {
        ModelHandle model{load_model_arg(model_path)};
        ss_stability_report rep{};
        check(ss_stability_check(model.ptr, &rep));
        std::string body;
        if (as_csv) {
            body = "delta_P,delta_Phi,product,stable,rho_dobrushin\n" + fmt(rep.delta_p) + ',' +
                   fmt(rep.delta_phi) + ',' + fmt(rep.product) + ',' + (rep.stable ? "1" : "0") + ',' +
                   fmt(rep.rho_dobrushin) + '\n';
        } else {
            std::ostringstream os;
            os << "delta_P        " << rep.delta_p << "\n"
               << "delta_Phi      " << rep.delta_phi << "\n"
               << "product        " << rep.product << "\n"
               << "stable         " << (rep.stable ? "yes" : "no") << "\n"
               << "rho_dobrushin  " << rep.rho_dobrushin << "\n";
            body = os.str();
        }
        emit(out_path, manifest({{"model_hash", model_hash(model.ptr)}}) + body);
        return 0;
    }

    if (build_cmd->parsed()) {
        ModelHandle model{load_model_arg(model_path)};
        SmdpHandle smdp;
        check(ss_smdp_build(model.ptr, l_value, &smdp.ptr));
        CString text;
        check(ss_smdp_to_text(smdp.ptr, &text.ptr));
        int n = 0;
        check(ss_smdp_dims(smdp.ptr, &n, nullptr, nullptr, nullptr));
        write_file(out_path, manifest({{"model_hash", model_hash(model.ptr)},
                                       {"l", std::to_string(l_value)},
                                       {"superstates", std::to_string(n)}}) +
                                 text.str());
        std::cout << "wrote " << out_path << " (" << n << " superstates)\n";
        return 0;
    }

    if (plan_cmd->parsed()) {
        SmdpHandle smdp;
        check(ss_smdp_load_file(smdp_path.c_str(), &smdp.ptr));
        CString csv;
        check(ss_value_iteration_csv(smdp.ptr, tol, max_iter, &csv.ptr));
        emit(out_path, manifest({{"smdp", smdp_path}, {"tol", fmt(tol)}}) + csv.str());
        return 0;
    }

    if (oracle_cmd->parsed()) {
        ModelHandle model{load_model_arg(model_path)};
        if (depth <= 0) check(ss_default_oracle_depth(model.ptr, 0.05, &depth));
        double value = 0.0, trunc = 0.0;
        check(ss_oracle_value(model.ptr, depth, &value, &trunc));
        std::cout << "depth " << depth << "\nvalue " << fmt(value) << "\ntruncation_bound " << fmt(trunc)
                  << "\n";
        return 0;
    }

    if (bounds_cmd->parsed()) {
        CString csv;
        check(ss_bounds_csv(&bi, &csv.ptr));
        emit(out_path, manifest({}) + csv.str());
        return 0;
    }

    if (td_cmd->parsed()) {
        ModelHandle model{load_model_arg(model_path)};
        CString csv;
        double q_err = -1.0, mean_r = 0.0;
        check(ss_td_run_csv(model.ptr, &td, &csv.ptr, &q_err, &mean_r));
        std::string head = manifest({{"model_hash", model_hash(model.ptr)},
                                     {"seed", std::to_string(td.seed)},
                                     {"config", "l=" + std::to_string(td.l) + " tau=" + std::to_string(td.tau) +
                                                    " lprime=" + std::to_string(td.l_prime) +
                                                    " step=" + fmt(td.step_size) + " radius=" + fmt(td.radius)},
                                     {"mean_reward", fmt(mean_r)},
                                     {"q_error_vs_exact", q_err >= 0.0 ? fmt(q_err) : "n/a"}});
        emit(out_path, head + csv.str());
        return 0;
    }

    if (politex_cmd->parsed() || regret_cmd->parsed()) {
        ModelHandle model{load_model_arg(model_path)};
        if (oracle_depth <= 0) check(ss_default_oracle_depth(model.ptr, 0.05, &oracle_depth));
        const bool want_regret = regret_cmd->parsed() || !regret_out_path.empty();
        CString episodes, regret;
        check(ss_politex_run_csv(model.ptr, &px, oracle_depth, &episodes.ptr,
                                 want_regret ? &regret.ptr : nullptr));
        const std::string head =
            manifest({{"model_hash", model_hash(model.ptr)},
                      {"seed", std::to_string(px.seed)},
                      {"config", "l=" + std::to_string(px.l) + " M=" + std::to_string(px.policy_updates) +
                                     " tau=" + std::to_string(px.tau) + " eta=" + fmt(px.eta) +
                                     " mix=" + fmt(px.explore_mix) + " depth=" + std::to_string(oracle_depth)}});
        if (regret_cmd->parsed()) {
            emit(out_path, head + regret.str());
        } else {
            emit(out_path, head + episodes.str());
            if (!regret_out_path.empty()) write_file(regret_out_path, head + regret.str());
        }
        return 0;
    }

    if (sweep_cmd->parsed()) {
        std::vector<uint64_t> seeds;
        for (int i = 0; i < sweep_seeds; ++i) seeds.push_back(px.seed + static_cast<uint64_t>(i));
        CString cells, agg;
        check(ss_sweep_csv(sweep_l.data(), static_cast<int>(sweep_l.size()), sweep_noise.data(),
                           static_cast<int>(sweep_noise.size()), seeds.data(),
                           static_cast<int>(seeds.size()), &px, sweep_gamma, &cells.ptr, &agg.ptr));
        const std::string head =
            manifest({{"seeds", std::to_string(sweep_seeds) + " from " + std::to_string(px.seed)},
                      {"config", "M=" + std::to_string(px.policy_updates) + " tau=" + std::to_string(px.tau) +
                                     " mix=" + fmt(px.explore_mix) + " gamma=" + fmt(sweep_gamma)},
                      {"moving_avg_window", "20"}});
        write_file(out_path, head + cells.str());
        if (!agg_out_path.empty()) write_file(agg_out_path, head + agg.str());
        std::cout << agg.str();
        return 0;
    }

    if (env_cmd->parsed()) {
        ss_model* raw = nullptr;
        if (env_name == "customer") {
            check(ss_env_customer_retail(env_gamma < 0 ? 0.9 : env_gamma, &raw));
        } else if (env_name == "tmaze") {
            check(ss_env_tmaze(corridor, env_reward, env_gamma < 0 ? 0.9 : env_gamma, arm_cap, &raw));
        } else if (env_name == "gridworld") {
            const int holes[] = {5, 7, 11, 12};
            check(ss_env_noisy_gridworld(4, 4, holes, 4, 15, env_noise, env_gamma < 0 ? 0.95 : env_gamma,
                                         &raw));
        } else if (env_name == "toy2") {
            check(ss_env_two_state_toy(env_gamma < 0 ? 0.9 : env_gamma, &raw));
        } else {
            std::cerr << "unknown environment: " << env_name << "\n";
            return 2;
        }
        ModelHandle model{raw};
        CString text;
        check(ss_model_to_text(model.ptr, &text.ptr));
        write_file(out_path, manifest({{"env", env_name}, {"model_hash", model_hash(model.ptr)}}) + text.str());
        std::cout << "wrote " << out_path << " (hash " << model_hash(model.ptr) << ")\n";
        return 0;
    }

    return 2;
}
