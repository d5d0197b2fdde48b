#ifndef SUPERSTATE_CAPI_H
#define SUPERSTATE_CAPI_H

/* C interface to the superstate library: opaque handles, status codes, and
 * string outputs released with ss_string_free. All functions are
 * deterministic for fixed inputs and seeds. */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct ss_model ss_model;
typedef struct ss_smdp ss_smdp;

typedef enum ss_status {
    SS_OK = 0,
    SS_ERR_INVALID_ARGUMENT = 1,
    SS_ERR_PARSE = 2,
    SS_ERR_ZERO_PROB_OBS = 3,
    SS_ERR_NOT_CONVERGED = 4,
    SS_ERR_IO = 5,
    SS_ERR_INTERNAL = 6
} ss_status;

/* Message for the most recent failure on this thread; never NULL. */
const char* ss_last_error(void);
void ss_string_free(char* s);
const char* ss_version(void);

/* ---- models ---- */
ss_status ss_model_load_file(const char* path, ss_model** out);
ss_status ss_model_from_text(const char* text, ss_model** out);
ss_status ss_model_to_text(const ss_model* model, char** out);
ss_status ss_model_save_file(const ss_model* model, const char* path);
void ss_model_free(ss_model* model);

/* Report of violated invariants, one per line; empty string when valid. */
ss_status ss_model_validate(const ss_model* model, char** report, int* n_violations);
ss_status ss_model_hash(const ss_model* model, char** hex);
ss_status ss_model_dims(const ss_model* model, int* n_states, int* n_actions, int* n_obs, double* gamma,
                        double* r_bar);

/* ---- built-in environments ---- */
ss_status ss_env_customer_retail(double gamma, ss_model** out);
ss_status ss_env_two_state_toy(double gamma, ss_model** out);
ss_status ss_env_tmaze(int corridor_len, double reward, double gamma, int arm_cap, ss_model** out);
/* holes: flat cell indices row*width+col */
ss_status ss_env_noisy_gridworld(int width, int height, const int* holes, int n_holes, int goal_cell,
                                 double noise_p, double gamma, ss_model** out);

/* ---- filter analysis ---- */
typedef struct ss_stability_report {
    double delta_p;
    double delta_phi;
    double product;
    int stable;
    double rho_dobrushin;
} ss_stability_report;

ss_status ss_stability_check(const ss_model* model, ss_stability_report* out);

typedef struct ss_contraction_estimate {
    double rho_hat;
    double max_ratio;
    int n_pairs;
    int contractive;
} ss_contraction_estimate;

ss_status ss_estimate_rho(const ss_model* model, int n_pairs, uint64_t seed,
                          ss_contraction_estimate* out);
ss_status ss_lemma1_gap(const ss_model* model, int l, int n_samples, uint64_t seed, double* max_gap);

/* ---- superstate MDP ---- */
ss_status ss_smdp_build(const ss_model* model, int l, ss_smdp** out);
ss_status ss_smdp_load_file(const char* path, ss_smdp** out);
ss_status ss_smdp_to_text(const ss_smdp* smdp, char** out);
ss_status ss_smdp_save_file(const ss_smdp* smdp, const char* path);
void ss_smdp_free(ss_smdp* smdp);
ss_status ss_smdp_dims(const ss_smdp* smdp, int* n_superstates, int* n_actions, int* l, double* gamma);
ss_status ss_superstate_mixing(const ss_smdp* smdp, const double* policy, double* rho_prime);

/* ---- planning ---- */
/* CSV columns: superstate,action,q,value,greedy */
ss_status ss_value_iteration_csv(const ss_smdp* smdp, double tol, int max_iter, char** csv);
ss_status ss_oracle_value(const ss_model* model, int depth, double* value, double* truncation_bound);
ss_status ss_default_oracle_depth(const ss_model* model, double slack_fraction, int* depth);

/* ---- bound evaluators ---- */
typedef struct ss_bound_inputs {
    double r_bar;
    double gamma;
    double rho;
    double rho_prime;
    int l;
    long tau;
    double radius;
    double xi_fa;
    int n_actions;
    int n_obs;
    int policy_updates;
    double n_superstates; /* N for the count-form bound */
    double epsilon;       /* information-state reward error */
    double delta;         /* information-state transition error */
} ss_bound_inputs;

/* Two-column CSV (bound,value) with every evaluator that accepts the inputs. */
ss_status ss_bounds_csv(const ss_bound_inputs* inputs, char** csv);

/* ---- learning ---- */
typedef struct ss_td_params {
    int l;
    long tau;
    long l_prime;      /* -1: auto */
    double step_size;  /* <= 0: 1/sqrt(tau) */
    double radius;     /* <= 0: automatic */
    uint64_t seed;
} ss_td_params;

/* Uniform-policy TD run. CSV columns: step,reward,theta_norm. Summary values
 * may be NULL. */
ss_status ss_td_run_csv(const ss_model* model, const ss_td_params* params, char** csv,
                        double* q_error_vs_exact, double* mean_reward);

typedef struct ss_politex_params {
    int l;
    int policy_updates; /* M */
    long tau;
    long l_prime;       /* -1: auto */
    double step_size;   /* <= 0: 1/sqrt(tau) */
    double radius;      /* <= 0: automatic */
    double eta;         /* <= 0: sqrt(8 log|A| / M) */
    double explore_mix;
    uint64_t seed;
    int warm_start; /* carry TD parameters across episodes */
} ss_politex_params;

/* Episode CSV columns: iter,step,reward,theta_norm. When regret_csv is
 * non-NULL the superstate MDP is built and evaluated exactly per iteration;
 * columns: i,v_star,v_policy,gap,cumulative. */
ss_status ss_politex_run_csv(const ss_model* model, const ss_politex_params* params, int oracle_depth,
                             char** episode_csv, char** regret_csv);

/* Sweep over history lengths and gridworld noise levels. Cell CSV columns:
 * l,p,seed,episode,reward,moving_avg; aggregate columns:
 * l,p,mean_final_reward. moving_avg window is 20 episodes. */
ss_status ss_sweep_csv(const int* l_values, int n_l, const double* noise_values, int n_noise,
                       const uint64_t* seeds, int n_seeds, const ss_politex_params* params,
                       double gamma, char** cell_csv, char** aggregate_csv);

#ifdef __cplusplus
}
#endif

#endif /* SUPERSTATE_CAPI_H */
