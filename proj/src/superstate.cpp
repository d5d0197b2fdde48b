#include "superstate/superstate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "superstate/model_io.hpp"

namespace superstate {

Superstate group(const History& history, int l) {
    if (l < 1) throw std::invalid_argument("group: l must be >= 1");
    Superstate b;
    const std::size_t n = history.steps.size();
    const std::size_t keep = std::min<std::size_t>(n, static_cast<std::size_t>(l));
    b.steps.assign(history.steps.end() - keep, history.steps.end());
    return b;
}

Superstate extend(const Superstate& b, int a, int y, int l) {
    Superstate out = b;
    out.steps.push_back({a, y});
    if (out.steps.size() > static_cast<std::size_t>(l))
        out.steps.erase(out.steps.begin(), out.steps.end() - l);
    return out;
}

namespace {

// Representative belief of a superstate: the truncated history filtered from
// the initial distribution. When the truncation cut off information the
// suffix needs (it has probability zero as its own history), the filter is
// restarted from the uninformative uniform prior, which is defined for every
// suffix of a positive-probability history.
bool representative_belief(const PomdpModel& m, const Superstate& b, BeliefState* out) {
    try {
        *out = belief_of_history(m, History{b.steps});
        return true;
    } catch (const ZeroProbabilityObservation&) {
    }
    BeliefState uniform{std::vector<double>(m.n_states, 1.0 / m.n_states)};
    try {
        *out = belief_of_history_from(m, uniform, History{b.steps});
        return true;
    } catch (const ZeroProbabilityObservation&) {
        return false;
    }
}

}  // namespace

SuperstateIndex enumerate_reachable_index(const PomdpModel& m, int l) {
    if (l < 1) throw std::invalid_argument("enumerate_reachable: l must be >= 1");
    SuperstateIndex idx;
    idx.l = l;
    idx.n_actions = m.n_actions;
    idx.n_obs = m.n_obs;

    idx.states.push_back(Superstate{});
    idx.rep_belief.push_back(m.initial_belief());
    idx.index.emplace(Superstate{}, 0);

    std::vector<int> layer{0};
    while (!layer.empty()) {
        std::vector<std::pair<Superstate, BeliefState>> next_layer;
        for (int bi : layer) {
            const Superstate b = idx.states[bi];            // copy: vector may grow
            const BeliefState belief = idx.rep_belief[bi];  // copy for the same reason
            for (int a = 0; a < m.n_actions; ++a) {
                const auto sig = obs_likelihood(m, belief, a);
                for (int y = 0; y < m.n_obs; ++y) {
                    if (sig[y] <= 0.0) continue;
                    Superstate b2 = extend(b, a, y, l);
                    if (idx.index.contains(b2)) continue;
                    BeliefState rep;
                    if (!representative_belief(m, b2, &rep)) continue;
                    idx.index.emplace(b2, -1);  // mark seen; index assigned after sorting the layer
                    next_layer.emplace_back(std::move(b2), std::move(rep));
                }
            }
        }
        std::sort(next_layer.begin(), next_layer.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        layer.clear();
        for (auto& [b2, rep] : next_layer) {
            const int id = static_cast<int>(idx.states.size());
            idx.index[b2] = id;
            idx.rep_belief.push_back(std::move(rep));
            idx.states.push_back(std::move(b2));
            layer.push_back(id);
        }
    }
    return idx;
}

std::vector<Superstate> enumerate_reachable(const PomdpModel& m, int l) {
    return enumerate_reachable_index(m, l).states;
}

SuperstateMdp build(const PomdpModel& m, int l) {
    SuperstateIndex idx = enumerate_reachable_index(m, l);
    SuperstateMdp smdp;
    smdp.l = l;
    smdp.gamma = m.gamma;
    smdp.r_bar = m.r_bar;
    smdp.n_actions = m.n_actions;
    smdp.n_obs = m.n_obs;
    smdp.states = std::move(idx.states);
    smdp.index = std::move(idx.index);
    smdp.rep_belief = std::move(idx.rep_belief);

    const int n = smdp.num_states();
    smdp.transition.assign(static_cast<std::size_t>(m.n_actions) * n * n, 0.0);
    smdp.reward.assign(static_cast<std::size_t>(n) * m.n_actions, 0.0);

    for (int b = 0; b < n; ++b) {
        const BeliefState& belief = smdp.rep_belief[b];
        for (int a = 0; a < m.n_actions; ++a) {
            smdp.rew(b, a) = expected_reward(m, belief, a);
            const auto sig = obs_likelihood(m, belief, a);
            for (int y = 0; y < m.n_obs; ++y) {
                if (sig[y] <= 0.0) continue;
                const Superstate b2 = extend(smdp.states[b], a, y, l);
                const int j = smdp.find(b2);
                if (j < 0) {
                    // reachable through this row but not realizable from the
                    // initial distribution as its own history
                    throw ZeroProbabilityObservation(a, y);
                }
                smdp.trans(a, b, j) += sig[y];
            }
        }
    }
    return smdp;
}

double superstate_mixing(const SuperstateMdp& smdp, std::span<const double> policy) {
    const int n = smdp.num_states();
    const int na = smdp.n_actions;
    if (policy.size() != static_cast<std::size_t>(n) * na)
        throw std::invalid_argument("superstate_mixing: policy has wrong size");
    for (int b = 0; b < n; ++b) {
        double sum = 0.0;
        for (int a = 0; a < na; ++a) {
            const double p = policy[static_cast<std::size_t>(b) * na + a];
            if (p < 0.0) throw std::invalid_argument("superstate_mixing: negative policy entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTol)
            throw std::invalid_argument("superstate_mixing: policy row " + std::to_string(b) + " is not stochastic");
    }
    std::vector<double> chain(static_cast<std::size_t>(n) * n, 0.0);
    for (int b = 0; b < n; ++b) {
        for (int a = 0; a < na; ++a) {
            const double w = policy[static_cast<std::size_t>(b) * na + a];
            if (w == 0.0) continue;
            for (int b2 = 0; b2 < n; ++b2) chain[static_cast<std::size_t>(b) * n + b2] += w * smdp.trans(a, b, b2);
        }
    }
    double best = 1.0;
    for (int i = 0; i < n && best > 0.0; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double overlap = 0.0;
            for (int k = 0; k < n; ++k)
                overlap += std::min(chain[static_cast<std::size_t>(i) * n + k], chain[static_cast<std::size_t>(j) * n + k]);
            best = std::min(best, overlap);
            if (best == 0.0) break;
        }
    }
    return best;
}

std::string serialize_smdp(const SuperstateMdp& smdp) {
    using nlohmann::json;
    json j;
    const int n = smdp.num_states();
    j["n_states"] = n;
    j["n_actions"] = smdp.n_actions;
    j["n_obs"] = smdp.n_obs;
    j["gamma"] = smdp.gamma;
    j["l"] = smdp.l;
    j["r_bar"] = smdp.r_bar;
    json tr = json::array();
    for (int a = 0; a < smdp.n_actions; ++a) {
        json ta = json::array();
        for (int b = 0; b < n; ++b) {
            json row = json::array();
            for (int b2 = 0; b2 < n; ++b2) row.push_back(smdp.trans(a, b, b2));
            ta.push_back(std::move(row));
        }
        tr.push_back(std::move(ta));
    }
    j["transition"] = std::move(tr);
    json rw = json::array();
    for (int b = 0; b < n; ++b) {
        json row = json::array();
        for (int a = 0; a < smdp.n_actions; ++a) row.push_back(smdp.rew(b, a));
        rw.push_back(std::move(row));
    }
    j["reward"] = std::move(rw);
    json beliefs = json::array();
    for (int b = 0; b < n; ++b) beliefs.push_back(smdp.rep_belief[b].probs);
    j["rep_belief"] = std::move(beliefs);
    json supers = json::array();
    for (int b = 0; b < n; ++b) {
        json steps = json::array();
        for (const auto& p : smdp.states[b].steps) steps.push_back(json::array({p.action, p.obs}));
        supers.push_back(std::move(steps));
    }
    j["superstates"] = std::move(supers);
    return j.dump(2) + "\n";
}

SuperstateMdp parse_smdp(const std::string& text, const std::string& source) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(strip_manifest_header(text));
    } catch (const json::parse_error& e) {
        throw ModelIoError(source + ": " + e.what());
    }
    SuperstateMdp smdp;
    try {
        const int n = j.at("n_states").get<int>();
        smdp.n_actions = j.at("n_actions").get<int>();
        smdp.n_obs = j.at("n_obs").get<int>();
        smdp.gamma = j.at("gamma").get<double>();
        smdp.l = j.at("l").get<int>();
        smdp.r_bar = j.at("r_bar").get<double>();
        if (n <= 0 || smdp.n_actions <= 0) throw ModelIoError(source + ": dimensions must be positive");
        smdp.transition.assign(static_cast<std::size_t>(smdp.n_actions) * n * n, 0.0);
        smdp.reward.assign(static_cast<std::size_t>(n) * smdp.n_actions, 0.0);
        smdp.states.resize(n);
        smdp.rep_belief.resize(n);
        const auto& supers = j.at("superstates");
        for (int b = 0; b < n; ++b) {
            for (const auto& step : supers.at(b)) {
                smdp.states[b].steps.push_back({step.at(0).get<int>(), step.at(1).get<int>()});
            }
            smdp.index.emplace(smdp.states[b], b);
        }
        const auto& beliefs = j.at("rep_belief");
        for (int b = 0; b < n; ++b) smdp.rep_belief[b].probs = beliefs.at(b).get<std::vector<double>>();
        const auto& tr = j.at("transition");
        for (int a = 0; a < smdp.n_actions; ++a)
            for (int b = 0; b < n; ++b)
                for (int b2 = 0; b2 < n; ++b2) smdp.trans(a, b, b2) = tr.at(a).at(b).at(b2).get<double>();
        const auto& rw = j.at("reward");
        for (int b = 0; b < n; ++b)
            for (int a = 0; a < smdp.n_actions; ++a) smdp.rew(b, a) = rw.at(b).at(a).get<double>();
    } catch (const json::exception& e) {
        throw ModelIoError(source + ": " + e.what());
    }
    // row-stochasticity check mirrors the model loader
    for (int a = 0; a < smdp.n_actions; ++a) {
        for (int b = 0; b < smdp.num_states(); ++b) {
            double sum = 0.0;
            for (int b2 = 0; b2 < smdp.num_states(); ++b2) {
                const double p = smdp.trans(a, b, b2);
                if (p < 0.0) throw ModelIoError(source + ": negative transition probability");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kRowSumTol)
                throw ModelIoError(source + ": transition row (B=" + std::to_string(b) + ", a=" + std::to_string(a) +
                                   ") sums to " + std::to_string(sum));
        }
    }
    return smdp;
}

SuperstateMdp load_smdp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelIoError(path + ": cannot open for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_smdp(buf.str(), path);
}

void save_smdp(const SuperstateMdp& smdp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ModelIoError(path + ": cannot open for writing");
    out << serialize_smdp(smdp);
    if (!out) throw ModelIoError(path + ": write failed");
}

}  // namespace superstate
