#include "superstate/model_io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace superstate {

using nlohmann::json;

namespace {

json labels_to_json(const std::vector<std::string>& v) { return json(v); }

std::vector<std::string> labels_from_json(const json& j, std::size_t expected, const std::string& what,
                                          const std::string& source) {
    if (!j.is_array() || j.size() != expected) {
        throw ModelIoError(source + ": labels." + what + " must be an array of " + std::to_string(expected) +
                           " strings");
    }
    std::vector<std::string> out;
    out.reserve(expected);
    for (const auto& e : j) out.push_back(e.get<std::string>());
    return out;
}

}  // namespace

std::string strip_manifest_header(const std::string& text) {
    std::size_t pos = 0;
    while (pos < text.size() && text[pos] == '#') {
        const std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) return "";
        pos = nl + 1;
    }
    return text.substr(pos);
}

PomdpModel parse_model(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(strip_manifest_header(text));
    } catch (const json::parse_error& e) {
        throw ModelIoError(source + ": " + e.what());
    }
    PomdpModel m;
    try {
        m.n_states = j.at("n_states").get<int>();
        m.n_actions = j.at("n_actions").get<int>();
        m.n_obs = j.at("n_obs").get<int>();
        m.gamma = j.at("gamma").get<double>();
        if (m.n_states <= 0 || m.n_actions <= 0 || m.n_obs <= 0)
            throw ModelIoError(source + ": dimensions must be positive");
        m.allocate();
        const auto& init = j.at("init_dist");
        if (!init.is_array() || init.size() != static_cast<std::size_t>(m.n_states))
            throw ModelIoError(source + ": init_dist must have n_states entries");
        for (int s = 0; s < m.n_states; ++s) m.init_dist[s] = init[s].get<double>();

        const auto& tr = j.at("transition");
        if (!tr.is_array() || tr.size() != static_cast<std::size_t>(m.n_actions))
            throw ModelIoError(source + ": transition must be [a][s][s'] with n_actions outer entries");
        for (int a = 0; a < m.n_actions; ++a) {
            const auto& ta = tr[a];
            if (!ta.is_array() || ta.size() != static_cast<std::size_t>(m.n_states))
                throw ModelIoError(source + ": transition[" + std::to_string(a) + "] must have n_states rows");
            for (int s = 0; s < m.n_states; ++s) {
                const auto& row = ta[s];
                if (!row.is_array() || row.size() != static_cast<std::size_t>(m.n_states))
                    throw ModelIoError(source + ": transition[" + std::to_string(a) + "][" + std::to_string(s) +
                                       "] must have n_states entries");
                for (int s2 = 0; s2 < m.n_states; ++s2) m.trans(a, s, s2) = row[s2].get<double>();
            }
        }
        const auto& ob = j.at("obs_kernel");
        if (!ob.is_array() || ob.size() != static_cast<std::size_t>(m.n_states))
            throw ModelIoError(source + ": obs_kernel must be [s][y] with n_states rows");
        for (int s = 0; s < m.n_states; ++s) {
            const auto& row = ob[s];
            if (!row.is_array() || row.size() != static_cast<std::size_t>(m.n_obs))
                throw ModelIoError(source + ": obs_kernel[" + std::to_string(s) + "] must have n_obs entries");
            for (int y = 0; y < m.n_obs; ++y) m.obs(s, y) = row[y].get<double>();
        }
        const auto& rw = j.at("reward");
        if (!rw.is_array() || rw.size() != static_cast<std::size_t>(m.n_states))
            throw ModelIoError(source + ": reward must be [s][a] with n_states rows");
        for (int s = 0; s < m.n_states; ++s) {
            const auto& row = rw[s];
            if (!row.is_array() || row.size() != static_cast<std::size_t>(m.n_actions))
                throw ModelIoError(source + ": reward[" + std::to_string(s) + "] must have n_actions entries");
            for (int a = 0; a < m.n_actions; ++a) m.rew(s, a) = row[a].get<double>();
        }
        if (j.contains("labels")) {
            const auto& lab = j.at("labels");
            if (lab.contains("states")) m.state_labels = labels_from_json(lab["states"], m.n_states, "states", source);
            if (lab.contains("actions"))
                m.action_labels = labels_from_json(lab["actions"], m.n_actions, "actions", source);
            if (lab.contains("observations"))
                m.obs_labels = labels_from_json(lab["observations"], m.n_obs, "observations", source);
        }
    } catch (const json::exception& e) {
        throw ModelIoError(source + ": " + e.what());
    }
    m.finalize();

    const auto report = validate(m);
    if (!report.empty()) {
        std::string msg = source + ": model violates invariants:";
        for (const auto& line : report) msg += "\n  - " + line;
        throw ModelIoError(msg);
    }
    return m;
}

PomdpModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelIoError(path + ": cannot open for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str(), path);
}

std::string serialize_model(const PomdpModel& m) {
    json j;
    j["n_states"] = m.n_states;
    j["n_actions"] = m.n_actions;
    j["n_obs"] = m.n_obs;
    j["gamma"] = m.gamma;
    j["init_dist"] = m.init_dist;
    json tr = json::array();
    for (int a = 0; a < m.n_actions; ++a) {
        json ta = json::array();
        for (int s = 0; s < m.n_states; ++s) {
            json row = json::array();
            for (int s2 = 0; s2 < m.n_states; ++s2) row.push_back(m.trans(a, s, s2));
            ta.push_back(std::move(row));
        }
        tr.push_back(std::move(ta));
    }
    j["transition"] = std::move(tr);
    json ob = json::array();
    for (int s = 0; s < m.n_states; ++s) {
        json row = json::array();
        for (int y = 0; y < m.n_obs; ++y) row.push_back(m.obs(s, y));
        ob.push_back(std::move(row));
    }
    j["obs_kernel"] = std::move(ob);
    json rw = json::array();
    for (int s = 0; s < m.n_states; ++s) {
        json row = json::array();
        for (int a = 0; a < m.n_actions; ++a) row.push_back(m.rew(s, a));
        rw.push_back(std::move(row));
    }
    j["reward"] = std::move(rw);
    if (!m.state_labels.empty() || !m.action_labels.empty() || !m.obs_labels.empty()) {
        json lab;
        if (!m.state_labels.empty()) lab["states"] = labels_to_json(m.state_labels);
        if (!m.action_labels.empty()) lab["actions"] = labels_to_json(m.action_labels);
        if (!m.obs_labels.empty()) lab["observations"] = labels_to_json(m.obs_labels);
        j["labels"] = std::move(lab);
    }
    return j.dump(2) + "\n";
}

void save_model(const PomdpModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ModelIoError(path + ": cannot open for writing");
    out << serialize_model(m);
    if (!out) throw ModelIoError(path + ": write failed");
}

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::string model_content_hash(const PomdpModel& m) { return fnv1a64_hex(serialize_model(m)); }

}  // namespace superstate
