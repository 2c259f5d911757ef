#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "macts/scenario.hpp"

namespace macts {

using json = nlohmann::json;

inline json to_json(const TopologySpec& t) {
    json j{{"kind", t.kind}};
    if (t.kind == "grid") {
        j["rows"] = t.rows;
        j["cols"] = t.cols;
    } else if (t.kind == "line") {
        j["n"] = t.n;
    } else if (t.kind == "random") {
        j["n"] = t.n;
        j["radius"] = t.radius;
        j["max_attempts"] = t.max_attempts;
    }
    return j;
}

inline TopologySpec topology_spec_from_json(const json& j) {
    TopologySpec t;
    t.kind = j.value("kind", t.kind);
    t.rows = j.value("rows", t.rows);
    t.cols = j.value("cols", t.cols);
    t.n = j.value("n", t.n);
    t.radius = j.value("radius", t.radius);
    t.max_attempts = j.value("max_attempts", t.max_attempts);
    return t;
}

inline json to_json(const ScenarioConfig& c) {
    return json{{"topology", to_json(c.topology)},
                {"broadcast_period_s", c.broadcast_period_s},
                {"sim_duration_s", c.sim_duration_s},
                {"delay_mean_us", c.delay_mean_us},
                {"delay_std_us", c.delay_std_us},
                {"drift_ppm_bound", c.drift_ppm_bound},
                {"boot_offset_max_s", c.boot_offset_max_s},
                {"h_initial", c.h_initial},
                {"xi_us", c.xi_us},
                {"rho_v", c.rho_v},
                {"d_fixed_us", c.d_fixed_us},
                {"forward_latency_us", c.forward_latency_us},
                {"measurement_interval_s", c.measurement_interval_s},
                {"convergence_threshold_us", c.convergence_threshold_us},
                {"loss_probability", c.loss_probability},
                {"raw_local_error", c.raw_local_error},
                {"first_crossing_convergence", c.first_crossing_convergence},
                {"max_events", c.max_events},
                {"seed", c.seed}};
}

inline ScenarioConfig scenario_from_json(const json& j) {
    ScenarioConfig c;
    if (j.contains("topology")) c.topology = topology_spec_from_json(j.at("topology"));
    c.broadcast_period_s = j.value("broadcast_period_s", c.broadcast_period_s);
    c.sim_duration_s = j.value("sim_duration_s", c.sim_duration_s);
    c.delay_mean_us = j.value("delay_mean_us", c.delay_mean_us);
    c.delay_std_us = j.value("delay_std_us", c.delay_std_us);
    c.drift_ppm_bound = j.value("drift_ppm_bound", c.drift_ppm_bound);
    c.boot_offset_max_s = j.value("boot_offset_max_s", c.boot_offset_max_s);
    c.h_initial = j.value("h_initial", c.h_initial);
    c.xi_us = j.value("xi_us", c.xi_us);
    c.rho_v = j.value("rho_v", c.rho_v);
    c.d_fixed_us = j.value("d_fixed_us", c.d_fixed_us);
    c.forward_latency_us = j.value("forward_latency_us", c.forward_latency_us);
    c.measurement_interval_s = j.value("measurement_interval_s", c.measurement_interval_s);
    c.convergence_threshold_us = j.value("convergence_threshold_us", c.convergence_threshold_us);
    c.loss_probability = j.value("loss_probability", c.loss_probability);
    c.raw_local_error = j.value("raw_local_error", c.raw_local_error);
    c.first_crossing_convergence =
        j.value("first_crossing_convergence", c.first_crossing_convergence);
    c.max_events = j.value("max_events", c.max_events);
    c.seed = j.value("seed", c.seed);
    return c;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("malformed config " + path + ": " + e.what());
    }
    return j;
}

inline ScenarioConfig load_scenario(const std::string& path) {
    return scenario_from_json(load_json_file(path));
}

/// Apply a "key=value" override to a JSON config. Dotted keys descend into
/// nested objects ("topology.kind=line"). Values parse as JSON first (numbers,
/// booleans) and fall back to strings, so `--set k=v` produces exactly the
/// run that editing the file would.
inline void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw std::invalid_argument("override must look like key=value: " + assignment);
    }
    const std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);

    json* slot = &j;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos
                                                       ? std::string::npos
                                                       : dot - start);
        if (part.empty()) throw std::invalid_argument("bad override key: " + key);
        if (dot == std::string::npos) {
            json parsed = json::parse(value, nullptr, false);
            (*slot)[part] = parsed.is_discarded() ? json(value) : parsed;
            return;
        }
        slot = &(*slot)[part];
        start = dot + 1;
    }
}

/// Flattened key=value view of a JSON object, sorted by key; the provenance
/// block embedded in every output file.
inline std::vector<std::pair<std::string, std::string>> flatten(const json& j,
                                                                const std::string& prefix = "") {
    std::vector<std::pair<std::string, std::string>> out;
    if (j.is_object()) {
        for (const auto& [key, value] : j.items()) {
            const std::string path = prefix.empty() ? key : prefix + "." + key;
            auto nested = flatten(value, path);
            out.insert(out.end(), nested.begin(), nested.end());
        }
    } else if (j.is_string()) {
        out.emplace_back(prefix, j.get<std::string>());
    } else {
        out.emplace_back(prefix, j.dump());
    }
    return out;
}

} // namespace macts
