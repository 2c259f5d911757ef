#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "macts/config_io.hpp"
#include "macts/io.hpp"
#include "macts/metrics.hpp"
#include "macts/simulator.hpp"

namespace macts {

/// Cartesian sweep over (h_initial, topology, seed) on top of a base scenario.
struct SweepSpec {
    ScenarioConfig base;
    std::vector<int> h_initial_axis;
    std::vector<TopologySpec> topology_axis;
    std::vector<std::uint64_t> seed_axis;
    std::string out_dir = "sweep_out";
    int max_runs = 10000;
};

inline SweepSpec sweep_from_json(const json& j) {
    SweepSpec spec;
    if (j.contains("base")) spec.base = scenario_from_json(j.at("base"));
    if (!j.contains("axes")) throw std::invalid_argument("sweep spec needs an axes object");
    const json& axes = j.at("axes");
    if (axes.contains("h_initial"))
        spec.h_initial_axis = axes.at("h_initial").get<std::vector<int>>();
    if (axes.contains("seed"))
        spec.seed_axis = axes.at("seed").get<std::vector<std::uint64_t>>();
    if (axes.contains("topology")) {
        for (const auto& t : axes.at("topology")) {
            spec.topology_axis.push_back(topology_spec_from_json(t));
        }
    }
    spec.out_dir = j.value("out_dir", spec.out_dir);
    spec.max_runs = j.value("max_runs", spec.max_runs);
    for (const auto* axis_name : {"h_initial", "seed", "topology"}) {
        if (axes.contains(axis_name) && axes.at(axis_name).empty()) {
            throw std::invalid_argument(std::string("empty sweep axis: ") + axis_name);
        }
    }
    return spec;
}

/// Expanded run list; an omitted axis keeps the base value.
inline std::vector<ScenarioConfig> expand_sweep(const SweepSpec& spec) {
    std::vector<int> hs = spec.h_initial_axis;
    if (hs.empty()) hs.push_back(spec.base.h_initial);
    std::vector<TopologySpec> topos = spec.topology_axis;
    if (topos.empty()) topos.push_back(spec.base.topology);
    std::vector<std::uint64_t> seeds = spec.seed_axis;
    if (seeds.empty()) seeds.push_back(spec.base.seed);

    const std::size_t total = hs.size() * topos.size() * seeds.size();
    if (total > static_cast<std::size_t>(spec.max_runs)) {
        throw std::invalid_argument("sweep size " + std::to_string(total) +
                                    " exceeds max_runs cap " + std::to_string(spec.max_runs));
    }
    std::vector<ScenarioConfig> runs;
    runs.reserve(total);
    for (const auto& topo : topos) {
        for (int h : hs) {
            for (std::uint64_t seed : seeds) {
                ScenarioConfig cfg = spec.base;
                cfg.topology = topo;
                cfg.h_initial = h;
                cfg.seed = seed;
                runs.push_back(cfg);
            }
        }
    }
    return runs;
}

struct SweepOutcome {
    std::vector<RunRecord> records;
    std::vector<std::string> failures; ///< one "run_name: error" entry per failed run
};

inline std::string run_name(const ScenarioConfig& cfg) {
    return cfg.topology.label() + "_H" + std::to_string(cfg.h_initial) + "_seed" +
           std::to_string(cfg.seed);
}

/// Execute every run of the sweep in a worker pool. Runs share nothing, so
/// worker count does not affect any individual result; outputs and the
/// aggregate are emitted in the canonical expansion order. Failures are
/// recorded and do not stop the rest of the sweep.
inline SweepOutcome run_sweep(const SweepSpec& spec, int threads = 0,
                              bool write_outputs = true) {
    const std::vector<ScenarioConfig> runs = expand_sweep(spec);
    if (write_outputs) std::filesystem::create_directories(spec.out_dir);

    struct Slot {
        bool ok = false;
        RunRecord record;
        std::string error;
    };
    std::vector<Slot> slots(runs.size());
    std::atomic<std::size_t> next{0};
    const int worker_count =
        threads > 0 ? threads
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    auto worker = [&] {
        while (true) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= runs.size()) return;
            const ScenarioConfig& cfg = runs[idx];
            try {
                const RunTrace trace = run_scenario(cfg);
                slots[idx].record = make_run_record(cfg, trace);
                slots[idx].ok = true;
                if (write_outputs) {
                    const std::string base =
                        (std::filesystem::path(spec.out_dir) / run_name(cfg)).string();
                    write_file(base + ".trace.csv", trace_csv_string(cfg, trace));
                    const Topology topo = build_topology(cfg.topology, cfg.seed);
                    const SpectralReport spectral = spectral_report(topo, cfg.h_initial);
                    std::ostringstream summary;
                    write_summary(summary, cfg, trace, spectral);
                    write_file(base + ".summary.txt", summary.str());
                }
            } catch (const std::exception& e) {
                slots[idx].error = run_name(cfg) + ": " + e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < worker_count; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    SweepOutcome outcome;
    for (const auto& slot : slots) {
        if (slot.ok) {
            outcome.records.push_back(slot.record);
        } else {
            outcome.failures.push_back(slot.error);
        }
    }
    if (write_outputs && !outcome.records.empty()) {
        std::ostringstream table;
        write_convergence_csv(table, convergence_table(outcome.records, 1));
        write_file((std::filesystem::path(spec.out_dir) / "aggregate.csv").string(),
                   table.str());
    }
    return outcome;
}

} // namespace macts
