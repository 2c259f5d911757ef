// Command-line front end: single runs, parameter sweeps and spectral analysis
// of the consensus time-synchronization simulator.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "macts/config_io.hpp"
#include "macts/io.hpp"
#include "macts/simulator.hpp"
#include "macts/spectral.hpp"
#include "macts/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitRuntimeError = 2;

std::string default_out_dir() {
    if (const char* env = std::getenv("MACTS_OUT_DIR")) return env;
    return ".";
}

macts::ScenarioConfig resolve_config(const std::string& config_path,
                                     const std::vector<std::string>& overrides,
                                     std::int64_t seed_flag) {
    macts::json j = macts::load_json_file(config_path);
    for (const auto& assignment : overrides) macts::apply_override(j, assignment);
    macts::ScenarioConfig cfg = macts::scenario_from_json(j);
    if (seed_flag >= 0) cfg.seed = static_cast<std::uint64_t>(seed_flag);
    cfg.validate();
    return cfg;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides,
            std::int64_t seed_flag, std::string out_base) {
    macts::ScenarioConfig cfg;
    macts::Topology topo;
    try {
        cfg = resolve_config(config_path, overrides, seed_flag);
        topo = macts::build_topology(cfg.topology, cfg.seed);
        if (!macts::is_connected(topo)) {
            std::cerr << "error: topology is not connected\n";
            return kExitConfigError;
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }

    try {
        const macts::RunTrace trace = macts::run_scenario(cfg);
        const macts::SpectralReport spectral = macts::spectral_report(topo, cfg.h_initial);

        if (out_base.empty()) {
            out_base = (std::filesystem::path(default_out_dir()) / macts::run_name(cfg)).string();
        }
        const auto parent = std::filesystem::path(out_base).parent_path();
        if (!parent.empty()) std::filesystem::create_directories(parent);
        macts::write_file(out_base + ".trace.csv", macts::trace_csv_string(cfg, trace));
        std::ostringstream summary;
        macts::write_summary(summary, cfg, trace, spectral);
        macts::write_file(out_base + ".summary.txt", summary.str());

        // distribution of the maximal local error over the steady window
        const auto steady =
            macts::steady_state_summary(trace, macts::ProbeMetric::max_local, 2, 10);
        if (steady.ok() && trace.convergence_time_s) {
            std::vector<double> series;
            for (const auto& row : trace.probes) {
                if (row.time_s >= steady.stats.window_start_s) {
                    series.push_back(row.max_local_us);
                }
            }
            std::ostringstream hist;
            macts::write_histogram_csv(hist, macts::histogram(series, 1.0));
            macts::write_file(out_base + ".hist_max_local.csv", hist.str());
        }

        if (trace.convergence_time_s) {
            std::cout << "converged at " << macts::format_s(*trace.convergence_time_s)
                      << " s (" << macts::format_s(*trace.convergence_time_s / 60.0)
                      << " min)\n";
        } else {
            std::cout << "did not converge within " << macts::format_s(cfg.sim_duration_s)
                      << " s\n";
        }
        std::cout << "messages: " << trace.msg_origin << " origin + " << trace.msg_forwards
                  << " forwards\n";
        for (std::size_t h = 0; h < spectral.lambda2_per_hop.size(); ++h) {
            std::cout << "lambda2(level " << (h + 1)
                      << ") = " << macts::format_us(spectral.lambda2_per_hop[h]) << "\n";
        }
        std::cout << "lambda2(union of 1.." << spectral.max_hops
                  << ") = " << macts::format_us(spectral.lambda2_union)
                  << "  lower_bound = " << macts::format_us(spectral.lower_bound)
                  << "  upper_bound = " << macts::format_us(spectral.upper_bound) << "\n";
        std::cout << "outputs: " << out_base << ".trace.csv, " << out_base << ".summary.txt\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntimeError;
    }
}

int cmd_sweep(const std::string& spec_path, const std::vector<std::string>& overrides,
              int threads) {
    macts::SweepSpec spec;
    try {
        macts::json j = macts::load_json_file(spec_path);
        for (const auto& assignment : overrides) macts::apply_override(j["base"], assignment);
        spec = macts::sweep_from_json(j);
        spec.base.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
    try {
        const macts::SweepOutcome outcome = macts::run_sweep(spec, threads);
        std::cout << outcome.records.size() << " runs completed, "
                  << outcome.failures.size() << " failed; aggregate at "
                  << (std::filesystem::path(spec.out_dir) / "aggregate.csv").string() << "\n";
        for (const auto& failure : outcome.failures) {
            std::cerr << "run failed: " << failure << "\n";
        }
        return outcome.failures.empty() ? kExitOk : kExitRuntimeError;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntimeError;
    }
}

int cmd_spectral(const std::string& config_path, const std::vector<std::string>& overrides,
                 int h_max, const std::string& out_path) {
    macts::Topology topo;
    try {
        const macts::ScenarioConfig cfg = resolve_config(config_path, overrides, -1);
        topo = macts::build_topology(cfg.topology, cfg.seed);
        if (!macts::is_connected(topo)) {
            std::cerr << "error: topology is not connected\n";
            return kExitConfigError;
        }
        if (h_max < 1) {
            std::cerr << "config error: --h-max must be >= 1\n";
            return kExitConfigError;
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
    try {
        std::ostringstream table;
        macts::write_spectral_csv(table, topo, h_max);
        std::cout << table.str();
        if (!out_path.empty()) macts::write_file(out_path, table.str());
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntimeError;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Average-consensus time synchronization: simulator, sweeps and "
                 "spectral analysis"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::int64_t seed_flag = -1;
    std::vector<std::string> overrides;
    int threads = 0;
    int h_max = 4;

    CLI::App* run = app.add_subcommand("run", "Execute one scenario and write trace + summary");
    run->add_option("--config", config_path, "Scenario config (JSON)")->required();
    run->add_option("--seed", seed_flag, "Override the config seed");
    run->add_option("--set", overrides, "Override a config key, key=value (repeatable)");
    run->add_option("--out", out_path, "Output base path (default: $MACTS_OUT_DIR/<run name>)");

    CLI::App* sweep = app.add_subcommand("sweep", "Run a cartesian sweep and aggregate");
    sweep->add_option("--spec", config_path, "Sweep spec (JSON)")->required();
    sweep->add_option("--set", overrides, "Override a base-config key (repeatable)");
    sweep->add_option("--threads", threads, "Worker pool size (default: hardware)");

    CLI::App* spectral =
        app.add_subcommand("spectral", "Hop-level algebraic connectivity report");
    spectral->add_option("--config", config_path, "Scenario config providing the topology")
        ->required();
    spectral->add_option("--h-max", h_max, "Largest hop depth to report");
    spectral->add_option("--set", overrides, "Override a config key (repeatable)");
    spectral->add_option("--out", out_path, "Also write the CSV to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfigError;
    }

    if (run->parsed()) return cmd_run(config_path, overrides, seed_flag, out_path);
    if (sweep->parsed()) return cmd_sweep(config_path, overrides, threads);
    return cmd_spectral(config_path, overrides, h_max, out_path);
}
