#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fairswap/error.hpp"
#include "fairswap/experiments.hpp"
#include "fairswap/swarm.hpp"

using namespace fairswap;
namespace fs = std::filesystem;

namespace {

experiments::ScenarioPreset resolve(const std::string& what, const std::string& scale) {
    const auto names = experiments::preset_names();
    if (std::find(names.begin(), names.end(), what) != names.end()) {
        return experiments::preset(what, experiments::parse_scale(scale));
    }
    if (fs::exists(what)) return experiments::load_scenario(what);
    throw Error(ErrorCode::UnknownPreset, "'" + what + "' is neither a preset nor a scenario file");
}

std::string describe(const swarm::ScenarioConfig& c) {
    std::string out = std::to_string(c.n_nodes) + " nodes, " + std::to_string(c.n_seeders) + " seeders, ";
    if (c.n_freeloaders) out += std::to_string(c.n_freeloaders) + " freeloaders, ";
    out += std::to_string(c.n_pieces) + " pieces, churn " + std::string(swarm::to_string(c.churn)) + ", stop " +
           std::string(swarm::to_string(c.stop));
    return out;
}

int run_cmd(const std::string& target, const std::vector<std::uint64_t>& seeds, const std::string& out,
            const std::string& scale) {
    const auto preset = resolve(target, scale);
    std::optional<std::vector<std::uint64_t>> override;
    if (!seeds.empty()) override = seeds;
    const auto result = experiments::run_experiment(preset, override, out);
    for (const auto& run : result.runs) {
        std::cout << preset.name << ' ' << run.arm << " seed=" << run.seed << " rounds=" << run.stream.back().round
                  << (run.converged ? "" : " NONCONVERGENCE") << '\n';
    }
    for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
    return 0;
}

int report_cmd(const std::string& dir) {
    const auto out = experiments::report(dir);
    for (const auto& c : out.charts) std::cout << "wrote " << c.string() << '\n';
    std::cout << "wrote " << out.markdown.string() << '\n';
    return 0;
}

int list_cmd() {
    for (const auto& name : experiments::preset_names()) {
        const auto full = experiments::preset(name, experiments::Scale::Full);
        const auto desk = experiments::preset(name, experiments::Scale::Desk);
        std::cout << name << "\n  full: " << describe(full.config) << "\n  desk: " << describe(desk.config)
                  << "\n  arms:";
        for (const auto& a : full.arms) std::cout << ' ' << a.name;
        std::cout << '\n';
    }
    return 0;
}

int trace_cmd(const std::string& target, SessionId session, std::uint64_t seed, const std::string& arm_name,
              const std::string& scale) {
    const auto preset = resolve(target, scale);
    auto config = preset.config;
    const auto arm = arm_name.empty() ? preset.arms.front() : experiments::parse_arm(arm_name);
    const auto knobs = config.strategy;
    config.strategy = arm.strategy;
    config.strategy.tft_slots = knobs.tft_slots;
    config.strategy.tft_rotation = knobs.tft_rotation;
    config.strategy.tft_window = knobs.tft_window;
    config.seed = seed;

    auto state = swarm::build_network(config);
    bool seen = false;
    state.on_event = [&](const swarm::TransferEvent& e) {
        if (e.session != session) return;
        seen = true;
        std::cout << swarm::format_event(e) << '\n';
    };
    auto open = [&] {
        return std::any_of(state.sessions.begin(), state.sessions.end(),
                           [&](const swarm::ActiveSession& a) { return a.session.id() == session; });
    };
    const std::size_t cap = config.round_cap.value_or(swarm::default_round_cap(config));
    while (!state.stop_reached() && state.round < cap) {
        swarm::tick(state);
        if (seen && !open()) break;
        if (state.next_session > session && !open() && !seen) break;
    }
    if (!seen) {
        throw Error(ErrorCode::UnknownSession, "session " + std::to_string(session) + " never ran in " + preset.name +
                                                   " (" + arm.name + ", seed " + std::to_string(seed) + ")");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fair-exchange swarm simulator"};
    app.require_subcommand(1);

    std::string target, out = "results", scale = "full", dir, arm;
    std::vector<std::uint64_t> seeds;
    SessionId session = 0;
    std::uint64_t seed = 1;

    auto* run = app.add_subcommand("run", "Run a preset or scenario file and write CSVs");
    run->add_option("target", target, "Preset name or scenario file")->required();
    run->add_option("--seeds", seeds, "Comma-separated seeds")->delimiter(',');
    run->add_option("--out", out, "Output directory");
    run->add_option("--scale", scale, "desk or full")->check(CLI::IsMember({"desk", "full"}));

    auto* rep = app.add_subcommand("report", "Charts and summary table from a run directory");
    rep->add_option("dir", dir, "Directory written by run")->required();

    auto* list = app.add_subcommand("list-presets", "Show the built-in presets");

    auto* trace = app.add_subcommand("trace", "Print the messages of one exchange session");
    trace->add_option("target", target, "Preset name or scenario file")->required();
    trace->add_option("--session", session, "Session id")->required();
    trace->add_option("--seed", seed, "Seed");
    trace->add_option("--arm", arm, "Arm (default: the preset's first)");
    trace->add_option("--scale", scale, "desk or full")->check(CLI::IsMember({"desk", "full"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return run_cmd(target, seeds, out, scale);
        if (*rep) return report_cmd(dir);
        if (*list) return list_cmd();
        if (*trace) return trace_cmd(target, session, seed, arm, scale);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
