#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "relooper/relooper.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& backend_override,
            const std::string& budget_override, int parallel_override,
            const std::string& out_override) {
    relooper::harness::SuiteConfig config;
    try {
        config = relooper::harness::load_config(config_path);
        if (!backend_override.empty())
            config.backend = relooper::harness::parse_backend_spec(backend_override);
        if (!budget_override.empty())
            config.budget = relooper::harness::parse_duration(budget_override);
        if (parallel_override > 0) config.parallel = parallel_override;
        if (!out_override.empty()) config.output_dir = out_override;
    } catch (const relooper::harness::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    relooper::harness::SuiteReport report;
    try {
        report = relooper::harness::run_suite(config);
    } catch (const relooper::harness::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    std::cout << relooper::harness::emit_report(report, relooper::harness::ReportFormat::kTable);
    if (!config.output_dir.empty())
        std::cout << "\nlogs written to " << config.output_dir << "\n";

    for (const auto& task : report.per_task)
        if (task.error) return 1;
    return 0;
}

int cmd_report(const std::string& run_dir, const std::string& format) {
    try {
        const auto report = relooper::harness::load_report(run_dir);
        const auto fmt = format == "csv" ? relooper::harness::ReportFormat::kCsv
                                         : relooper::harness::ReportFormat::kTable;
        std::cout << relooper::harness::emit_report(report, fmt);
    } catch (const relooper::harness::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

int cmd_solve(const std::string& world_path) {
    relooper::textworld::World world;
    try {
        world = relooper::textworld::load_world_file(world_path);
    } catch (const relooper::textworld::WorldFileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    const auto plan = relooper::textworld::solve_oracle(world);
    if (!plan) {
        std::cerr << "no plan found\n";
        return 1;
    }
    for (const auto& action : *plan)
        std::cout << relooper::textworld::format_action(action) << "\n";
    return 0;
}

int cmd_play(const std::string& world_path) {
    namespace tw = relooper::textworld;
    tw::World world;
    try {
        world = tw::load_world_file(world_path);
    } catch (const tw::WorldFileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    const auto& catalog = tw::default_catalog();
    std::cout << tw::initial_observation(world, catalog) << "\n";
    std::string line;
    while (!world.done) {
        std::cout << "> " << std::flush;
        if (!std::getline(std::cin, line)) break;
        line = relooper::detail::trim(line);
        if (line == "quit" || line == "exit") break;
        if (line.starts_with("think:")) {
            std::cout << "OK.\n";
            continue;
        }
        const auto action = tw::parse_action(line);
        if (!action) {
            std::cout << catalog.nothing << "\n";
            continue;
        }
        const auto obs = tw::step(world, *action, catalog);
        std::cout << obs.text << "\n";
        if (obs.reward == 1) std::cout << "Task solved.\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"self-correcting agent harness for a household text game"};
    app.require_subcommand(1);

    std::string config_path, backend_override, budget_override, out_override;
    int parallel_override = 0;
    auto* run = app.add_subcommand("run", "run a scenario suite");
    run->add_option("--config", config_path, "suite config (JSON)")->required();
    run->add_option("--backend", backend_override,
                    "override: scripted:<script>|persona:<name>|oracle[:<thinks>]|remote");
    run->add_option("--budget", budget_override, "wall-clock budget, e.g. 30s, 12h");
    run->add_option("--parallel", parallel_override, "max concurrent tasks");
    run->add_option("--out", out_override, "output directory for logs and report");

    std::string run_dir, format = "table";
    auto* report = app.add_subcommand("report", "render a stored run report");
    report->add_option("run_dir", run_dir, "run directory or report.json")->required();
    report->add_option("--format", format, "table|csv")
        ->check(CLI::IsMember({"table", "csv"}));

    std::string solve_world;
    auto* solve = app.add_subcommand("solve", "print the oracle plan for a world");
    solve->add_option("world", solve_world, "world file (JSON)")->required();

    std::string play_world;
    auto* play = app.add_subcommand("play", "interactive REPL for a world");
    play->add_option("world", play_world, "world file (JSON)")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed())
        return cmd_run(config_path, backend_override, budget_override, parallel_override,
                       out_override);
    if (report->parsed()) return cmd_report(run_dir, format);
    if (solve->parsed()) return cmd_solve(solve_world);
    if (play->parsed()) return cmd_play(play_world);
    return 2;
}
