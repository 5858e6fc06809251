#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relosim/pipeline.hpp"

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int runs = -1;
    bool preset = false;
    std::vector<std::string> scenarios;
};

relosim::ProjectConfig make_config(const GlobalArgs& args) {
    relosim::ProjectConfig config =
        args.config_path.empty() ? relosim::default_config() : relosim::load_config(args.config_path);
    if (!args.out_dir.empty())
        config.out_dir = args.out_dir;
    if (args.seed_set)
        config.seed = args.seed;
    return config;
}

relosim::CommandOptions make_options(const GlobalArgs& args) {
    relosim::CommandOptions options;
    options.use_preset = args.preset;
    options.runs_override = args.runs;
    options.scenario_names = args.scenarios;
    return options;
}

void add_common_flags(CLI::App* cmd, GlobalArgs& args) {
    cmd->add_option("--config", args.config_path, "Project configuration file (JSON)");
    cmd->add_option("--seed", args.seed, "Override the global random seed")
        ->each([&](const std::string&) { args.seed_set = true; });
    cmd->add_option("--runs", args.runs, "Override the Monte-Carlo run count");
    cmd->add_flag("--preset", args.preset,
                  "Use the bundled reference coefficients instead of estimated ones");
    cmd->add_option("--scenario", args.scenarios, "Scenario name (repeatable)");
    cmd->add_option("--out", args.out_dir, "Output directory");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Residential location microsimulation toolkit"};
    app.require_subcommand(1);

    GlobalArgs args;
    CLI::App* generate = app.add_subcommand("generate", "Generate a synthetic region dataset");
    CLI::App* estimate =
        app.add_subcommand("estimate", "Fit the land-price and residential choice models");
    CLI::App* validate =
        app.add_subcommand("validate", "Simulate the holdout households and compare indicators");
    CLI::App* simulate = app.add_subcommand("simulate", "Run relocation scenarios and policies");
    CLI::App* report_diff =
        app.add_subcommand("report-diff", "Compare scenario summaries against a baseline");
    for (CLI::App* cmd : {generate, estimate, validate, simulate, report_diff})
        add_common_flags(cmd, args);

    CLI11_PARSE(app, argc, argv);

    try {
        const relosim::ProjectConfig config = make_config(args);
        const relosim::CommandOptions options = make_options(args);
        std::string summary;
        if (generate->parsed())
            summary = relosim::cmd_generate(config);
        else if (estimate->parsed())
            summary = relosim::cmd_estimate(config, options);
        else if (validate->parsed())
            summary = relosim::cmd_validate(config, options);
        else if (simulate->parsed())
            summary = relosim::cmd_simulate(config, options);
        else if (report_diff->parsed())
            summary = relosim::cmd_report_diff(config, options);
        std::cout << summary << '\n';
        return 0;
    } catch (const relosim::Error& e) {
        std::cerr << "error[" << relosim::to_string(e.category()) << "]: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << '\n';
        return 2;
    }
}
