#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "swarmcov/commands.hpp"

using namespace swarmcov;

namespace {

void add_common(CLI::App* sub, CommandOptions& o, std::string& normalize) {
    sub->add_option_function<std::string>(
        "--config", [&o](const std::string& p) { o.config = p; }, "YAML experiment config");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&o](std::uint64_t s) { o.seed = s; }, "Seed (sweeps: first of the seed list)");
    sub->add_option_function<std::string>(
        "--out", [&o](const std::string& p) { o.out_dir = p; }, "Output directory");
    sub->add_option_function<unsigned>(
        "--workers", [&o](unsigned w) { o.workers = w; }, "Parallel sweep jobs")
        ->check(CLI::PositiveNumber);
    sub->add_option("--normalize", normalize, "Frequency normalization speed")
        ->check(CLI::IsMember({"base-speed", "mean-speed"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Swarm area coverage simulator"};
    app.set_version_flag("--version", artifact_version());
    app.require_subcommand(1);

    CommandOptions opts;
    std::string normalize;

    auto* run = app.add_subcommand("run", "Simulate one swarm and write trajectory and metrics");
    add_common(run, opts, normalize);
    run->add_option_function<double>(
        "--omega", [&](double w) { opts.omega = w; }, "Shape oscillation rate (rad/s)");

    auto* sweep = app.add_subcommand("sweep", "Frequency sweep with response fits");
    add_common(sweep, opts, normalize);

    auto* field = app.add_subcommand("field", "Dump the geofencing vector field on a grid");
    add_common(field, opts, normalize);
    field->add_option_function<double>(
        "--alpha", [&](double a) { opts.alpha = a; }, "Shape parameter in [0, 2]");

    auto* scenario = app.add_subcommand("scenario-paper", "22-agent field case in physical units");
    add_common(scenario, opts, normalize);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        std::cerr << "error E01 usage: " << e.what() << "\n";
        return 1;
    }
    if (!normalize.empty()) {
        opts.normalization = parse_normalization(normalize);
    }

    try {
        if (*run) {
            cmd_run(opts, std::cout);
        } else if (*sweep) {
            cmd_sweep(opts, std::cout);
        } else if (*field) {
            cmd_field(opts, std::cout);
        } else {
            cmd_scenario_paper(opts, std::cout);
        }
    } catch (const CliError& e) {
        std::cerr << format_error(e) << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error E99 internal: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
