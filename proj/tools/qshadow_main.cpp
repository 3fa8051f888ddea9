#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "qshadow/commands.hpp"
#include "qshadow/errors.hpp"
#include "qshadow/report.hpp"

int main(int argc, char** argv) {
    CLI::App app{"qshadow: certified shadowing of quasi-hyperbolic pseudo-orbits"};
    app.set_version_flag("--version", qshadow::tool_version);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    qshadow::CommandOptions opts;
    std::uint64_t seed = 0;

    for (const char* name : {"certify", "refine", "shadow", "periodic", "sweep"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_path, "write the report here instead of stdout");
        sub->add_option("--format", opts.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--jobs", opts.jobs, "worker threads for sweeps (0: all cores)");
        sub->add_option("--seed", seed, "overrides pseudo_orbit.rng_seed");
        sub->add_flag("--timing", opts.timing, "include wall-clock times");
    }
    app.get_subcommand("sweep")->get_option("--format")->default_str("csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return qshadow::exit_config;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    auto* sub = app.get_subcommand(command);
    if (sub->count("--seed") > 0) {
        opts.seed = seed;
    }
    if (command == "sweep" && sub->count("--format") == 0) {
        opts.format = "csv";
    }

    qshadow::RunConfig cfg;
    try {
        cfg = qshadow::load_config(config_path);
    } catch (const qshadow::ConfigError& e) {
        std::cerr << "qshadow: " << e.what() << '\n';
        return qshadow::exit_config;
    }

    const std::optional<std::string> config_out = cfg.output_path;
    const qshadow::CommandResult res = qshadow::run_command(command, std::move(cfg), opts);
    if (!res.message.empty()) {
        std::cerr << "qshadow: " << res.message << '\n';
    }
    if (!res.output.empty()) {
        std::string path = out_path;
        if (path.empty() && config_out) {
            path = *config_out;
        }
        if (path.empty()) {
            std::cout << res.output;
        } else {
            std::ofstream os(path, std::ios::binary);
            if (!os) {
                std::cerr << "qshadow: cannot write '" << path << "'\n";
                return qshadow::exit_config;
            }
            os << res.output;
        }
    }
    return res.exit_code;
}
