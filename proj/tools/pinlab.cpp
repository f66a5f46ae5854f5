#include <CLI11.hpp>

#include <iostream>

#include "pinlab/error.hpp"
#include "pinlab/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"pinlab: interface pinning experiments in random media"};
    app.set_version_flag("--version", pinlab::tool_version());
    app.require_subcommand(1);

    std::string config, out, assembly, field;
    auto* run = app.add_subcommand("run", "run one experiment from a JSON config");
    run->add_option("config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "output directory")->required();

    auto* sweep = app.add_subcommand("sweep", "run a config over its F or p grid");
    sweep->add_option("config", config, "experiment config with a \"sweep\" entry")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", out, "output directory")->required();

    pinlab::VerifyOptions vopt;
    auto* verify = app.add_subcommand("verify", "re-check a stored supersolution against a stored field");
    verify->add_option("assembly", assembly, "assembly.json written by a continuum run")->required()->check(CLI::ExistingFile);
    verify->add_option("field", field, "field.json written by the same run")->required()->check(CLI::ExistingFile);
    verify->add_option("--tolerance", vopt.tolerance, "residual tolerance")->capture_default_str();
    verify->add_option("--F", vopt.F_override, "check against this driving force instead of the stored one");
    verify->add_option("--fine", vopt.fine_per_r0, "fine grid points per r0")->capture_default_str();
    verify->add_option("--coarse", vopt.coarse_points, "uniform points per cell")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return pinlab::command_run(config, out, std::cout);
        if (*sweep) return pinlab::command_sweep(config, out, std::cout);
        if (*verify) return pinlab::command_verify(assembly, field, vopt, std::cout);
    } catch (const pinlab::ConfigError& e) {
        std::cerr << "pinlab: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "pinlab: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
