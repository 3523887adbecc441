#include "formation/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"formation-forge: equilibrium census and bifurcation analysis for distance formations"};
    app.require_subcommand(1);

    std::string scenario;
    formation::cli::RunOptions opts;
    std::string out;
    std::uint64_t seed = 0;
    double tol = 0.0;
    CLI::App* run = app.add_subcommand("run", "Run a scenario file and write its artifacts");
    run->add_option("scenario", scenario, "Scenario JSON file")->required();
    CLI::Option* out_opt = run->add_option("--out", out, "Output directory (default: the scenario's output)");
    CLI::Option* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");
    CLI::Option* tol_opt = run->add_option("--tol", tol, "Residual tolerance for accepted equilibria")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    if (*out_opt) opts.out_dir = out;
    if (*seed_opt) opts.seed = seed;
    if (*tol_opt) opts.tol = tol;

    const formation::cli::RunResult r = formation::cli::run_scenario(scenario, opts);
    if (r.exit_code != 0) {
        std::cerr << r.error_record << "\n";
        return r.exit_code;
    }
    std::cout << r.summary;
    std::cout << "artifacts written to " << r.out_dir << "\n";
    return 0;
}
