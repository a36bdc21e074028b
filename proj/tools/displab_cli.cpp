#include <CLI11.hpp>

#include <iostream>

#include "displab/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"displab: dispersive-estimate measurement harness"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a scenario file and write CSV reports");
    std::string scenario_path;
    std::string out_dir = "out";
    std::string checks_override;
    int grid_n = 0;
    double t_max = 0.0, dt = 0.0;
    std::int64_t seed = -1;
    run->add_option("scenario", scenario_path, "scenario file (key = value lines)")
        ->required();
    run->add_option("--grid-n", grid_n, "override grid.n");
    run->add_option("--t-max", t_max, "override time.max");
    run->add_option("--dt", dt, "override time.dt");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--checks", checks_override, "comma-separated list of checks to run");
    run->add_option("--seed", seed, "override params.seed");

    CLI11_PARSE(app, argc, argv);

    try {
        displab::Scenario sc = displab::Scenario::parse_file(scenario_path);
        if (grid_n > 0) sc.grid_n = grid_n;
        if (t_max > 0.0) sc.time_max = t_max;
        if (dt > 0.0) sc.time_dt = dt;
        if (seed >= 0) sc.seed = static_cast<std::uint64_t>(seed);
        if (!checks_override.empty()) {
            sc.checks.clear();
            std::istringstream is(checks_override);
            std::string item;
            while (std::getline(is, item, ','))
                if (!item.empty()) sc.checks.push_back(item);
        }

        displab::Report rep = displab::run_scenario(sc);
        displab::write_report(rep, out_dir);
        for (const auto& row : rep.rows)
            std::cout << row.check << " = " << row.value << " (err " << row.error_estimate
                      << ") [" << row.status << "]\n";
        std::cout << "report written to " << out_dir << "/summary.csv\n";
        return rep.all_ok() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
