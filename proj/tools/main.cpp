// Command-line front end: reproducible perforated-domain experiments driven
// by a single scenario file.

#include <CLI11.hpp>

#include "perfhom/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"perfhom: perforated-domain vanishing-limit testbed"};
    app.require_subcommand(1);

    perfhom::RunConfig cfg;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", cfg.scenario_path, "scenario file (JSON)")->required();
        sub->add_option("--out", cfg.out_dir, "output directory");
        sub->add_option("--seed", cfg.seed, "seed override for jittered layouts");
        sub->add_option("--jobs", cfg.jobs, "parallel runs across the eps list");
        sub->add_option("--tol", cfg.tol, "slope tolerance override");
        sub->add_flag("--plot", cfg.plot, "write SVG log-log plots");
    };
    const char* commands[] = {"check-geometry", "mesh", "solve", "cell", "sweep", "sharpness", "report"};
    const char* help[] = {"audit the geometric assumptions",
                          "triangulate each rung and report mesh quality",
                          "solve the boundary value problem on each rung",
                          "solve the periodic cell problems",
                          "run the rate sweep and fit slopes",
                          "run the sharpness construction",
                          "recompute verdicts from a saved sweep.csv"};
    for (int i = 0; i < 7; ++i) add_common(app.add_subcommand(commands[i], help[i]));

    CLI11_PARSE(app, argc, argv);
    cfg.command = app.get_subcommands().front()->get_name();
    return perfhom::run(cfg);
}
