// dra-grid: run the PEV consensus allocation on a scenario file.
//
//   dra-grid run <scenario.json> -o <dir> [--graph ring|complete]
//   dra-grid sweep <scenario.json> --mu 0 0.5 --eta 0 0.5 1 -o <dir>
//   dra-grid report <dir>

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dra/errors.hpp"
#include "dra/io.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Distributed resource allocation of PEV charging via output consensus"};
    app.require_subcommand(1);

    std::string scenario;
    std::string out_dir;
    std::string graph;
    std::vector<double> mu_values{0.0, 0.25, 0.5, 0.75};
    std::vector<double> eta_values{0.0, 0.2, 0.5, 0.8, 1.0};
    std::string report_dir;

    auto* run = app.add_subcommand("run", "Run both phases and write CSV/JSON results");
    run->add_option("scenario", scenario, "Scenario JSON file")->required();
    run->add_option("-o,--output", out_dir, "Output directory")->required();
    run->add_option("--graph", graph, "Strategy graph per PEV")->check(CLI::IsMember({"ring", "complete"}));

    auto* sweep = app.add_subcommand("sweep", "Run a commitment / smoothing-factor grid");
    sweep->add_option("scenario", scenario, "Base scenario JSON file")->required();
    sweep->add_option("--mu", mu_values, "Commitment values")->expected(1, -1);
    sweep->add_option("--eta", eta_values, "Smoothing factor values")->expected(1, -1);
    sweep->add_option("-o,--output", out_dir, "Output directory")->required();
    sweep->add_option("--graph", graph, "Strategy graph per PEV")->check(CLI::IsMember({"ring", "complete"}));

    auto* report = app.add_subcommand("report", "Pretty-print report.json from a run directory");
    report->add_option("dir", report_dir, "Run output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    std::optional<dra::Topology> topology;
    if (!graph.empty()) topology = dra::topology_from_string(graph);

    if (*run) return dra::run_command(scenario, out_dir, std::cout, std::cerr, topology);
    if (*sweep) {
        return dra::sweep_command(scenario, mu_values, eta_values, out_dir, std::cout, std::cerr, topology);
    }
    return dra::report_command(report_dir, std::cout, std::cerr);
}
