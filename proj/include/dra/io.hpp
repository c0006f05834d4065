#pragma once

// Scenario files, result files and the command implementations behind dra-grid.
//
// Scenario JSON:
//   {
//     "name": "...",                                   optional
//     "grid": {"active_w": [...], "reactive_var": [...]}
//       or
//     "baseline": {"kind": "step", "slots": 10, "level_w": 10000,
//                  "step_w": 3000, "step_first_slot": 5, "step_last_slot": 7,
//                  "reactive_var": 0}
//     "baseline": {"kind": "ramp", "slots": 3, "level_w": 10000, "slope_w": 500}
//     "pevs": [{"soc_init_wh", "soc_target_wh", "soc_upper_wh", "soc_lower_wh",
//               "charger_power_w", "slot_widths_h", "commitment",
//               "preferred_rates_wh", "count"}],
//     "params": {"eta", "min_commitment", "epsilon", "step_size", "tolerance",
//                "max_steps", "record_stride", "graph"}
//   }
// slot_widths_h and preferred_rates_wh accept a scalar (repeated over every
// slot) or a K-element array; "count" repeats a PEV entry. Slots in the
// baseline block are 1-based and inclusive.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dra/metrics.hpp"
#include "dra/model.hpp"

namespace dra {

/// Parses and validates a scenario document. `source` names it in error messages.
Scenario parse_scenario(std::string_view text, const std::string& source = "<scenario>");

/// Reads, parses and validates a scenario file. Throws ParseError on I/O or syntax errors.
Scenario load_scenario(const std::filesystem::path& path);

/// Serialises with explicit grid arrays and one entry per PEV; parse_scenario
/// of the result yields an equal Scenario.
std::string serialize_scenario(const Scenario& s);

struct StepBaseline {
    std::size_t slots = 10;
    double level_w = 10000.0;
    double step_w = 3000.0;
    std::size_t step_first_slot = 5;  // 1-based, inclusive
    std::size_t step_last_slot = 7;
    double reactive_var = 0.0;
};

GridProfile step_baseline(const StepBaseline& b);

/// Fixed 9-significant-digit decimal used by every CSV writer.
std::string format_number(double v);

std::string strategies_csv(const Scenario& s, const RunReport& r);
std::string soc_csv(const RunReport& r);
std::string loads_csv(const RunReport& r);
std::string report_json(const Scenario& s, const RunReport& r);

/// Writes strategies.csv, soc.csv, loads.csv and report.json into `dir`.
void write_run_outputs(const Scenario& s, const RunReport& r, const std::filesystem::path& dir);

struct SweepCell {
    double mu = 0.0;
    double eta = 0.0;
    double smoothness_with = 0.0;
    double variance_with = 0.0;
    bool converged = false;
    std::string error;  // non-empty when the cell failed
    Matrix final_x;
};

struct SweepGrid {
    Vector mu_values;
    Vector eta_values;
    std::vector<std::vector<SweepCell>> results;  // |mu| x |eta|
};

/// Runs `base` once per (mu, eta) with every commitment set to mu and eta
/// overridden. Cells run on up to `threads` workers; a failing cell is recorded.
SweepGrid run_sweep(const Scenario& base, const Vector& mu_values, const Vector& eta_values,
                    unsigned threads);

/// Rows sorted by (mu, eta).
std::string sweep_csv(const SweepGrid& grid);

/// Worker count from DRA_GRID_THREADS, else the hardware concurrency.
unsigned sweep_threads_from_env();

// Command entry points; they return the process exit code and report
// problems on `err`. 0 = converged, 2 = finished without convergence, 1 = error.

int run_command(const std::filesystem::path& scenario, const std::filesystem::path& out_dir,
                std::ostream& out, std::ostream& err,
                std::optional<Topology> topology = std::nullopt);

int sweep_command(const std::filesystem::path& scenario, const Vector& mu_values,
                  const Vector& eta_values, const std::filesystem::path& out_dir, std::ostream& out,
                  std::ostream& err, std::optional<Topology> topology = std::nullopt);

int report_command(const std::filesystem::path& run_dir, std::ostream& out, std::ostream& err);

}  // namespace dra
