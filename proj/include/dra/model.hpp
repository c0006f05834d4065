#pragma once

// Scenario-level domain types. Units are fixed across the library:
// energies in Wh, active power in W, reactive power in VAr, durations in h.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace dra {

using Vector = std::vector<double>;
using Matrix = std::vector<Vector>;  // row-major, one row per PEV

/// One vehicle's charger limits, SoC targets and preferred profile.
struct PevSpec {
    double soc_init_wh = 0.0;
    double soc_target_wh = 0.0;
    double soc_upper_wh = 0.0;
    double soc_lower_wh = 0.0;
    double charger_power_w = 0.0;
    Vector slot_widths_h;        // K entries, each > 0
    double commitment = 0.0;     // in [min_commitment, 1)
    Vector preferred_rates_wh;   // K entries

    std::size_t slots() const noexcept { return slot_widths_h.size(); }
    double demand_wh() const noexcept { return soc_target_wh - soc_init_wh; }

    bool operator==(const PevSpec&) const = default;
};

/// Transformer load per slot with no PEVs connected.
struct GridProfile {
    Vector active_base_w;
    Vector reactive_base_var;

    std::size_t slots() const noexcept { return active_base_w.size(); }

    bool operator==(const GridProfile&) const = default;
};

enum class Topology { Ring, Complete };

struct SimParams {
    double eta = 0.8;
    double min_commitment = 0.0;
    // Unset values are resolved at the start of each phase from the initial state.
    std::optional<double> epsilon;
    std::optional<double> step_size;
    std::optional<double> tolerance;
    std::size_t max_steps = 5'000'000;
    std::size_t record_stride = 100;
    Topology topology = Topology::Ring;

    bool operator==(const SimParams&) const = default;
};

/// Strategy state of the whole fleet: x and y are N x K, slack has N entries.
struct FleetState {
    Matrix x;      // Wh
    Matrix y;      // VAr
    Vector slack;  // VAr

    std::size_t pevs() const noexcept { return x.size(); }

    bool operator==(const FleetState&) const = default;
};

struct Scenario {
    std::string name;
    GridProfile grid;
    std::vector<PevSpec> fleet;
    SimParams params;
    double mean_commitment = 0.0;

    std::size_t slots() const noexcept { return grid.slots(); }

    bool operator==(const Scenario&) const = default;
};

/// Checks every field bound and feasibility condition and fills in
/// mean_commitment. Throws ShapeError, RangeError or InfeasibleDemand.
Scenario validate_scenario(Scenario raw);

/// Uniform split of each PEV's demand over its slots, with y and slack at zero.
/// Slots whose uniform share falls outside the active bounds are moved to their
/// bound midpoint and the residual is spread over the remaining slots.
FleetState init_fleet_state(const Scenario& s);

std::string to_string(Topology t);
Topology topology_from_string(const std::string& name);

}  // namespace dra
