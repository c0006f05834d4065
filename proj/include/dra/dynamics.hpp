#pragma once

// Laplacian consensus flow over each PEV's strategy graph.
//
// Every PEV runs its own flow x_i' = -L c_i(x), where c_i stacks the consensus
// outputs of its strategies (epsilon*barrier - payoff). Rows of -L sum to zero,
// so sum_k x_ik is conserved; the barrier together with step-halving keeps every
// strategy strictly inside its feasible interval. Payoffs couple the PEVs
// through the aggregate load, refreshed once per step from the whole fleet.
//
// The active phase moves x with y and slack fixed. The reactive phase then
// freezes x and runs the same flow over K+1 nodes per PEV (K reactive
// strategies plus the slack), conserving sum_k y_ik + s_i = 0.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "dra/graph.hpp"
#include "dra/model.hpp"

namespace dra {

/// Telemetry emitted every record_stride steps and at the end of a phase.
struct TraceSample {
    std::size_t step = 0;
    Vector spread;               // per PEV, max - min consensus output
    Vector active_drift;         // per PEV, |sum_k x_ik - demand_i|
    Vector reactive_drift;       // per PEV, |sum_k y_ik + s_i|
    std::size_t bound_violations = 0;
};

using PhaseObserver = std::function<void(const TraceSample&)>;

/// Values a phase actually ran with once the scenario defaults were resolved.
struct PhaseSettings {
    double epsilon = 0.0;
    double step_size = 0.0;
    double tolerance = 0.0;
};

struct PhaseResult {
    FleetState final_state;
    std::size_t steps_taken = 0;
    Vector final_spread;
    Vector conservation_drift;
    bool converged = false;
    PhaseSettings settings;
    std::vector<TraceSample> trace;
};

struct ConservationReport {
    Vector active_drift;
    Vector reactive_drift;
};

/// -L * outputs, i.e. u_k = sum_j a_kj (c_j - c_k).
Vector consensus_velocity(std::span<const double> outputs, const StrategyGraph& g);

/// N x K consensus outputs of the active strategies at `state`.
Matrix active_outputs(const Scenario& s, const FleetState& state, double epsilon);

/// N x (K+1) consensus outputs of the reactive strategies, slack last.
Matrix reactive_outputs(const Scenario& s, const FleetState& state, double epsilon);

/// Default barrier weight: 1e-2 of the largest |payoff| at `state`, floored at
/// 1e-6 of the largest charger rating when the payoffs vanish there.
double default_active_epsilon(const Scenario& s, const FleetState& state);
double default_reactive_epsilon(const Scenario& s, const FleetState& state);

PhaseSettings resolve_active_settings(const Scenario& s, const FleetState& state);
PhaseSettings resolve_reactive_settings(const Scenario& s, const FleetState& state);

/// One forward-Euler step of the active flow with per-PEV step halving.
/// Throws StepCollapse when 20 halvings cannot keep a PEV feasible.
FleetState step_active(const Scenario& s, const FleetState& state, double h, double epsilon);
/// As above with epsilon resolved from `state` when the scenario leaves it unset.
FleetState step_active(const Scenario& s, const FleetState& state, double h);

FleetState step_reactive(const Scenario& s, const FleetState& state, double h, double epsilon);

PhaseResult run_active_phase(const Scenario& s, const FleetState& state,
                             const PhaseObserver& observer = {});

/// Requires x to be strictly inside the charger rating in every slot.
PhaseResult run_reactive_phase(const Scenario& s, const FleetState& state,
                               const PhaseObserver& observer = {});

ConservationReport conservation_check(const FleetState& state, const Scenario& s);

/// Number of strategies (x, y and slack) not strictly inside their interval.
std::size_t count_bound_violations(const Scenario& s, const FleetState& state);

}  // namespace dra
