#pragma once

#include <span>

#include "dra/dynamics.hpp"
#include "dra/model.hpp"
#include "dra/payoff.hpp"

namespace dra {

struct RunReport {
    Matrix soc_trajectories;  // N x (K+1), Wh
    AggregateLoads final_loads;
    AggregateLoads baseline_loads;
    double smoothness_with = 0.0;
    double smoothness_without = 0.0;
    double variance_with = 0.0;
    double variance_without = 0.0;
    PhaseResult active;
    PhaseResult reactive;

    bool converged() const noexcept { return active.converged && reactive.converged; }
    /// Fractional reduction of the smoothness metric, 1 - with/without (0 for a flat baseline).
    double smoothness_improvement() const noexcept;
};

/// Running SoC: out[0] = soc_init, out[k] = out[k-1] + x_k.
/// Throws BoundViolation if a prefix leaves [soc_lower, soc_upper].
Vector soc_trajectory(const PevSpec& pev, std::span<const double> x_row);

/// Sum of squared interior second differences. Throws SizeError for fewer than 3 slots.
double smoothness(std::span<const double> loads);

/// Population variance.
double variance(std::span<const double> loads);

/// max - min; 0 for an empty vector.
double consensus_spread(std::span<const double> outputs);

RunReport build_report(const Scenario& s, const PhaseResult& active, const PhaseResult& reactive);

/// Initial state, active phase, then reactive phase on the converged x.
RunReport run_scenario(const Scenario& s, const PhaseObserver& observer = {});

}  // namespace dra
