#pragma once

// Reference solutions for small single-PEV instances, computed without the
// Laplacian integrator: the equilibrium is characterised directly as equal
// consensus outputs on every slot plus the energy constraint.

#include <optional>
#include <span>

#include "dra/model.hpp"

namespace dra {

struct EquilibriumSolution {
    Vector x_star;
    double consensus_value = 0.0;
    double residual = 0.0;  // max_k |output_k(x_star) - consensus_value|
};

/// Solves {output_k(x) = lambda for all k, sum_k x_k = demand} for one PEV.
///
/// Outer bisection on lambda; for a given lambda the slots are solved by
/// repeated forward sweeps, each slot by bisection over its open interval
/// (the output runs from -inf to +inf across it). `others_fixed_w` is added to
/// the baseline load as a constant. Unset epsilon resolves to the dynamics'
/// default at the uniform initial allocation; unset mean_mu uses the PEV's
/// own commitment.
///
/// Throws NoRoot if lambda cannot be bracketed, MultiRoot if some slot's
/// output admits more than one root at the solution.
EquilibriumSolution solve_single_pev(const PevSpec& pev, const GridProfile& grid,
                                     const SimParams& params, std::span<const double> others_fixed_w,
                                     std::optional<double> mean_mu = std::nullopt);

/// Fixed-step forward Euler of the active flow with no step halving.
/// Stops on the same tolerance rule as run_active_phase or after max_steps.
/// Throws StepCollapse if a step leaves the feasible box.
FleetState reference_integrate(const Scenario& s, const FleetState& state, double h_fine);

}  // namespace dra
