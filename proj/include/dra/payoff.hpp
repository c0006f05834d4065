#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dra/constraints.hpp"
#include "dra/model.hpp"

namespace dra {

/// Total transformer load per slot with the fleet connected.
struct AggregateLoads {
    Vector active_w;
    Vector reactive_var;
};

/// A_k = a_k + sum_i x_ik / t_ik and R_k = r_k + sum_i y_ik.
AggregateLoads aggregate_loads(const GridProfile& grid, std::span<const PevSpec> fleet,
                               const FleetState& state);

struct LoadNeighbourhood {
    double prev = 0.0;
    double cur = 0.0;
    double next = 0.0;
};

/// (L_{k-1}, L_k, L_{k+1}) with the first and last slot replicated past the window ends.
LoadNeighbourhood extended_load(std::span<const double> loads, std::size_t k);

/// Payoff of PEV strategy x_ik at slot k. `loads` must already include x_ik.
double active_payoff(const PevSpec& pev, std::size_t k, double x_ik, const AggregateLoads& loads,
                     double mean_mu, double eta);

double reactive_payoff(std::size_t k, double y_ik, const AggregateLoads& loads, double mean_mu,
                       double eta);

/// Payoff plus epsilon times the barrier of the strategy's feasible interval.
double modified_active_output(const PevSpec& pev, std::size_t k, double x_ik,
                              const BoundInterval& bounds, const AggregateLoads& loads,
                              double mean_mu, double eta, double epsilon);

double modified_reactive_output(std::size_t k, double y_ik, const BoundInterval& bounds,
                                const AggregateLoads& loads, double mean_mu, double eta,
                                double epsilon);

/// The slack carries no payoff of its own, only its barrier.
double modified_slack_output(double slack, const BoundInterval& bounds, double epsilon);

// Outputs driven to consensus by the dynamics: epsilon*barrier - payoff.
// Equal values on every node means equal barrier-penalised payoffs, and the
// output grows towards the upper bound so the Laplacian flow pushes a strategy
// back from either end of its interval.

double active_consensus_output(const PevSpec& pev, std::size_t k, double x_ik,
                               const BoundInterval& bounds, const AggregateLoads& loads,
                               double mean_mu, double eta, double epsilon);

double reactive_consensus_output(std::size_t k, double y_ik, const BoundInterval& bounds,
                                 const AggregateLoads& loads, double mean_mu, double eta,
                                 double epsilon);

}  // namespace dra
