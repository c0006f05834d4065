#include "dra/payoff.hpp"

#include <cmath>
#include <string>

#include "dra/errors.hpp"

namespace dra {

namespace {

// mu*eta*L_k + mu*(1-eta)*(2L_k - L_{k-1} - L_{k+1})
double grid_term(std::span<const double> loads, std::size_t k, double mean_mu, double eta) {
    const auto n = extended_load(loads, k);
    return mean_mu * eta * n.cur + mean_mu * (1.0 - eta) * (2.0 * n.cur - n.prev - n.next);
}

}  // namespace

AggregateLoads aggregate_loads(const GridProfile& grid, std::span<const PevSpec> fleet,
                               const FleetState& state) {
    const std::size_t K = grid.slots();
    if (state.x.size() != fleet.size() || state.y.size() != fleet.size() ||
        grid.reactive_base_var.size() != K) {
        throw ShapeError("aggregate_loads: fleet, state and grid disagree in shape");
    }
    AggregateLoads out{grid.active_base_w, grid.reactive_base_var};
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        const auto& pev = fleet[i];
        if (pev.slots() != K || state.x[i].size() != K || state.y[i].size() != K) {
            throw ShapeError("aggregate_loads: PEV " + std::to_string(i) + " has the wrong slot count");
        }
        for (std::size_t k = 0; k < K; ++k) {
            out.active_w[k] += state.x[i][k] / pev.slot_widths_h[k];
            out.reactive_var[k] += state.y[i][k];
        }
    }
    return out;
}

LoadNeighbourhood extended_load(std::span<const double> loads, std::size_t k) {
    const std::size_t K = loads.size();
    if (k >= K) throw ShapeError("extended_load: slot " + std::to_string(k) + " out of range");
    return {loads[k == 0 ? 0 : k - 1], loads[k], loads[k + 1 == K ? k : k + 1]};
}

double active_payoff(const PevSpec& pev, std::size_t k, double x_ik, const AggregateLoads& loads,
                     double mean_mu, double eta) {
    const double own = (1.0 - mean_mu) * (x_ik - pev.preferred_rates_wh.at(k)) / pev.slot_widths_h.at(k);
    return -own - grid_term(loads.active_w, k, mean_mu, eta);
}

double reactive_payoff(std::size_t k, double y_ik, const AggregateLoads& loads, double mean_mu,
                       double eta) {
    return -(1.0 - mean_mu) * y_ik - grid_term(loads.reactive_var, k, mean_mu, eta);
}

double modified_active_output(const PevSpec& pev, std::size_t k, double x_ik,
                              const BoundInterval& bounds, const AggregateLoads& loads,
                              double mean_mu, double eta, double epsilon) {
    return active_payoff(pev, k, x_ik, loads, mean_mu, eta) + epsilon * barrier(x_ik, bounds);
}

double modified_reactive_output(std::size_t k, double y_ik, const BoundInterval& bounds,
                                const AggregateLoads& loads, double mean_mu, double eta,
                                double epsilon) {
    return reactive_payoff(k, y_ik, loads, mean_mu, eta) + epsilon * barrier(y_ik, bounds);
}

double modified_slack_output(double slack, const BoundInterval& bounds, double epsilon) {
    return epsilon * barrier(slack, bounds);
}

double active_consensus_output(const PevSpec& pev, std::size_t k, double x_ik,
                               const BoundInterval& bounds, const AggregateLoads& loads,
                               double mean_mu, double eta, double epsilon) {
    return epsilon * barrier(x_ik, bounds) - active_payoff(pev, k, x_ik, loads, mean_mu, eta);
}

double reactive_consensus_output(std::size_t k, double y_ik, const BoundInterval& bounds,
                                 const AggregateLoads& loads, double mean_mu, double eta,
                                 double epsilon) {
    return epsilon * barrier(y_ik, bounds) - reactive_payoff(k, y_ik, loads, mean_mu, eta);
}

}  // namespace dra
