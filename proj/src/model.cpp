#include "dra/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dra/constraints.hpp"
#include "dra/errors.hpp"

namespace dra {

namespace {

// Slots are kept at least this fraction of their interval width away from the bounds.
constexpr double kInteriorMargin = 1e-9;

void require_finite(double v, const std::string& field) {
    if (!std::isfinite(v)) throw RangeError(field + " must be finite");
}

void validate_params(const SimParams& p) {
    require_finite(p.eta, "params.eta");
    if (p.eta < 0.0 || p.eta > 1.0) throw RangeError("params.eta must lie in [0, 1]");
    require_finite(p.min_commitment, "params.min_commitment");
    if (p.min_commitment < 0.0 || p.min_commitment >= 1.0) {
        throw RangeError("params.min_commitment must lie in [0, 1)");
    }
    if (p.epsilon && !(*p.epsilon > 0.0 && std::isfinite(*p.epsilon))) {
        throw RangeError("params.epsilon must be positive");
    }
    if (p.step_size && !(*p.step_size > 0.0 && std::isfinite(*p.step_size))) {
        throw RangeError("params.step_size must be positive");
    }
    if (p.tolerance && !(*p.tolerance > 0.0 && std::isfinite(*p.tolerance))) {
        throw RangeError("params.tolerance must be positive");
    }
    if (p.max_steps == 0) throw RangeError("params.max_steps must be at least 1");
    if (p.record_stride == 0) throw RangeError("params.record_stride must be at least 1");
}

void validate_pev(const PevSpec& pev, std::size_t i, double min_commitment) {
    const std::string tag = "pevs[" + std::to_string(i) + "].";
    require_finite(pev.soc_init_wh, tag + "soc_init_wh");
    require_finite(pev.soc_target_wh, tag + "soc_target_wh");
    require_finite(pev.soc_upper_wh, tag + "soc_upper_wh");
    require_finite(pev.soc_lower_wh, tag + "soc_lower_wh");
    require_finite(pev.charger_power_w, tag + "charger_power_w");
    require_finite(pev.commitment, tag + "commitment");

    if (pev.slot_widths_h.empty()) throw ShapeError(tag + "slot_widths_h is empty");
    if (pev.preferred_rates_wh.size() != pev.slot_widths_h.size()) {
        throw ShapeError(tag + "preferred_rates_wh has " +
                         std::to_string(pev.preferred_rates_wh.size()) + " entries, expected " +
                         std::to_string(pev.slot_widths_h.size()));
    }
    if (!(pev.soc_lower_wh < pev.soc_init_wh && pev.soc_init_wh <= pev.soc_upper_wh)) {
        throw RangeError(tag + "requires soc_lower < soc_init <= soc_upper");
    }
    if (!(pev.soc_lower_wh <= pev.soc_target_wh && pev.soc_target_wh <= pev.soc_upper_wh)) {
        throw RangeError(tag + "requires soc_lower <= soc_target <= soc_upper");
    }
    if (!(pev.charger_power_w > 0.0)) throw RangeError(tag + "charger_power_w must be positive");
    for (double t : pev.slot_widths_h) {
        if (!(t > 0.0 && std::isfinite(t))) throw RangeError(tag + "slot widths must be positive");
    }
    for (double r : pev.preferred_rates_wh) require_finite(r, tag + "preferred_rates_wh");
    if (pev.commitment < min_commitment || pev.commitment >= 1.0) {
        throw RangeError(tag + "commitment must lie in [min_commitment, 1)");
    }

    const double capacity =
        pev.charger_power_w * std::accumulate(pev.slot_widths_h.begin(), pev.slot_widths_h.end(), 0.0);
    if (std::abs(pev.demand_wh()) > capacity) {
        throw InfeasibleDemand(tag + "demand of " + std::to_string(pev.demand_wh()) +
                               " Wh exceeds charger capacity " + std::to_string(capacity) + " Wh");
    }
}

// Spreads `residual` equally over the unsaturated slots, folding the rounding
// error into the last of them so the row sums to the demand.
void redistribute(Vector& row, const std::vector<bool>& saturated, double demand) {
    std::size_t free_count = 0;
    std::size_t last_free = row.size();
    for (std::size_t k = 0; k < row.size(); ++k) {
        if (!saturated[k]) {
            ++free_count;
            last_free = k;
        }
    }
    if (free_count == 0) return;
    const double residual = demand - std::accumulate(row.begin(), row.end(), 0.0);
    const double share = residual / static_cast<double>(free_count);
    for (std::size_t k = 0; k < row.size(); ++k) {
        if (!saturated[k]) row[k] += share;
    }
    double others = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
        if (k != last_free) others += row[k];
    }
    row[last_free] = demand - others;
}

Vector initial_row(const PevSpec& pev, std::size_t i) {
    const std::size_t K = pev.slots();
    const double demand = pev.demand_wh();
    Vector row(K, 0.0);
    std::vector<bool> saturated(K, false);
    redistribute(row, saturated, demand);

    const std::size_t max_rounds = 100 * K;
    for (std::size_t round = 0; round < max_rounds; ++round) {
        bool moved = false;
        for (std::size_t k = 0; k < K; ++k) {
            BoundInterval b;
            try {
                b = active_bounds(pev, k, row);
            } catch (const CollapsedInterval&) {
                throw InfeasibleDemand("pevs[" + std::to_string(i) +
                                       "]: no feasible initial allocation");
            }
            if (b.contains_with_margin(row[k], kInteriorMargin)) continue;
            row[k] = b.midpoint();
            saturated[k] = true;
            redistribute(row, saturated, demand);
            moved = true;
            break;
        }
        if (!moved) {
            const double sum = std::accumulate(row.begin(), row.end(), 0.0);
            if (std::abs(sum - demand) <= 1e-12 * std::max(1.0, std::abs(demand))) return row;
            // every slot saturated and the demand is not met
            break;
        }
    }
    throw InfeasibleDemand("pevs[" + std::to_string(i) + "]: no feasible initial allocation");
}

}  // namespace

Scenario validate_scenario(Scenario raw) {
    validate_params(raw.params);
    for (std::size_t i = 0; i < raw.fleet.size(); ++i) {
        validate_pev(raw.fleet[i], i, raw.params.min_commitment);
    }

    const auto& g = raw.grid;
    if (g.active_base_w.size() < 2) throw ShapeError("grid needs at least 2 slots");
    if (g.reactive_base_var.size() != g.active_base_w.size()) {
        throw ShapeError("grid active and reactive profiles differ in length");
    }
    for (double a : g.active_base_w) require_finite(a, "grid.active_base_w");
    for (double r : g.reactive_base_var) require_finite(r, "grid.reactive_base_var");
    for (std::size_t i = 0; i < raw.fleet.size(); ++i) {
        if (raw.fleet[i].slots() != g.slots()) {
            throw ShapeError("pevs[" + std::to_string(i) + "] has " +
                             std::to_string(raw.fleet[i].slots()) + " slots, grid has " +
                             std::to_string(g.slots()));
        }
    }

    double total = 0.0;
    for (const auto& pev : raw.fleet) total += pev.commitment;
    raw.mean_commitment = raw.fleet.empty() ? 0.0 : total / static_cast<double>(raw.fleet.size());
    return raw;
}

FleetState init_fleet_state(const Scenario& s) {
    FleetState state;
    const std::size_t K = s.slots();
    state.x.reserve(s.fleet.size());
    for (std::size_t i = 0; i < s.fleet.size(); ++i) {
        state.x.push_back(initial_row(s.fleet[i], i));
    }
    state.y.assign(s.fleet.size(), Vector(K, 0.0));
    state.slack.assign(s.fleet.size(), 0.0);
    return state;
}

std::string to_string(Topology t) {
    return t == Topology::Ring ? "ring" : "complete";
}

Topology topology_from_string(const std::string& name) {
    if (name == "ring") return Topology::Ring;
    if (name == "complete") return Topology::Complete;
    throw RangeError("unknown graph topology '" + name + "' (expected ring or complete)");
}

}  // namespace dra
