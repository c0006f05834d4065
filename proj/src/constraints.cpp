#include "dra/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dra/errors.hpp"

namespace dra {

BoundInterval active_bounds(const PevSpec& pev, std::size_t k, std::span<const double> x_row) {
    if (k >= pev.slots() || x_row.size() != pev.slots()) {
        throw ShapeError("active_bounds: slot " + std::to_string(k) + " out of range");
    }
    // SoC at the start of slot k: everything up to and including k, minus x_k.
    double soc_before = pev.soc_init_wh;
    for (std::size_t w = 0; w < k; ++w) soc_before += x_row[w];

    const double charger = pev.slot_widths_h[k] * pev.charger_power_w;
    BoundInterval b;
    b.lower = std::max(pev.soc_lower_wh - soc_before, -charger);
    b.upper = std::min(pev.soc_upper_wh - soc_before, charger);
    if (!(b.lower < b.upper)) {
        throw CollapsedInterval("active_bounds: empty interval at slot " + std::to_string(k) +
                                " (accumulated SoC " + std::to_string(soc_before) + " Wh)");
    }
    return b;
}

ReactiveEnvelope reactive_envelope(const PevSpec& pev, std::span<const double> x_row) {
    if (x_row.size() != pev.slots()) throw ShapeError("reactive_envelope: row length mismatch");
    ReactiveEnvelope env;
    env.per_slot_limit.resize(x_row.size());
    const double p = pev.charger_power_w;
    for (std::size_t k = 0; k < x_row.size(); ++k) {
        const double rate = x_row[k] / pev.slot_widths_h[k];
        if (std::abs(rate) > p) {
            throw DomainError("reactive_envelope: slot " + std::to_string(k) +
                              " exceeds the charger rating");
        }
        env.per_slot_limit[k] = std::sqrt((p - rate) * (p + rate));
        env.total_capacity += env.per_slot_limit[k];
    }
    return env;
}

double barrier(double v, const BoundInterval& b) {
    if (!b.contains(v)) {
        throw DomainError("barrier: value " + std::to_string(v) + " outside (" +
                          std::to_string(b.lower) + ", " + std::to_string(b.upper) + ")");
    }
    const double below = v - b.lower;
    const double above = b.upper - v;
    if (below == above || v == b.midpoint()) return 0.0;
    return std::log(below / above);
}

BoundInterval slack_bounds(const ReactiveEnvelope& env) {
    if (!(env.total_capacity > 0.0)) {
        throw CollapsedInterval("slack_bounds: zero reactive capacity");
    }
    return {-env.total_capacity, env.total_capacity};
}

BoundInterval reactive_bounds(const ReactiveEnvelope& env, std::size_t k) {
    const double q = env.per_slot_limit.at(k);
    if (!(q > 0.0)) {
        throw CollapsedInterval("reactive_bounds: zero reactive limit at slot " + std::to_string(k));
    }
    return {-q, q};
}

}  // namespace dra
