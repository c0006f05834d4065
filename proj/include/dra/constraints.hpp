#pragma once

#include <cstddef>
#include <span>

#include "dra/model.hpp"

namespace dra {

/// Open feasible interval (lower, upper) of one strategy variable.
struct BoundInterval {
    double lower = 0.0;
    double upper = 0.0;

    double width() const noexcept { return upper - lower; }
    double midpoint() const noexcept { return lower + 0.5 * (upper - lower); }
    bool contains(double v) const noexcept { return v > lower && v < upper; }
    /// Strict containment with a margin of `fraction` of the width at both ends.
    bool contains_with_margin(double v, double fraction) const noexcept {
        const double m = fraction * width();
        return v > lower + m && v < upper - m;
    }
};

/// Per-slot reactive limits q_k and their total Q for one PEV.
struct ReactiveEnvelope {
    Vector per_slot_limit;
    double total_capacity = 0.0;
};

/// Interval for slot `k` (0-based) given the SoC accumulated by slots before it
/// and the charger limit t_k * p. Throws CollapsedInterval when empty.
BoundInterval active_bounds(const PevSpec& pev, std::size_t k, std::span<const double> x_row);

/// q_k = sqrt(p^2 - (x_k/t_k)^2). Throws DomainError if a slot exceeds the charger rating.
ReactiveEnvelope reactive_envelope(const PevSpec& pev, std::span<const double> x_row);

/// ln((v - lower) / (upper - v)). Throws DomainError outside the open interval.
double barrier(double v, const BoundInterval& b);

/// (-Q, Q); throws CollapsedInterval for Q <= 0.
BoundInterval slack_bounds(const ReactiveEnvelope& env);

/// (-q_k, q_k); throws CollapsedInterval for q_k <= 0.
BoundInterval reactive_bounds(const ReactiveEnvelope& env, std::size_t k);

}  // namespace dra
