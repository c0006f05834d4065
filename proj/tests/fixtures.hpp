#pragma once

// Shared scenario builders for the test suites.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>

#include "dra/io.hpp"
#include "dra/model.hpp"

namespace fixtures {

// One vehicle with the case-study numbers: 15.5 -> 16 kWh, box 13.5..18.5 kWh,
// 3 kW charger, 1 h slots, preferred profile spread evenly.
inline dra::PevSpec case_study_pev(std::size_t K = 10, double commitment = 0.5) {
    dra::PevSpec p;
    p.soc_init_wh = 15500.0;
    p.soc_target_wh = 16000.0;
    p.soc_upper_wh = 18500.0;
    p.soc_lower_wh = 13500.0;
    p.charger_power_w = 3000.0;
    p.slot_widths_h.assign(K, 1.0);
    p.commitment = commitment;
    p.preferred_rates_wh.assign(K, 500.0 / static_cast<double>(K));
    return p;
}

inline dra::GridProfile flat_grid(std::size_t K, double level_w = 10000.0, double reactive = 0.0) {
    dra::GridProfile g;
    g.active_base_w.assign(K, level_w);
    g.reactive_base_var.assign(K, reactive);
    return g;
}

inline dra::GridProfile ramp_grid(std::size_t K, double level_w, double slope_w) {
    dra::GridProfile g = flat_grid(K, level_w);
    for (std::size_t k = 0; k < K; ++k) g.active_base_w[k] += slope_w * static_cast<double>(k);
    return g;
}

inline dra::GridProfile case_study_grid() { return dra::step_baseline(dra::StepBaseline{}); }

inline dra::Scenario scenario(dra::GridProfile grid, std::vector<dra::PevSpec> fleet, double eta = 0.8) {
    dra::Scenario s;
    s.name = "test";
    s.grid = std::move(grid);
    s.fleet = std::move(fleet);
    s.params.eta = eta;
    return dra::validate_scenario(std::move(s));
}

inline dra::Scenario case_study(std::size_t n_pevs, double mu = 0.5, double eta = 0.8) {
    return scenario(case_study_grid(), std::vector<dra::PevSpec>(n_pevs, case_study_pev(10, mu)), eta);
}

inline double max_abs_diff(const dra::Vector& a, const dra::Vector& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

inline double max_abs(const dra::Vector& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

/// Infinity-norm distance of `a` from `b`, relative to |b|.
inline double rel_diff(const dra::Vector& a, const dra::Vector& b) {
    return max_abs_diff(a, b) / std::max(max_abs(b), 1e-300);
}

/// A random feasible PEV on K slots; demand kept well inside charger capacity.
inline dra::PevSpec random_pev(std::mt19937& rng, std::size_t K) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    dra::PevSpec p;
    p.soc_lower_wh = 10000.0 + 5000.0 * u(rng);
    p.soc_upper_wh = p.soc_lower_wh + 2000.0 + 8000.0 * u(rng);
    const double box = p.soc_upper_wh - p.soc_lower_wh;
    p.soc_init_wh = p.soc_lower_wh + box * (0.2 + 0.6 * u(rng));
    p.soc_target_wh = p.soc_lower_wh + box * (0.2 + 0.6 * u(rng));
    p.charger_power_w = 2000.0 + 6000.0 * u(rng);
    for (std::size_t k = 0; k < K; ++k) p.slot_widths_h.push_back(0.5 + u(rng));
    double cap = 0.0;
    for (double t : p.slot_widths_h) cap += t * p.charger_power_w;
    // keep |demand| below half the charger capacity
    const double demand = std::clamp(p.soc_target_wh - p.soc_init_wh, -0.5 * cap, 0.5 * cap);
    p.soc_target_wh = p.soc_init_wh + demand;
    p.commitment = 0.9 * u(rng);
    for (std::size_t k = 0; k < K; ++k) p.preferred_rates_wh.push_back(demand / static_cast<double>(K));
    return p;
}

}  // namespace fixtures
